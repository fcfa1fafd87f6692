import io

import pytest

from ordervc.cli import main
from ordervc.constructions import thm1_shattered_set
from ordervc.enumeration import FamilySpec
from ordervc.order_core import OrderRelation, TotalOrder


@pytest.fixture
def thm1_orders_4():
    _, orders = thm1_shattered_set(4)
    return orders


@pytest.fixture
def partial3():
    return FamilySpec.partial(3)


@pytest.fixture
def total3():
    return FamilySpec.total(3)


@pytest.fixture
def chain3():
    return OrderRelation.from_pairs(3, [(1, 2), (2, 3)])


@pytest.fixture
def identity3():
    return TotalOrder((1, 2, 3))


@pytest.fixture
def run_cli(capsys):
    """Run the command line in-process; returns (exit code, stdout, stderr)."""

    def invoke(*argv):
        code = main(list(argv))
        out, err = capsys.readouterr()
        return code, out, err

    return invoke


@pytest.fixture
def stream():
    return io.StringIO()
