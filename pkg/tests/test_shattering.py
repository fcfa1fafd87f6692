import math
from itertools import combinations, count

import pytest

from ordervc.enumeration import FamilySpec, all_total_orders
from ordervc.errors import CapExceeded, SizeMismatch
from ordervc.order_core import OrderRelation, TotalOrder
from ordervc.shattering import (
    SearchBudget,
    ShatterCertificate,
    TraceTable,
    is_shattered,
    trace,
    vc_dimension,
    verify_certificate,
)


class TestTrace:
    def test_empty_witness_hits_everything(self):
        assert trace(OrderRelation.empty(2), all_total_orders(2)) == 0b11

    def test_single_pair(self):
        w = OrderRelation.from_pairs(3, [(1, 2)])
        # 123, 132, 312 put 1 before 2
        assert trace(w, all_total_orders(3)) == 0b010011

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatch):
            trace(OrderRelation.empty(2), all_total_orders(3))

    def test_table_agrees_with_trace(self, partial3, total3):
        table = TraceTable(partial3.orders(), total3.orders())
        for i, w in enumerate(partial3):
            row = sum(int(v) << j for j, v in enumerate(table.matrix[i]))
            assert row == trace(w, total3.orders())

    def test_table_with_total_witnesses(self, partial3, total3):
        table = TraceTable(total3.orders(), partial3.orders())
        for i, w in enumerate(total3):
            row = sum(int(v) << j for j, v in enumerate(table.matrix[i]))
            assert row == trace(w, partial3.orders())


class TestIsShattered:
    def test_single_order(self):
        cert = is_shattered([TotalOrder((1, 2))], FamilySpec.partial(2))
        assert cert is not None
        assert str(cert.witnesses[0]) == "{2<1}"
        assert str(cert.witnesses[1]) == "∅"

    def test_both_orders_on_two_points(self):
        assert is_shattered(all_total_orders(2), FamilySpec.partial(2)) is None

    def test_empty_ground(self, partial3):
        cert = is_shattered([], partial3)
        assert cert is not None and list(cert.witnesses) == [0]

    def test_ground_cap(self):
        with pytest.raises(CapExceeded):
            is_shattered(all_total_orders(5)[:26], FamilySpec.total(5))


class TestCertificates:
    def _cert(self):
        return vc_dimension(FamilySpec.total(3), FamilySpec.partial(3)).certificate

    def test_valid(self):
        verdict = verify_certificate(self._cert())
        assert verdict
        assert verdict.reason is None

    def test_wrong_witness(self):
        cert = self._cert()
        witnesses = dict(cert.witnesses)
        witnesses[0], witnesses[7] = witnesses[7], witnesses[0]
        verdict = verify_certificate(ShatterCertificate(cert.ground, witnesses))
        assert not verdict
        assert "traces" in verdict.reason

    def test_missing_mask(self):
        cert = self._cert()
        witnesses = {m: w for m, w in cert.witnesses.items() if m != 5}
        verdict = verify_certificate(ShatterCertificate(cert.ground, witnesses))
        assert not verdict
        assert "mask 5" in verdict.reason


class TestVCDimension:
    @pytest.mark.parametrize("n,expected", [(1, 0), (2, 1), (3, 3), (4, 4)])
    def test_total_by_partial(self, n, expected):
        report = vc_dimension(FamilySpec.total(n), FamilySpec.partial(n))
        assert report.dimension == expected
        assert report.search_complete
        assert verify_certificate(report.certificate)

    @pytest.mark.parametrize("n,expected", [(1, 0), (2, 1), (3, 2), (4, 3)])
    def test_partial_by_total(self, n, expected):
        report = vc_dimension(FamilySpec.partial(n), FamilySpec.total(n))
        assert report.dimension == expected
        assert report.search_complete
        assert verify_certificate(report.certificate)

    def test_partial_by_total_four_exhausts_level_four(self):
        report = vc_dimension(FamilySpec.partial(4), FamilySpec.total(4))
        assert report.exhaustion.level == 4
        assert report.exhaustion.generated > 0
        assert report.exhaustion.examined == report.exhaustion.generated
        assert not report.exhaustion.information_bound

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_total_by_total_is_rigid(self, n):
        report = vc_dimension(FamilySpec.total(n), FamilySpec.total(n))
        assert report.dimension == 1
        assert report.search_complete

    def test_partial_by_partial_small(self):
        assert vc_dimension(FamilySpec.partial(2), FamilySpec.partial(2)).dimension == 1

    def test_partial_by_partial_cap(self):
        with pytest.raises(CapExceeded):
            vc_dimension(FamilySpec.partial(5), FamilySpec.partial(5))

    def test_information_bound(self):
        report = vc_dimension(FamilySpec.partial(3), FamilySpec.total(3))
        assert report.dimension <= math.log2(report.witness_size)
        assert report.exhaustion.information_bound

    def test_hereditary(self):
        cert = vc_dimension(FamilySpec.total(4), FamilySpec.partial(4)).certificate
        for size in range(len(cert.ground)):
            for subset in combinations(cert.ground, size):
                assert is_shattered(subset, FamilySpec.partial(4)) is not None

    def test_threads_agree(self):
        single = vc_dimension(FamilySpec.total(4), FamilySpec.partial(4), threads=1)
        pooled = vc_dimension(FamilySpec.total(4), FamilySpec.partial(4), threads=4)
        assert single.dimension == pooled.dimension
        assert single.certificate == pooled.certificate

    def test_candidate_budget_truncates(self):
        report = vc_dimension(
            FamilySpec.total(3), FamilySpec.partial(3), budget=SearchBudget(max_candidates=0)
        )
        assert not report.search_complete
        assert report.dimension == 1
        assert verify_certificate(report.certificate)

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatch):
            vc_dimension(FamilySpec.total(2), FamilySpec.partial(3))

    def test_level_frame(self):
        report = vc_dimension(FamilySpec.total(3), FamilySpec.partial(3))
        frame = report.to_frame()
        assert list(frame.columns) == ["size", "generated", "examined", "shattered"]
        assert frame["size"].tolist()[:4] == [0, 1, 2, 3]
        summary = report.summary()
        assert summary["dimension"] == 3
        assert summary["search_complete"] is True


def _naive_dimension(ground, witnesses):
    """Largest k with some shattered k-subset, checking every k-subset."""
    traces = [trace(w, ground) for w in witnesses]
    best = 0
    for k in range(1, len(ground) + 1):
        if not any(
            len({tuple(t >> i & 1 for i in subset) for t in traces}) == 1 << k
            for subset in combinations(range(len(ground)), k)
        ):
            break
        best = k
    return best


class TestAgainstNaiveSearch:
    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("ground_kind", ["total", "partial"])
    @pytest.mark.parametrize("witness_kind", ["total", "partial"])
    def test_levelwise_matches_all_subsets(self, n, ground_kind, witness_kind):
        ground = FamilySpec.named(ground_kind, n)
        witnesses = FamilySpec.named(witness_kind, n)
        report = vc_dimension(ground, witnesses)
        assert report.search_complete
        assert report.dimension == _naive_dimension(ground.orders(), witnesses.orders())


def _ticking_clock():
    ticks = count()
    return lambda: float(next(ticks))


class TestTimeBudget:
    @pytest.mark.parametrize("threads", [1, 4])
    def test_clock_checked_inside_join(self, threads):
        # 218 shattered singletons give 23653 pairs, all joined in one batch
        budget = SearchBudget(seconds=3, clock=_ticking_clock())
        report = vc_dimension(FamilySpec.partial(4), FamilySpec.total(4), budget=budget, threads=threads)
        assert not report.search_complete
        assert report.dimension == 1
        truncated = report.levels[-1]
        assert truncated.size == 2
        assert 0 < truncated.generated < 218 * 217 // 2
        assert truncated.examined == 0
        assert report.exhaustion.level == 2
        assert report.exhaustion.generated == truncated.generated

    @pytest.mark.slow
    @pytest.mark.parametrize("threads", [1, 4])
    def test_wall_clock_overrun_is_small(self, threads):
        report = vc_dimension(
            FamilySpec.partial(5), FamilySpec.total(5), budget=SearchBudget(seconds=1.0), threads=threads
        )
        assert not report.search_complete
        assert report.elapsed_seconds < 6
        assert all(stats.generated >= stats.examined for stats in report.levels)
        assert verify_certificate(report.certificate)
