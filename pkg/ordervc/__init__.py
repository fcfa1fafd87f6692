"""
ordervc - VC-dimension of families of partial and total orders.

Orders on [n] are compatible when the union of their relations is acyclic; a
witness family shatters a list of ground orders when every subset is cut out
by compatibility with some witness.
"""

__version__ = "0.1.0"

from .errors import OrderVCError  # noqa: E402
from .order_core import (  # noqa: E402
    DirectedGraph,
    OrderRelation,
    TotalOrder,
    compatible,
    from_edge_list,
    is_acyclic,
    topological_sort,
    transitive_closure,
)
from .enumeration import FamilySpec, all_partial_orders, all_total_orders  # noqa: E402
from .shattering import SearchBudget, is_shattered, vc_dimension, verify_certificate  # noqa: E402

__all__ = [
    "DirectedGraph",
    "FamilySpec",
    "OrderRelation",
    "OrderVCError",
    "SearchBudget",
    "TotalOrder",
    "all_partial_orders",
    "all_total_orders",
    "compatible",
    "from_edge_list",
    "is_acyclic",
    "is_shattered",
    "topological_sort",
    "transitive_closure",
    "vc_dimension",
    "verify_certificate",
]
