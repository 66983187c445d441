"""Localised value indefiniteness for rank-1 projection observables.

Orthogonality diagrams and rule propagation live in ``diagram`` and
``engine``.  The ``localizer`` assembles gadgets into two-branch certificates
that ``checker`` verifies independently.
"""

from .diagram import Diagram, Observable, build_diagram, export_dot, merge
from .engine import DeductionStep, PropagationResult, is_admissible, propagate, search_total_admissible
from .linalg import Vector, cross, inner, is_orthogonal, map_pair, normalize_canonical
from .scalars import QSqrt2

__version__ = "0.1.0"

__all__ = [
    "DeductionStep",
    "Diagram",
    "Observable",
    "PropagationResult",
    "QSqrt2",
    "Vector",
    "build_diagram",
    "cross",
    "export_dot",
    "inner",
    "is_admissible",
    "is_orthogonal",
    "map_pair",
    "merge",
    "normalize_canonical",
    "propagate",
    "search_total_admissible",
]
