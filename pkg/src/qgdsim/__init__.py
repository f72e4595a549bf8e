"""Classical simulator for gradient descent on block-encoded diagonal operators."""

from .block_encoding import EncodedOperator, QueryLedger
from .objective import CompositeObjective, DescentSchedule, Family, ObjectiveSpec, SupportSet
from .qgd import DescentTrace, default_schedule, extract_state, run_descent

__version__ = "0.1.0"

__all__ = [
    "CompositeObjective",
    "DescentSchedule",
    "DescentTrace",
    "EncodedOperator",
    "Family",
    "ObjectiveSpec",
    "QueryLedger",
    "SupportSet",
    "default_schedule",
    "extract_state",
    "run_descent",
]
