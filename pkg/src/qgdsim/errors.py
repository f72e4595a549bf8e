"""Exception hierarchy shared by every module.

All library errors derive from :class:`SimulationError` so callers (and the CLI)
can catch them with a single clause. Where a builtin category fits, the class
also inherits from it.
"""


class SimulationError(Exception):
    """Base class for all errors raised by qgdsim."""


class InvalidInput(SimulationError, ValueError):
    pass


class ShapeError(SimulationError, ValueError):
    pass


class NotPSD(SimulationError, ValueError):
    pass


class SubnormalizationTooSmall(SimulationError, ValueError):
    pass


class NotUnitary(SimulationError, ValueError):
    pass


class NotNormalized(SimulationError, ValueError):
    pass


class InvalidScale(SimulationError, ValueError):
    pass


class NormViolation(SimulationError, ValueError):
    """An encoded block exceeded operator norm one."""


class AmplificationOutOfRange(SimulationError, ValueError):
    pass


class PolynomialOutOfBounds(SimulationError, ValueError):
    pass


class UnsupportedBlock(SimulationError, ValueError):
    pass


class ZeroVector(SimulationError, ValueError):
    pass


class NegativeCoefficient(SimulationError, ValueError):
    pass


class OutOfSpectralRange(SimulationError, ValueError):
    pass


class BlockIndexError(SimulationError, IndexError):
    pass


class WrongFamily(SimulationError, TypeError):
    pass


class InvalidSchedule(SimulationError, ValueError):
    pass


class NormBudgetExceeded(SimulationError, RuntimeError):
    pass


class ExtractionBoundViolated(SimulationError, RuntimeError):
    pass


class NeedExplicitBound(SimulationError, ValueError):
    pass


class EmptyCluster(SimulationError, ValueError):
    pass


class Indeterminate(SimulationError, RuntimeError):
    pass


class ExpansionTooLarge(SimulationError, ValueError):
    pass


class ActivationOverflow(SimulationError, RuntimeError):
    pass


class TooManySites(SimulationError, ValueError):
    pass


class StepError(SimulationError, RuntimeError):
    """Wraps an error raised inside a descent iteration and records its index."""

    def __init__(self, step: int, cause: Exception):
        super().__init__(f"iteration {step}: {type(cause).__name__}: {cause}")
        self.step = step
        self.cause = cause
