"""Exception types and the ``Undetermined`` marker shared by all modules."""

from dataclasses import dataclass


class HamsecError(Exception):
    """Base class for every error raised by the package."""


class ChartMismatch(HamsecError):
    """Two operands live on incompatible coordinate charts."""


class PrecisionError(HamsecError):
    """A result would need jet information beyond the tracked order."""


class SingularLinearPart(HamsecError):
    """A map germ cannot be inverted because its linear part is singular."""


class InvalidSection(HamsecError):
    """The input is not the germ of a smooth hypersurface through 0."""


class ClassMismatch(HamsecError):
    """A routine received a section of the wrong singularity class."""


class GenericityError(HamsecError):
    """An open genericity condition fails; ``witness`` names which one."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConsistencyError(HamsecError):
    """Internal self-check failed. Always a bug, never a user error."""


class FormError(HamsecError):
    """Degree overflow, wrong degree, or a non-closed input form."""


@dataclass(frozen=True)
class Undetermined:
    """All tested quantities vanished up to the available jet order.

    Returned as a value (not raised) by the decision procedures, so
    callers can report it instead of guessing.
    """

    order: int

    def __str__(self):
        return f"UndeterminedAtOrder({self.order})"


class OrderExhausted(PrecisionError):
    """Raised by iterated brackets when the jet order runs out."""

    def __init__(self, order, message=None):
        super().__init__(message or f"jet order exhausted at {order}")
        self.order = order
