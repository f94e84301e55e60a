"""Exception hierarchy shared by all modules."""


class SpinHardyError(Exception):
    """Base class for all package errors."""


class PreconditionError(SpinHardyError, ValueError):
    """An input violates an operation's documented precondition."""


class ConsistencyError(SpinHardyError, RuntimeError):
    """A numerical self-check failed (e.g. an eigenvalue is not a half-integer)."""


class NoHardyState(SpinHardyError):
    """The target vector lies in the constraint span, so no state has p > 0."""


class NoCabelloGap(SpinHardyError):
    """No state in the solution space has P(target) - P(anchor) > 0."""


class NoContradiction(SpinHardyError):
    """Even the full set of zero events leaves a local strategy hitting the target."""


class ResourceLimit(SpinHardyError):
    """The local strategy space exceeds the enumeration guard."""
