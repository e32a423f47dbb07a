"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all engine errors."""


class ValidationError(EngineError, ValueError):
    """An input value violates its declared range or type contract."""


class InsufficientDataError(EngineError):
    """An operation needs more observations than are available."""


class ConditioningError(EngineError):
    """A kernel or covariance matrix could not be factorized, even with jitter."""


class ContractViolationError(EngineError, ValueError):
    """A caller-side precondition was violated (e.g. a front point below the reference)."""


class ProtocolError(EngineError):
    """A session operation was invoked out of order."""


class SessionCompleteError(ProtocolError):
    """The session has exhausted its iteration budget."""


class UndefinedCorrelationError(EngineError):
    """Pearson correlation is undefined because one variable has zero variance."""
