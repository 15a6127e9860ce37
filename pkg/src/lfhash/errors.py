class ProtocolViolation(RuntimeError):
    """The reclamation or access protocol was broken (double free, use after free, ...)."""


class ConstraintError(ValueError):
    """A sizing or configuration precondition does not hold."""


class NotEnabled(RuntimeError):
    """A model transition was requested for a process that cannot take it."""
