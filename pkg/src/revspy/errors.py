"""Shared exception types; the CLI maps these onto exit codes."""


class UsageError(ValueError):
    """Bad arguments, malformed specs, or preconditions violated by the caller."""


class RuleViolation(RuntimeError):
    """An illegal move was submitted to the engine.

    `agent` is the index of the offending agent in the moving team's
    sorted order, or None when the move is malformed as a whole.
    """

    def __init__(self, message: str, agent: int | None = None):
        super().__init__(message)
        self.agent = agent


class BudgetExceeded(RuntimeError):
    """A state-space or vertex budget would be exceeded; carries the estimate."""

    def __init__(self, message: str, estimate: int | None = None):
        super().__init__(message)
        self.estimate = estimate
