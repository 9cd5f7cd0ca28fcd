"""Shared exception types."""


class ContractViolation(ValueError):
    """A caller broke a documented precondition or invariant."""


class ValidationError(ValueError):
    """A submitted record failed validation (bad choice, missing field)."""


class AuthorizationError(PermissionError):
    """The acting user is not part of the session or lacks the role."""


class IncompleteSessionError(RuntimeError):
    """An aggregate was requested before every entry had three annotations."""

    def __init__(self, missing: dict[str, int]):
        self.missing = missing
        detail = ", ".join(f"{k}: {v}" for k, v in sorted(missing.items()))
        super().__init__(f"session incomplete, missing annotations per entry: {detail}")
