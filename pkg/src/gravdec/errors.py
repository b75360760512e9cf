"""Exception types shared across modules; the CLI maps them to exit codes."""


class SchemaError(ValueError):
    """Configuration does not match the schema (exit 2)."""


class GuardError(RuntimeError):
    """A size or stability guard was exceeded (exit 3)."""


class StabilityError(GuardError):
    """Time step too large for the propagator."""

    def __init__(self, message, local_error=None):
        super().__init__(message)
        self.local_error = local_error


class InvariantError(RuntimeError):
    """A conserved quantity drifted beyond tolerance (exit 4)."""
