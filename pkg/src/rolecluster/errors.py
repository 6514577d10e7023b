"""Exception hierarchy shared by every pipeline stage."""


class RoleClusterError(Exception):
    """Base class. ``stage`` names the pipeline step that failed, if known."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage

    def __str__(self):
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg


class InputError(RoleClusterError, ValueError):
    """Malformed or inconsistent input data."""


class NumericalError(RoleClusterError, ArithmeticError):
    """A linear-algebra step failed or produced non-finite values."""


class InternalError(RoleClusterError, RuntimeError):
    """A contract between two internal stages was violated."""
