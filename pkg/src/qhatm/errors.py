"""Exception hierarchy shared by every module of the package."""


class QhatmError(Exception):
    """Base class for all errors raised by :mod:`qhatm`."""


class DomainError(QhatmError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class OrderMismatchError(DomainError):
    """Two series of different truncation order were combined."""


class SingularityError(DomainError):
    """Sampled data would touch a pole of the initial profile."""


class HaloError(QhatmError):
    """A stencil needs more ghost points than the field has left."""

    def __init__(self, needed: int, available: int, what: str = "stencil"):
        self.needed = needed
        self.available = available
        self.deficit = needed - available
        super().__init__(
            f"{what} needs {needed} halo cells but only {available} remain "
            f"(deficit {self.deficit})"
        )


class ConfigError(QhatmError, ValueError):
    """A run configuration failed validation."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
