"""Exception hierarchy shared by every socint module."""


class SocintError(Exception):
    """Base class for all errors raised by socint."""


class InvalidDistributionError(SocintError, ValueError):
    """A probability vector is not a valid distribution or cannot be parsed."""


class DomainError(SocintError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(SocintError):
    """A configurable size cap was exceeded."""

    def __init__(self, what: str, required: int, cap: int):
        super().__init__(f"{what} needs {required} entries, cap is {cap}")
        self.what = what
        self.required = required
        self.cap = cap

    def __reduce__(self) -> tuple[type, tuple[str, int, int]]:
        return (type(self), (self.what, self.required, self.cap))


class NotIrreducibleError(SocintError, ValueError):
    """A Markov transition matrix is not irreducible."""


class ConvergenceError(SocintError, RuntimeError):
    """An iterative method hit its iteration cap."""


class HypothesisError(SocintError, ValueError):
    """The hypothesis of a theorem is violated by the supplied objects."""


class ConfigError(SocintError):
    """An experiment configuration could not be parsed."""

    def __init__(self, message: str, location: str | None = None):
        super().__init__(f"{location}: {message}" if location else message)
        self.message = message
        self.location = location

    def __reduce__(self) -> tuple[type, tuple[str, str | None]]:
        return (type(self), (self.message, self.location))
