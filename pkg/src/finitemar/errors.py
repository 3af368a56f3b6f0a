"""Exception hierarchy shared across the package."""


class FiniteMarError(ValueError):
    """Base class for every error raised by finitemar."""


class InvalidSpaceError(FiniteMarError):
    pass


class InvalidPointError(FiniteMarError):
    pass


class InvalidDensityError(FiniteMarError):
    pass


class InvalidMechanismError(FiniteMarError):
    pass


class UndefinedMechanismError(FiniteMarError):
    """The mechanism has no value at a point that an analysis needs."""


class ZeroProbabilityEventError(FiniteMarError):
    """A conditional identity was requested on an event of probability zero."""


class ReconstructionError(FiniteMarError):
    pass


class GeneratorError(FiniteMarError):
    """A mechanism generator was given parameters it cannot honour."""


class ModelFileError(FiniteMarError):
    """Syntax or invariant error in a model file; carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line is not None else message)
