"""Exception types shared by the library and mapped to CLI exit codes."""


class MMError(Exception):
    """Base class for contract violations raised by this package."""

    exit_code = 1


class DomainError(MMError, ValueError):
    exit_code = 2


class ContractError(MMError, ValueError):
    exit_code = 2


class SchemaError(MMError, ValueError):
    exit_code = 2


class NotInVError(MMError, ValueError):
    """Measure is not absolutely continuous with connected support."""

    exit_code = 2


class SizeError(MMError, ValueError):
    exit_code = 3


class ResolutionError(MMError, ValueError):
    exit_code = 4


class CoverageError(MMError, ValueError):
    exit_code = 4


class ConstructionError(MMError, ArithmeticError):
    exit_code = 4


class DivergenceError(MMError, ArithmeticError):
    exit_code = 4


class PreconditionError(MMError, ValueError):
    exit_code = 4


class NumericalError(MMError, ArithmeticError):
    """Iterative routine failed to converge; ``state`` holds a dump."""

    exit_code = 5

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
