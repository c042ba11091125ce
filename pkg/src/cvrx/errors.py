"""Exception hierarchy for cvrx."""


class CvrxError(Exception):
    """Base class for all errors raised by cvrx."""


class InvalidDimensionError(CvrxError, ValueError):
    pass


class ContractViolation(CvrxError, ValueError):
    """An input breaks a documented precondition (e.g. a non anti-Hermitian generator)."""


class DegenerateInputError(CvrxError, ValueError):
    pass


class TruncationError(CvrxError):
    """The Fock truncation cannot represent a state to the required accuracy.

    Attributes:
        tail_mass: probability weight that falls outside the truncated basis.
    """

    def __init__(self, message: str, tail_mass: float):
        super().__init__(f"{message} (tail mass {tail_mass:.3e})")
        self.tail_mass = tail_mass


class NumericError(CvrxError, ArithmeticError):
    pass


class InsufficientSignalError(NumericError):
    pass
