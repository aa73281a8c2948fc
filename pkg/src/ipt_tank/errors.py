"""Exception types raised by the toolkit."""


class IptError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(IptError, ValueError):
    """A value violates a documented invariant (non-positive inductance, k >= 1, ...)."""


class ContractError(IptError, ValueError):
    """An operation was called with arguments outside its contract."""


class SingularStageError(IptError, ArithmeticError):
    """A shunt arm resonates to zero impedance, shorting the ladder."""

    def __init__(self, index: int, omega: float):
        self.index = index
        self.omega = omega
        super().__init__(f"shunt stage {index} has zero impedance at omega={omega!r} rad/s")


class OpenCircuitResonanceError(IptError, ArithmeticError):
    """The input port looks like an open circuit (c*R_ac + d vanishes)."""


class DegenerateConditionError(IptError, ArithmeticError):
    """A resonance condition divides by a vanishing parallel-combination denominator."""
