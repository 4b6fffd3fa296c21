"""Exception types raised across the package.

Validation failures derive from ``GateEnergyError`` (itself a ``ValueError``);
the CLI maps them to exit code 2. ``NumericalFailure`` marks non-convergence
and maps to exit code 3.
"""

from __future__ import annotations


class GateEnergyError(ValueError):
    """Base class for input and validation errors."""


class NumericalFailure(RuntimeError):
    """A numerical routine failed to converge."""


class NotUnitary(GateEnergyError):
    pass


class NotHermitian(GateEnergyError):
    pass


class BadIndex(GateEnergyError):
    pass


class DimMismatch(GateEnergyError):
    pass


class UnknownGate(GateEnergyError):
    pass


class BadParamCount(GateEnergyError):
    pass


class IndexOutOfRange(GateEnergyError):
    pass


class DuplicateQubit(GateEnergyError):
    pass


class TooLarge(GateEnergyError):
    pass


class CircuitSyntaxError(GateEnergyError):
    """Malformed circuit text. ``lineno`` is 1-based."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class BranchLengthMismatch(GateEnergyError):
    pass


class TooFewQubits(GateEnergyError):
    pass


class NotCommuting(GateEnergyError):
    pass


class NotCommutingInvolutory(GateEnergyError):
    pass


class ZeroError(GateEnergyError):
    """A bound was requested at zero gate error; the energy diverges."""


class DegenerateDrive(GateEnergyError):
    """The drive integral over the gate window vanishes."""


class BadAlpha(GateEnergyError):
    pass


class NotDensityOperator(GateEnergyError):
    pass


class BadMatrixFile(GateEnergyError):
    pass
