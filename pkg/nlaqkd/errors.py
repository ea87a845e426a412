from __future__ import annotations


class NlaQkdError(Exception):
    """Base class for every error raised by nlaqkd."""


class DomainError(NlaQkdError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class UnphysicalCovarianceError(NlaQkdError, ArithmeticError):
    """Covariance matrix has no physical symplectic spectrum."""


class TruncationError(NlaQkdError):
    """Photon-number cutoff too small for the requested state."""

    def __init__(self, message: str, *, tail_mass: float, cutoff: int):
        super().__init__(message)
        self.tail_mass = tail_mass
        self.cutoff = cutoff


class DivergentAmplificationError(NlaQkdError):
    """g^n conjugation of a thermal state with g²λ² ≥ 1 is not normalisable."""


class ConfigError(NlaQkdError, ValueError):
    """Invalid run configuration; ``flag`` names the offending command-line option."""

    def __init__(self, message: str, *, flag: str):
        super().__init__(message)
        self.flag = flag
