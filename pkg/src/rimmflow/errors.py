"""Exceptions raised when a computation leaves the perturbative regime."""


class RimmflowError(Exception):
    pass


class NoConvergence(RimmflowError):
    """Newton iteration exceeded its iteration budget."""


class LostPositivity(RimmflowError):
    """Steady state touches or crosses zero height."""


class GapViolation(RimmflowError):
    """Leading conjugate pair is not separated from the rest of the spectrum."""


class DegenerateNormalization(GapViolation):
    """Eigenvector is (numerically) orthogonal to exp(-i theta)."""


class NoBracket(RimmflowError):
    """No sign change of the critical real part inside the search bracket."""


class NoCrossing(RimmflowError):
    """Parameter path does not meet the zero level of the critical real part."""


class BlowUp(RimmflowError):
    """Time integration overflowed."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time
