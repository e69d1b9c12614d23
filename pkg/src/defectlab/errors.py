"""Exception types shared across the package."""


class DefectLabError(Exception):
    """Base class for all errors raised by defectlab."""


class DomainError(DefectLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation at a pole (e.g. Gamma at a non-positive integer)."""


class NonConvergenceError(DefectLabError, RuntimeError):
    """Adaptive quadrature ran out of panels before meeting its tolerance."""

    def __init__(self, message, value=None, error_estimate=None, panels_used=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.panels_used = panels_used


class PunctureError(DefectLabError, ValueError):
    """A path or a swept support comes too close to the puncture at the origin."""


class OpenLoopError(DefectLabError, ValueError):
    """A vertex list that should describe a closed loop does not close."""


class ToleranceError(DefectLabError, ArithmeticError):
    """A constructed operator misses its verification tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class RankAmbiguityError(DefectLabError, ArithmeticError):
    """A singular value falls in the band where numerical rank is undecidable."""
