"""
Error taxonomy for the computation pipeline.
Every error carries the process exit code used by the command line front end.
"""
from typing import Optional


class GMTameError(Exception):
    """Base class for all pipeline errors"""

    exit_code: int = 5
    label: str = "error"

    def __init__(self, detail: str = "", *, stage: Optional[str] = None):
        self.detail = detail or self.__class__.__doc__ or self.label
        self.stage = stage
        super().__init__(self.detail)

    def to_dict(self):
        return {
            "error": self.__class__.__name__,
            "detail": self.detail,
            "stage": self.stage,
            "exit_code": self.exit_code,
        }


class ParseError(GMTameError):
    """Polynomial text could not be parsed"""

    exit_code = 2
    label = "parse error"

    def __init__(self, detail: str = "", *, position: Optional[int] = None, stage: Optional[str] = "parse"):
        self.position = position
        if position is not None:
            detail = f"{detail} (at position {position})"
        super().__init__(detail, stage=stage)


class NotIsolated(GMTameError):
    """Jacobian ideal is not zero-dimensional"""

    exit_code = 3
    label = "non-isolated critical locus"


class IterationCapExceeded(GMTameError):
    """An iteration cap was reached"""

    exit_code = 4
    label = "iteration cap exceeded"


class SaturationDiverged(IterationCapExceeded):
    """The tau-saturation of the lattice did not become stationary"""


class InternalInvariantError(GMTameError):
    """An internal invariant failed"""

    exit_code = 5
    label = "internal invariant failure"


class IrrationalSpectrum(InternalInvariantError):
    """Characteristic polynomial has an irreducible factor of degree at least 2"""


class NotNilpotent(InternalInvariantError):
    """Matrix is not nilpotent"""


class RankDeficient(InternalInvariantError):
    """Generated lattice has rank below the Milnor number"""


class RepresentationFailure(InternalInvariantError):
    """t-action could not be represented in the lattice basis"""


class DivisibilityViolation(InternalInvariantError):
    """Off-diagonal block is not divisible by tau during a window twist"""


class SpectrumCountMismatch(InternalInvariantError):
    """Spectral multiplicities do not sum to the Milnor number"""


class MeanBelowBound(InternalInvariantError):
    """Spectrum mean is below (n+1)/2"""


class NotGoodLattice(InternalInvariantError):
    """Induced filtration is not strictly compatible with the nilpotent operator"""


class DecompositionStall(InternalInvariantError):
    """Leading term could not be eliminated during normal form expansion"""


class ZeroDenominator(InternalInvariantError):
    """Good-basis correction coefficient has zero denominator"""
