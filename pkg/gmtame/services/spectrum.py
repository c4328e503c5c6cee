"""
Spectrum of a t-invariant lattice from a V-adapted basis, and the mean-value
certificate that the lattice is the whole Brieskorn lattice.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import logging

from sympy import QQ

from gmtame.algebra.exactmath import EigenDecomposition, Rational, format_rational
from gmtame.algebra.modgroebner import GBasis, MINIMAL, ModuleVector, groebner
from gmtame.algebra.polyring import LaurentMatrix, LevelOrder
from gmtame.core.exceptions import MeanBelowBound, SpectrumCountMismatch

logger = logging.getLogger(__name__)


def fractional_part(alpha) -> Rational:
    """alpha mod 1 in [0, 1)"""
    alpha = QQ.convert(alpha)
    num, den = QQ.numer(alpha), QQ.denom(alpha)
    return alpha - QQ(num // den)


@dataclass
class SpectrumData:
    """Spectral numbers with multiplicities, ascending"""

    values: List[Tuple[Rational, int]]
    mu: int
    mean: Rational
    gbasis: Optional[GBasis] = field(default=None, repr=False)
    order: Optional[LevelOrder] = field(default=None, repr=False)

    @classmethod
    def from_counts(cls, counts: Dict[Rational, int], **kwargs) -> "SpectrumData":
        values = sorted(((QQ.convert(a), m) for a, m in counts.items() if m), key=lambda item: item[0])
        mu = sum(m for _, m in values)
        total = sum((a * m for a, m in values), QQ.zero)
        mean = total / mu if mu else QQ.zero
        return cls(values=values, mu=mu, mean=mean, **kwargs)

    def multiset(self) -> List[Rational]:
        return [a for a, m in self.values for _ in range(m)]

    def as_dict(self) -> Dict[Rational, int]:
        return dict(self.values)

    def __str__(self) -> str:
        return ", ".join(f"{format_rational(a)}: {m}" for a, m in self.values)


def level_order(eigen: EigenDecomposition, levels: Optional[List[int]] = None) -> LevelOrder:
    alphas = [a for a, _ in eigen.eigenvalues]
    return LevelOrder(alphas, eigen.group_of(), levels)


def compute_spectrum(B: LaurentMatrix, M: LaurentMatrix, eigen: EigenDecomposition) -> SpectrumData:
    """
    Spectrum of the lattice spanned by phi M, phi a V-adapted Q[tau]-basis.

    Args:
        B: -tau d/dtau matrix of phi, polynomial in tau, B0 window-normalized
        M: lattice basis in phi-coordinates, Laurent in theta
        eigen: generalized eigenspaces of B0

    Returns:
        SpectrumData; its gbasis is the minimal basis of U0^-1 M in the level order

    Raises:
        SpectrumCountMismatch: the number of leads differs from mu
    """
    mu = M.rows
    M_eig = LaurentMatrix.from_qmatrix(eigen.inverse) @ M
    order = level_order(eigen)
    gb = groebner([ModuleVector.from_column(c) for c in M_eig.columns()], order, MINIMAL)
    counts: Dict[Rational, int] = {}
    for comp, k in gb.leads():
        value = order.v_degree(comp, k)
        counts[value] = counts.get(value, 0) + 1
    data = SpectrumData.from_counts(counts, gbasis=gb, order=order)
    if data.mu != mu:
        raise SpectrumCountMismatch(f"{data.mu} spectral numbers for Milnor number {mu}", stage="spectrum")
    logger.info(f"Spectrum: {data} (mean {format_rational(data.mean)})")
    return data


def mean_value_test(s: SpectrumData, n: int) -> bool:
    """
    True iff the spectrum mean equals (n+1)/2.

    Raises:
        MeanBelowBound: the mean is below (n+1)/2
    """
    bound = QQ(n + 1, 2)
    if s.mean == bound:
        return True
    if s.mean > bound:
        logger.info(f"Spectrum mean {format_rational(s.mean)} exceeds {format_rational(bound)}")
        return False
    raise MeanBelowBound(
        f"spectrum mean {format_rational(s.mean)} is below {format_rational(bound)}", stage="spectrum"
    )


def symmetry_defect(s: SpectrumData, n: int) -> Dict[Rational, int]:
    """sigma(alpha) - sigma(n+1-alpha) for every alpha where it is nonzero"""
    counts = s.as_dict()
    defect = {}
    for alpha, m in counts.items():
        mirror = QQ(n + 1) - alpha
        diff = m - counts.get(mirror, 0)
        if diff:
            defect[alpha] = diff
    if defect:
        logger.warning(
            "Spectrum is not symmetric about (n+1)/2: "
            + ", ".join(f"{format_rational(a)}: {d:+d}" for a, d in sorted(defect.items()))
        )
    return defect


def spectrum_by_class(s: SpectrumData) -> Dict[Rational, int]:
    """Multiplicities of spectral numbers grouped by alpha mod 1"""
    out: Dict[Rational, int] = {}
    for alpha, m in s.values:
        cls = fractional_part(alpha)
        out[cls] = out.get(cls, 0) + m
    return dict(sorted(out.items(), key=lambda item: item[0]))
