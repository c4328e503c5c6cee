"""
t-invariant lattices inside the Brieskorn lattice G0 of f.

G0 is presented as Q[x, theta] modulo the Q[theta]-span of the relations
d_i(f) * x^a - theta * d_i(x^a); each element is a module vector over Q[theta]
with one component per x-monomial.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
import logging

from gmtame.algebra.exactmath import QT, SmithData, smith_normal_form
from gmtame.algebra.modgroebner import (
    GBasis,
    GroebnerBuilder,
    ModuleVector,
    REDUCED,
    check_basis,
    normal_form,
)
from gmtame.algebra.polyring import RelationOrder, GMOperator, LaurentMatrix, LaurentPoly, Poly, PolyContext
from gmtame.core.config import settings
from gmtame.core.exceptions import IterationCapExceeded, RepresentationFailure
from gmtame.services.milnor import MilnorData, is_milnor_basis, milnor_data

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]


def monomials_of_degree(nvars: int, degree: int) -> List[Monomial]:
    """All exponent tuples of the given total degree"""
    if nvars == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in monomials_of_degree(nvars - 1, degree - first):
            out.append((first,) + rest)
    return out


def poly_to_vector(p: Poly) -> ModuleVector:
    return ModuleVector({(m[:-1], m[-1]): c for m, c in p.items()})


def vector_to_poly(v: ModuleVector, context: PolyContext) -> Poly:
    return context.ring.from_dict({tuple(comp) + (e,): c for (comp, e), c in v.terms.items()})


def relation_generator(f: Poly, context: PolyContext, alpha: Monomial, i: int) -> Poly:
    """d_i(f) * x^alpha - theta * d_i(x^alpha)"""
    x_alpha = context.monomial(alpha)
    d_f = GMOperator.partial(i).apply(f)
    return d_f * x_alpha - context.theta * GMOperator.partial(i).apply(x_alpha)


def relation_generators(f: Poly, context: PolyContext, l: int, start: int = 0) -> List[ModuleVector]:
    """
    Relation generators for all |alpha| with start <= |alpha| <= l.

    Returns:
        (n+1) generators per monomial x^alpha, as module vectors over the x-monomials
    """
    out = []
    for degree in range(start, l + 1):
        for alpha in monomials_of_degree(context.nvars, degree):
            for i in range(context.nvars):
                out.append(poly_to_vector(relation_generator(f, context, alpha, i)))
    return out


@dataclass
class Presentation:
    """
    G0^{k0,l} = Q[theta]^columns / rowspace(relations).

    Coordinates of a vector v are the free positions of v * right.
    """

    columns: List[Monomial]
    smith: SmithData
    free: List[int] = field(default_factory=list)

    def __post_init__(self):
        self.free = self.smith.free_positions()
        self._index = {m: j for j, m in enumerate(self.columns)}

    def generators(self, context: PolyContext) -> List[Poly]:
        """Cyclic generators of the free summands: rows of right^-1"""
        out = []
        for j in self.free:
            row = self.smith.right_inverse[j]
            terms = {}
            for c, entry in enumerate(row):
                for (e,), coeff in QT(entry).items():
                    terms[(self.columns[c], e)] = coeff
            out.append(vector_to_poly(ModuleVector(terms), context))
        return out

    def coordinates(self, v: ModuleVector) -> List:
        """Q[theta] coordinates of v in the free generators"""
        row = [QT.zero] * len(self.columns)
        for (comp, e), c in v.terms.items():
            j = self._index.get(comp)
            if j is None:
                raise RepresentationFailure(f"monomial {comp} is outside the presented degree range", stage="brieskorn")
            row[j] += QT({(e,): c})
        right = self.smith.right
        out = []
        for j in self.free:
            acc = QT.zero
            for i, entry in enumerate(row):
                if not entry.is_zero and not right[i][j].is_zero:
                    acc += entry * right[i][j]
            out.append(acc)
        return out


@dataclass
class LatticeBasis:
    """phis with t(phi) = phi (A + theta^2 d/dtheta), plus the data that certifies it"""

    context: PolyContext
    f: Poly
    phis: List[Poly]
    A: LaurentMatrix
    k: int
    k0: int
    l: int
    gbasis: GBasis = field(repr=False, default=None)
    presentation: Presentation = field(repr=False, default=None)
    retries: int = 0


class BrieskornService:
    """Lattice bases of G0 for increasing approximation degrees"""

    def __init__(self, f: Poly, context: PolyContext, milnor: Optional[MilnorData] = None, checks: Optional[str] = None):
        self.f = f
        self.checks = checks or settings.CHECKS
        self.context = context
        self.milnor = milnor or milnor_data(f, context)
        self.mu = self.milnor.mu
        self.degree = context.x_degree(f)
        self.order = RelationOrder()
        self._builder = GroebnerBuilder(self.order)
        self._built_l = -1
        self.t = GMOperator.t(f)

    def _grow(self, l: int):
        if l > self._built_l:
            gens = relation_generators(self.f, self.context, l, start=self._built_l + 1)
            self._builder.extend(gens)
            logger.debug(f"Relation basis at l={l}: {len(gens)} new generators, {len(self._builder)} elements")
            self._built_l = l

    def _k0(self, k: int) -> int:
        for degree in range(k, -1, -1):
            for alpha in monomials_of_degree(self.context.nvars, degree):
                if not self._builder.is_lead(alpha, 0):
                    return degree
        return -1

    def _presentation(self, gb: GBasis, k0: int) -> Presentation:
        columns = [m for d in range(k0 + 1) for m in monomials_of_degree(self.context.nvars, d)]
        index = {m: j for j, m in enumerate(columns)}
        rows = []
        for g in gb.generators:
            if sum(g.lead(self.order)[0]) > k0:
                continue
            row = [QT.zero] * len(columns)
            for (comp, e), c in g.terms.items():
                row[index[comp]] += QT({(e,): c})
            rows.append(row)
        smith = smith_normal_form(rows, len(rows), len(columns))
        return Presentation(columns=columns, smith=smith)

    def compute_lattice(self, k: Optional[int] = None, k_max: Optional[int] = None) -> LatticeBasis:
        """
        Lattice basis phi and matrix A of t for approximation degree k.

        Args:
            k: starting degree, defaults to deg(f)
            k_max: largest admissible k, defaults to k + K_EXTRA_MAX

        Returns:
            LatticeBasis whose k may exceed the requested one

        Raises:
            IterationCapExceeded: k or l passed the configured caps
        """
        k = self.degree if k is None else k
        k_cap = k_max if k_max is not None else k + settings.K_EXTRA_MAX
        l = k
        retries = 0
        while True:
            l += 1
            if k > k_cap:
                raise IterationCapExceeded(f"approximation degree k exceeded {k_cap}", stage="brieskorn")
            if l > settings.L_FACTOR * max(k, 1):
                raise IterationCapExceeded(
                    f"relation degree l={l} exceeded {settings.L_FACTOR}*k for k={k}", stage="brieskorn"
                )
            self._grow(l)
            k0 = self._k0(k)
            gb = self._builder.basis(REDUCED)
            presentation = self._presentation(gb, k0)
            rho = presentation.smith.rank
            gamma = presentation.smith.cyclic_count
            logger.debug(f"k={k} l={l} k0={k0} rho={rho} gamma={gamma} mu={self.mu}")
            retries += 1
            if rho > self.mu or (gamma > rho and rho == self.mu):
                continue
            if rho < self.mu:
                k += 1
                continue
            if k0 + self.degree > k:
                k += 1
                continue
            phis = presentation.generators(self.context)
            if not is_milnor_basis(phis, self.milnor):
                k += 1
                continue
            phis = [vector_to_poly(normal_form(poly_to_vector(p), gb), self.context) for p in phis]
            if self.checks == "full":
                check_basis(gb)
            A = self.t_matrix(phis, gb, presentation)
            logger.info(f"Lattice basis found at k={k}, k0={k0}, l={l} after {retries} probes")
            return LatticeBasis(
                context=self.context,
                f=self.f,
                phis=phis,
                A=A,
                k=k,
                k0=k0,
                l=l,
                gbasis=gb,
                presentation=presentation,
                retries=retries,
            )

    def t_matrix(self, phis: Sequence[Poly], gb: GBasis, presentation: Presentation) -> LaurentMatrix:
        """
        Matrix A over Q[theta] of t in the basis phis.

        Raises:
            RepresentationFailure: t(phi_j) - (phi A)_j is not a relation
        """
        columns = []
        for j, phi in enumerate(phis):
            image = normal_form(poly_to_vector(self.t.apply(phi)), gb)
            coords = presentation.coordinates(image)
            column = [LaurentPoly.from_qt(c) for c in coords]
            residual = self.t.apply(phi)
            for i, c in enumerate(coords):
                if not c.is_zero:
                    residual = residual - phis[i] * self.context.theta_poly(column[i])
            if not normal_form(poly_to_vector(residual), gb).is_zero:
                raise RepresentationFailure(f"t(phi_{j}) is not represented in the lattice basis", stage="brieskorn")
            columns.append(column)
        return LaurentMatrix.from_columns(columns, len(phis))

    def residual_vanishes(self, phis: Sequence[Poly], A: LaurentMatrix, gb: Optional[GBasis] = None) -> bool:
        """t(phi_j) - (phi (A + theta^2 d/dtheta))_j has zero normal form for every j"""
        gb = gb or self._builder.basis()
        for j, phi in enumerate(phis):
            residual = self.t.apply(phi)
            for i in range(len(phis)):
                entry = A[i, j]
                if entry.terms:
                    residual = residual - phis[i] * self.context.theta_poly(entry)
            if not normal_form(poly_to_vector(residual), gb).is_zero:
                return False
        return True


def compute_lattice(f: Poly, context: PolyContext, k: Optional[int] = None) -> LatticeBasis:
    """Lattice basis and t-matrix of f starting at approximation degree k"""
    return BrieskornService(f, context).compute_lattice(k)
