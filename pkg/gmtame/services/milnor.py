"""
Milnor algebra Q[x]/<df>: Milnor number, standard monomials and the basis test
applied to candidate lattice bases.
"""
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple
import logging

from sympy import QQ
from sympy.polys.groebnertools import groebner as ideal_groebner

from gmtame.algebra.exactmath import QMatrix, Rational
from gmtame.algebra.polyring import Poly, PolyContext, context_of
from gmtame.core.exceptions import NotIsolated

logger = logging.getLogger(__name__)


@dataclass
class MilnorData:
    """Jacobian ideal data of f; standard_monomials are sorted by total degree"""

    context: PolyContext
    mu: int
    jacobian_basis: List[Poly]
    standard_monomials: List[Tuple[int, ...]]
    x_ring: object = field(repr=False, default=None)
    _index: Dict[Tuple[int, ...], int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {m: i for i, m in enumerate(self.standard_monomials)}

    def to_x(self, p: Poly) -> Poly:
        """theta = 0 evaluation of p as an element of Q[x]"""
        return self.x_ring.from_dict({m[:-1]: c for m, c in p.items() if m[-1] == 0})

    def reduce(self, p: Poly) -> Poly:
        """Normal form modulo the Jacobian ideal; p lives in Q[x] or Q[x, theta]"""
        if p.ring != self.x_ring:
            p = self.to_x(p)
        if p.is_zero or not self.jacobian_basis:
            return p
        return p.rem(self.jacobian_basis)

    def coordinates(self, p: Poly) -> List[Rational]:
        """Coordinates of the class of p in the standard monomial basis"""
        out = [QQ.zero] * self.mu
        for m, c in self.reduce(p).items():
            out[self._index[m]] = c
        return out


def milnor_data(f: Poly, context: Optional[PolyContext] = None) -> MilnorData:
    """
    Jacobian Groebner basis (degrevlex) and the standard monomials of f.

    Raises:
        NotIsolated: the Jacobian ideal is not zero-dimensional
    """
    context = context or context_of(f)
    if context.x_degree(f) < 1:
        raise NotIsolated("constant polynomial has no Milnor algebra", stage="milnor")
    x_ring, *xs = context.x_ring()
    fx = x_ring.from_dict({m[:-1]: c for m, c in f.items()})
    partials = [fx.diff(x) for x in xs]
    nonzero = [p for p in partials if not p.is_zero]
    basis = ideal_groebner(nonzero, x_ring) if nonzero else []
    if any(g.is_ground and not g.is_zero for g in basis):
        # f has no critical points at all; the Milnor algebra is zero
        logger.info(f"Jacobian ideal of {context.format(f)} is the unit ideal")
        return MilnorData(context=context, mu=0, jacobian_basis=basis, standard_monomials=[], x_ring=x_ring)

    leads = [g.LM for g in basis]
    bounds = []
    for i in range(context.nvars):
        powers = [m[i] for m in leads if all(e == 0 for j, e in enumerate(m) if j != i)]
        if not powers:
            raise NotIsolated(
                f"Jacobian ideal is not zero-dimensional: no pure power of {context.names[i]} among the leading monomials",
                stage="milnor",
            )
        bounds.append(min(powers))

    standard = [
        m for m in product(*(range(b) for b in bounds))
        if not any(all(a >= b for a, b in zip(m, lead)) for lead in leads)
    ]
    standard.sort(key=lambda m: (sum(m), tuple(-e for e in reversed(m))))
    logger.info(f"Milnor number of {context.format(f)}: {len(standard)}")
    return MilnorData(
        context=context,
        mu=len(standard),
        jacobian_basis=basis,
        standard_monomials=standard,
        x_ring=x_ring,
    )


def is_milnor_basis(phis: Sequence[Poly], data: MilnorData) -> bool:
    """True iff the theta = 0 parts of phis form a basis of the Milnor algebra"""
    if len(phis) != data.mu:
        return False
    if data.mu == 0:
        return True
    columns = [data.coordinates(p) for p in phis]
    return QMatrix.from_columns(columns, data.mu).rank() == data.mu


def milnor_algebra_matrix(g: Poly, data: MilnorData, basis: Optional[Sequence[Poly]] = None) -> QMatrix:
    """
    Matrix of multiplication by g on the Milnor algebra.

    Coordinates are taken in the standard monomials, or in basis when given
    (basis must then satisfy is_milnor_basis).
    """
    g = data.to_x(g) if g.ring != data.x_ring else g
    if basis is None:
        monomials = [data.x_ring.from_dict({m: QQ.one}) for m in data.standard_monomials]
        return QMatrix.from_columns([data.coordinates(g * m) for m in monomials], data.mu)
    elems = [data.to_x(p) if p.ring != data.x_ring else p for p in basis]
    change = QMatrix.from_columns([data.coordinates(p) for p in elems], data.mu)
    images = QMatrix.from_columns([data.coordinates(g * p) for p in elems], data.mu)
    return change.inverse() @ images


def quasihomogeneous_weights(f: Poly, context: Optional[PolyContext] = None) -> Optional[List[Rational]]:
    """
    Weights w with every monomial of f of weighted degree 1, when they are
    unique and positive; None otherwise.
    """
    context = context or context_of(f)
    exponents = [m[:-1] for m in f.keys()]
    nvars = context.nvars
    system = QMatrix([list(m) + [QQ.one] for m in exponents], nvars + 1)
    reduced, pivots = system.rref()
    if nvars in pivots:
        return None
    if list(pivots) != list(range(nvars)):
        return None
    weights = [reduced[i, nvars] for i in range(nvars)]
    if any(w <= 0 for w in weights):
        return None
    return weights


def quasihomogeneous_spectrum(f: Poly, data: MilnorData) -> Optional[Dict[Rational, int]]:
    """Spectrum of a quasi-homogeneous f: sum_i w_i (a_i + 1) over a monomial basis"""
    weights = quasihomogeneous_weights(f, data.context)
    if weights is None:
        return None
    out: Dict[Rational, int] = {}
    for m in data.standard_monomials:
        value = sum((w * (a + 1) for w, a in zip(weights, m)), QQ.zero)
        out[value] = out.get(value, 0) + 1
    return out
