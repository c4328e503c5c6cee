"""
Groebner bases of submodules of free modules over Q[theta].

The coefficient ring is a principal ideal domain in one variable, so a basis
keeps a single element per leading component: two elements sharing a leading
component are replaced by their Euclidean combination. A set with pairwise
distinct leading components satisfies the Buchberger criterion because every
S-pair between different components is trivial.
"""
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple
import logging

from sympy import QQ

from gmtame.algebra.polyring import LaurentMatrix, LaurentPoly, PositionOrder, TermOrder
from gmtame.core.exceptions import InternalInvariantError, RankDeficient

logger = logging.getLogger(__name__)

MINIMAL = "minimal"
REDUCED = "reduced"

Term = Tuple[Hashable, int]


class ModuleVector:
    """Element of a free Q[theta]-module: (component, theta exponent) -> coefficient"""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Term, object]] = None):
        self.terms = {key: c for key, c in (terms or {}).items() if c}

    @classmethod
    def from_column(cls, column: Sequence[LaurentPoly]) -> "ModuleVector":
        """Integer components from a column of Laurent polynomials"""
        terms = {}
        for i, entry in enumerate(column):
            for e, c in entry.terms.items():
                terms[(i, e)] = c
        return cls(terms)

    def to_column(self, dim: int) -> List[LaurentPoly]:
        entries: List[Dict[int, object]] = [{} for _ in range(dim)]
        for (i, e), c in self.terms.items():
            entries[i][e] = c
        return [LaurentPoly(t) for t in entries]

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def components(self) -> set:
        return {comp for comp, _ in self.terms}

    def component(self, comp) -> LaurentPoly:
        return LaurentPoly({e: c for (k, e), c in self.terms.items() if k == comp})

    def max_exponent(self) -> Optional[int]:
        return max((e for _, e in self.terms), default=None)

    def min_exponent(self) -> Optional[int]:
        return min((e for _, e in self.terms), default=None)

    def lead(self, order: TermOrder) -> Tuple[Hashable, int, object]:
        comp, e = max(self.terms, key=lambda t: order.key(*t))
        return comp, e, self.terms[(comp, e)]

    def shift(self, k: int) -> "ModuleVector":
        """Multiply by theta^k"""
        if k == 0:
            return self
        return ModuleVector({(comp, e + k): c for (comp, e), c in self.terms.items()})

    def scale(self, c) -> "ModuleVector":
        c = QQ.convert(c)
        return ModuleVector({key: c * v for key, v in self.terms.items()})

    def axpy(self, c, other: "ModuleVector", k: int = 0) -> "ModuleVector":
        """self + c * theta^k * other"""
        out = dict(self.terms)
        for (comp, e), v in other.terms.items():
            key = (comp, e + k)
            value = out.get(key, QQ.zero) + c * v
            if value:
                out[key] = value
            else:
                out.pop(key, None)
        vec = ModuleVector.__new__(ModuleVector)
        vec.terms = out
        return vec

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        return self.axpy(QQ.one, other)

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        return self.axpy(-QQ.one, other)

    def __neg__(self) -> "ModuleVector":
        return self.scale(-QQ.one)

    def __eq__(self, other) -> bool:
        return isinstance(other, ModuleVector) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"ModuleVector({len(self.terms)} terms)"


@dataclass
class GBasis:
    """Groebner basis with pairwise distinct leading components and monic leads"""

    generators: List[ModuleVector]
    order: TermOrder
    mode: str = MINIMAL
    by_component: Dict[Hashable, ModuleVector] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.by_component:
            self.by_component = {g.lead(self.order)[0]: g for g in self.generators}
        self._lead_exps = {comp: g.lead(self.order)[1] for comp, g in self.by_component.items()}

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def leads(self) -> List[Tuple[Hashable, int]]:
        return [g.lead(self.order)[:2] for g in self.generators]

    def lead_exponent(self, comp) -> Optional[int]:
        return self._lead_exps.get(comp)


class GroebnerBuilder:
    """Incremental basis: vectors can be added at any time, the basis stays a Groebner basis"""

    def __init__(self, order: TermOrder):
        self.order = order
        self._basis: Dict[Hashable, ModuleVector] = {}
        self._leads: Dict[Hashable, int] = {}

    def __len__(self) -> int:
        return len(self._basis)

    def add(self, v: ModuleVector):
        order = self.order
        while not v.is_zero:
            comp, e, lc = v.lead(order)
            g = self._basis.get(comp)
            if g is None:
                self._store(comp, e, v.scale(QQ.one / lc))
                return
            ge = self._leads[comp]
            if ge <= e:
                v = v.axpy(-lc, g, e - ge)
            else:
                # the new vector has the smaller lead; it takes the slot and g is reinserted
                self._store(comp, e, v.scale(QQ.one / lc))
                v = g

    def extend(self, vectors: Iterable[ModuleVector]):
        for v in vectors:
            self.add(v)

    def _store(self, comp, e, v: ModuleVector):
        self._basis[comp] = v
        self._leads[comp] = e

    def is_lead(self, comp, e: int = 0) -> bool:
        return self._leads.get(comp) == e

    def lead_exponent(self, comp) -> Optional[int]:
        return self._leads.get(comp)

    def basis(self, mode: str = MINIMAL) -> GBasis:
        items = sorted(self._basis.items(), key=lambda item: self.order.key(item[0], self._leads[item[0]]))
        gens = [v for _, v in items]
        gb = GBasis(generators=gens, order=self.order, mode=MINIMAL, by_component=dict(items))
        if mode == REDUCED:
            gb = _tail_reduce(gb)
        return gb


def groebner(gens: Iterable[ModuleVector], order: TermOrder, mode: str = MINIMAL) -> GBasis:
    """
    Groebner basis of the Q[theta]-span of gens.

    Args:
        gens: generators, all over the same component set
        order: term order on (component, exponent)
        mode: "minimal" or "reduced"

    Returns:
        GBasis with monic leads; reduced bases also have reduced tails
    """
    if mode not in (MINIMAL, REDUCED):
        raise ValueError(f"unknown basis mode '{mode}'")
    builder = GroebnerBuilder(order)
    builder.extend(gens)
    gb = builder.basis(mode)
    logger.debug(f"Groebner basis ({order.kind}, {mode}) with {len(gb)} elements")
    return gb


def _reducer(basis: GBasis, comp, e: int):
    g = basis.by_component.get(comp)
    if g is None:
        return None
    ge = basis.lead_exponent(comp)
    return (g, e - ge) if ge <= e else None


def normal_form(v: ModuleVector, basis: GBasis, skip_lead: bool = False) -> ModuleVector:
    """
    Remainder of v modulo basis, largest reducible term first.

    With skip_lead the leading term of v is kept and only its tail is reduced.
    """
    order = basis.order
    out = v
    floor = None
    if skip_lead and not v.is_zero:
        floor = order.key(*v.lead(order)[:2])
    while True:
        candidates = [
            t for t in out.terms
            if (floor is None or order.key(*t) < floor) and _reducer(basis, *t) is not None
        ]
        if not candidates:
            return out
        comp, e = max(candidates, key=lambda t: order.key(*t))
        g, shift = _reducer(basis, comp, e)
        out = out.axpy(-out.terms[(comp, e)], g, shift)


def divide(v: ModuleVector, basis: GBasis) -> Tuple[Dict[Hashable, LaurentPoly], ModuleVector]:
    """
    v = sum_c q_c * g_c + remainder, g_c the basis element with leading component c.

    For a basis of a free module and v in its span the quotients are the unique
    coordinates of v and the remainder is zero.
    """
    order = basis.order
    quotients: Dict[Hashable, Dict[int, object]] = {}
    out = v
    while True:
        candidates = [t for t in out.terms if _reducer(basis, *t) is not None]
        if not candidates:
            break
        comp, e = max(candidates, key=lambda t: order.key(*t))
        g, shift = _reducer(basis, comp, e)
        c = out.terms[(comp, e)]
        q = quotients.setdefault(comp, {})
        q[shift] = q.get(shift, QQ.zero) + c
        out = out.axpy(-c, g, shift)
    return {comp: LaurentPoly(q) for comp, q in quotients.items() if any(q.values())}, out


def _tail_reduce(gb: GBasis) -> GBasis:
    reduced = [normal_form(g, gb, skip_lead=True) for g in gb.generators]
    by_component = {g.lead(gb.order)[0]: g for g in reduced}
    return GBasis(generators=reduced, order=gb.order, mode=REDUCED, by_component=by_component)


def membership(v: ModuleVector, basis: GBasis) -> bool:
    """True iff v lies in the Q[theta]-span of basis"""
    return normal_form(v, basis).is_zero


def check_basis(basis: GBasis, gens: Optional[Iterable[ModuleVector]] = None):
    """
    Post-hoc consistency of a basis.

    Raises:
        InternalInvariantError: leads collide, leads are not monic, tails are not
            reduced in reduced mode, or an input generator is not in the span
    """
    order = basis.order
    seen = set()
    for g in basis.generators:
        comp, e, lc = g.lead(order)
        if comp in seen:
            raise InternalInvariantError(f"two basis elements share the leading component {comp}")
        if lc != 1:
            raise InternalInvariantError("basis element with non-monic lead")
        seen.add(comp)
        if basis.mode == REDUCED:
            floor = order.key(comp, e)
            for t in g.terms:
                if order.key(*t) < floor and _reducer(basis, *t) is not None:
                    raise InternalInvariantError(f"reducible tail term {t} in a reduced basis")
    for v in gens or ():
        if not membership(v, basis):
            raise InternalInvariantError("input generator not contained in the span of its basis")


def lattice_basis_from_generators(columns: Sequence[Sequence[LaurentPoly]], dim: int) -> LaurentMatrix:
    """
    Basis of the Q[tau]-span of a generating set of a lattice of rank dim.

    All vectors are multiplied by tau^d, d the largest theta exponent, which puts
    them in Q[tau]^dim; the reduced echelon form there has monomial pivots tau^e,
    and multiplying back by theta^d gives theta-polynomial columns.

    Returns:
        upper triangular LaurentMatrix whose j-th diagonal entry is a power of theta

    Raises:
        RankDeficient: the span has rank below dim or is not a lattice
    """
    vectors = [ModuleVector.from_column(col) for col in columns]
    vectors = [v for v in vectors if not v.is_zero]
    if not vectors:
        raise RankDeficient(f"no generators for a lattice of rank {dim}")
    d = max(v.max_exponent() for v in vectors)
    # tau exponent of theta^e * tau^d is d - e
    flipped = [ModuleVector({(c, d - e): x for (c, e), x in v.terms.items()}) for v in vectors]
    gb = groebner(flipped, PositionOrder(), REDUCED)
    if len(gb) != dim:
        raise RankDeficient(f"generated lattice has rank {len(gb)}, expected {dim}")
    out_columns = []
    for comp in range(dim):
        g = gb.by_component.get(comp)
        if g is None:
            raise RankDeficient(f"no pivot in component {comp}")
        pivot = g.component(comp)
        if len(pivot.terms) != 1:
            raise RankDeficient(f"pivot in component {comp} is not a power of tau: {pivot}")
        out_columns.append(ModuleVector({(c, d - e): x for (c, e), x in g.terms.items()}).to_column(dim))
    return LaurentMatrix.from_columns(out_columns, dim)


def triangular_inverse(u: LaurentMatrix) -> LaurentMatrix:
    """
    Inverse of an upper triangular Laurent matrix with monomial diagonal.

    Raises:
        RankDeficient: a diagonal entry is not a unit of Q[theta, theta^-1]
    """
    n = u.rows
    inv_diag = []
    for i in range(n):
        entry = u[i, i]
        if len(entry.terms) != 1:
            raise RankDeficient(f"diagonal entry {entry} is not a unit")
        (e, c), = entry.terms.items()
        inv_diag.append(LaurentPoly({-e: QQ.one / c}))
    rows = [[LaurentPoly() for _ in range(n)] for _ in range(n)]
    for j in range(n):
        for i in range(n - 1, -1, -1):
            acc = LaurentPoly.constant(1) if i == j else LaurentPoly()
            for k in range(i + 1, n):
                if u[i, k].terms and rows[k][j].terms:
                    acc = acc - u[i, k] * rows[k][j]
            rows[i][j] = acc * inv_diag[i]
    return LaurentMatrix(rows, n)


def is_upper_triangular(u: LaurentMatrix) -> bool:
    return all(u[i, j].is_zero for j in range(u.cols) for i in range(j + 1, u.rows))
