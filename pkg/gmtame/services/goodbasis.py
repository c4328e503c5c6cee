"""
Good bases of a good lattice.

Starting from the level-order basis of the lattice in graded coordinates, the
t-action theta (B - (alpha_i + k) + theta d/dtheta) is expanded in the basis and
every term of positive theta power is removed by a single correction, highest
term first, until t acts as A0 + theta A1 with A1 diagonal.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple
import logging

from sympy import QQ

from gmtame.algebra.exactmath import QMatrix
from gmtame.algebra.modgroebner import GBasis, MINIMAL, ModuleVector, divide, groebner
from gmtame.algebra.polyring import LaurentMatrix, LaurentPoly, LevelOrder
from gmtame.core.config import settings
from gmtame.core.exceptions import (
    DecompositionStall,
    IterationCapExceeded,
    NotGoodLattice,
    ZeroDenominator,
)
from gmtame.services.hodge import GradedBasis

logger = logging.getLogger(__name__)

Block = Tuple[int, int]


@dataclass
class BlockBasis:
    """Lattice basis whose element b has leading term at theta level k_b in group i_b"""

    elements: List[ModuleVector]
    order: LevelOrder
    n: int
    mu: int
    blocks: List[Block] = field(default_factory=list)

    def __post_init__(self):
        keys = [g.lead(self.order)[:2] for g in self.elements]
        self.blocks = [(k, self.order.groups[comp]) for comp, k in keys]

    def members(self, block: Block) -> List[int]:
        return [b for b, key in enumerate(self.blocks) if key == block]

    def value(self, b: int):
        """V-degree k + alpha_i of element b"""
        k, i = self.blocks[b]
        return k + self.order.alphas[i]

    def gbasis(self) -> GBasis:
        return GBasis(generators=list(self.elements), order=self.order, mode=MINIMAL)

    def matrix(self) -> LaurentMatrix:
        return LaurentMatrix.from_columns([g.to_column(self.mu) for g in self.elements], self.mu)

    def level_span(self) -> int:
        levels = [k for k, _ in self.blocks]
        return max(levels) - min(levels) + 1 if levels else 1


@dataclass
class GoodBasisData:
    M: LaurentMatrix
    A0: QMatrix
    A1: QMatrix
    values: List
    corrections: int = 0


def block_basis(M: LaurentMatrix, graded: GradedBasis, n: int) -> BlockBasis:
    """
    Minimal basis of the lattice in the order (level, alpha, filtration level, column).

    Raises:
        NotGoodLattice: a leading term sits at filtration level other than n - k
    """
    order = LevelOrder(graded.alphas, graded.groups, graded.levels)
    gb = groebner([ModuleVector.from_column(c) for c in M.columns()], order, MINIMAL)
    elements = sorted(gb.generators, key=lambda g: order.key(*g.lead(order)[:2]))
    for g in elements:
        comp, k, _ = g.lead(order)
        if graded.levels[comp] != n - k:
            raise NotGoodLattice(
                f"leading term at theta level {k} has filtration level {graded.levels[comp]}, expected {n - k}",
                stage="goodbasis",
            )
    return BlockBasis(elements=elements, order=order, n=n, mu=M.rows)


def _t_images(bb: BlockBasis, B: LaurentMatrix) -> LaurentMatrix:
    """theta (B + theta d/dtheta) applied to every element"""
    Mm = bb.matrix()
    return (B @ Mm + Mm.theta_euler()).shift(1)


def _coordinates(bb: BlockBasis, gb: GBasis, images: LaurentMatrix) -> List[Dict[int, LaurentPoly]]:
    """Q[theta]-coordinates of each image column, keyed by element index"""
    index = {g.lead(bb.order)[0]: b for b, g in enumerate(bb.elements)}
    out = []
    for b, column in enumerate(images.columns()):
        quotients, remainder = divide(ModuleVector.from_column(column), gb)
        if not remainder.is_zero:
            raise DecompositionStall(f"t-image of element {b} leaves the lattice", stage="goodbasis")
        out.append({index[comp]: q for comp, q in quotients.items()})
    return out


def expand_t_action(bb: BlockBasis, B: LaurentMatrix) -> List[Dict[int, LaurentPoly]]:
    """
    Coordinates of theta (B - (alpha_i + k) + theta d/dtheta) m_b for every element b.

    Entry [b][a] is the Q[theta] coefficient of element a; its theta^s coefficient
    is A^{k,i}_{s,l,j} for the blocks (k,i) of b and (l,j) of a.
    """
    images = _t_images(bb, B)
    table = _coordinates(bb, bb.gbasis(), images)
    for b, coords in enumerate(table):
        own = coords.get(b, LaurentPoly()) - LaurentPoly.monomial(1, bb.value(b))
        if own.is_zero:
            coords.pop(b, None)
        else:
            coords[b] = own
    return table


def _select(bb: BlockBasis, table: List[Dict[int, LaurentPoly]]):
    """Maximal (s+l, alpha_j, n-l) over nonzero coefficients with s >= 1; ties by largest (k, alpha_i)"""
    alphas = bb.order.alphas
    best = None
    for b, coords in enumerate(table):
        k, i = bb.blocks[b]
        for a, q in coords.items():
            l, j = bb.blocks[a]
            for s, c in q.terms.items():
                if s < 1:
                    continue
                rank = ((s + l, alphas[j], bb.n - l), (k, alphas[i]))
                if best is None or rank > best[0]:
                    best = (rank, (k, i), (s, l, j))
    return best


def good_basis(bb: BlockBasis, B: LaurentMatrix) -> Tuple[BlockBasis, int]:
    """
    Correct the basis until no coefficient with s >= 1 remains.

    Returns:
        (corrected basis, number of corrections)

    Raises:
        ZeroDenominator: a correction coefficient has zero denominator
        IterationCapExceeded: the correction count passed the safety cap
    """
    cap = settings.GOODBASIS_CAP_FACTOR * bb.mu * bb.level_span() ** 2
    alphas = bb.order.alphas
    for step in range(cap + 1):
        table = expand_t_action(bb, B)
        best = _select(bb, table)
        if best is None:
            logger.info(f"Good basis reached after {step} corrections")
            return bb, step
        _, (k, i), (s, l, j) = best
        denominator = 1 + k + alphas[i] - s - l - alphas[j]
        if denominator == 0:
            raise ZeroDenominator(
                f"correction of block ({k},{i}) by ({s},{l},{j}) has zero denominator", stage="goodbasis"
            )
        c = QQ.one / denominator
        sources = bb.members((l, j))
        elements = list(bb.elements)
        for b in bb.members((k, i)):
            update = elements[b]
            for a in sources:
                coeff = table[b].get(a, LaurentPoly()).coeff(s)
                if coeff:
                    update = update.axpy(c * coeff, bb.elements[a], s - 1)
            elements[b] = update
        logger.debug(f"Correction {step + 1}: block ({k},{i}) += theta^{s - 1} block ({l},{j})")
        bb = BlockBasis(elements=elements, order=bb.order, n=bb.n, mu=bb.mu)
    raise IterationCapExceeded(f"good basis not reached after {cap} corrections", stage="goodbasis")


def t_matrix(bb: BlockBasis, B: LaurentMatrix) -> LaurentMatrix:
    """Matrix of t in the basis phi M, i.e. coordinates of theta (B + theta d/dtheta) M"""
    table = _coordinates(bb, bb.gbasis(), _t_images(bb, B))
    mu = bb.mu
    rows = [[LaurentPoly() for _ in range(mu)] for _ in range(mu)]
    for b, coords in enumerate(table):
        for a, q in coords.items():
            rows[a][b] = q
    return LaurentMatrix(rows, mu)


def split_good_matrix(A: LaurentMatrix, values: List) -> Tuple[QMatrix, QMatrix]:
    """
    A = A0 + theta A1 with A1 = diag(values).

    Raises:
        NotGoodLattice: A has other theta powers or A1 is not the expected diagonal
    """
    if A.valuation() is not None and (A.valuation() < 0 or A.degree() > 1):
        raise NotGoodLattice("t-matrix has theta powers outside [0, 1]", stage="goodbasis")
    A0, A1 = A.coefficient(0), A.coefficient(1)
    if A1 != QMatrix.diagonal(values):
        raise NotGoodLattice("theta-linear part of the t-matrix is not diag(k + alpha_i)", stage="goodbasis")
    return A0, A1


def compute_good_basis(M: LaurentMatrix, B: LaurentMatrix, graded: GradedBasis, n: int) -> GoodBasisData:
    """Good basis of the lattice phi M in graded coordinates, with A0 and A1"""
    bb = block_basis(M, graded, n)
    bb, steps = good_basis(bb, B)
    values = [bb.value(b) for b in range(bb.mu)]
    A0, A1 = split_good_matrix(t_matrix(bb, B), values)
    return GoodBasisData(M=bb.matrix(), A0=A0, A1=A1, values=values, corrections=steps)
