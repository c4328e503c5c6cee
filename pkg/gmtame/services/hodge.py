"""
Opposite filtrations on gr^V.

For a good lattice the filtration it induces on each generalized eigenspace of
B0 is strict for the nilpotent part N_i = B0^i - alpha_i. Splitting the flag
into N-chains gives a constant basis change U whose columns carry an
eigenvalue group and a filtration level.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple
import logging

from sympy import QQ

from gmtame.algebra.exactmath import EigenDecomposition, QMatrix, column_rank
from gmtame.algebra.modgroebner import GBasis
from gmtame.algebra.polyring import LaurentMatrix
from gmtame.core.exceptions import NotGoodLattice

logger = logging.getLogger(__name__)

Flag = Dict[int, List[List]]


@dataclass
class GradedBasis:
    """Columns of U indexed by eigenvalue group and filtration level"""

    U: QMatrix
    U_inv: QMatrix
    groups: List[int]
    levels: List[int]
    alphas: List
    blocks: List[QMatrix] = field(default_factory=list, repr=False)


def filtration_flags(gb: GBasis, eigen: EigenDecomposition, n: int) -> List[Flag]:
    """
    Per group i, the decreasing flag F^{i,p} spanned by the leading forms of
    basis elements of group i at theta level k <= n - p.

    Returns:
        one dict per group mapping p to a spanning list of vectors in group coordinates;
        every p between the lowest and highest level is present
    """
    groups = eigen.group_of()
    offsets = eigen.offsets
    sizes = [m for _, m in eigen.eigenvalues]
    forms: List[List[Tuple[int, List]]] = [[] for _ in sizes]
    for g in gb.generators:
        comp, k, _ = g.lead(gb.order)
        i = groups[comp]
        vec = [g.terms.get((offsets[i] + r, k), QQ.zero) for r in range(sizes[i])]
        forms[i].append((k, vec))
    flags = []
    for i, entries in enumerate(forms):
        if not entries:
            flags.append({})
            continue
        levels = [k for k, _ in entries]
        low, high = n - max(levels), n - min(levels)
        flag = {p: [v for k, v in entries if k <= n - p] for p in range(low, high + 1)}
        flags.append(flag)
    return flags


def _kernel_in(space: List[List], power: QMatrix, dim: int) -> List[List]:
    """Basis of ker(power) intersected with span(space)"""
    if not space:
        return []
    S = QMatrix.from_columns(space, dim)
    coeffs = (power @ S).nullspace()
    return [S.apply(c) for c in coeffs]


def strict_flag_split(flag: Flag, N: QMatrix) -> List[Tuple[List, int]]:
    """
    Basis of chains b, Nb, ..., N^(q-1) b placed at levels p, p-1, ..., p-q+1.

    Args:
        flag: decreasing flag p -> spanning vectors, with the lowest level the whole space
        N: nilpotent endomorphism lowering the flag by one step

    Returns:
        list of (vector, level); the columns at levels >= p span F^p, and N maps
        each column to the next column of its chain or to zero

    Raises:
        NotGoodLattice: N is not strict for the flag
    """
    dim = N.rows
    if not flag:
        return []
    chosen: List[Tuple[List, int]] = []
    span: List[List] = []
    for level in sorted(flag, reverse=True):
        F = flag[level]
        for q in range(1, dim + 2):
            if column_rank(span + F, dim) == column_rank(span, dim):
                break
            if q > dim:
                raise NotGoodLattice(f"flag level {level} not exhausted by N-chains", stage="hodge")
            K_q = _kernel_in(F, N ** q, dim)
            K_prev = _kernel_in(F, N ** (q - 1), dim) if q > 1 else []
            for b in K_q:
                base = span + K_prev
                if column_rank(base + [b], dim) == column_rank(base, dim):
                    continue
                chain = [b]
                for _ in range(q - 1):
                    chain.append(N.apply(chain[-1]))
                before = column_rank(span, dim)
                if column_rank(span + chain, dim) != before + q:
                    raise NotGoodLattice(
                        f"chain of length {q} from level {level} is not independent of earlier chains",
                        stage="hodge",
                    )
                for r, v in enumerate(chain):
                    chosen.append((v, level - r))
                span = span + chain
    if column_rank(span, dim) != dim or len(chosen) != dim:
        raise NotGoodLattice(f"N-chains span {column_rank(span, dim)} of {dim} dimensions", stage="hodge")
    _check_flag(flag, chosen, dim)
    return chosen


def _check_flag(flag: Flag, chosen: Sequence[Tuple[List, int]], dim: int):
    for p, F in flag.items():
        cols = [v for v, level in chosen if level >= p]
        rank_f = column_rank(F, dim)
        if len(cols) != rank_f or column_rank(cols + F, dim) != rank_f:
            raise NotGoodLattice(f"chain basis does not span the filtration step {p}", stage="hodge")


def opposite_basis(gb: GBasis, eigen: EigenDecomposition, n: int) -> GradedBasis:
    """
    Constant basis change U = U0 * blockdiag(U^1, ..., U^nu) adapted to the
    V-filtration refined by an opposite filtration.

    Args:
        gb: basis of U0^-1 M in the level order, as returned with the spectrum
        eigen: generalized eigenspaces of B0
        n: number of variables minus one
    """
    flags = filtration_flags(gb, eigen, n)
    blocks, levels, groups = [], [], []
    for i, ((alpha, mult), flag) in enumerate(zip(eigen.eigenvalues, flags)):
        N = eigen.blocks[i].shift(-alpha)
        chosen = strict_flag_split(flag, N)
        chosen.sort(key=lambda item: -item[1])
        blocks.append(QMatrix.from_columns([v for v, _ in chosen], mult))
        levels.extend(level for _, level in chosen)
        groups.extend([i] * mult)
        logger.debug(f"Group {i} (alpha={alpha}): levels {[level for _, level in chosen]}")
    U = eigen.transform @ QMatrix.block_diagonal(blocks)
    return GradedBasis(
        U=U,
        U_inv=U.inverse(),
        groups=groups,
        levels=levels,
        alphas=[a for a, _ in eigen.eigenvalues],
        blocks=blocks,
    )


def conjugate(graded: GradedBasis, B: LaurentMatrix, M: LaurentMatrix) -> Tuple[LaurentMatrix, LaurentMatrix]:
    """B and M in the coordinates of the graded basis"""
    U_inv = LaurentMatrix.from_qmatrix(graded.U_inv)
    return U_inv @ B @ graded.U, U_inv @ M
