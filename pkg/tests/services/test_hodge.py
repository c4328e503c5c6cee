import random

import pytest
from sympy import QQ

from gmtame.algebra.exactmath import QMatrix, column_rank
from gmtame.algebra.polyring import LaurentMatrix
from gmtame.core.exceptions import NotGoodLattice
from gmtame.services.hodge import conjugate, filtration_flags, opposite_basis, strict_flag_split
from tests.helpers import jordan_nilpotent, lattice_stages, random_unimodular

E0 = [QQ(1), QQ(0)]
E1 = [QQ(0), QQ(1)]


def test_single_chain():
    N = jordan_nilpotent([2])
    chosen = strict_flag_split({1: [E0], 0: [E0, E1]}, N)
    assert chosen == [(E0, 1), (E1, 0)]


def test_empty_flag():
    assert strict_flag_split({}, QMatrix.zeros(0, 0)) == []


def test_zero_nilpotent():
    chosen = strict_flag_split({0: [E0, E1]}, QMatrix.zeros(2, 2))
    assert sorted(level for _, level in chosen) == [0, 0]
    assert column_rank([v for v, _ in chosen], 2) == 2


def test_not_strict():
    # N e0 = e1 while F^1 is the kernel line
    N = jordan_nilpotent([2])
    with pytest.raises(NotGoodLattice, match="not independent"):
        strict_flag_split({1: [E1], 0: [E0, E1]}, N)


def test_flag_not_exhausted():
    with pytest.raises(NotGoodLattice, match="not exhausted"):
        strict_flag_split({0: [E0, E1]}, QMatrix.identity(2))


def test_flag_misses_dimensions():
    with pytest.raises(NotGoodLattice, match="span 1 of 2"):
        strict_flag_split({0: [E0]}, QMatrix.zeros(2, 2))


def random_strict_input(rng: random.Random):
    """Flag of chains with random top levels, hidden by a unimodular change"""
    dim = rng.randint(1, 6)
    partition, left = [], dim
    while left:
        size = rng.randint(1, left)
        partition.append(size)
        left -= size
    levels = []
    for size in partition:
        top = rng.randint(0, 2)
        levels.extend(top - r for r in range(size))
    p = random_unimodular(rng, dim)
    N = p @ jordan_nilpotent(partition) @ p.inverse()
    columns = [[p[i, j] for i in range(dim)] for j in range(dim)]
    flag = {
        level: [c for c, lv in zip(columns, levels) if lv >= level]
        for level in range(min(levels), max(levels) + 1)
    }
    return flag, N, partition


@pytest.mark.parametrize("seed", range(200))
def test_random_strict_flags(seed):
    rng = random.Random(seed)
    flag, N, partition = random_strict_input(rng)
    dim = N.rows
    chosen = strict_flag_split(flag, N)
    assert len(chosen) == dim
    assert column_rank([v for v, _ in chosen], dim) == dim
    for level, F in flag.items():
        cols = [v for v, lv in chosen if lv >= level]
        assert column_rank(cols, dim) == column_rank(F, dim)
        assert column_rank(cols + F, dim) == column_rank(F, dim)
    zero = [QQ.zero] * dim
    for v, level in chosen:
        image = N.apply(v)
        assert image == zero or (image, level - 1) in chosen


@pytest.mark.parametrize("text", ["x^2+y^2+x^2*y^2", "x^3+y^3", "x^2+y^3"])
def test_filtration_flags_decrease(xy, text):
    _, vb, spectrum = lattice_stages(text, xy)
    flags = filtration_flags(spectrum.gbasis, vb.eigen, xy.n)
    assert len(flags) == len(vb.eigen.eigenvalues)
    for (_, mult), flag in zip(vb.eigen.eigenvalues, flags):
        levels = sorted(flag)
        assert levels == list(range(levels[0], levels[-1] + 1))
        assert column_rank(flag[levels[0]], mult) == mult
        for p in levels[1:]:
            assert column_rank(flag[p - 1] + flag[p], mult) == column_rank(flag[p - 1], mult)


def test_filtration_flags_of_quartic(xy):
    # the eigenvalue 1/2 group carries a chain through two levels
    _, vb, spectrum = lattice_stages("x^2+y^2+x^2*y^2", xy)
    flags = filtration_flags(spectrum.gbasis, vb.eigen, xy.n)
    ranks = [
        {p: column_rank(F, mult) for p, F in flag.items()}
        for (_, mult), flag in zip(vb.eigen.eigenvalues, flags)
    ]
    assert sorted(max(r.values()) for r in ranks) == [2, 3]
    assert any(len(r) == 2 for r in ranks)


@pytest.mark.parametrize("text", ["x^2+y^2+x^2*y^2", "x^3+y^3", "x^2+y^3", "x^2+y^2"])
def test_opposite_basis(xy, text):
    _, vb, spectrum = lattice_stages(text, xy)
    graded = opposite_basis(spectrum.gbasis, vb.eigen, xy.n)
    mu = spectrum.mu
    assert graded.U @ graded.U_inv == QMatrix.identity(mu)
    assert len(graded.groups) == len(graded.levels) == mu
    assert graded.groups == sorted(graded.groups)
    # a lattice element with leading column c sits at theta level n - p_c
    values = sorted(xy.n - p + graded.alphas[i] for i, p in zip(graded.groups, graded.levels))
    assert values == spectrum.multiset()
    for i, (alpha, mult) in enumerate(vb.eigen.eigenvalues):
        N = vb.eigen.blocks[i].shift(-alpha)
        columns = graded.blocks[i].columns()
        zero = [QQ.zero] * mult
        for v in columns:
            image = N.apply(v)
            assert image == zero or image in columns
    B, M = conjugate(graded, vb.B, vb.U_inv)
    assert B.coefficient(0) == QMatrix.block_diagonal(
        [b.inverse() @ blk @ b for b, blk in zip(graded.blocks, vb.eigen.blocks)]
    )
    assert LaurentMatrix.from_qmatrix(graded.U) @ M == vb.U_inv
