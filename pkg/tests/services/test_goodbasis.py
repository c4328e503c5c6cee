import pytest
from sympy import QQ

from gmtame.algebra.exactmath import QMatrix
from gmtame.algebra.polyring import LaurentMatrix, LaurentPoly
from gmtame.core.config import settings
from gmtame.core.exceptions import IterationCapExceeded, NotGoodLattice, ZeroDenominator
from gmtame.services.goodbasis import (
    block_basis,
    compute_good_basis,
    expand_t_action,
    good_basis,
    split_good_matrix,
    t_matrix,
)
from gmtame.services.hodge import GradedBasis, conjugate, opposite_basis
from gmtame.services.pipeline import run
from tests.helpers import lattice_stages

A0 = QMatrix([[0, 1], [2, 0]])


def graded_basis(alphas, groups, levels) -> GradedBasis:
    mu = len(groups)
    return GradedBasis(
        U=QMatrix.identity(mu),
        U_inv=QMatrix.identity(mu),
        groups=list(groups),
        levels=list(levels),
        alphas=[QQ.convert(a) for a in alphas],
    )


def constant(rows) -> LaurentMatrix:
    return LaurentMatrix.from_qmatrix(QMatrix(rows))


class TestBlockBasis:
    def test_sorted_by_level_and_eigenvalue(self):
        graded = graded_basis([QQ(2, 3), QQ(1, 3)], [0, 1], [1, 1])
        bb = block_basis(LaurentMatrix.identity(2), graded, 1)
        assert bb.blocks == [(0, 1), (0, 0)]
        assert [bb.value(b) for b in range(2)] == [QQ(1, 3), QQ(2, 3)]
        assert bb.members((0, 0)) == [1]
        assert bb.level_span() == 1
        assert bb.matrix() == constant([[0, 1], [1, 0]])

    def test_theta_levels(self):
        M = LaurentMatrix([[LaurentPoly.constant(1), LaurentPoly()], [LaurentPoly(), LaurentPoly.monomial(1)]])
        graded = graded_basis([QQ(1, 2)], [0, 0], [1, 0])
        bb = block_basis(M, graded, 1)
        assert bb.blocks == [(0, 0), (1, 0)]
        assert bb.value(1) == QQ(3, 2)
        assert bb.level_span() == 2

    def test_wrong_filtration_level(self):
        graded = graded_basis([QQ(2, 3), QQ(1, 3)], [0, 1], [0, 1])
        with pytest.raises(NotGoodLattice):
            block_basis(LaurentMatrix.identity(2), graded, 1)


class TestExpandTAction:
    def test_good_input_has_no_corrections(self):
        graded = graded_basis([QQ(2, 3), QQ(1, 3)], [0, 1], [1, 1])
        bb = block_basis(LaurentMatrix.identity(2), graded, 1)
        B = constant([[QQ(2, 3), 0], [0, QQ(1, 3)]])
        assert expand_t_action(bb, B) == [{}, {}]
        assert good_basis(bb, B) == (bb, 0)

    def test_single_element(self):
        graded = graded_basis([1], [0], [1])
        bb = block_basis(LaurentMatrix.identity(1), graded, 1)
        B = constant([[1]])
        assert expand_t_action(bb, B) == [{}]
        good = compute_good_basis(LaurentMatrix.identity(1), B, graded, 1)
        assert good.A0 == QMatrix.zeros(1, 1)
        assert good.A1 == QMatrix([[1]])
        assert good.corrections == 0

    def test_nilpotent_part_stays_in_a0(self):
        # chain e0 -> e1 with e1 one theta level higher
        M = LaurentMatrix([[LaurentPoly.constant(1), LaurentPoly()], [LaurentPoly(), LaurentPoly.monomial(1)]])
        graded = graded_basis([QQ(1, 2)], [0, 0], [1, 0])
        B = constant([[QQ(1, 2), 0], [1, QQ(1, 2)]])
        bb = block_basis(M, graded, 1)
        table = expand_t_action(bb, B)
        assert table == [{1: LaurentPoly.constant(1)}, {}]
        good = compute_good_basis(M, B, graded, 1)
        assert good.A0 == QMatrix([[0, 0], [1, 0]])
        assert good.A1 == QMatrix.diagonal([QQ(1, 2), QQ(3, 2)])

    def test_off_diagonal_term_needs_correction(self):
        graded = graded_basis([QQ(1, 2), QQ(1, 3)], [0, 1], [1, 1])
        B = constant([[QQ(1, 2), 0], [1, QQ(1, 3)]])
        bb = block_basis(LaurentMatrix.identity(2), graded, 1)
        assert expand_t_action(bb, B) == [{}, {0: LaurentPoly.monomial(1)}]


class TestGoodBasis:
    def test_single_correction(self):
        graded = graded_basis([QQ(1, 2), QQ(1, 3)], [0, 1], [1, 1])
        B = constant([[QQ(1, 2), 0], [1, QQ(1, 3)]])
        bb, steps = good_basis(block_basis(LaurentMatrix.identity(2), graded, 1), B)
        assert steps == 1
        # e0 + 6 e1: the denominator is 1 + 1/2 - 1 - 1/3 = 1/6
        assert bb.matrix() == constant([[0, 1], [1, 6]])
        assert expand_t_action(bb, B) == [{}, {}]
        A0_good, A1_good = split_good_matrix(t_matrix(bb, B), [bb.value(b) for b in range(2)])
        assert A0_good == QMatrix.zeros(2, 2)
        assert A1_good == QMatrix.diagonal([QQ(1, 3), QQ(1, 2)])

    def test_zero_denominator(self):
        graded = graded_basis([QQ(1, 2)], [0, 0], [1, 1])
        B = constant([[QQ(1, 2), 0], [1, QQ(1, 2)]])
        bb = block_basis(LaurentMatrix.identity(2), graded, 1)
        with pytest.raises(ZeroDenominator) as exc:
            good_basis(bb, B)
        assert exc.value.stage == "goodbasis"

    def test_correction_cap(self, monkeypatch):
        monkeypatch.setattr(settings, "GOODBASIS_CAP_FACTOR", 0)
        graded = graded_basis([QQ(1, 2), QQ(1, 3)], [0, 1], [1, 1])
        B = constant([[QQ(1, 2), 0], [1, QQ(1, 3)]])
        bb = block_basis(LaurentMatrix.identity(2), graded, 1)
        with pytest.raises(IterationCapExceeded) as exc:
            good_basis(bb, B)
        assert exc.value.exit_code == 4

    def test_polynomial_with_corrections(self, xy):
        text = "x^3+y^3+x^2*y^2"
        _, vb, spectrum = lattice_stages(text, xy)
        graded = opposite_basis(spectrum.gbasis, vb.eigen, xy.n)
        B, M = conjugate(graded, vb.B, vb.U_inv)
        bb = block_basis(M, graded, xy.n)
        assert any(expand_t_action(bb, B))
        corrected, steps = good_basis(bb, B)
        assert steps > 0
        assert expand_t_action(corrected, B) == [{} for _ in range(corrected.mu)]
        good = compute_good_basis(M, B, graded, xy.n)
        assert good.corrections == steps
        assert sorted(good.values) == spectrum.multiset()
        assert good.A1 == QMatrix.diagonal(good.values)
        assert run(xy.parse(text), xy).stats["corrections"] == steps


def test_split():
    A1 = QMatrix.diagonal([QQ(1, 2), QQ(3, 2)])
    A = LaurentMatrix.from_coefficients({0: A0, 1: A1})
    assert split_good_matrix(A, [QQ(1, 2), QQ(3, 2)]) == (A0, A1)


def test_constant_matrix_needs_zero_values():
    A = LaurentMatrix.from_qmatrix(A0)
    assert split_good_matrix(A, [QQ(0), QQ(0)]) == (A0, QMatrix.zeros(2, 2))


def test_theta_square_rejected():
    A = LaurentMatrix.from_coefficients({0: A0, 2: QMatrix.identity(2)})
    with pytest.raises(NotGoodLattice):
        split_good_matrix(A, [QQ(0), QQ(0)])


def test_negative_power_rejected():
    A = LaurentMatrix.from_qmatrix(QMatrix.identity(2), shift=-1)
    with pytest.raises(NotGoodLattice):
        split_good_matrix(A, [QQ(0), QQ(0)])


def test_non_diagonal_linear_part_rejected():
    A = LaurentMatrix.from_coefficients({1: QMatrix([[1, 1], [0, 1]])})
    with pytest.raises(NotGoodLattice):
        split_good_matrix(A, [QQ(1), QQ(1)])
