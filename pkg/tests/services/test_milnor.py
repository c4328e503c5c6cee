import pytest
from sympy import QQ

from gmtame.core.exceptions import NotIsolated
from gmtame.services.milnor import (
    is_milnor_basis,
    milnor_algebra_matrix,
    milnor_data,
    quasihomogeneous_spectrum,
    quasihomogeneous_weights,
)


@pytest.mark.parametrize(
    "text, mu",
    [
        ("x^2+y^2", 1),
        ("x*y", 1),
        ("x^3+y^3", 4),
        ("x^2+y^3", 2),
        ("x^2+y^2+x^2*y^2", 5),
    ],
)
def test_milnor_number(xy, text, mu):
    data = milnor_data(xy.parse(text), xy)
    assert data.mu == mu
    assert len(data.standard_monomials) == mu
    assert data.standard_monomials[0] == (0, 0)


def test_standard_monomials(xy):
    data = milnor_data(xy.parse("x^3+y^3"), xy)
    assert set(data.standard_monomials) == {(0, 0), (1, 0), (0, 1), (1, 1)}
    assert [sum(m) for m in data.standard_monomials] == [0, 1, 1, 2]


def test_three_variables(xyz):
    data = milnor_data(xyz.parse("x^2+y^2+z^2"), xyz)
    assert data.mu == 1


def test_not_isolated(xy):
    with pytest.raises(NotIsolated) as exc:
        milnor_data(xy.parse("x^2*y"), xy)
    assert exc.value.exit_code == 3
    assert exc.value.stage == "milnor"


def test_no_critical_points(xy):
    data = milnor_data(xy.parse("x+y"), xy)
    assert data.mu == 0
    assert data.standard_monomials == []


def test_milnor_basis(xy):
    data = milnor_data(xy.parse("x^3+y^3"), xy)
    x, y = xy.xs
    one = xy.ring.one
    assert is_milnor_basis([one, x, y, x * y], data)
    assert is_milnor_basis([one + x, x, y, x * y + xy.theta], data)
    assert not is_milnor_basis([one, x, x, x * y], data)
    assert not is_milnor_basis([one, x, y], data)


def test_multiplication_matrix(xy):
    f = xy.parse("x^3+y^3")
    data = milnor_data(f, xy)
    x, _ = xy.xs
    by_x = milnor_algebra_matrix(x, data)
    assert by_x.rank() == 2
    assert (by_x @ by_x).is_zero()
    # f lies in its own Jacobian ideal when it is quasi-homogeneous
    assert milnor_algebra_matrix(f, data).is_zero()


def test_multiplication_matrix_in_other_basis(xy):
    data = milnor_data(xy.parse("x^3+y^3"), xy)
    x, y = xy.xs
    one = xy.ring.one
    basis = [one + y, x, y, x * y]
    m = milnor_algebra_matrix(x, data, basis=basis)
    # x (1 + y) = x + xy, x * x = 0, x * y = xy, x * xy = 0
    assert m[1, 0] == 1 and m[3, 0] == 1
    assert m[3, 2] == 1
    assert m.rank() == 2


class TestQuasiHomogeneous:
    def test_weights(self, xy):
        assert quasihomogeneous_weights(xy.parse("x^3+y^3"), xy) == [QQ(1, 3), QQ(1, 3)]
        assert quasihomogeneous_weights(xy.parse("x^2+y^3"), xy) == [QQ(1, 2), QQ(1, 3)]

    def test_not_quasihomogeneous(self, xy):
        assert quasihomogeneous_weights(xy.parse("x^2+y^2+x^2*y^2"), xy) is None
        # x*y has a one-parameter family of weights
        assert quasihomogeneous_weights(xy.parse("x*y"), xy) is None

    def test_spectrum_formula(self, xy):
        f = xy.parse("x^3+y^3")
        assert quasihomogeneous_spectrum(f, milnor_data(f, xy)) == {QQ(2, 3): 1, QQ(1): 2, QQ(4, 3): 1}
        g = xy.parse("x^2+y^3")
        assert quasihomogeneous_spectrum(g, milnor_data(g, xy)) == {QQ(5, 6): 1, QQ(7, 6): 1}

    def test_no_formula_without_weights(self, xy):
        f = xy.parse("x^2+y^2+x^2*y^2")
        assert quasihomogeneous_spectrum(f, milnor_data(f, xy)) is None
