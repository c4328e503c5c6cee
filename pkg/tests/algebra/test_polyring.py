import random

import pytest
from sympy import QQ

from gmtame.algebra.exactmath import QMatrix
from gmtame.algebra.polyring import (
    GMOperator,
    LaurentMatrix,
    LaurentPoly,
    LevelOrder,
    PolyContext,
    PositionOrder,
    RelationOrder,
    compare,
    context_of,
    infer_variables,
    parse,
)
from gmtame.core.exceptions import ParseError


class TestParse:
    def test_first_appearance_order(self):
        assert infer_variables("y+x^2+y*x") == ["y", "x"]
        assert context_of(parse("y+x^2")).names == ("y", "x")

    def test_declared_order(self, xy):
        f = parse("y^3+x^2", ["x", "y"])
        assert context_of(f) == xy
        assert f == xy.xs[0] ** 2 + xy.xs[1] ** 3

    def test_canonical_format(self, xy):
        f = xy.parse("x^2+y^2+x^2*y^2")
        assert xy.format(f) == "x^2*y^2+x^2+y^2"
        assert xy.parse(xy.format(f)) == f

    def test_implicit_multiplication_and_powers(self, xy):
        x, y = xy.xs
        assert xy.parse("2x y") == 2 * x * y
        assert xy.parse("x**2 - (x+y)^2") == -2 * x * y - y ** 2

    def test_rational_coefficients(self, xy):
        x, _ = xy.xs
        f = xy.parse("x/2 + 1/3")
        assert f == x * QQ(1, 2) + QQ(1, 3)
        assert xy.format(f) == "1/2*x+1/3"

    def test_decimal_point_rejected_with_position(self, xy):
        with pytest.raises(ParseError) as exc:
            xy.parse("x^2+1.5")
        assert exc.value.position == 5
        assert exc.value.exit_code == 2

    def test_unknown_identifier(self, xy):
        with pytest.raises(ParseError) as exc:
            xy.parse("x^2+z")
        assert exc.value.position == 4

    @pytest.mark.parametrize("text", ["", "   ", "1/x", "x^2+", "x^(1/2)", "x $ y"])
    def test_rejected_inputs(self, xy, text):
        with pytest.raises(ParseError):
            xy.parse(text)

    def test_reserved_and_duplicate_names(self):
        with pytest.raises(ParseError):
            parse("theta+x")
        with pytest.raises(ParseError):
            PolyContext(["x", "x"])

    def test_degrees(self, xy):
        f = xy.parse("x^3*y+x")
        assert xy.x_degree(f) == 4
        assert xy.theta_degree(f * xy.theta ** 2) == 2
        assert xy.n == 1


class TestLaurentPoly:
    def test_arithmetic(self):
        a = LaurentPoly({-1: 1, 0: 1})
        assert a * LaurentPoly.monomial(1) == LaurentPoly({0: 1, 1: 1})
        assert (a - a).is_zero
        assert a + 2 == LaurentPoly({-1: 1, 0: 3})

    def test_euler_operators(self):
        p = LaurentPoly({2: 3, -1: 1})
        assert p.theta_euler() == LaurentPoly({2: 6, -1: -1})
        assert p.tau_euler() == -p.theta_euler()

    def test_polynomial_predicates(self):
        assert LaurentPoly({-2: 1, 0: 3}).is_tau_polynomial()
        assert not LaurentPoly({1: 1}).is_tau_polynomial()
        assert LaurentPoly({0: 1, 3: 1}).is_polynomial()
        assert LaurentPoly({1: 1}).shift(-1).is_constant()

    def test_qt_conversion(self):
        p = LaurentPoly({0: 1, 2: QQ(1, 2)})
        assert LaurentPoly.from_qt(p.to_qt()) == p
        with pytest.raises(ValueError):
            LaurentPoly({-1: 1}).to_qt()


class TestLaurentMatrix:
    def test_coefficients(self):
        a0 = QMatrix([[0, 1], [1, 0]])
        a1 = QMatrix.diagonal([QQ(1, 2), QQ(3, 2)])
        m = LaurentMatrix.from_coefficients({0: a0, 1: a1})
        assert m.coefficient(0) == a0
        assert m.coefficient(1) == a1
        assert m.degree() == 1
        assert m.valuation() == 0

    def test_mixed_products(self):
        m = LaurentMatrix.from_qmatrix(QMatrix([[1, 2], [0, 1]]), shift=-1)
        assert LaurentMatrix.identity(2) @ m == m
        assert (m @ QMatrix.identity(2)) == m
        assert (QMatrix.identity(2) @ m) == m
        assert m.is_tau_polynomial()
        assert not m.is_polynomial()


class TestOrders:
    def test_relation_order_degree_first(self):
        order = RelationOrder()
        assert compare(order, ((2, 0), 0), ((0, 1), 5)) == 1
        assert compare(order, ((1, 0), 1), ((1, 0), 0)) == 1

    def test_relation_order_degrevlex_ties(self):
        order = RelationOrder()
        # degrevlex: x*y > y^2 and x^2 > x*y
        assert compare(order, ((1, 1), 0), ((0, 2), 0)) == 1
        assert compare(order, ((2, 0), 0), ((1, 1), 0)) == 1

    def test_level_order(self):
        order = LevelOrder([QQ(3, 2), QQ(1, 2)], [0, 1])
        assert compare(order, (1, 1), (0, 0)) == 1
        assert compare(order, (0, 0), (1, 0)) == 1
        assert order.v_degree(1, 2) == QQ(5, 2)

    def test_position_order(self):
        order = PositionOrder()
        assert compare(order, (1, 0), (0, 9)) == 1


def random_relation_terms(rng: random.Random, count: int = 3):
    nvars = rng.randint(1, 3)
    return [
        (tuple(rng.randint(0, 3) for _ in range(nvars)), rng.randint(0, 3))
        for _ in range(count)
    ], nvars


def random_level_order(rng: random.Random):
    size = rng.randint(1, 5)
    alphas = sorted({QQ(rng.randint(0, 12), rng.randint(1, 4)) for _ in range(size)}, reverse=True)
    groups = [rng.randrange(len(alphas)) for _ in range(size)]
    levels = [rng.randint(0, 2) for _ in range(size)]
    order = LevelOrder(alphas, groups, levels)
    terms = [(rng.randrange(size), rng.randint(-2, 3)) for _ in range(3)]
    return order, terms


class TestOrderProperties:
    @pytest.mark.parametrize("seed", range(200))
    def test_relation_order_laws(self, seed):
        rng = random.Random(seed)
        order = RelationOrder()
        (u, v, w), nvars = random_relation_terms(rng)
        assert compare(order, u, v) == -compare(order, v, u)
        assert (compare(order, u, v) == 0) == (u == v)
        if compare(order, u, v) <= 0 and compare(order, v, w) <= 0:
            assert compare(order, u, w) <= 0
        shift = tuple(rng.randint(0, 2) for _ in range(nvars))
        s = rng.randint(0, 2)

        def times(term):
            return tuple(a + b for a, b in zip(term[0], shift)), term[1] + s

        assert compare(order, times(u), times(v)) == compare(order, u, v)

    @pytest.mark.parametrize("seed", range(200))
    def test_level_order_laws(self, seed):
        rng = random.Random(seed)
        order, (u, v, w) = random_level_order(rng)
        assert compare(order, u, v) == -compare(order, v, u)
        assert (compare(order, u, v) == 0) == (u == v)
        if compare(order, u, v) <= 0 and compare(order, v, w) <= 0:
            assert compare(order, u, w) <= 0
        s = rng.randint(-2, 2)
        assert compare(order, (u[0], u[1] + s), (v[0], v[1] + s)) == compare(order, u, v)
        if u[1] < v[1]:
            assert compare(order, u, v) == -1
        assert order.v_degree(u[0], u[1] + 1) == order.v_degree(*u) + 1


class TestGMOperator:
    def test_t_action(self, xy):
        f = xy.parse("x^2+y^2")
        t = GMOperator.t(f)
        theta = xy.theta
        assert t(xy.ring.one) == f
        assert t(theta) == f * theta + theta ** 2

    def test_partials_and_euler(self, xy):
        x, y = xy.xs
        assert GMOperator.partial(1)(x * y ** 3) == 3 * x * y ** 2
        assert GMOperator("theta_euler")(xy.theta ** 3) == 3 * xy.theta ** 3
        assert GMOperator("theta_euler")(LaurentPoly({-1: 1})) == LaurentPoly({-1: -1})

    def test_unknown_operator(self):
        with pytest.raises(ValueError):
            GMOperator("sideways")
