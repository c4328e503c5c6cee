import pytest

from gmtame.algebra.modgroebner import normal_form
from gmtame.algebra.polyring import LaurentMatrix, LaurentPoly
from gmtame.core.exceptions import IterationCapExceeded
from gmtame.services.brieskorn import (
    BrieskornService,
    compute_lattice,
    monomials_of_degree,
    poly_to_vector,
    relation_generator,
    relation_generators,
    vector_to_poly,
)
from gmtame.services.milnor import is_milnor_basis, milnor_algebra_matrix, milnor_data
from gmtame.services.vfilt import v_basis


def test_monomials_of_degree():
    assert monomials_of_degree(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert monomials_of_degree(1, 3) == [(3,)]
    assert len(monomials_of_degree(3, 2)) == 6


def test_relation_generator(xy):
    f = xy.parse("x^2+y^2")
    x, _ = xy.xs
    assert relation_generator(f, xy, (1, 0), 0) == 2 * x ** 2 - xy.theta
    assert relation_generator(f, xy, (0, 0), 1) == 2 * xy.xs[1]


def test_relation_generators_count(xy):
    f = xy.parse("x^2+y^2")
    # monomials of degree 0 and 1, one generator per partial
    assert len(relation_generators(f, xy, 1)) == 2 * 3


def test_vector_round_trip(xy):
    p = xy.parse("x^2*y+3*y") * xy.theta + 1
    assert vector_to_poly(poly_to_vector(p), xy) == p


def test_sum_of_squares(xy):
    f = xy.parse("x^2+y^2")
    lattice = compute_lattice(f, xy)
    assert len(lattice.phis) == 1
    # t(phi) = f phi = theta phi in G0
    assert lattice.A == LaurentMatrix([[LaurentPoly.monomial(1)]])


@pytest.mark.parametrize("text", ["x^3+y^3", "x^2+y^3", "x*y", "x^2+y^2+x^2*y^2"])
def test_lattice_properties(xy, text):
    f = xy.parse(text)
    service = BrieskornService(f, xy)
    lattice = service.compute_lattice()
    milnor = service.milnor
    assert len(lattice.phis) == milnor.mu
    assert is_milnor_basis(lattice.phis, milnor)
    assert lattice.A.is_polynomial()
    assert lattice.k0 + xy.x_degree(f) <= lattice.k
    assert service.residual_vanishes(lattice.phis, lattice.A, lattice.gbasis)
    # at theta = 0, t is multiplication by f on the Milnor algebra
    assert lattice.A.coefficient(0) == milnor_algebra_matrix(f, milnor, basis=lattice.phis)
    for phi in lattice.phis:
        assert normal_form(poly_to_vector(phi), lattice.gbasis) == poly_to_vector(phi)


def test_residual_detects_wrong_matrix(xy):
    f = xy.parse("x^2+y^2")
    service = BrieskornService(f, xy)
    lattice = service.compute_lattice()
    wrong = lattice.A + LaurentMatrix.identity(1)
    assert not service.residual_vanishes(lattice.phis, wrong, lattice.gbasis)


def test_window_of_lattice(xy):
    lattice = compute_lattice(xy.parse("x^2+y^2+x^2*y^2"), xy)
    data = v_basis(lattice.A)
    values = [a for a, _ in data.eigen.eigenvalues]
    assert values[0] - values[-1] < 1


def test_k_cap(xy):
    f = xy.parse("x^2+y^2+x^2*y^2")
    service = BrieskornService(f, xy, milnor=milnor_data(f, xy))
    with pytest.raises(IterationCapExceeded) as exc:
        service.compute_lattice(k_max=1)
    assert exc.value.stage == "brieskorn"
