"""
Driver for the whole computation: lattice basis of G0, V-adapted basis, spectrum
with the mean-value certificate, opposite filtration, good basis and the
monodromy at infinity.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional
import logging

from sympy import QQ

from gmtame.algebra.exactmath import QMatrix, Rational, format_rational, nilpotent_jordan
from gmtame.algebra.modgroebner import normal_form
from gmtame.algebra.polyring import LaurentMatrix, Poly, PolyContext, context_of, parse
from gmtame.core.config import RunConfig, settings
from gmtame.core.exceptions import (
    InternalInvariantError,
    IterationCapExceeded,
    RepresentationFailure,
    SpectrumCountMismatch,
)
from gmtame.services.brieskorn import BrieskornService, LatticeBasis, poly_to_vector, vector_to_poly
from gmtame.services.goodbasis import compute_good_basis
from gmtame.services.hodge import conjugate, opposite_basis
from gmtame.services.milnor import MilnorData, milnor_algebra_matrix, milnor_data
from gmtame.services.spectrum import (
    SpectrumData,
    compute_spectrum,
    fractional_part,
    mean_value_test,
    symmetry_defect,
)
from gmtame.services.vfilt import v_basis

logger = logging.getLogger(__name__)


@dataclass
class MonodromyClass:
    """Eigenvalue exp(-2 pi i value) of T-infinity with its Jordan partition"""

    value: Rational
    multiplicity: int
    partition: List[int]


@dataclass
class MonodromyData:
    classes: List[MonodromyClass]
    log_matrix: QMatrix

    @property
    def mu(self) -> int:
        return sum(c.multiplicity for c in self.classes)

    def partition_of(self, value) -> Optional[List[int]]:
        value = QQ.convert(value)
        for c in self.classes:
            if c.value == value:
                return c.partition
        return None


@dataclass
class PipelineResult:
    f: Poly
    context: PolyContext
    n: int
    mu: int
    phis: List[Poly]
    A0: QMatrix
    A1: QMatrix
    spectrum: SpectrumData
    monodromy: MonodromyData
    stats: Dict[str, int] = field(default_factory=dict)
    artifacts: Dict[str, Any] = field(default_factory=dict, repr=False)
    lattice: Optional[LatticeBasis] = field(default=None, repr=False)
    service: Optional[BrieskornService] = field(default=None, repr=False)

    @property
    def polynomial(self) -> str:
        return self.context.format(self.f)

    def basis_text(self) -> List[str]:
        return [self.context.format(p) for p in self.phis]


def graded_part(A0: QMatrix, alphas: List, level) -> QMatrix:
    """Entries (i, j) of A0 with alpha_i - alpha_j == level, zero elsewhere"""
    if len(alphas) != A0.rows:
        raise ValueError(f"{len(alphas)} values for a matrix of size {A0.rows}")
    level = QQ.convert(level)
    return QMatrix(
        [
            [A0[i, j] if alphas[i] - alphas[j] == level else QQ.zero for j in range(A0.cols)]
            for i in range(A0.rows)
        ],
        A0.cols,
    )


def monodromy(A0: QMatrix, A1: QMatrix) -> MonodromyData:
    """
    Jordan data of T-infinity from a good basis.

    Indices are grouped by alpha_i mod 1; on each class the level-one part of A0
    is the nilpotent part and its Jordan partition is reported.

    Raises:
        NotNilpotent: the level-one part of A0 is not nilpotent on a class
    """
    mu = A0.rows
    alphas = [A1[i, i] for i in range(mu)]
    if any(A1[i, j] for i in range(mu) for j in range(mu) if i != j):
        raise InternalInvariantError("theta-linear part of the good basis matrix is not diagonal", stage="pipeline")
    gr1 = graded_part(A0, alphas, 1)
    classes: Dict[Rational, List[int]] = {}
    for i, alpha in enumerate(alphas):
        classes.setdefault(fractional_part(alpha), []).append(i)
    out = []
    for value in sorted(classes):
        idx = classes[value]
        partition = nilpotent_jordan(gr1.submatrix(idx, idx))
        out.append(MonodromyClass(value=value, multiplicity=len(idx), partition=partition))
        logger.debug(f"Monodromy class {format_rational(value)}: partition {partition}")
    data = MonodromyData(classes=out, log_matrix=gr1 + A1)
    if data.mu != mu or any(sum(c.partition) != c.multiplicity for c in out):
        raise InternalInvariantError("monodromy classes do not add up to mu", stage="pipeline")
    return data


def _trivial_result(f: Poly, context: PolyContext, milnor: MilnorData) -> PipelineResult:
    logger.warning(f"{context.format(f)} has no critical points; returning the empty result")
    empty = QMatrix.zeros(0, 0)
    return PipelineResult(
        f=f,
        context=context,
        n=context.n,
        mu=0,
        phis=[],
        A0=empty,
        A1=empty,
        spectrum=SpectrumData.from_counts({}),
        monodromy=MonodromyData(classes=[], log_matrix=empty),
        stats={"mu": 0},
    )


def _check_milnor_reduction(lattice: LatticeBasis, milnor: MilnorData):
    """A(0) is multiplication by f on the Milnor algebra in phi-coordinates"""
    expected = milnor_algebra_matrix(lattice.f, milnor, basis=lattice.phis)
    if lattice.A.coefficient(0) != expected:
        raise RepresentationFailure("theta = 0 part of A is not multiplication by f", stage="brieskorn")


def _lattice_with_mean(service: BrieskornService, n: int, config: RunConfig):
    """Grow k until the spectrum mean is (n+1)/2"""
    k = service.degree
    k_max = config.k_max if config.k_max is not None else k + settings.K_EXTRA_MAX
    for restarts in range(config.mean_retry_max + 1):
        lattice = service.compute_lattice(k, k_max=k_max)
        vb = v_basis(lattice.A, config.checks)
        spectrum = compute_spectrum(vb.B, vb.U_inv, vb.eigen)
        if mean_value_test(spectrum, n):
            return lattice, vb, spectrum, restarts
        logger.info(f"Mean test failed at k={lattice.k}; restarting at k={lattice.k + config.k_stride}")
        k = lattice.k + config.k_stride
    raise IterationCapExceeded(
        f"spectrum mean above (n+1)/2 after {config.mean_retry_max} restarts", stage="pipeline"
    )


def run_spectrum(f: Poly, context: Optional[PolyContext] = None, config: Optional[RunConfig] = None) -> SpectrumData:
    """Spectrum of f certified by the mean-value test, without the good basis"""
    config = config or RunConfig()
    context = context or context_of(f)
    milnor = milnor_data(f, context)
    if milnor.mu == 0:
        return SpectrumData.from_counts({})
    service = BrieskornService(f, context, milnor, checks=config.checks)
    _, _, spectrum, _ = _lattice_with_mean(service, context.n, config)
    symmetry_defect(spectrum, context.n)
    return spectrum


def run(f: Poly, context: Optional[PolyContext] = None, config: Optional[RunConfig] = None) -> PipelineResult:
    """
    Good basis, spectrum and monodromy at infinity of a tame polynomial.

    Args:
        f: polynomial in Q[x, theta] without theta terms
        context: ring of f, defaults to the ring f was built in
        config: caps and check level

    Returns:
        PipelineResult with psi = phi T such that t psi = psi (A0 + theta A1 + theta^2 d/dtheta)

    Raises:
        NotIsolated: the Jacobian ideal is not zero-dimensional
        IterationCapExceeded: some stage hit its cap
        InternalInvariantError: an invariant failed, see the subclass
    """
    config = config or RunConfig()
    context = context or context_of(f)
    n = context.n
    milnor = milnor_data(f, context)
    if milnor.mu == 0:
        return _trivial_result(f, context, milnor)
    logger.info(f"Running pipeline for {context.format(f)} (mu={milnor.mu}, n={n})")

    service = BrieskornService(f, context, milnor, checks=config.checks)
    lattice, vb, spectrum, restarts = _lattice_with_mean(service, n, config)
    if config.checks == "full":
        _check_milnor_reduction(lattice, milnor)
    symmetry_defect(spectrum, n)

    graded = opposite_basis(spectrum.gbasis, vb.eigen, n)
    B_graded, M_graded = conjugate(graded, vb.B, vb.U_inv)
    good = compute_good_basis(M_graded, B_graded, graded, n)

    T = vb.U @ LaurentMatrix.from_qmatrix(graded.U) @ good.M
    if not T.is_polynomial():
        raise RepresentationFailure("good basis has negative theta powers in the lattice basis", stage="pipeline")
    phis = []
    for j in range(T.cols):
        psi = context.ring.zero
        for i, phi in enumerate(lattice.phis):
            if T[i, j].terms:
                psi = psi + phi * context.theta_poly(T[i, j])
        phis.append(vector_to_poly(normal_form(poly_to_vector(psi), lattice.gbasis), context))

    if sorted(good.values) != spectrum.multiset():
        raise SpectrumCountMismatch("diagonal of A1 differs from the spectrum", stage="pipeline")

    result = PipelineResult(
        f=f,
        context=context,
        n=n,
        mu=milnor.mu,
        phis=phis,
        A0=good.A0,
        A1=good.A1,
        spectrum=spectrum,
        monodromy=monodromy(good.A0, good.A1),
        stats={
            "mu": milnor.mu,
            "k": lattice.k,
            "k0": lattice.k0,
            "l": lattice.l,
            "brieskorn_probes": lattice.retries,
            "saturation_rounds": vb.saturation_rounds,
            "twist_rounds": vb.twist_rounds,
            "mean_restarts": restarts,
            "corrections": good.corrections,
        },
        lattice=lattice,
        service=service,
    )
    if config.verbose:
        result.artifacts = {
            "A_lattice": lattice.A,
            "U_vbasis": vb.U,
            "B_vbasis": vb.B,
            "U_graded": graded.U,
            "B_graded": B_graded,
            "M_graded": M_graded,
            "M_good": good.M,
            "T": T,
        }
    if config.checks != "off" and not verify_good_basis(result):
        raise RepresentationFailure("t psi differs from psi (A0 + theta A1)", stage="pipeline")
    logger.info(f"Pipeline finished for {context.format(f)}: {result.stats}")
    return result


def verify_good_basis(result: PipelineResult) -> bool:
    """Recompute t psi_j in the relation module and compare with (psi (A0 + theta A1))_j"""
    if result.mu == 0:
        return True
    A = LaurentMatrix.from_coefficients({0: result.A0, 1: result.A1})
    return result.service.residual_vanishes(result.phis, A, result.lattice.gbasis)


def run_text(text: str, config: Optional[RunConfig] = None) -> PipelineResult:
    """Parse and run; variable order from config.vars or first appearance"""
    config = config or RunConfig()
    f = parse(text, config.vars)
    return run(f, context_of(f), config)
