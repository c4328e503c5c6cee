"""
V-filtration bases.

Given A with t(phi) = phi (A + theta^2 d/dtheta), the coordinate operator of
-tau d/dtau is D(u) = theta^-1 A u + theta d/dtheta u. The Q[tau]-span of phi is
saturated under D, then twisted along generalized eigenspaces of B0 until all
eigenvalues lie in a window alpha >= alpha_i > alpha - 1.
"""
from dataclasses import dataclass
from typing import Optional
import logging

from sympy import QQ

from gmtame.algebra.exactmath import EigenDecomposition, format_rational, generalized_eigenspaces
from gmtame.algebra.modgroebner import lattice_basis_from_generators, triangular_inverse
from gmtame.algebra.polyring import LaurentMatrix, LaurentPoly
from gmtame.core.config import settings
from gmtame.core.exceptions import (
    DivisibilityViolation,
    InternalInvariantError,
    IterationCapExceeded,
    SaturationDiverged,
)

logger = logging.getLogger(__name__)


@dataclass
class VBasisData:
    """phi U is a Q[tau]-basis of V_alpha with -tau d/dtau (phi U) = phi U B"""

    U: LaurentMatrix
    U_inv: LaurentMatrix
    B: LaurentMatrix
    alpha: object
    eigen: EigenDecomposition
    saturation_rounds: int = 0
    twist_rounds: int = 0


def tau_operator(A: LaurentMatrix, U: LaurentMatrix) -> LaurentMatrix:
    """Columns of U mapped by -tau d/dtau in phi-coordinates"""
    return (A @ U).shift(-1) + U.theta_euler()


def saturate(A: LaurentMatrix):
    """
    Smallest lattice containing phi that is stable under tau d/dtau.

    Returns:
        (U, U_inv, B, rounds) with B = U^-1 D(U) polynomial in tau

    Raises:
        SaturationDiverged: the lattice did not become stable within the configured rounds
    """
    mu = A.rows
    U = LaurentMatrix.identity(mu)
    U_inv = LaurentMatrix.identity(mu)
    for rounds in range(settings.SATURATION_MAX + 1):
        DU = tau_operator(A, U)
        B = U_inv @ DU
        if B.is_tau_polynomial():
            logger.debug(f"Saturation stable after {rounds} rounds")
            return U, U_inv, B, rounds
        U = lattice_basis_from_generators(U.columns() + DU.columns(), mu)
        U_inv = triangular_inverse(U)
        logger.debug(f"Saturation round {rounds + 1}: theta degree of U is {U.degree()}")
    raise SaturationDiverged(
        f"lattice not tau d/dtau-stable after {settings.SATURATION_MAX} rounds", stage="vfilt"
    )


def _window_split(eigen: EigenDecomposition) -> int:
    top = eigen.eigenvalues[0][0]
    return sum(1 for a, _ in eigen.eigenvalues if a > top - 1)


def _twist(B: LaurentMatrix, split: int) -> LaurentMatrix:
    """T^-1 B T + (0 + E) for T = diag(1, ..., 1, theta, ..., theta) starting at split"""
    mu = B.rows
    rows = []
    for i in range(mu):
        row = []
        for j in range(mu):
            entry = B[i, j]
            if i < split <= j:
                if entry.coeff(0):
                    raise DivisibilityViolation(
                        f"entry ({i},{j}) of the off-diagonal block has a nonzero constant term", stage="vfilt"
                    )
                entry = entry.shift(1)
            elif j < split <= i:
                entry = entry.shift(-1)
            if i == j and i >= split:
                entry = entry + LaurentPoly.constant(1)
            row.append(entry)
        rows.append(row)
    return LaurentMatrix(rows, mu)


def window_normalize(U: LaurentMatrix, U_inv: LaurentMatrix, B: LaurentMatrix, saturation_rounds: int = 0) -> VBasisData:
    """
    Twist generalized eigenspaces of B0 until its spectrum fits a window of length 1.

    Raises:
        IrrationalSpectrum: B0 has non-rational eigenvalues
        DivisibilityViolation: a twist would leave Q[tau]
        IterationCapExceeded: too many twist rounds
    """
    mu = B.rows
    for rounds in range(settings.WINDOW_MAX + 1):
        eigen = generalized_eigenspaces(B.coefficient(0))
        split_groups = _window_split(eigen)
        if split_groups == len(eigen.eigenvalues):
            alpha = eigen.eigenvalues[0][0] if eigen.eigenvalues else QQ.zero
            logger.info(
                f"V-basis window ({format_rational(alpha - 1)}, {format_rational(alpha)}] "
                f"after {saturation_rounds} saturation and {rounds} twist rounds"
            )
            return VBasisData(
                U=U,
                U_inv=U_inv,
                B=B,
                alpha=alpha,
                eigen=eigen,
                saturation_rounds=saturation_rounds,
                twist_rounds=rounds,
            )
        split = sum(m for _, m in eigen.eigenvalues[:split_groups])
        U0, U0_inv = eigen.transform, eigen.inverse
        B = LaurentMatrix.from_qmatrix(U0_inv) @ B @ U0
        U = U @ U0
        U_inv = LaurentMatrix.from_qmatrix(U0_inv) @ U_inv
        B = _twist(B, split)
        shift = [0] * split + [1] * (mu - split)
        U = LaurentMatrix([[U[i, j].shift(shift[j]) for j in range(mu)] for i in range(mu)], mu)
        U_inv = LaurentMatrix([[U_inv[i, j].shift(-shift[i]) for j in range(mu)] for i in range(mu)], mu)
        logger.debug(f"Twist round {rounds + 1}: lifted {mu - split} of {mu} eigenvalues by 1")
    raise IterationCapExceeded(f"spectrum window not reached after {settings.WINDOW_MAX} twists", stage="vfilt")


def check_operator_identity(A: LaurentMatrix, data: VBasisData):
    """U B = D(U) and U U^-1 = E"""
    mu = A.rows
    if data.U @ data.B != tau_operator(A, data.U):
        raise InternalInvariantError("U B differs from -tau d/dtau (U)", stage="vfilt")
    if data.U @ data.U_inv != LaurentMatrix.identity(mu):
        raise InternalInvariantError("stored inverse of U is wrong", stage="vfilt")


def v_basis(A: LaurentMatrix, checks: Optional[str] = None) -> VBasisData:
    """Saturate, then window-normalize"""
    U, U_inv, B, rounds = saturate(A)
    data = window_normalize(U, U_inv, B, rounds)
    if (checks or settings.CHECKS) != "off":
        check_operator_identity(A, data)
    return data
