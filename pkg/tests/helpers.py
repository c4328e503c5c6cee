import random

from sympy import QQ

from gmtame.algebra.exactmath import QMatrix
from gmtame.core.config import RunConfig
from gmtame.services.brieskorn import BrieskornService
from gmtame.services.pipeline import _lattice_with_mean


def random_unimodular(rng: random.Random, dim: int) -> QMatrix:
    """Integer matrix with determinant 1: lower times upper unitriangular"""
    lower = QMatrix([[QQ(rng.randint(-2, 2)) if i > j else QQ(int(i == j)) for j in range(dim)] for i in range(dim)])
    upper = QMatrix([[QQ(rng.randint(-2, 2)) if i < j else QQ(int(i == j)) for j in range(dim)] for i in range(dim)])
    return lower @ upper


def jordan_nilpotent(partition) -> QMatrix:
    """Nilpotent matrix in Jordan form, ones below the diagonal inside each block"""
    dim = sum(partition)
    rows = [[QQ.zero] * dim for _ in range(dim)]
    offset = 0
    for size in partition:
        for r in range(1, size):
            rows[offset + r][offset + r - 1] = QQ.one
        offset += size
    return QMatrix(rows, dim)


def qt_matmul(a, b):
    """Product of matrices over Q[theta] given as lists of rows"""
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        new_row = []
        for j in range(cols):
            acc = row[0] * b[0][j] if inner else None
            for k in range(1, inner):
                acc = acc + row[k] * b[k][j]
            new_row.append(acc)
        out.append(new_row)
    return out


def spectrum_counts(spectrum):
    return {a: m for a, m in spectrum.values}


def lattice_stages(text: str, context):
    """Lattice, V-basis and mean-certified spectrum of text, as the pipeline computes them"""
    service = BrieskornService(context.parse(text), context)
    lattice, vb, spectrum, _ = _lattice_with_mean(service, context.n, RunConfig())
    return lattice, vb, spectrum
