"""
Exact rational linear algebra.

Dense matrices over QQ, characteristic polynomials, rational eigen-decomposition,
Smith normal form over the Euclidean ring Q[theta] and Jordan data of nilpotent
matrices. Everything is exact; no floating point is ever involved.
"""
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple
import logging

from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import ring

from gmtame.core.exceptions import IrrationalSpectrum, NotNilpotent

logger = logging.getLogger(__name__)

# Q[theta], the coefficient ring of every lattice
QT, THETA = ring("theta", QQ)

# Q[x], home of characteristic polynomials
QX, X = ring("x", QQ)

Rational = type(QQ.one)


def rational(value) -> Rational:
    """Coerce ints, "p/q" strings and QQ elements to QQ"""
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return QQ(int(num), int(den))
        return QQ(int(text))
    if isinstance(value, tuple):
        return QQ(*value)
    return QQ.convert(value)


def format_rational(value) -> str:
    """Render a rational as "p/q", or "p" when integral"""
    value = QQ.convert(value)
    num, den = QQ.numer(value), QQ.denom(value)
    if den == 1:
        return f"{num}"
    return f"{num}/{den}"


class QMatrix:
    """Dense immutable matrix over QQ.

    Heavy operations (rank, rref, nullspace, inverse, characteristic polynomial)
    are delegated to sympy's DomainMatrix.
    """

    __slots__ = ("_entries", "rows", "cols")

    def __init__(self, entries: Sequence[Sequence], cols: int = None):
        rows = [[QQ.convert(e) for e in row] for row in entries]
        self.rows = len(rows)
        if cols is None:
            cols = len(rows[0]) if rows else 0
        self.cols = cols
        for row in rows:
            if len(row) != cols:
                raise ValueError("ragged matrix")
        self._entries = rows

    # construction

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        return cls([[QQ.zero] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls([[QQ.one if i == j else QQ.zero for j in range(n)] for i in range(n)], n)

    @classmethod
    def diagonal(cls, values: Sequence) -> "QMatrix":
        n = len(values)
        return cls([[values[i] if i == j else QQ.zero for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int = None) -> "QMatrix":
        if not columns:
            return cls.zeros(rows or 0, 0)
        n = len(columns[0])
        return cls([[columns[j][i] for j in range(len(columns))] for i in range(n)], len(columns))

    @classmethod
    def from_domain_matrix(cls, dm: DomainMatrix) -> "QMatrix":
        rows, cols = dm.shape
        return cls(dm.convert_to(QQ).to_list(), cols)

    @classmethod
    def block_diagonal(cls, blocks: Sequence["QMatrix"]) -> "QMatrix":
        n = sum(b.rows for b in blocks)
        out = [[QQ.zero] * n for _ in range(n)]
        offset = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    out[offset + i][offset + j] = b._entries[i][j]
            offset += b.rows
        return cls(out, n)

    # access

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, key):
        i, j = key
        return self._entries[i][j]

    def to_list(self) -> List[List]:
        return [list(row) for row in self._entries]

    def row(self, i: int) -> List:
        return list(self._entries[i])

    def column(self, j: int) -> List:
        return [row[j] for row in self._entries]

    def columns(self) -> List[List]:
        return [self.column(j) for j in range(self.cols)]

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "QMatrix":
        cols = list(cols)
        return QMatrix([[self._entries[i][j] for j in cols] for i in rows], len(cols))

    def to_domain_matrix(self) -> DomainMatrix:
        return DomainMatrix([list(r) for r in self._entries], self.shape, QQ)

    # arithmetic

    def __add__(self, other: "QMatrix") -> "QMatrix":
        self._check_shape(other)
        return QMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._entries, other._entries)], self.cols)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        self._check_shape(other)
        return QMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._entries, other._entries)], self.cols)

    def __neg__(self) -> "QMatrix":
        return QMatrix([[-a for a in r] for r in self._entries], self.cols)

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if not isinstance(other, QMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        if self.rows == 0 or other.cols == 0:
            return QMatrix.zeros(self.rows, other.cols)
        if self.cols == 0:
            return QMatrix.zeros(self.rows, other.cols)
        return QMatrix.from_domain_matrix(self.to_domain_matrix() * other.to_domain_matrix())

    def scale(self, c) -> "QMatrix":
        c = QQ.convert(c)
        return QMatrix([[c * a for a in r] for r in self._entries], self.cols)

    def shift(self, c) -> "QMatrix":
        """self + c*E"""
        c = QQ.convert(c)
        return QMatrix([[a + c if i == j else a for j, a in enumerate(r)] for i, r in enumerate(self._entries)], self.cols)

    def __pow__(self, k: int) -> "QMatrix":
        if not self.is_square:
            raise ValueError("power of non-square matrix")
        if k == 0:
            return QMatrix.identity(self.rows)
        if self.rows == 0:
            return self
        return QMatrix.from_domain_matrix(self.to_domain_matrix() ** k)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self):
        return hash((self.shape, tuple(tuple(r) for r in self._entries)))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_rational(a) for a in r) for r in self._entries)
        return f"QMatrix([{body}])"

    def _check_shape(self, other: "QMatrix"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    # linear algebra

    def is_zero(self) -> bool:
        return all(a == 0 for r in self._entries for a in r)

    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        return self.to_domain_matrix().rank()

    def rref(self) -> Tuple["QMatrix", Tuple[int, ...]]:
        if self.rows == 0 or self.cols == 0:
            return self, ()
        reduced, pivots = self.to_domain_matrix().rref()
        return QMatrix.from_domain_matrix(reduced), tuple(pivots)

    def nullspace(self) -> List[List]:
        """Basis of the right kernel as a list of column vectors"""
        if self.cols == 0:
            return []
        if self.rows == 0:
            return QMatrix.identity(self.cols).columns()
        reduced, pivots = self.rref()
        basis = []
        for free in range(self.cols):
            if free in pivots:
                continue
            v = [QQ.zero] * self.cols
            v[free] = QQ.one
            for r, p in enumerate(pivots):
                v[p] = -reduced[r, free]
            basis.append(v)
        return basis

    def inverse(self) -> "QMatrix":
        if not self.is_square:
            raise ValueError("inverse of non-square matrix")
        if self.rows == 0:
            return self
        return QMatrix.from_domain_matrix(self.to_domain_matrix().inv())

    def apply(self, v: Sequence) -> List:
        return [sum((a * b for a, b in zip(r, v)), QQ.zero) for r in self._entries]


def column_rank(vectors: Sequence[Sequence], dim: int) -> int:
    """Rank of a family of column vectors of length dim"""
    if not vectors:
        return 0
    return QMatrix.from_columns(vectors, dim).rank()


@dataclass(frozen=True)
class EigenDecomposition:
    """U0^-1 m U0 = blockdiag(blocks); blocks ordered by decreasing eigenvalue"""

    eigenvalues: List[Tuple[Rational, int]]
    transform: QMatrix
    blocks: List[QMatrix]
    inverse: QMatrix = field(repr=False, default=None)

    @property
    def offsets(self) -> List[int]:
        out, pos = [], 0
        for _, mult in self.eigenvalues:
            out.append(pos)
            pos += mult
        return out

    def group_of(self) -> List[int]:
        """Eigenvalue group index for every column of the transform"""
        groups = []
        for i, (_, mult) in enumerate(self.eigenvalues):
            groups.extend([i] * mult)
        return groups


@dataclass(frozen=True)
class SmithData:
    """left * presentation * right = diag(diagonal); right_inverse = right^-1"""

    diagonal: List
    left: List[List]
    right: List[List]
    right_inverse: List[List]
    rows: int
    cols: int

    @property
    def nonzero(self) -> List:
        return [d for d in self.diagonal if not d.is_zero]

    @property
    def rank(self) -> int:
        """Number of free summands of the cokernel"""
        return self.cols - len(self.nonzero)

    @property
    def cyclic_count(self) -> int:
        """Non-unit invariant factors plus free summands"""
        return sum(1 for d in self.nonzero if d.degree() > 0) + self.rank

    def free_positions(self) -> List[int]:
        return [j for j in range(self.cols) if j >= len(self.diagonal) or self.diagonal[j].is_zero]


def char_poly(m: QMatrix):
    """det(xE - m) as a monic element of Q[x]"""
    if not m.is_square:
        raise ValueError("characteristic polynomial of a non-square matrix")
    if m.rows == 0:
        return QX.one
    coeffs = m.to_domain_matrix().charpoly()
    return QX.from_list(list(coeffs))


def rational_eigenvalues(m: QMatrix) -> List[Tuple[Rational, int]]:
    """
    Eigenvalues of m with multiplicities, strictly decreasing.

    Raises:
        IrrationalSpectrum: the characteristic polynomial does not split over QQ
    """
    if not m.is_square:
        raise ValueError("eigenvalues of a non-square matrix")
    if m.rows == 0:
        return []
    roots = {}
    for factor, mult in m.to_domain_matrix().charpoly_factor_list():
        factor = [c for c in factor]
        while factor and factor[0] == 0:
            factor.pop(0)
        if len(factor) != 2:
            raise IrrationalSpectrum(
                f"characteristic polynomial has an irreducible factor of degree {len(factor) - 1}"
            )
        a, b = QQ.convert(factor[0]), QQ.convert(factor[1])
        root = -b / a
        roots[root] = roots.get(root, 0) + mult
    return sorted(roots.items(), key=lambda item: item[0], reverse=True)


def generalized_eigenspaces(m: QMatrix) -> EigenDecomposition:
    """
    Split m into generalized eigenspaces, largest eigenvalue first.

    Returns:
        EigenDecomposition with transform U0 whose column groups span ker((m - a)^mult)
    """
    eigen = rational_eigenvalues(m)
    n = m.rows
    columns = []
    for alpha, mult in eigen:
        space = (m.shift(-alpha) ** mult).nullspace()
        if len(space) != mult:
            raise IrrationalSpectrum(f"generalized eigenspace of {format_rational(alpha)} has wrong dimension")
        columns.extend(space)
    transform = QMatrix.from_columns(columns, n) if columns else QMatrix.zeros(0, 0)
    inverse = transform.inverse()
    conjugated = inverse @ m @ transform
    blocks, pos = [], 0
    for _, mult in eigen:
        idx = range(pos, pos + mult)
        blocks.append(conjugated.submatrix(idx, idx))
        pos += mult
    return EigenDecomposition(eigenvalues=eigen, transform=transform, blocks=blocks, inverse=inverse)


def nilpotent_jordan(n: QMatrix) -> List[int]:
    """
    Jordan block sizes of a nilpotent matrix, decreasing.

    #blocks of size >= k equals rank(n^(k-1)) - rank(n^k).
    """
    dim = n.rows
    if dim == 0:
        return []
    ranks = [dim]
    power = QMatrix.identity(dim)
    while ranks[-1] > 0:
        if len(ranks) > dim:
            raise NotNilpotent(f"matrix of size {dim} has nonzero power n^{dim}")
        power = power @ n
        r = power.rank()
        if r == ranks[-1]:
            raise NotNilpotent("rank sequence of powers stalls above zero")
        ranks.append(r)
    at_least = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))]
    parts = []
    for k in range(len(at_least), 0, -1):
        exactly = at_least[k - 1] - (at_least[k] if k < len(at_least) else 0)
        parts.extend([k] * exactly)
    return parts


# Smith normal form over Q[theta]

def _deg(p) -> int:
    return -1 if p.is_zero else p.degree()


def _row_swap(mat, i, j):
    mat[i], mat[j] = mat[j], mat[i]


def _col_swap(mat, i, j):
    for row in mat:
        row[i], row[j] = row[j], row[i]


def _row_add(mat, target, source, q):
    """row[target] -= q * row[source]"""
    src = mat[source]
    dst = mat[target]
    for c, val in enumerate(src):
        if not val.is_zero:
            dst[c] = dst[c] - q * val


def _col_add(mat, target, source, q):
    """col[target] -= q * col[source]"""
    for row in mat:
        val = row[source]
        if not val.is_zero:
            row[target] = row[target] - q * val


class _SmithState:
    """Working matrices of the Smith reduction: left * p * right = mat"""

    def __init__(self, p: Sequence[Sequence], rows: int, cols: int):
        self.mat = [[QT(e) for e in row] for row in p]
        self.rows, self.cols = rows, cols
        self.left = [[QT.one if i == j else QT.zero for j in range(rows)] for i in range(rows)]
        self.right = [[QT.one if i == j else QT.zero for j in range(cols)] for i in range(cols)]
        self.right_inv = [[QT.one if i == j else QT.zero for j in range(cols)] for i in range(cols)]

    def row_swap(self, i, j):
        _row_swap(self.mat, i, j)
        _row_swap(self.left, i, j)

    def col_swap(self, i, j):
        _col_swap(self.mat, i, j)
        _col_swap(self.right, i, j)
        _row_swap(self.right_inv, i, j)

    def row_add(self, target, source, q):
        _row_add(self.mat, target, source, q)
        _row_add(self.left, target, source, q)

    def col_add(self, target, source, q):
        _col_add(self.mat, target, source, q)
        _col_add(self.right, target, source, q)
        # right_inv := E^-1 right_inv, E^-1 adds q*row[target] to row[source]
        _row_add(self.right_inv, source, target, -q)

    def row_scale(self, i, c):
        self.mat[i] = [c * v for v in self.mat[i]]
        self.left[i] = [c * v for v in self.left[i]]


def _move_least_to_start(st: _SmithState, s: int) -> bool:
    pos, best = None, None
    for i in range(s, st.rows):
        row = st.mat[i]
        for j in range(s, st.cols):
            val = row[j]
            if not val.is_zero:
                d = val.degree()
                if best is None or d < best:
                    pos, best = (i, j), d
                    if d == 0:
                        break
        if best == 0:
            break
    if pos is None:
        return False
    if pos[0] != s:
        st.row_swap(s, pos[0])
    if pos[1] != s:
        st.col_swap(s, pos[1])
    return True


def _modify_edging(st: _SmithState, s: int):
    pivot = st.mat[s][s]
    for i in range(s + 1, st.rows):
        val = st.mat[i][s]
        if not val.is_zero:
            st.row_add(i, s, val.quo(pivot))
    for j in range(s + 1, st.cols):
        val = st.mat[s][j]
        if not val.is_zero:
            st.col_add(j, s, val.quo(pivot))


def _move_le_to_start(st: _SmithState, s: int):
    pos, best = None, _deg(st.mat[s][s])
    for i in range(s + 1, st.rows):
        val = st.mat[i][s]
        if not val.is_zero and (best < 0 or val.degree() < best):
            pos, best = (i, s), val.degree()
    for j in range(s + 1, st.cols):
        val = st.mat[s][j]
        if not val.is_zero and (best < 0 or val.degree() < best):
            pos, best = (s, j), val.degree()
    if pos is None:
        return
    if pos[1] == s:
        st.row_swap(s, pos[0])
    else:
        st.col_swap(s, pos[1])


def _edging_is_zero(st: _SmithState, s: int) -> bool:
    return all(st.mat[i][s].is_zero for i in range(s + 1, st.rows)) and all(
        st.mat[s][j].is_zero for j in range(s + 1, st.cols)
    )


def _null_edging(st: _SmithState, s: int):
    while not _edging_is_zero(st, s):
        _move_le_to_start(st, s)
        _modify_edging(st, s)
    _ensure_divides(st, s)


def _ensure_divides(st: _SmithState, s: int):
    pivot = st.mat[s][s]
    if pivot.is_zero or pivot.degree() == 0:
        return
    for i in range(s + 1, st.rows):
        for j in range(s + 1, st.cols):
            val = st.mat[i][j]
            if not val.is_zero and not val.rem(pivot).is_zero:
                # pull row i into row s, then the edging no longer divides cleanly
                st.row_add(s, i, -QT.one)
                _null_edging(st, s)
                return


def smith_normal_form(p: Sequence[Sequence], rows: int = None, cols: int = None) -> SmithData:
    """
    Smith normal form of a matrix over Q[theta].

    Args:
        p: matrix as a list of rows with entries in QT (or coercible)
        rows, cols: shape, needed when p has no rows

    Returns:
        SmithData with monic diagonal entries, each dividing the next, zeros last
    """
    rows = len(p) if rows is None else rows
    cols = (len(p[0]) if p else 0) if cols is None else cols
    st = _SmithState(p, rows, cols)
    diagonal = []
    for s in range(min(rows, cols)):
        if not _move_least_to_start(st, s):
            break
        _modify_edging(st, s)
        _null_edging(st, s)
        pivot = st.mat[s][s]
        lc = pivot.LC
        if lc != 1:
            st.row_scale(s, QT(QQ.one / lc))
        diagonal.append(st.mat[s][s])
    while len(diagonal) < min(rows, cols):
        diagonal.append(QT.zero)
    logger.debug(f"Smith form of {rows}x{cols} presentation: {sum(1 for d in diagonal if not d.is_zero)} nonzero")
    return SmithData(
        diagonal=diagonal,
        left=st.left,
        right=st.right,
        right_inverse=st.right_inv,
        rows=rows,
        cols=cols,
    )
