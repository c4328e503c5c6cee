"""
Polynomials in x_0..x_n and theta, Laurent polynomials in theta, the
Gauss-Manin operators and the term orders of every Groebner computation.

tau is never stored; it is always written as theta^-1.
"""
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging
import re
import tokenize

from sympy import QQ, Symbol
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication,
    parse_expr,
    standard_transformations,
)
from sympy.polys.orderings import grevlex
from sympy.polys.rings import PolyElement, ring

from gmtame.algebra.exactmath import QMatrix, QT, format_rational
from gmtame.core.exceptions import ParseError

logger = logging.getLogger(__name__)

THETA_NAME = "theta"

_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_ALLOWED = re.compile(r"[A-Za-z_0-9+\-*/^() \t]")
_TRANSFORMATIONS = standard_transformations + (implicit_multiplication, convert_xor)

Poly = PolyElement


def infer_variables(text: str) -> List[str]:
    """Identifiers of a polynomial text in order of first appearance"""
    seen = []
    for match in _IDENTIFIER.finditer(text):
        name = match.group(0)
        if name not in seen:
            seen.append(name)
    return seen


def _check_names(names: Sequence[str]):
    if not names:
        raise ParseError("no variables declared")
    if len(set(names)) != len(names):
        raise ParseError(f"variables must be distinct: {','.join(names)}")
    for name in names:
        if not _IDENTIFIER.fullmatch(name):
            raise ParseError(f"invalid variable name '{name}'")
        if name == THETA_NAME:
            raise ParseError(f"'{THETA_NAME}' is reserved for the lattice variable")


class PolyContext:
    """Polynomial ring Q[x_0..x_n, theta] for a fixed, ordered variable list"""

    def __init__(self, names: Sequence[str]):
        names = list(names)
        _check_names(names)
        self.names = tuple(names)
        self.ring, *gens = ring(",".join(names + [THETA_NAME]), QQ, grevlex)
        self.xs = tuple(gens[:-1])
        self.theta = gens[-1]
        self.nvars = len(names)
        self._symbols = {name: Symbol(name) for name in names}

    @property
    def n(self) -> int:
        """Dimension index n for n+1 variables"""
        return self.nvars - 1

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyContext) and other.names == self.names

    def __hash__(self):
        return hash(self.names)

    # conversion

    def parse(self, text: str) -> Poly:
        """Parse a polynomial text over the declared variables"""
        if not text or not text.strip():
            raise ParseError("empty polynomial", position=0)
        for pos, char in enumerate(text):
            if char == ".":
                raise ParseError("non-rational literal (decimal point)", position=pos)
            if not _ALLOWED.fullmatch(char):
                raise ParseError(f"unexpected character '{char}'", position=pos)
        for match in _IDENTIFIER.finditer(text):
            if match.group(0) not in self._symbols:
                raise ParseError(f"unknown identifier '{match.group(0)}'", position=match.start())
        try:
            expr = parse_expr(
                text,
                local_dict=dict(self._symbols),
                transformations=_TRANSFORMATIONS,
            )
        except (SyntaxError, tokenize.TokenError) as e:
            offset = getattr(e, "offset", None)
            raise ParseError(f"syntax error: {e.msg if hasattr(e, 'msg') else e}", position=offset)
        except (TypeError, ValueError, ZeroDivisionError) as e:
            raise ParseError(f"invalid expression: {e}")
        symbols = list(self._symbols.values())
        if not expr.is_polynomial(*symbols):
            raise ParseError("expression is not a polynomial in the declared variables")
        try:
            return self.ring.from_expr(expr)
        except (ValueError, TypeError) as e:
            raise ParseError(f"coefficients must be rational: {e}")

    def format(self, p: Poly) -> str:
        """Canonical text, highest total degree first; parse(format(p)) == p"""
        if p.is_zero:
            return "0"
        names = self.names + (THETA_NAME,)
        terms = sorted(p.items(), key=lambda item: (sum(item[0]), item[0]), reverse=True)
        out = []
        for monom, coeff in terms:
            factors = []
            for name, e in zip(names, monom):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            sign = "-" if coeff < 0 else "+"
            mag = -coeff if coeff < 0 else coeff
            if not factors:
                body = format_rational(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = f"{format_rational(mag)}*" + "*".join(factors)
            out.append((sign, body))
        first_sign, first_body = out[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in out[1:]:
            text += f"{sign}{body}"
        return text

    def monomial(self, exponents: Sequence[int], theta: int = 0, coeff=1) -> Poly:
        return self.ring.from_dict({tuple(exponents) + (theta,): QQ.convert(coeff)})

    def x_degree(self, p: Poly) -> int:
        if p.is_zero:
            return -1
        return max(sum(m[:-1]) for m in p.keys())

    def theta_degree(self, p: Poly) -> int:
        if p.is_zero:
            return -1
        return max(m[-1] for m in p.keys())

    def theta_poly(self, lp: "LaurentPoly") -> Poly:
        """Embed a theta-polynomial into the ring"""
        if not lp.is_polynomial():
            raise ValueError("negative theta power cannot be embedded")
        zero = (0,) * self.nvars
        return self.ring.from_dict({zero + (k,): c for k, c in lp.terms.items()})

    def x_ring(self):
        """Q[x_0..x_n] with degrevlex, used for Jacobian computations"""
        return ring(",".join(self.names), QQ, grevlex)


def context_of(p: Poly) -> PolyContext:
    """Context of a polynomial built by a PolyContext"""
    symbols = [str(s) for s in p.ring.symbols]
    if not symbols or symbols[-1] != THETA_NAME:
        raise ValueError("polynomial does not belong to a Q[x, theta] context")
    return PolyContext(symbols[:-1])


def parse(text: str, vars: Optional[Sequence[str]] = None) -> Poly:
    """Parse text into an exact polynomial; variable order defaults to first appearance"""
    names = list(vars) if vars else infer_variables(text)
    return PolyContext(names).parse(text)


class LaurentPoly:
    """Laurent polynomial in theta with rational coefficients"""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[int, object]] = None):
        self.terms = {k: QQ.convert(c) for k, c in (terms or {}).items() if c}

    @classmethod
    def constant(cls, c) -> "LaurentPoly":
        return cls({0: c})

    @classmethod
    def monomial(cls, k: int, c=1) -> "LaurentPoly":
        return cls({k: c})

    @classmethod
    def from_qt(cls, p) -> "LaurentPoly":
        return cls({m[0]: c for m, c in QT(p).items()})

    def to_qt(self):
        if not self.is_polynomial():
            raise ValueError("Laurent polynomial has negative theta powers")
        return QT.from_dict({(k,): c for k, c in self.terms.items()})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> Optional[int]:
        return max(self.terms) if self.terms else None

    def valuation(self) -> Optional[int]:
        return min(self.terms) if self.terms else None

    def coeff(self, k: int):
        return self.terms.get(k, QQ.zero)

    def is_polynomial(self) -> bool:
        """No negative theta powers"""
        return all(k >= 0 for k in self.terms)

    def is_tau_polynomial(self) -> bool:
        """No positive theta powers"""
        return all(k <= 0 for k in self.terms)

    def is_constant(self) -> bool:
        return all(k == 0 for k in self.terms)

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by theta^k"""
        return LaurentPoly({e + k: c for e, c in self.terms.items()})

    def theta_euler(self) -> "LaurentPoly":
        """theta * d/dtheta"""
        return LaurentPoly({e: e * c for e, c in self.terms.items()})

    def tau_euler(self) -> "LaurentPoly":
        """tau * d/dtau, equal to -theta * d/dtheta"""
        return LaurentPoly({e: -e * c for e, c in self.terms.items()})

    def scale(self, c) -> "LaurentPoly":
        c = QQ.convert(c)
        if not c:
            return LaurentPoly()
        return LaurentPoly({e: c * v for e, v in self.terms.items()})

    def __add__(self, other) -> "LaurentPoly":
        other = _as_laurent(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, QQ.zero) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-_as_laurent(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return _as_laurent(other) - self

    def __mul__(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            out: Dict[int, object] = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    out[e1 + e2] = out.get(e1 + e2, QQ.zero) + c1 * c2
            return LaurentPoly(out)
        if isinstance(other, PolyElement):
            return self * LaurentPoly.from_qt(other)
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        try:
            other = _as_laurent(other)
        except TypeError:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self) -> str:
        return f"LaurentPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "" if e == 0 else (THETA_NAME if e == 1 else f"{THETA_NAME}^{e}" if e > 0 else f"{THETA_NAME}^({e})")
            if not mono:
                parts.append(format_rational(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{format_rational(c)}*{mono}")
        return "+".join(parts).replace("+-", "-")


def _as_laurent(value) -> LaurentPoly:
    if isinstance(value, LaurentPoly):
        return value
    if isinstance(value, PolyElement):
        return LaurentPoly.from_qt(value)
    if isinstance(value, (int,)) or isinstance(value, type(QQ.one)):
        return LaurentPoly.constant(value)
    raise TypeError(f"cannot promote {type(value).__name__} to a Laurent polynomial")


_ZERO = LaurentPoly()


class LaurentMatrix:
    """Dense matrix with LaurentPoly entries"""

    __slots__ = ("entries", "rows", "cols")

    def __init__(self, entries: Sequence[Sequence[LaurentPoly]], cols: int = None):
        self.entries = [[_as_laurent(e) for e in row] for row in entries]
        self.rows = len(self.entries)
        self.cols = cols if cols is not None else (len(self.entries[0]) if self.entries else 0)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "LaurentMatrix":
        return cls([[_ZERO] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, n: int) -> "LaurentMatrix":
        return cls.from_qmatrix(QMatrix.identity(n))

    @classmethod
    def from_qmatrix(cls, m: QMatrix, shift: int = 0) -> "LaurentMatrix":
        return cls([[LaurentPoly({shift: m[i, j]}) for j in range(m.cols)] for i in range(m.rows)], m.cols)

    @classmethod
    def from_coefficients(cls, coeffs: Dict[int, QMatrix]) -> "LaurentMatrix":
        """sum_k coeffs[k] * theta^k"""
        shape = next(iter(coeffs.values())).shape
        out = cls.zeros(*shape)
        for k, m in coeffs.items():
            out = out + cls.from_qmatrix(m, k)
        return out

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[LaurentPoly]], rows: int) -> "LaurentMatrix":
        return cls([[columns[j][i] for j in range(len(columns))] for i in range(rows)], len(columns))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, key) -> LaurentPoly:
        i, j = key
        return self.entries[i][j]

    def column(self, j: int) -> List[LaurentPoly]:
        return [row[j] for row in self.entries]

    def columns(self) -> List[List[LaurentPoly]]:
        return [self.column(j) for j in range(self.cols)]

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "LaurentMatrix":
        cols = list(cols)
        return LaurentMatrix([[self.entries[i][j] for j in cols] for i in rows], len(cols))

    def __add__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return LaurentMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.cols)

    def __sub__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return LaurentMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.cols)

    def __neg__(self) -> "LaurentMatrix":
        return LaurentMatrix([[-a for a in r] for r in self.entries], self.cols)

    def __matmul__(self, other) -> "LaurentMatrix":
        if isinstance(other, QMatrix):
            other = LaurentMatrix.from_qmatrix(other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(self.rows):
            row = self.entries[i]
            new_row = []
            for j in range(other.cols):
                acc = _ZERO
                for k in range(self.cols):
                    a = row[k]
                    if a.terms:
                        b = other.entries[k][j]
                        if b.terms:
                            acc = acc + a * b
                new_row.append(acc)
            out.append(new_row)
        return LaurentMatrix(out, other.cols)

    def __rmatmul__(self, other) -> "LaurentMatrix":
        if isinstance(other, QMatrix):
            return LaurentMatrix.from_qmatrix(other) @ self
        return NotImplemented

    def scale(self, c) -> "LaurentMatrix":
        return LaurentMatrix([[a * c for a in r] for r in self.entries], self.cols)

    def shift(self, k: int) -> "LaurentMatrix":
        return LaurentMatrix([[a.shift(k) for a in r] for r in self.entries], self.cols)

    def theta_euler(self) -> "LaurentMatrix":
        return LaurentMatrix([[a.theta_euler() for a in r] for r in self.entries], self.cols)

    def coefficient(self, k: int) -> QMatrix:
        """Constant matrix of theta^k coefficients"""
        return QMatrix([[a.coeff(k) for a in r] for r in self.entries], self.cols)

    def degree(self) -> Optional[int]:
        degs = [a.degree() for r in self.entries for a in r if a.terms]
        return max(degs) if degs else None

    def valuation(self) -> Optional[int]:
        vals = [a.valuation() for r in self.entries for a in r if a.terms]
        return min(vals) if vals else None

    def is_polynomial(self) -> bool:
        return all(a.is_polynomial() for r in self.entries for a in r)

    def is_tau_polynomial(self) -> bool:
        return all(a.is_tau_polynomial() for r in self.entries for a in r)

    def is_zero(self) -> bool:
        return all(not a.terms for r in self.entries for a in r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.shape, tuple(tuple(r) for r in self.entries)))

    def __repr__(self) -> str:
        return "LaurentMatrix([" + "; ".join(", ".join(str(a) for a in r) for r in self.entries) + "])"


class TermOrder:
    """Total order on module monomials theta^e * e_component, given by a sort key"""

    kind = "abstract"

    def key(self, component, exp: int) -> tuple:
        raise NotImplementedError

    def compare(self, u: Tuple, v: Tuple) -> int:
        ku, kv = self.key(*u), self.key(*v)
        return (ku > kv) - (ku < kv)


class RelationOrder(TermOrder):
    """Components are x-exponent tuples: total degree, degrevlex, then theta power"""

    kind = "relation"

    def __init__(self):
        self._cache: Dict[Tuple[int, ...], tuple] = {}

    def component_key(self, component: Tuple[int, ...]) -> tuple:
        key = self._cache.get(component)
        if key is None:
            key = (sum(component), tuple(-e for e in reversed(component)))
            self._cache[component] = key
        return key

    def key(self, component, exp: int) -> tuple:
        return self.component_key(component) + (exp,)


class LevelOrder(TermOrder):
    """
    Components are columns of a V-adapted basis.

    The key is (theta level k, group eigenvalue, opposite filtration index p, column);
    a larger eigenvalue ranks higher so that the key follows the V-degree k + alpha.
    """

    kind = "level"

    def __init__(self, alphas: Sequence, groups: Sequence[int], levels: Optional[Sequence[int]] = None):
        self.alphas = [QQ.convert(a) for a in alphas]
        self.groups = list(groups)
        self.levels = list(levels) if levels is not None else [0] * len(self.groups)
        self._component = [
            (self.alphas[g], p, c) for c, (g, p) in enumerate(zip(self.groups, self.levels))
        ]

    def key(self, component: int, exp: int) -> tuple:
        return (exp,) + self._component[component]

    def v_degree(self, component: int, exp: int):
        return exp + self.alphas[self.groups[component]]


class PositionOrder(TermOrder):
    """Position over term on integer components; the exponent counts powers of the ring variable"""

    kind = "position"

    def key(self, component: int, exp: int) -> tuple:
        return (component, exp)


def compare(order: TermOrder, u: Tuple, v: Tuple) -> int:
    """-1, 0 or 1 as u is smaller, equal or larger than v under order"""
    return order.compare(u, v)


class GMOperator:
    """Operators of the Gauss-Manin system: d/dx_i, theta*d/dtheta, tau*d/dtau and t_f"""

    def __init__(self, kind: str, index: int = None, f: Poly = None):
        if kind not in ("dx", "theta_euler", "tau_euler", "t"):
            raise ValueError(f"unknown operator '{kind}'")
        if kind == "dx" and index is None:
            raise ValueError("d/dx needs a variable index")
        if kind == "t" and f is None:
            raise ValueError("t needs the polynomial f")
        self.kind, self.index, self.f = kind, index, f

    @classmethod
    def partial(cls, index: int) -> "GMOperator":
        return cls("dx", index=index)

    @classmethod
    def t(cls, f: Poly) -> "GMOperator":
        return cls("t", f=f)

    def apply(self, p):
        if isinstance(p, LaurentPoly):
            return self._apply_laurent(p)
        return self._apply_poly(p)

    __call__ = apply

    def _apply_laurent(self, p: LaurentPoly) -> LaurentPoly:
        if self.kind == "theta_euler":
            return p.theta_euler()
        if self.kind == "tau_euler":
            return p.tau_euler()
        if self.kind == "dx":
            return LaurentPoly()
        raise ValueError("t_f acts on polynomials in x and theta only")

    def _apply_poly(self, p: Poly) -> Poly:
        R = p.ring
        if self.kind == "dx":
            return p.diff(R.gens[self.index])
        euler = R.from_dict({m: m[-1] * c for m, c in p.items() if m[-1]})
        if self.kind == "theta_euler":
            return euler
        if self.kind == "tau_euler":
            return -euler
        theta = R.gens[-1]
        return self.f * p + theta * euler
