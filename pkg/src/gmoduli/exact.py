"""Exact rational linear algebra and truncated multivariate power series.

Scalars are :class:`fractions.Fraction` throughout.  Two containers live here:

* :class:`RatMatrix` -- a small immutable dense matrix with exact row
  reduction (kernel, rank, solve, inverse).  Elimination runs on sparse rows,
  which is what keeps the tensor-space matrices of the moduli module cheap.
* :class:`PolyJet` -- a polynomial in ``n_vars`` variables truncated at total
  degree ``order``.  Jets of frames, diffeomorphisms and Christoffel symbols
  are matrices/vectors of these.

Monomials are ordered graded-lexicographically: by total degree, then by the
sorted variable multiset (so ``x1^2 < x1 x2 < x2^2``).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "as_rational",
    "RatMatrix",
    "rref",
    "rref_kernel",
    "solve_linear",
    "matrix_rank",
    "PolyJet",
    "JetError",
    "exponent_order_key",
    "exponents_upto",
    "jet_mul",
    "jet_matmul",
    "jet_matrix_inverse",
    "jet_compose",
    "jet_invert_map",
    "jacobian",
    "identity_map",
]


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


# ---------------------------------------------------------------------------
# row reduction
# ---------------------------------------------------------------------------

def _sparse_rows(rows: Iterable[Sequence[Fraction]]) -> list[dict[int, Fraction]]:
    return [{j: v for j, v in enumerate(row) if v} for row in rows]


def rref(rows: list[dict[int, Fraction]], ncols: int) -> tuple[list[dict[int, Fraction]], list[int]]:
    """Gauss-Jordan elimination on sparse rows.

    Returns the nonzero rows of the reduced row echelon form (pivot entries
    equal to one) and the pivot columns, both in increasing pivot order.
    """
    pending = [dict(r) for r in rows if r]
    done: list[dict[int, Fraction]] = []
    pivots: list[int] = []
    for col in range(ncols):
        best = None
        for idx, row in enumerate(pending):
            if col in row and (best is None or len(row) < len(pending[best])):
                best = idx
        if best is None:
            continue
        prow = pending.pop(best)
        inv = 1 / prow[col]
        prow = {j: v * inv for j, v in prow.items()}
        for group in (pending, done):
            for i, row in enumerate(group):
                f = row.get(col)
                if f:
                    for j, v in prow.items():
                        nv = row.get(j, 0) - f * v
                        if nv:
                            row[j] = nv
                        else:
                            row.pop(j, None)
        pending = [r for r in pending if r]
        done.append(prow)
        pivots.append(col)
    return done, pivots


def matrix_rank(m: "RatMatrix") -> int:
    return len(rref(_sparse_rows(m.rows), m.ncols)[1])


def rref_kernel(m: "RatMatrix") -> list[tuple[Fraction, ...]]:
    """Basis of ``{x : m x = 0}``, one vector per free column.

    Each vector has a 1 at its free column, zeros at the other free columns and
    the negated reduced entries at pivot columns.  Vectors are ordered by free
    column, so the output is fully determined by ``m``.
    """
    reduced, pivots = rref(_sparse_rows(m.rows), m.ncols)
    pivset = set(pivots)
    basis = []
    for free in range(m.ncols):
        if free in pivset:
            continue
        v = [Fraction(0)] * m.ncols
        v[free] = Fraction(1)
        for row, p in zip(reduced, pivots):
            c = row.get(free)
            if c:
                v[p] = -c
        basis.append(tuple(v))
    return basis


def solve_linear(m: "RatMatrix", b: Sequence) -> tuple[Fraction, ...] | None:
    """A particular solution of ``m x = b`` with free variables zero, or None."""
    if len(b) != m.nrows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {m.nrows}")
    n = m.ncols
    rows = []
    for row, bi in zip(m.rows, b):
        d = {j: v for j, v in enumerate(row) if v}
        bi = as_rational(bi)
        if bi:
            d[n] = bi
        rows.append(d)
    reduced, pivots = rref(rows, n + 1)
    if pivots and pivots[-1] == n:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(reduced, pivots):
        x[p] = row.get(n, Fraction(0))
    return tuple(x)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatMatrix:
    """Immutable dense matrix over the rationals."""

    nrows: int
    ncols: int
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.rows) != self.nrows or any(len(r) != self.ncols for r in self.rows):
            raise ValueError("row data does not match the declared shape")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence], ncols: int | None = None) -> "RatMatrix":
        data = tuple(tuple(as_rational(x) for x in r) for r in rows)
        if ncols is None:
            ncols = len(data[0]) if data else 0
        return cls(len(data), ncols, data)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int) -> "RatMatrix":
        return cls.from_rows(
            [[c[i] for c in cols] for i in range(nrows)], ncols=len(cols)
        )

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RatMatrix":
        z = Fraction(0)
        return cls(nrows, ncols, tuple((z,) * ncols for _ in range(nrows)))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, values: Sequence) -> "RatMatrix":
        n = len(values)
        return cls.from_rows([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def entries(self) -> tuple[Fraction, ...]:
        return tuple(x for r in self.rows for x in r)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self.rows)

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix(self.ncols, self.nrows, tuple(zip(*self.rows)) if self.nrows else tuple(() for _ in range(self.ncols)))

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RatMatrix(self.nrows, self.ncols, tuple(
            tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        return self + (-other)

    def __neg__(self) -> "RatMatrix":
        return self.scale(-1)

    def scale(self, c) -> "RatMatrix":
        c = as_rational(c)
        return RatMatrix(self.nrows, self.ncols, tuple(tuple(c * x for x in r) for r in self.rows))

    def __matmul__(self, other):
        if isinstance(other, RatMatrix):
            if self.ncols != other.nrows:
                raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
            cols = other.T.rows
            out = []
            for r in self.rows:
                nz = [(k, a) for k, a in enumerate(r) if a]
                out.append(tuple(sum((a * c[k] for k, a in nz), Fraction(0)) for c in cols))
            return RatMatrix(self.nrows, other.ncols, tuple(out))
        vec = [as_rational(x) for x in other]
        if len(vec) != self.ncols:
            raise ValueError("vector length mismatch")
        nzv = [(k, x) for k, x in enumerate(vec) if x]
        return tuple(sum((r[k] * x for k, x in nzv), Fraction(0)) for r in self.rows)

    def rank(self) -> int:
        return matrix_rank(self)

    def kernel(self) -> list[tuple[Fraction, ...]]:
        return rref_kernel(self)

    def is_zero(self) -> bool:
        return not any(x for r in self.rows for x in r)

    def inverse(self) -> "RatMatrix":
        if self.nrows != self.ncols:
            raise ValueError("only square matrices are invertible")
        n = self.nrows
        rows = []
        for i, r in enumerate(self.rows):
            d = {j: v for j, v in enumerate(r) if v}
            d[n + i] = Fraction(1)
            rows.append(d)
        reduced, pivots = rref(rows, 2 * n)
        if pivots[:n] != list(range(n)):
            raise ZeroDivisionError("matrix is singular")
        return RatMatrix.from_rows(
            [[row.get(n + j, 0) for j in range(n)] for row in reduced[:n]])

    def det(self) -> Fraction:
        # fraction-exact elimination; small matrices only
        if self.nrows != self.ncols:
            raise ValueError("determinant of a non-square matrix")
        a = [list(r) for r in self.rows]
        n = self.nrows
        d = Fraction(1)
        for c in range(n):
            p = next((i for i in range(c, n) if a[i][c]), None)
            if p is None:
                return Fraction(0)
            if p != c:
                a[c], a[p] = a[p], a[c]
                d = -d
            d *= a[c][c]
            for i in range(c + 1, n):
                f = a[i][c] / a[c][c]
                if f:
                    for j in range(c, n):
                        a[i][j] -= f * a[c][j]
        return d

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self.rows]


# ---------------------------------------------------------------------------
# truncated polynomials
# ---------------------------------------------------------------------------

class JetError(ValueError):
    """Incompatible jets: variable count or truncation order mismatch, bad constant term."""


def exponent_order_key(exp: tuple[int, ...]) -> tuple:
    return (sum(exp), tuple(-e for e in exp))


def exponents_upto(n_vars: int, order: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree <= order, graded-lex ordered."""
    out: list[tuple[int, ...]] = []

    def rec(prefix, remaining, k):
        if k == n_vars - 1:
            out.append(prefix + (remaining,))
            return
        for e in range(remaining, -1, -1):
            rec(prefix + (e,), remaining - e, k + 1)

    for d in range(order + 1):
        if n_vars == 0:
            if d == 0:
                out.append(())
            continue
        rec((), d, 0)
    return out


def _multifactorial(exp: tuple[int, ...]) -> int:
    out = 1
    for e in exp:
        out *= factorial(e)
    return out


class PolyJet:
    """Polynomial in ``n_vars`` variables truncated above total degree ``order``.

    Coefficients are Taylor coefficients (the coefficient of ``x^alpha``), so
    the partial derivative ``d^alpha p(0)`` equals ``alpha! * coeff(alpha)``.
    Instances are treated as immutable.
    """

    __slots__ = ("n_vars", "order", "_c")

    def __init__(self, n_vars: int, order: int, coeffs: dict | None = None):
        if n_vars < 0 or order < 0:
            raise JetError("n_vars and order must be non-negative")
        self.n_vars = n_vars
        self.order = order
        c: dict[tuple[int, ...], Fraction] = {}
        for exp, v in (coeffs or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n_vars or any(e < 0 for e in exp):
                raise JetError(f"bad exponent {exp} for {n_vars} variables")
            if sum(exp) > order:
                continue
            v = as_rational(v)
            if v:
                c[exp] = c.get(exp, 0) + v
                if not c[exp]:
                    del c[exp]
        self._c = c

    # -- constructors ----------------------------------------------------
    @classmethod
    def _raw(cls, n_vars: int, order: int, c: dict) -> "PolyJet":
        obj = cls.__new__(cls)
        obj.n_vars, obj.order, obj._c = n_vars, order, c
        return obj

    @classmethod
    def zero(cls, n_vars: int, order: int) -> "PolyJet":
        return cls._raw(n_vars, order, {})

    @classmethod
    def constant(cls, n_vars: int, order: int, value) -> "PolyJet":
        value = as_rational(value)
        return cls._raw(n_vars, order, {(0,) * n_vars: value} if value else {})

    @classmethod
    def variable(cls, n_vars: int, order: int, i: int) -> "PolyJet":
        if order == 0:
            return cls.zero(n_vars, order)
        exp = tuple(int(k == i) for k in range(n_vars))
        return cls._raw(n_vars, order, {exp: Fraction(1)})

    @classmethod
    def monomial(cls, n_vars: int, order: int, exp: tuple[int, ...], value=1) -> "PolyJet":
        return cls(n_vars, order, {tuple(exp): value})

    # -- access ----------------------------------------------------------
    def coeff(self, exp: tuple[int, ...]) -> Fraction:
        return self._c.get(tuple(exp), Fraction(0))

    def items(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Nonzero terms in graded-lex order."""
        return sorted(self._c.items(), key=lambda kv: exponent_order_key(kv[0]))

    @property
    def coeffs(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._c)

    def constant_term(self) -> Fraction:
        return self._c.get((0,) * self.n_vars, Fraction(0))

    def is_zero(self) -> bool:
        return not self._c

    def derivative_at_zero(self, indices: Sequence[int]) -> Fraction:
        """``d^k p / dx^{i1}...dx^{ik}`` at the origin (0-based indices)."""
        exp = [0] * self.n_vars
        for i in indices:
            exp[i] += 1
        exp = tuple(exp)
        if sum(exp) > self.order:
            raise JetError(f"derivative of order {sum(exp)} exceeds jet order {self.order}")
        return _multifactorial(exp) * self.coeff(exp)

    # -- structure -------------------------------------------------------
    def _check(self, other: "PolyJet"):
        if not isinstance(other, PolyJet):
            raise TypeError(f"expected PolyJet, got {type(other).__name__}")
        if other.n_vars != self.n_vars or other.order != self.order:
            raise JetError(
                f"jet mismatch: ({self.n_vars} vars, order {self.order}) vs "
                f"({other.n_vars} vars, order {other.order})")

    def truncate(self, order: int) -> "PolyJet":
        if order > self.order:
            raise JetError("truncate cannot raise the order; use extend")
        return PolyJet._raw(self.n_vars, order,
                            {e: v for e, v in self._c.items() if sum(e) <= order})

    def extend(self, order: int) -> "PolyJet":
        """Reinterpret as an exact polynomial truncated at a higher order.

        Coefficients above the current order are taken to be zero, which is
        only meaningful when the caller knows they cannot reach the result.
        """
        if order < self.order:
            return self.truncate(order)
        return PolyJet._raw(self.n_vars, order, dict(self._c))

    def homogeneous(self, degree: int) -> "PolyJet":
        return PolyJet._raw(self.n_vars, self.order,
                            {e: v for e, v in self._c.items() if sum(e) == degree})

    def deriv(self, i: int) -> "PolyJet":
        """Partial derivative in variable ``i``; the order drops by one."""
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        c = {}
        for e, v in self._c.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                c[ne] = v * e[i]
        return PolyJet._raw(self.n_vars, self.order - 1, c)

    def euler(self) -> "PolyJet":
        """``sum_i x^i d/dx^i``: multiplies each degree-m part by m."""
        return PolyJet._raw(self.n_vars, self.order,
                            {e: v * sum(e) for e, v in self._c.items() if sum(e)})

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, PolyJet):
            return self + PolyJet.constant(self.n_vars, self.order, other)
        self._check(other)
        c = dict(self._c)
        for e, v in other._c.items():
            nv = c.get(e, 0) + v
            if nv:
                c[e] = nv
            else:
                c.pop(e, None)
        return PolyJet._raw(self.n_vars, self.order, c)

    __radd__ = __add__

    def __neg__(self):
        return PolyJet._raw(self.n_vars, self.order, {e: -v for e, v in self._c.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, PolyJet) else -as_rational(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PolyJet):
            s = as_rational(other)
            if not s:
                return PolyJet.zero(self.n_vars, self.order)
            return PolyJet._raw(self.n_vars, self.order, {e: v * s for e, v in self._c.items()})
        self._check(other)
        order = self.order
        c: dict = {}
        b_items = [(e, v, sum(e)) for e, v in other._c.items()]
        for ea, va in self._c.items():
            da = sum(ea)
            for eb, vb, db in b_items:
                if da + db > order:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                c[e] = c.get(e, 0) + va * vb
        return PolyJet._raw(self.n_vars, order, {e: v for e, v in c.items() if v})

    def __rmul__(self, other):
        return self * other

    def __eq__(self, other):
        if not isinstance(other, PolyJet):
            return NotImplemented
        return (self.n_vars, self.order, self._c) == (other.n_vars, other.order, other._c)

    def __hash__(self):
        return hash((self.n_vars, self.order, frozenset(self._c.items())))

    def __repr__(self):
        if not self._c:
            body = "0"
        else:
            parts = []
            for e, v in self.items():
                mono = "*".join(
                    f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
                parts.append(f"{v}" + (f"*{mono}" if mono else ""))
            body = " + ".join(parts)
        return f"PolyJet[{self.n_vars},{self.order}]({body})"


def jet_mul(a: PolyJet, b: PolyJet) -> PolyJet:
    """Truncated product; both jets must share variable count and order."""
    a._check(b)
    return a * b


def jet_matmul(a: Sequence[Sequence[PolyJet]], b: Sequence[Sequence[PolyJet]]) -> list[list[PolyJet]]:
    if not a or len(a[0]) != len(b):
        raise JetError("matrix shapes do not match")
    n_vars, order = b[0][0].n_vars, b[0][0].order
    out = []
    for i in range(len(a)):
        row = []
        for j in range(len(b[0])):
            acc = PolyJet.zero(n_vars, order)
            for k in range(len(b)):
                if a[i][k].is_zero() or b[k][j].is_zero():
                    continue
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def _constant_matrix(s: Sequence[Sequence[PolyJet]]) -> RatMatrix:
    return RatMatrix.from_rows([[x.constant_term() for x in row] for row in s])


def jet_matrix_inverse(s: Sequence[Sequence[PolyJet]]) -> list[list[PolyJet]]:
    """Inverse of a square matrix of jets whose constant term is invertible.

    Uses ``(s0 + N)^-1 = sum_k (-s0^-1 N)^k s0^-1``; N has no constant term so
    the sum stops at the truncation order.
    """
    n = len(s)
    if any(len(row) != n for row in s):
        raise JetError("jet matrix must be square")
    n_vars, order = s[0][0].n_vars, s[0][0].order
    s0 = _constant_matrix(s)
    try:
        s0inv = s0.inverse()
    except ZeroDivisionError:
        raise JetError("constant term of the jet matrix is singular") from None
    c_inv = [[PolyJet.constant(n_vars, order, s0inv[i, j]) for j in range(n)] for i in range(n)]
    nil = [[s[i][j] - s0[i, j] for j in range(n)] for i in range(n)]
    step = [[-x for x in row] for row in jet_matmul(c_inv, nil)]
    result = c_inv
    term = c_inv
    for _ in range(order):
        term = jet_matmul(step, term)
        result = [[result[i][j] + term[i][j] for j in range(n)] for i in range(n)]
    return result


def jet_compose(f: Sequence[PolyJet], g: Sequence[PolyJet]) -> list[PolyJet]:
    """Truncated composition ``f o g``.

    ``f`` is a list of jets in ``len(g)`` variables; ``g`` is a list of jets
    with zero constant term.  The result has the order of ``g`` capped by the
    order of ``f``.
    """
    if not g:
        raise JetError("empty substitution")
    m = len(g)
    n_vars, g_order = g[0].n_vars, g[0].order
    for gi in g:
        if gi.n_vars != n_vars or gi.order != g_order:
            raise JetError("substituted jets must share variables and order")
        if gi.constant_term():
            raise JetError("substituted map must fix the origin (zero constant term)")
    for fi in f:
        if fi.n_vars != m:
            raise JetError(f"outer jet has {fi.n_vars} variables, expected {m}")
    order = min(g_order, min(fi.order for fi in f))
    gt = [gi.truncate(order) for gi in g]
    max_exp = order
    powers: list[list[PolyJet]] = []
    for gi in gt:
        pw = [PolyJet.constant(n_vars, order, 1)]
        for _ in range(max_exp):
            pw.append(pw[-1] * gi)
        powers.append(pw)
    cache: dict[tuple[int, ...], PolyJet] = {}

    def mono(exp):
        if exp not in cache:
            acc = PolyJet.constant(n_vars, order, 1)
            for i, e in enumerate(exp):
                if e:
                    acc = acc * powers[i][e]
            cache[exp] = acc
        return cache[exp]

    out = []
    for fi in f:
        acc = PolyJet.zero(n_vars, order)
        for exp, v in fi.items():
            if sum(exp) > order:
                continue
            acc = acc + mono(exp) * v
        out.append(acc)
    return out


def identity_map(n: int, order: int) -> list[PolyJet]:
    return [PolyJet.variable(n, order, i) for i in range(n)]


def jacobian(f: Sequence[PolyJet]) -> list[list[PolyJet]]:
    """``J[i][j] = d f_i / d x^j`` (one order lower)."""
    return [[fi.deriv(j) for j in range(fi.n_vars)] for fi in f]


def jet_invert_map(f: Sequence[PolyJet]) -> list[PolyJet]:
    """Compositional inverse of an origin-fixing map jet."""
    n = len(f)
    if n == 0 or any(fi.n_vars != n for fi in f):
        raise JetError("map must be square (n components in n variables)")
    order = f[0].order
    if any(fi.order != order for fi in f):
        raise JetError("components must share the truncation order")
    if any(fi.constant_term() for fi in f):
        raise JetError("map must fix the origin")
    lin = RatMatrix.from_rows([[fi.coeff(tuple(int(k == j) for k in range(n))) for j in range(n)] for fi in f])
    try:
        lin_inv = lin.inverse()
    except ZeroDivisionError:
        raise JetError("linear part is singular") from None
    x = identity_map(n, order)
    nonlinear = [fi - sum((x[j] * lin[i, j] for j in range(n)), PolyJet.zero(n, order)) for i, fi in enumerate(f)]

    def apply_lin_inv(v):
        return [sum((v[j] * lin_inv[i, j] for j in range(n)), PolyJet.zero(n, order)) for i in range(n)]

    h = apply_lin_inv(x)
    # each pass fixes one more degree
    for _ in range(max(order - 1, 0)):
        nh = jet_compose(nonlinear, h)
        h = apply_lin_inv([x[i] - nh[i] for i in range(n)])
    return h
