"""Lie subalgebras of gl(n), the alternation map and the canonical splitting.

Conventions
-----------
* A matrix ``A`` acts by ``A v_j = sum_k A[k][j] v_k``.
* ``tau`` in ``V* (x) g`` is housed in ``V^{0,2}_1`` with components
  ``tau^k_{ij}`` given by ``tau(v_i) v_j = sum_k tau^k_{ij} v_k``.
* ``/\\^2 V* (x) V`` is coordinatized by ``T^k_{ij}`` with ``i < j``
  (see :func:`gmoduli.tensors.wedge2_keys`).  The table ``A`` of a splitting
  is contracted against these coordinates only:
  ``tau^g_{ab} = sum_{i<j, k} A[(g, a, b), (i, j, k)] T^k_{ij}``.
  Contracting over all ordered pairs instead needs a factor 1/2.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

from .exact import RatMatrix, as_rational, matrix_rank, rref_kernel, solve_linear
from .tensors import SubspaceBasis, Tensor, TensorSpace, wedge2_from_coords, wedge2_keys

__all__ = [
    "LieError",
    "LieSubalgebra",
    "CanonicalSplitting",
    "make_group",
    "parse_group",
    "first_prolongation",
    "trace_supplement",
    "build_splitting",
    "tau_space",
    "sample_group_elements",
]


class LieError(ValueError):
    pass


def tau_space(n: int) -> TensorSpace:
    return TensorSpace(n, 0, 2, 1)


def _bracket(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    return a @ b - b @ a


@dataclass(frozen=True)
class LieSubalgebra:
    """Basis of a Lie subalgebra of gl(n) with a catalogue tag.

    ``kind`` is one of ``o``, ``product``, ``scalar``, ``e``, ``gl`` or
    ``custom``; ``blocks`` lists the block sizes for ``product``.
    """

    n: int
    basis: tuple[RatMatrix, ...]
    name: str = "custom"
    kind: str = "custom"
    blocks: tuple[int, ...] = ()

    def __post_init__(self):
        for a in self.basis:
            if a.shape != (self.n, self.n):
                raise LieError(f"basis matrix of shape {a.shape} in gl({self.n})")
        if self.basis and matrix_rank(self._flat_matrix(self.basis)) != len(self.basis):
            raise LieError("Lie algebra basis is linearly dependent")
        for i, a in enumerate(self.basis):
            for b in self.basis[i + 1:]:
                if not self.in_span(_bracket(a, b)):
                    raise LieError("basis is not closed under the commutator")

    @staticmethod
    def _flat_matrix(mats: Sequence[RatMatrix]) -> RatMatrix:
        return RatMatrix.from_rows([m.entries for m in mats], mats[0].nrows * mats[0].ncols)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coordinates(self, a: RatMatrix) -> tuple[Fraction, ...] | None:
        if not self.basis:
            return () if a.is_zero() else None
        return solve_linear(self._flat_matrix(self.basis).T, a.entries)

    def in_span(self, a: RatMatrix) -> bool:
        return self.coordinates(a) is not None

    def is_transpose_closed(self) -> bool:
        return all(self.in_span(a.T) for a in self.basis)

    def contains_group_element(self, g: RatMatrix) -> bool:
        """Exact membership of a rational matrix in the catalogue group.

        For ``custom`` and ``gl`` algebras the group is not determined by the
        algebra alone; there the test is invertibility plus ``Ad_g`` preserving
        the algebra.
        """
        n = self.n
        if g.shape != (n, n):
            return False
        ident = RatMatrix.identity(n)
        if self.kind == "o":
            return g.T @ g == ident
        if self.kind == "product":
            p = self.blocks[0]
            if any(g[i, j] for i in range(n) for j in range(n) if (i < p) != (j < p)):
                return False
            return g.T @ g == ident
        if self.kind == "scalar":
            c = g[0, 0]
            return c != 0 and g == RatMatrix.identity(n).scale(c)
        if self.kind == "e":
            return g == ident
        if g.det() == 0:
            return False
        ginv = g.inverse()
        return all(self.in_span(g @ a @ ginv) for a in self.basis)

    # -- V* (x) g ---------------------------------------------------------
    @cached_property
    def tau_basis(self) -> tuple[Tensor, ...]:
        """Basis ``v*^i (x) A_a`` of ``V* (x) g``, ordered by ``i`` then ``a``."""
        sp = tau_space(self.n)
        out = []
        for i in range(self.n):
            for a in self.basis:
                ent = {((), (i, j), (k,)): a[k, j] for j in range(self.n) for k in range(self.n) if a[k, j]}
                out.append(Tensor(sp, ent))
        return tuple(out)

    @cached_property
    def tau_matrix(self) -> RatMatrix:
        """Columns: ``V^{0,2}_1`` coefficient vectors of :attr:`tau_basis`."""
        return RatMatrix.from_columns([t.to_vector() for t in self.tau_basis], tau_space(self.n).dim)

    @cached_property
    def delta_matrix(self) -> RatMatrix:
        """Alternation ``V* (x) g -> /\\^2 V* (x) V`` in (tau_basis, wedge2) coordinates."""
        n = self.n
        keys = wedge2_keys(n)
        cols = []
        for i0 in range(n):
            for a in self.basis:
                col = []
                for i, j, k in keys:
                    v = Fraction(0)
                    if i == i0:
                        v += a[k, j]
                    if j == i0:
                        v -= a[k, i]
                    col.append(v)
                cols.append(col)
        return RatMatrix.from_columns(cols, len(keys)) if cols else RatMatrix.zeros(len(keys), 0)

    def tau_coordinates(self, tau: Tensor) -> tuple[Fraction, ...] | None:
        """Coordinates of ``tau`` in :attr:`tau_basis`, None when not g-valued."""
        if not self.basis:
            return () if tau.is_zero() else None
        return solve_linear(self.tau_matrix, tau.to_vector())

    def to_json(self) -> dict:
        return {"n": self.n, "name": self.name,
                "basis": [[[str(x) for x in row] for row in a.tolist()] for a in self.basis]}


# ---------------------------------------------------------------------------
# catalogue
# ---------------------------------------------------------------------------

def _mat(n: int, entries: dict) -> RatMatrix:
    return RatMatrix.from_rows([[entries.get((i, j), 0) for j in range(n)] for i in range(n)])


def _o_basis(n: int, offset: int = 0, size: int | None = None) -> list[RatMatrix]:
    size = n if size is None else size
    out = []
    for i in range(size):
        for j in range(i + 1, size):
            a, b = i + offset, j + offset
            out.append(_mat(n, {(b, a): 1, (a, b): -1}))
    return out


def make_group(spec) -> LieSubalgebra:
    """Catalogue algebras from a spelling or a list of matrices.

    Spellings: ``o:N``, ``product:P,Q``, ``scalar:N``, ``e:N``, ``gl:N``,
    ``custom:PATH``.  A list (or ``{"n":..,"basis":[..]}`` dict) of rational
    matrices gives a custom algebra.
    """
    if isinstance(spec, LieSubalgebra):
        return spec
    if isinstance(spec, (list, tuple, dict)):
        return _custom_from_data(spec, "custom")
    if not isinstance(spec, str) or ":" not in spec:
        raise LieError(f"unrecognized group spec {spec!r}")
    kind, arg = spec.split(":", 1)
    kind = kind.strip().lower()
    if kind == "custom":
        path = Path(arg)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise LieError(f"cannot read group file {arg}: {exc}") from None
        return _custom_from_data(data, f"custom:{path.name}")
    try:
        nums = [int(x) for x in arg.split(",")]
    except ValueError:
        raise LieError(f"bad group parameters in {spec!r}") from None
    if kind in ("o", "scalar", "e", "gl"):
        if len(nums) != 1 or nums[0] < 1:
            raise LieError(f"{kind} needs one positive dimension")
        n = nums[0]
        if kind == "o":
            return LieSubalgebra(n, tuple(_o_basis(n)), f"o({n})", "o")
        if kind == "scalar":
            return LieSubalgebra(n, (RatMatrix.identity(n),), f"scalar({n})", "scalar")
        if kind == "e":
            return LieSubalgebra(n, (), f"e({n})", "e")
        return LieSubalgebra(n, tuple(_mat(n, {(i, j): 1}) for i in range(n) for j in range(n)),
                             f"gl({n})", "gl")
    if kind == "product":
        if len(nums) != 2 or min(nums) < 1:
            raise LieError("product needs two positive block sizes P,Q")
        p, q = nums
        n = p + q
        basis = _o_basis(n, 0, p) + _o_basis(n, p, q)
        return LieSubalgebra(n, tuple(basis), f"product({p},{q})", "product", (p, q))
    raise LieError(f"unknown group kind {kind!r}")


parse_group = make_group


def _custom_from_data(data, name: str) -> LieSubalgebra:
    if isinstance(data, dict):
        mats = data.get("basis", [])
        n = data.get("n")
    else:
        mats, n = data, None
    try:
        basis = tuple(RatMatrix.from_rows([[as_rational(x) for x in row] for row in m]) for m in mats)
    except (TypeError, ValueError) as exc:
        raise LieError(f"bad matrix entry in group data: {exc}") from None
    if n is None:
        if not basis:
            raise LieError("empty custom basis needs an explicit n")
        n = basis[0].nrows
    return LieSubalgebra(int(n), basis, name, "custom")


# ---------------------------------------------------------------------------
# prolongation, supplement, splitting
# ---------------------------------------------------------------------------

def first_prolongation(g: LieSubalgebra) -> SubspaceBasis:
    """Kernel of the alternation map on ``V* (x) g``, as tensors in ``V^{0,2}_1``."""
    sp = tau_space(g.n)
    vecs = []
    for c in rref_kernel(g.delta_matrix):
        vecs.append(sum((t * x for t, x in zip(g.tau_basis, c) if x), Tensor.zero(sp)))
    return SubspaceBasis(sp, vecs)


def trace_equations(g: LieSubalgebra) -> RatMatrix:
    """Rows: ``sum_{j,k} A[j][k] T^k_{ij} = 0`` in wedge2 coordinates, one per (A, i)."""
    n = g.n
    keys = wedge2_keys(n)
    pos = {k: c for c, k in enumerate(keys)}
    rows = []
    for a in g.basis:
        for i in range(n):
            row = [Fraction(0)] * len(keys)
            for j in range(n):
                for k in range(n):
                    if i == j or not a[j, k]:
                        continue
                    if i < j:
                        row[pos[(i, j, k)]] += a[j, k]
                    else:
                        row[pos[(j, i, k)]] -= a[j, k]
            rows.append(row)
    return RatMatrix.from_rows(rows, len(keys))


def trace_supplement(g: LieSubalgebra, require_transpose_closed: bool = True) -> SubspaceBasis:
    """``{T : trace(A o i_v T) = 0 for all A in g, v in V}``."""
    if require_transpose_closed and not g.is_transpose_closed():
        raise LieError(f"{g.name} is not closed under transposition; supply W explicitly")
    n = g.n
    sp = tau_space(n)
    if not g.basis:
        vecs = [wedge2_from_coords(n, [int(c == d) for d in range(len(wedge2_keys(n)))])
                for c in range(len(wedge2_keys(n)))]
        return SubspaceBasis(sp, vecs)
    return SubspaceBasis(sp, [wedge2_from_coords(n, v) for v in rref_kernel(trace_equations(g))])


@dataclass(frozen=True)
class CanonicalSplitting:
    """``/\\^2 V* (x) V = delta(V* (x) g) (+) W`` with derived operators.

    ``proj_imdelta`` acts on wedge2 coordinates; ``inv_delta_proj`` maps
    wedge2 coordinates to ``V^{0,2}_1`` coefficient vectors of ``tau``;
    ``inv_delta_coords`` maps wedge2 coordinates to coordinates in
    ``g.tau_basis``.
    """

    g: LieSubalgebra
    W_basis: SubspaceBasis
    proj_imdelta: RatMatrix
    inv_delta_proj: RatMatrix
    inv_delta_coords: RatMatrix
    A_coeffs: dict = field(repr=False)
    fault: str | None = None

    @property
    def n(self) -> int:
        return self.g.n

    def tau_of(self, t: Tensor) -> Tensor:
        """``(delta^{-1} o P_imdelta)(T)`` for antisymmetric ``T`` in ``V^{0,2}_1``."""
        from .tensors import wedge2_coords
        vec = self.inv_delta_proj @ wedge2_coords(t)
        return Tensor.from_vector(tau_space(self.n), vec)

    def project(self, t: Tensor) -> Tensor:
        from .tensors import wedge2_coords
        return wedge2_from_coords(self.n, self.proj_imdelta @ wedge2_coords(t))

    def contract(self, t):
        """Apply the A table to nested ``t[i][j][k] = T^k_{ij}`` of any ring elements.

        Only entries with ``i < j`` are read.  Returns nested ``tau[a][b][g]``,
        with ``None`` standing for zero.
        """
        n = self.n
        out = [[[None] * n for _ in range(n)] for _ in range(n)]
        for (gm, a, b), terms in self._rows.items():
            acc = None
            for (i, j, k), c in terms:
                x = t[i][j][k] * c
                acc = x if acc is None else acc + x
            out[a][b][gm] = acc
        return out

    @cached_property
    def _rows(self) -> dict:
        rows: dict = {}
        for (gm, a, b, i, j, k), c in self.A_coeffs.items():
            rows.setdefault((gm, a, b), []).append(((i, j, k), c))
        return rows

    def with_fault(self, fault: str) -> "CanonicalSplitting":
        """Deliberately corrupted copy, used to check that verifications can fail."""
        if fault != "a-sign":
            raise LieError(f"unknown fault {fault!r}")
        return replace(self, inv_delta_proj=-self.inv_delta_proj, inv_delta_coords=-self.inv_delta_coords,
                       A_coeffs={k: -v for k, v in self.A_coeffs.items()}, fault=fault)

    def a_table_json(self) -> list:
        return [{"gamma": gm + 1, "alpha": a + 1, "beta": b + 1, "i": i + 1, "j": j + 1, "k": k + 1,
                 "val": str(v)} for (gm, a, b, i, j, k), v in sorted(self.A_coeffs.items())]


def build_splitting(g: LieSubalgebra, W: SubspaceBasis | None = None) -> CanonicalSplitting:
    n = g.n
    keys = wedge2_keys(n)
    m = len(keys)
    d = g.delta_matrix
    if matrix_rank(d) != d.ncols:
        raise LieError(f"first prolongation of {g.name} is nonzero; no canonical connection")
    if W is None:
        W = trace_supplement(g)
    from .tensors import wedge2_coords
    wcols = [wedge2_coords(t) for t in W.vectors]
    if d.ncols + len(wcols) != m:
        raise LieError(f"dimensions do not add up: {d.ncols} + {len(wcols)} != {m}")
    cols = [d.column(c) for c in range(d.ncols)] + wcols
    b = RatMatrix.from_columns(cols, m) if cols else RatMatrix.zeros(0, 0)
    try:
        binv = b.inverse()
    except ZeroDivisionError:
        raise LieError("image of delta and W do not form a direct sum") from None
    coords = RatMatrix.from_rows(binv.tolist()[:d.ncols], m)
    proj = d @ coords
    inv = g.tau_matrix @ coords if d.ncols else RatMatrix.zeros(tau_space(n).dim, m)
    sp = tau_space(n)
    table = {}
    for row, key in enumerate(sp.keys):
        (a, b_), (gm,) = key[1], key[2]
        for col, (i, j, k) in enumerate(keys):
            v = inv[row, col]
            if v:
                table[(gm, a, b_, i, j, k)] = v
    return CanonicalSplitting(g, W, proj, inv, coords, table)


def sample_group_elements(g: LieSubalgebra, limit: int = 8) -> list[RatMatrix]:
    """Rational test elements of the catalogue group.

    Signed permutations lying in the group, the 3-4-5 rotation when n = 2 and
    the group is O(2), and nonzero scalars for the scalar group.
    """
    import itertools
    n = g.n
    if g.kind == "scalar":
        return [RatMatrix.identity(n).scale(c) for c in (2, Fraction(-1, 3))]
    if g.kind == "e":
        return [RatMatrix.identity(n)]
    out = []
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            a = RatMatrix.from_rows([[signs[i] if perm[i] == j else 0 for j in range(n)] for i in range(n)])
            if a != RatMatrix.identity(n) and g.contains_group_element(a):
                out.append(a)
    if len(out) > limit:
        step = len(out) / limit
        out = [out[int(i * step)] for i in range(limit)]
    if g.kind == "o" and n == 2:
        out.append(RatMatrix.from_rows([[Fraction(3, 5), Fraction(-4, 5)], [Fraction(4, 5), Fraction(3, 5)]]))
    return out
