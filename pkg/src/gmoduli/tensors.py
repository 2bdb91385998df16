"""Tensor spaces ``S^r(V*) (x) V*^{(x)p} (x) V^{(x)q}`` and the operators on them.

Storage convention
------------------
A :class:`Tensor` stores one coefficient per basis element
``v*^{l1} . ... . v*^{lr} (x) v*^{c1} ... (x) v_{k1} ...`` where the symmetric
product is the *averaged* one, so that symmetrization sends
``v*^{l1}.....v*^{lr} (x) v*^{c}`` to ``v*^{l1}.....v*^{lr}.v*^{c}`` with
coefficient one.  The component of the multilinear form at an index tuple
whose symmetric part is the multiset ``S`` is therefore

    component = coefficient / multinomial(S),    multinomial(S) = r! / prod(m_i!)

For ``r = 0`` coefficients and components coincide.  All operators work on
full component arrays (numpy object arrays of Fractions) and convert back.

Keys are ``(sym, cov, con)`` tuples of 0-based indices with ``sym`` sorted.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb, factorial
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

import numpy as np

from .exact import RatMatrix, as_rational, matrix_rank, solve_linear

if TYPE_CHECKING:
    from .lie import LieSubalgebra

Key = tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

__all__ = [
    "TensorSpace",
    "TensorSpaceDesc",
    "Tensor",
    "SubspaceBasis",
    "TensorError",
    "basis_enumerate",
    "multinomial",
    "sym_rpq",
    "cyclic_sum",
    "alternation_delta",
    "spencer_delta",
    "gl_action",
    "linear_map_matrix",
    "wedge2_keys",
    "wedge2_coords",
    "wedge2_from_coords",
    "is_antisymmetric",
]


class TensorError(ValueError):
    pass


def multinomial(sym: Sequence[int]) -> int:
    out = factorial(len(sym))
    for m in Counter(sym).values():
        out //= factorial(m)
    return out


@dataclass(frozen=True)
class TensorSpace:
    """``V^{r,p}_q`` over ``V = Q^n``."""

    n: int
    r: int = 0
    p: int = 0
    q: int = 0

    def __post_init__(self):
        if self.n < 1 or min(self.r, self.p, self.q) < 0:
            raise TensorError(f"invalid tensor space {self}")

    @property
    def rank(self) -> int:
        return self.r + self.p + self.q

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.rank

    @property
    def dim(self) -> int:
        return comb(self.n + self.r - 1, self.r) * self.n ** (self.p + self.q)

    @cached_property
    def keys(self) -> tuple[Key, ...]:
        return tuple(basis_enumerate(self))

    @cached_property
    def index(self) -> dict[Key, int]:
        return {k: i for i, k in enumerate(self.keys)}

    def zeros(self) -> np.ndarray:
        return np.full(self.shape, Fraction(0), dtype=object)

    def __str__(self):
        return f"V^({self.r},{self.p})_{self.q}[n={self.n}]"


TensorSpaceDesc = TensorSpace


def basis_enumerate(space: TensorSpace) -> list[Key]:
    """Basis keys, graded-lex: sorted symmetric multiset, then cov, then con."""
    rng = range(space.n)
    syms = list(itertools.combinations_with_replacement(rng, space.r))
    covs = list(itertools.product(rng, repeat=space.p))
    cons = list(itertools.product(rng, repeat=space.q))
    return [(s, c, k) for s in syms for c in covs for k in cons]


class Tensor:
    """Element of a :class:`TensorSpace`, stored sparsely by basis key."""

    __slots__ = ("space", "entries")

    def __init__(self, space: TensorSpace, entries: dict | None = None):
        self.space = space
        clean: dict[Key, Fraction] = {}
        for (s, c, k), v in (entries or {}).items():
            key = (tuple(sorted(s)), tuple(c), tuple(k))
            if len(key[0]) != space.r or len(key[1]) != space.p or len(key[2]) != space.q:
                raise TensorError(f"key {key} does not fit {space}")
            if any(not 0 <= i < space.n for part in key for i in part):
                raise TensorError(f"index out of range in {key}")
            v = as_rational(v)
            if v:
                nv = clean.get(key, 0) + v
                if nv:
                    clean[key] = nv
                else:
                    clean.pop(key, None)
        self.entries = clean

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, space: TensorSpace) -> "Tensor":
        return cls(space)

    @classmethod
    def basis(cls, space: TensorSpace, key: Key) -> "Tensor":
        return cls(space, {key: 1})

    @classmethod
    def from_vector(cls, space: TensorSpace, vec: Sequence) -> "Tensor":
        if len(vec) != space.dim:
            raise TensorError(f"vector of length {len(vec)} for space of dim {space.dim}")
        t = cls.__new__(cls)
        t.space = space
        t.entries = {k: as_rational(v) for k, v in zip(space.keys, vec) if v}
        return t

    @classmethod
    def from_array(cls, space: TensorSpace, arr: np.ndarray) -> "Tensor":
        """Read coefficients from a component array (assumed symmetric in the first r axes)."""
        if arr.shape != space.shape:
            raise TensorError(f"array shape {arr.shape} does not match {space}")
        entries = {}
        for key in space.keys:
            s, c, k = key
            v = arr[s + c + k]
            if v:
                entries[key] = Fraction(v) * multinomial(s)
        t = cls.__new__(cls)
        t.space = space
        t.entries = entries
        return t

    @classmethod
    def from_components(cls, space: TensorSpace, fn: Callable[[tuple, tuple, tuple], object]) -> "Tensor":
        """Build from a component function evaluated at sorted keys."""
        entries = {}
        for key in space.keys:
            v = as_rational(fn(*key))
            if v:
                entries[key] = v * multinomial(key[0])
        t = cls.__new__(cls)
        t.space = space
        t.entries = entries
        return t

    # -- views -----------------------------------------------------------
    def to_array(self) -> np.ndarray:
        arr = self.space.zeros()
        for (s, c, k), v in self.entries.items():
            comp = v / multinomial(s)
            for perm in set(itertools.permutations(s)):
                arr[perm + c + k] = comp
        return arr

    def to_vector(self) -> tuple[Fraction, ...]:
        z = Fraction(0)
        return tuple(self.entries.get(k, z) for k in self.space.keys)

    def coefficient(self, key: Key) -> Fraction:
        s, c, k = key
        return self.entries.get((tuple(sorted(s)), tuple(c), tuple(k)), Fraction(0))

    def component(self, sym: Sequence[int], cov: Sequence[int] = (), con: Sequence[int] = ()) -> Fraction:
        s = tuple(sorted(sym))
        return self.entries.get((s, tuple(cov), tuple(con)), Fraction(0)) / multinomial(s)

    def is_zero(self) -> bool:
        return not self.entries

    # -- arithmetic ------------------------------------------------------
    def _same(self, other: "Tensor"):
        if not isinstance(other, Tensor) or other.space != self.space:
            raise TensorError("tensors live in different spaces")

    def __add__(self, other: "Tensor") -> "Tensor":
        self._same(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            nv = out.get(k, 0) + v
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
        t = Tensor.__new__(Tensor)
        t.space, t.entries = self.space, out
        return t

    def __neg__(self) -> "Tensor":
        t = Tensor.__new__(Tensor)
        t.space, t.entries = self.space, {k: -v for k, v in self.entries.items()}
        return t

    def __sub__(self, other: "Tensor") -> "Tensor":
        return self + (-other)

    def __mul__(self, c) -> "Tensor":
        c = as_rational(c)
        t = Tensor.__new__(Tensor)
        t.space = self.space
        t.entries = {k: v * c for k, v in self.entries.items()} if c else {}
        return t

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.space == other.space and self.entries == other.entries

    def __hash__(self):
        return hash((self.space, frozenset(self.entries.items())))

    def __repr__(self):
        body = ", ".join(
            f"{tuple(i + 1 for i in s)}{tuple(i + 1 for i in c)}{tuple(i + 1 for i in k)}:{v}"
            for (s, c, k), v in sorted(self.entries.items(), key=lambda kv: self.space.index[kv[0]]))
        return f"Tensor({self.space}; {body or '0'})"

    # -- serialization ---------------------------------------------------
    def to_json(self) -> dict:
        sp = self.space
        return {
            "space": {"n": sp.n, "r": sp.r, "p": sp.p, "q": sp.q},
            "entries": [
                {"sym": [i + 1 for i in s], "cov": [i + 1 for i in c],
                 "con": [i + 1 for i in k], "val": str(v)}
                for (s, c, k), v in sorted(self.entries.items(), key=lambda kv: sp.index[kv[0]])
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Tensor":
        sp = data["space"]
        space = TensorSpace(int(sp["n"]), int(sp.get("r", 0)), int(sp.get("p", 0)), int(sp.get("q", 0)))
        entries = {}
        for e in data.get("entries", []):
            key = (tuple(i - 1 for i in e.get("sym", [])), tuple(i - 1 for i in e.get("cov", [])),
                   tuple(i - 1 for i in e.get("con", [])))
            key = (tuple(sorted(key[0])), key[1], key[2])
            entries[key] = entries.get(key, 0) + as_rational(e["val"])
        return cls(space, entries)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def sym_rpq(t: Tensor) -> Tensor:
    """``sym^{r,p}_q``: average over permutations of the first r+1 covariant slots."""
    sp = t.space
    if sp.p < 1:
        raise TensorError("sym needs at least one plain covariant slot (p >= 1)")
    out_space = TensorSpace(sp.n, sp.r + 1, sp.p - 1, sp.q)
    if t.is_zero():
        return Tensor.zero(out_space)
    arr = t.to_array()
    k = sp.r + 1
    rest = list(range(k, sp.rank))
    acc = None
    perms = list(itertools.permutations(range(k)))
    for perm in perms:
        term = np.transpose(arr, list(perm) + rest)
        acc = term if acc is None else acc + term
    acc = acc * Fraction(1, len(perms))
    return Tensor.from_array(out_space, acc)


def _unfolded(t: Tensor) -> Tensor:
    sp = t.space
    if sp.r == 0:
        return t
    return Tensor.from_array(TensorSpace(sp.n, 0, sp.r + sp.p, sp.q), t.to_array())


def cyclic_sum(t: Tensor, slots: Sequence[int]) -> Tensor:
    """Sum over the cyclic rotations of the named covariant slots (no 1/k factor).

    Slot positions count the symmetric block first (0..r-1), then the plain
    covariant slots.  When every named slot is a plain covariant slot the result
    stays in the same space; otherwise it is returned in the unfolded space
    ``V^{0,r+p}_q``.
    """
    sp = t.space
    slots = list(slots)
    ncov = sp.r + sp.p
    if not slots or len(set(slots)) != len(slots) or any(not 0 <= s < ncov for s in slots):
        raise TensorError(f"invalid slots {slots} for {sp}")
    if len(slots) == 1:
        return t
    touches_sym = any(s < sp.r for s in slots)
    work = _unfolded(t) if touches_sym else t
    arr = work.to_array()
    m = len(slots)
    acc = None
    for shift in range(m):
        axes = list(range(work.space.rank))
        for i, s in enumerate(slots):
            axes[s] = slots[(i + shift) % m]
        term = np.transpose(arr, axes)
        acc = term if acc is None else acc + term
    return Tensor.from_array(work.space, acc)


def is_antisymmetric(t: Tensor, slots: Sequence[int]) -> bool:
    """Antisymmetry in the given plain covariant slots (positions among the p slots)."""
    sp = t.space
    arr = t.to_array()
    base = sp.r
    for a, b in itertools.combinations(slots, 2):
        axes = list(range(sp.rank))
        axes[base + a], axes[base + b] = axes[base + b], axes[base + a]
        if not np.all(arr + np.transpose(arr, axes) == 0):
            return False
    return True


def alternation_delta(tau: Tensor, g: "LieSubalgebra") -> Tensor:
    """``(delta tau)(u, v) = tau(u) v - tau(v) u``.

    ``tau`` lives in ``V^{0,2}_1`` with components ``tau^k_{ij}``, meaning
    ``tau(v_i) v_j = sum_k tau^k_{ij} v_k``; each slice ``tau(v_i)`` must lie in
    the span of the Lie algebra basis.  The output ``T^k_{ij}`` is stored in the
    full ``V^{0,2}_1`` ambient.
    """
    sp = tau.space
    if (sp.r, sp.p, sp.q) != (0, 2, 1) or sp.n != g.n:
        raise TensorError(f"expected tau in V^(0,2)_1 with n={g.n}, got {sp}")
    arr = tau.to_array()
    for i in range(sp.n):
        mat = RatMatrix.from_rows([[arr[i, j, k] for j in range(sp.n)] for k in range(sp.n)])
        if not g.in_span(mat):
            raise TensorError(f"tau(v_{i + 1}) is not in the Lie algebra")
    return Tensor.from_array(sp, arr - np.transpose(arr, (1, 0, 2)))


def spencer_delta(t: Tensor, l: int = 2) -> Tensor:
    """Spencer operator ``S^{r+1} (x) /\\^{l-1} (x) V^q -> S^r (x) /\\^l (x) V^q``.

    ``t`` is housed in ``V^{r+1,l-1}_q`` and must be antisymmetric in its
    ``l-1`` plain slots; the output lives in ``V^{r,l}_q`` and is
    antisymmetric in its ``l`` plain slots.
    """
    sp = t.space
    if l < 1 or sp.p != l - 1 or sp.r < 1:
        raise TensorError(f"spencer_delta with l={l} needs t in V^(r+1,{l - 1})_q, got {sp}")
    if l > 2 and not is_antisymmetric(t, range(l - 1)):
        raise TensorError("input is not antisymmetric in its plain covariant slots")
    r = sp.r - 1
    out_space = TensorSpace(sp.n, r, l, sp.q)
    arr = t.to_array()
    acc = out_space.zeros()
    con = list(range(sp.r + sp.p, sp.rank))
    for h in range(l):
        axes = list(range(r))
        for c in range(l):
            axes.append(r if c == h else r + 1 + (c if c < h else c - 1))
        term = np.transpose(arr, axes + con)
        acc = acc + term if h % 2 == 0 else acc - term
    return Tensor.from_array(out_space, acc)


def gl_action(a: RatMatrix, t: Tensor) -> Tensor:
    """Natural left action: contravariant slots by ``a``, covariant by ``a^{-T}``."""
    sp = t.space
    if a.shape != (sp.n, sp.n):
        raise TensorError("matrix size does not match tensor dimension")
    try:
        ainv = a.inverse()
    except ZeroDivisionError:
        raise TensorError("gl_action needs an invertible matrix") from None
    if t.is_zero():
        return t
    arr = t.to_array()
    cov = np.array(ainv.tolist(), dtype=object)
    con = np.array(a.T.tolist(), dtype=object)
    for ax in range(sp.rank):
        m = cov if ax < sp.r + sp.p else con
        arr = np.moveaxis(np.tensordot(arr, m, axes=([ax], [0])), -1, ax)
    return Tensor.from_array(sp, arr)


def linear_map_matrix(fn: Callable[[Tensor], Tensor], domain: TensorSpace,
                      codomain: TensorSpace | None = None) -> RatMatrix:
    """Matrix of a linear map in basis-key coordinates (columns = images of basis tensors)."""
    cols = []
    for key in domain.keys:
        img = fn(Tensor.basis(domain, key))
        if codomain is not None and img.space != codomain:
            raise TensorError(f"map lands in {img.space}, expected {codomain}")
        codomain = img.space
        cols.append(img.to_vector())
    if codomain is None:
        raise TensorError("cannot infer codomain of a map on a zero-dimensional space")
    return RatMatrix.from_columns(cols, codomain.dim)


# ---------------------------------------------------------------------------
# /\^2 V* (x) V inside V^{0,2}_1
# ---------------------------------------------------------------------------

def wedge2_keys(n: int) -> list[tuple[int, int, int]]:
    """Coordinates ``(i, j, k)`` with ``i < j`` for ``T^k_{ij}``."""
    return [(i, j, k) for i in range(n) for j in range(i + 1, n) for k in range(n)]


def wedge2_coords(t: Tensor) -> tuple[Fraction, ...]:
    sp = t.space
    if (sp.r, sp.p, sp.q) != (0, 2, 1):
        raise TensorError(f"expected an element of V^(0,2)_1, got {sp}")
    if not is_antisymmetric(t, (0, 1)):
        raise TensorError("tensor is not antisymmetric in its covariant pair")
    return tuple(t.component((), (i, j), (k,)) for i, j, k in wedge2_keys(sp.n))


def wedge2_from_coords(n: int, coords: Sequence) -> Tensor:
    sp = TensorSpace(n, 0, 2, 1)
    entries = {}
    for (i, j, k), v in zip(wedge2_keys(n), coords):
        v = as_rational(v)
        if v:
            entries[((), (i, j), (k,))] = v
            entries[((), (j, i), (k,))] = -v
    return Tensor(sp, entries)


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------

@dataclass
class SubspaceBasis:
    """Linearly independent tensors spanning a subspace of ``ambient``."""

    ambient: TensorSpace
    vectors: list[Tensor]
    equivariance_witnesses: list[tuple[str, bool]] = field(default_factory=list)

    def __post_init__(self):
        for v in self.vectors:
            if v.space != self.ambient:
                raise TensorError(f"vector in {v.space} outside ambient {self.ambient}")
        if self.vectors and matrix_rank(self.matrix()) != len(self.vectors):
            raise TensorError("subspace vectors are linearly dependent")

    @classmethod
    def from_vectors(cls, ambient: TensorSpace, vecs: Iterable[Sequence]) -> "SubspaceBasis":
        return cls(ambient, [Tensor.from_vector(ambient, v) for v in vecs])

    @classmethod
    def spanned_by(cls, ambient: TensorSpace, tensors: Iterable[Tensor]) -> "SubspaceBasis":
        """Independent subfamily (first occurrences kept) of a spanning family."""
        chosen: list[Tensor] = []
        rank = 0
        for t in tensors:
            trial = chosen + [t]
            rk = matrix_rank(RatMatrix.from_rows([x.to_vector() for x in trial], ambient.dim))
            if rk > rank:
                chosen, rank = trial, rk
        return cls(ambient, chosen)

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def matrix(self) -> RatMatrix:
        """Rows are coordinate vectors of the basis."""
        return RatMatrix.from_rows([v.to_vector() for v in self.vectors], self.ambient.dim)

    def contains(self, t: Tensor) -> bool:
        if t.space != self.ambient:
            return False
        if t.is_zero():
            return True
        rows = [v.to_vector() for v in self.vectors] + [t.to_vector()]
        return matrix_rank(RatMatrix.from_rows(rows, self.ambient.dim)) == self.dim

    def coordinates(self, t: Tensor) -> tuple[Fraction, ...] | None:
        """Coefficients of ``t`` in this basis, or None when ``t`` is outside."""
        if not self.vectors:
            return () if t.is_zero() else None
        return solve_linear(self.matrix().T, t.to_vector())

    def combine(self, coeffs: Sequence) -> Tensor:
        acc = Tensor.zero(self.ambient)
        for c, v in zip(coeffs, self.vectors):
            acc = acc + v * c
        return acc

    def is_subspace_of(self, other: "SubspaceBasis") -> bool:
        return all(other.contains(v) for v in self.vectors)

    def same_span(self, other: "SubspaceBasis") -> bool:
        return self.ambient == other.ambient and self.dim == other.dim and self.is_subspace_of(other)

    def check_invariance(self, label: str, act: Callable[[Tensor], Tensor]) -> bool:
        ok = all(self.contains(act(v)) for v in self.vectors)
        self.equivariance_witnesses.append((label, ok))
        return ok
