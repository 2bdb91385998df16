"""The modules W^{r+1} and the flattening of slice jets.

Tensor conventions follow :mod:`gmoduli.tensors`.  ``V^{r+1,1}_1`` holds
``t^k_{S;j}`` (symmetric block ``S`` of size r+1, plain slot ``j``, upper
``k``); for a frame jet this is ``d^{r+1} sigma_{kj} / dx^S (0)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .connection import FrameJet, f_tensor_jet
from .exact import PolyJet, RatMatrix, matrix_rank, rref_kernel, solve_linear
from .jets import s_r_membership
from .lie import CanonicalSplitting, LieSubalgebra, build_splitting, first_prolongation, sample_group_elements
from .oracles import hook_content_dim
from .tensors import SubspaceBasis, Tensor, TensorSpace, gl_action, multinomial, spencer_delta

__all__ = [
    "ModuliError",
    "sigma_r",
    "frame_with_top",
    "sym_matrix",
    "l_apply",
    "l_operator",
    "f_r_map",
    "q_r_eval",
    "w_module",
    "w_module_specialized",
    "epstein_dim",
    "epstein_injection",
    "g_tensor_basis",
    "z_splitting_check",
    "lift_section",
    "split_jet",
    "reassemble",
    "ModuliRow",
    "ModuliTable",
    "moduli_table",
]


class ModuliError(ValueError):
    pass


def _exp_of(sym: tuple[int, ...], n: int) -> tuple[int, ...]:
    e = [0] * n
    for i in sym:
        e[i] += 1
    return tuple(e)


def sigma_r(sigma: FrameJet) -> Tensor:
    """Top derivative tensor ``d^r sigma_{ij}/dx^S (0)`` in ``V^{r,1}_1`` (cov j, con i)."""
    r, n = sigma.order, sigma.n
    if r < 1:
        raise ModuliError("sigma_r needs order >= 1")
    sp = TensorSpace(n, r, 1, 1)
    fr = factorial(r)
    ent = {}
    for i in range(n):
        for j in range(n):
            for e, v in sigma.sigma[i][j].items():
                if sum(e) == r:
                    s = tuple(h for h in range(n) for _ in range(e[h]))
                    ent[(s, (j,), (i,))] = v * fr
    return Tensor(sp, ent)


def frame_with_top(sigma: FrameJet, top: Tensor) -> FrameJet:
    """Extend ``sigma`` by one order with top derivative tensor ``top``."""
    n, r = sigma.n, sigma.order + 1
    if top.space != TensorSpace(n, r, 1, 1):
        raise ModuliError(f"top tensor must lie in V^({r},1)_1")
    fr = factorial(r)
    rows = [[p.extend(r) for p in row] for row in sigma.sigma]
    for (s, (j,), (i,)), v in top.entries.items():
        rows[i][j] = rows[i][j] + PolyJet.monomial(n, r, _exp_of(s, n), v / fr)
    return FrameJet(n, r, tuple(tuple(row) for row in rows))


def _derivative_tensor(f, n: int, r: int) -> Tensor:
    """``d^r F^g_{ab}/dx^S (0)`` housed in ``V^{r,2}_1``."""
    fr = factorial(r)
    ent = {}
    for a in range(n):
        for b in range(n):
            for g in range(n):
                for e, v in f[a][b][g].items():
                    if sum(e) == r:
                        s = tuple(h for h in range(n) for _ in range(e[h]))
                        ent[(s, (a, b), (g,))] = v * fr
    return Tensor(TensorSpace(n, r, 2, 1), ent)


# ---------------------------------------------------------------------------
# sparse operator matrices
# ---------------------------------------------------------------------------

def sym_matrix(n: int, r: int, p: int, q: int) -> RatMatrix:
    """Matrix of ``sym: V^{r,p}_q -> V^{r+1,p-1}_q`` in coefficient coordinates."""
    dom = TensorSpace(n, r, p, q)
    cod = TensorSpace(n, r + 1, p - 1, q)
    rows = [[Fraction(0)] * dom.dim for _ in range(cod.dim)]
    for row, (s, c, k) in enumerate(cod.keys):
        ms = multinomial(s)
        for h in range(r + 1):
            rest = s[:h] + s[h + 1:]
            col = dom.index[(rest, (s[h],) + c, k)]
            rows[row][col] += Fraction(ms, (r + 1) * multinomial(rest))
    return RatMatrix.from_rows(rows, dom.dim)


def l_apply(t: Tensor, split: CanonicalSplitting) -> Tensor:
    """``(1 (x) delta^{-1} P_imdelta) o delta^{r+1,1}``: ``V^{r+1,1}_1 -> V^{r,2}_1``."""
    sp = t.space
    if (sp.p, sp.q) != (1, 1) or sp.r < 1:
        raise ModuliError(f"L acts on V^(r+1,1)_1, got {sp}")
    mat = l_operator(sp.r - 1, split)
    return Tensor.from_vector(TensorSpace(sp.n, sp.r - 1, 2, 1), mat @ t.to_vector())


def l_operator(r: int, split: CanonicalSplitting) -> RatMatrix:
    """Matrix of ``L^{(r)}`` from ``V^{r+1,1}_1`` to ``V^{r,2}_1`` (coefficient coordinates)."""
    # the split is kept alive in the cache entry, so its id cannot be reused
    _, cache = _L_CACHE.setdefault(id(split), (split, {}))
    if r not in cache:
        cache[r] = _build_l_operator(r, split)
    return cache[r]


_L_CACHE: dict = {}


def _build_l_operator(r: int, split: CanonicalSplitting) -> RatMatrix:
    n = split.n
    dom = TensorSpace(n, r + 1, 1, 1)
    cod = TensorSpace(n, r, 2, 1)
    rows = [[Fraction(0)] * dom.dim for _ in range(cod.dim)]
    for s in itertools.combinations_with_replacement(range(n), r):
        ms = multinomial(s)
        for (gm, a, b, i, j, k), c in split.A_coeffs.items():
            row = cod.index[(s, (a, b), (gm,))]
            si = tuple(sorted(s + (i,)))
            sj = tuple(sorted(s + (j,)))
            rows[row][dom.index[(si, (j,), (k,))]] += c * Fraction(ms, multinomial(si))
            rows[row][dom.index[(sj, (i,), (k,))]] -= c * Fraction(ms, multinomial(sj))
    return RatMatrix.from_rows(rows, dom.dim)


def f_r_map(sigma: FrameJet, split: CanonicalSplitting) -> Tensor:
    """``F^{(r)}``: r-th derivatives at 0 of the difference tensor, for a jet of order r+1."""
    if sigma.order < 1:
        raise ModuliError("F^(r) needs a frame jet of order >= 1")
    return _derivative_tensor(f_tensor_jet(sigma, split), sigma.n, sigma.order - 1)


def q_r_eval(sigma: FrameJet, split: CanonicalSplitting) -> Tensor:
    """``Q^{(r)}``: ``F^{(r)}`` of the lift of ``sigma`` with zero top derivatives."""
    return f_r_map(sigma.extend(sigma.order + 1), split)


# ---------------------------------------------------------------------------
# W^{r+1}
# ---------------------------------------------------------------------------

def _stacked_w_equations(r: int, split: CanonicalSplitting) -> RatMatrix:
    n = split.n
    s1 = sym_matrix(n, r + 1, 1, 1)
    s2 = sym_matrix(n, r, 2, 1) @ l_operator(r, split)
    return RatMatrix.from_rows(list(s1.rows) + list(s2.rows), s1.ncols)


def w_module(k: int, split: CanonicalSplitting) -> SubspaceBasis:
    """``W^k`` (k = r+1 >= 1): kernel of symmetrization and of ``sym o L^{(r)}``."""
    if k < 1:
        raise ModuliError("W^k is defined for k >= 1")
    r = k - 1
    amb = TensorSpace(split.n, k, 1, 1)
    return SubspaceBasis.from_vectors(amb, rref_kernel(_stacked_w_equations(r, split)))


def w_module_specialized(g: LieSubalgebra, k: int) -> SubspaceBasis:
    """``W^k`` from the closed-form equation systems of the catalogue groups."""
    if g.kind not in ("o", "product", "scalar", "e"):
        raise ModuliError(f"no closed-form equations for {g.name}")
    n = g.n
    amb = TensorSpace(n, k, 1, 1)
    rows = list(sym_matrix(n, k, 1, 1).rows)
    idx = amb.index

    def same_block(a, b):
        return g.kind == "o" or (a < g.blocks[0]) == (b < g.blocks[0])

    for s in itertools.combinations_with_replacement(range(n), k):
        if g.kind in ("o", "product"):
            for j in range(n):
                for m in range(j + 1, n):
                    if same_block(j, m):
                        row = [Fraction(0)] * amb.dim
                        row[idx[(s, (j,), (m,))]] = Fraction(1)
                        row[idx[(s, (m,), (j,))]] = Fraction(-1)
                        rows.append(row)
        elif g.kind == "scalar":
            row = [Fraction(0)] * amb.dim
            for m in range(n):
                row[idx[(s, (m,), (m,))]] = Fraction(1)
            rows.append(row)
    return SubspaceBasis.from_vectors(amb, rref_kernel(RatMatrix.from_rows(rows, amb.dim)))


def epstein_dim(n: int, k: int) -> int:
    """Dimension of the GL(n)-module with Young diagram (k, 2); zero when k = 1."""
    if k < 1:
        raise ModuliError("k must be >= 1")
    if k == 1:
        return 0
    return hook_content_dim(n, (k, 2))


def epstein_injection(n: int, k: int) -> RatMatrix:
    """Re-housing ``g_{j m i_1..i_k} -> t^m_{i_1..i_k; j}`` as a matrix.

    Domain: component vectors of ``V^{0,k+2}_0`` restricted to tensors
    symmetric in the last k slots (only sorted tails are used as columns).
    Codomain: coefficient vectors of ``V^{k,1}_1``.
    """
    cod = TensorSpace(n, k, 1, 1)
    cols = []
    for j in range(n):
        for m in range(n):
            for s in itertools.combinations_with_replacement(range(n), k):
                cols.append(Tensor(cod, {(s, (j,), (m,)): multinomial(s)}).to_vector())
    return RatMatrix.from_columns(cols, cod.dim)


def g_tensor_basis(g: LieSubalgebra, k: int) -> list[Tensor]:
    """Basis of ``S^k V* (x) g`` inside ``V^{k,1}_1``: ``t^m_{S;j} = [S = S0] A[m][j]``."""
    sp = TensorSpace(g.n, k, 1, 1)
    out = []
    for s in itertools.combinations_with_replacement(range(g.n), k):
        for a in g.basis:
            ms = multinomial(s)
            out.append(Tensor(sp, {(s, (j,), (m,)): a[m, j] * ms
                                   for j in range(g.n) for m in range(g.n) if a[m, j]}))
    return out


@dataclass
class SplittingReport:
    order: int
    identity_ok: bool
    zbar_in_vbar: bool
    direct_sum: bool
    dim_vbar: int
    dim_w: int
    dim_z: int
    dim_g_part: int
    dimension_count_ok: bool

    @property
    def ok(self) -> bool:
        return self.identity_ok and self.zbar_in_vbar and self.direct_sum and self.dimension_count_ok

    def to_json(self) -> dict:
        return {**self.__dict__, "ok": self.ok}


def _z_basis(k: int, split: CanonicalSplitting) -> SubspaceBasis:
    """``Z = ((r+1)/(r+2)) sym(delta^{r+1,1}(S^{r+1} V* (x) g))`` inside ``Vbar^{r+1,1}_1``."""
    n, r = split.n, k - 1
    amb = TensorSpace(n, k, 1, 1)
    sm = sym_matrix(n, r, 2, 1)
    vecs = []
    for t in g_tensor_basis(split.g, k):
        d = spencer_delta(t, 2)
        vecs.append(Tensor.from_vector(amb, sm @ d.to_vector()) * Fraction(r + 1, r + 2))
    return SubspaceBasis.spanned_by(amb, vecs)


def z_splitting_check(k: int, split: CanonicalSplitting, w: SubspaceBasis | None = None) -> SplittingReport:
    n, r = split.n, k - 1
    amb = TensorSpace(n, k, 1, 1)
    sl = sym_matrix(n, r, 2, 1) @ l_operator(r, split)
    gpart = g_tensor_basis(split.g, k)
    identity_ok = all(tuple(sl @ t.to_vector()) == t.to_vector() for t in gpart)
    z = _z_basis(k, split)
    s1 = sym_matrix(n, k, 1, 1)
    zbar_in_vbar = all(all(x == 0 for x in s1 @ v.to_vector()) for v in z.vectors)
    if w is None:
        w = w_module(k, split)
    dim_vbar = amb.dim - s1.rank()
    stacked = [v.to_vector() for v in w.vectors + z.vectors]
    rank = matrix_rank(RatMatrix.from_rows(stacked, amb.dim)) if stacked else 0
    direct = rank == w.dim + z.dim == dim_vbar
    count_ok = w.dim == dim_vbar - len(gpart) and z.dim == len(gpart)
    return SplittingReport(k, identity_ok, zbar_in_vbar, direct, dim_vbar, w.dim, z.dim, len(gpart), count_ok)


# ---------------------------------------------------------------------------
# section and flattening
# ---------------------------------------------------------------------------

def lift_section(sigma: FrameJet, split: CanonicalSplitting, check: bool = True) -> FrameJet:
    """Equivariant lift of a slice jet of order r to a slice jet of order r+1."""
    if check and not s_r_membership(sigma, split).ok:
        raise ModuliError("input jet is not in the slice")
    n, r = sigma.n, sigma.order
    k = r + 1
    amb = TensorSpace(n, k, 1, 1)
    q = q_r_eval(sigma, split)
    sym2 = sym_matrix(n, r, 2, 1)
    rhs = [-x for x in sym2 @ q.to_vector()]
    z = _z_basis(k, split)
    if z.dim == 0:
        if any(rhs):
            raise ModuliError("no solution for the lift equations")
        top = Tensor.zero(amb)
    else:
        sl = sym2 @ l_operator(r, split)
        m = RatMatrix.from_columns([sl @ v.to_vector() for v in z.vectors], amb.dim)
        c = solve_linear(m, rhs)
        if c is None:
            raise ModuliError("no solution for the lift equations")
        top = z.combine(c)
    out = frame_with_top(sigma, top)
    if check and not s_r_membership(out, split).ok:
        raise ModuliError("lift left the slice (internal inconsistency)")
    return out


def split_jet(sigma: FrameJet, split: CanonicalSplitting, w: SubspaceBasis | None = None,
              check: bool = True) -> tuple[FrameJet, Tensor]:
    """``(pi sigma, Sigma(sigma) - Sigma(lift(pi sigma)))`` with the second part in W^{r+1}."""
    if sigma.order < 1:
        raise ModuliError("split_jet needs order >= 1")
    if check and not s_r_membership(sigma, split).ok:
        raise ModuliError("input jet is not in the slice")
    low = sigma.truncate(sigma.order - 1)
    comp = sigma_r(sigma) - sigma_r(lift_section(low, split, check=False))
    if check:
        w = w if w is not None else w_module(sigma.order, split)
        if not w.contains(comp):
            raise ModuliError("W component is not in W (internal inconsistency)")
    return low, comp


def reassemble(low: FrameJet, comp: Tensor, split: CanonicalSplitting) -> FrameJet:
    lifted = lift_section(low, split, check=False)
    return frame_with_top(low, sigma_r(lifted) + comp)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

@dataclass
class ModuliRow:
    order: int
    dim_w: int
    dim_s: int
    specialized_match: bool | None
    splitting_ok: bool
    equivariant: bool
    epstein: int | None = None
    basis: SubspaceBasis | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        out = {"order": self.order, "dim_W": self.dim_w, "dim_S": self.dim_s,
               "specialized_match": self.specialized_match, "splitting_ok": self.splitting_ok,
               "equivariant": self.equivariant}
        if self.epstein is not None:
            out["epstein_dim"] = self.epstein
        return out


@dataclass
class ModuliTable:
    group: str
    n: int
    max_order: int
    prolongation_dim: int
    rows: list[ModuliRow]

    @property
    def ok(self) -> bool:
        return all(row.splitting_ok and row.equivariant and row.specialized_match is not False
                   for row in self.rows)

    def to_json(self) -> dict:
        return {"group": self.group, "n": self.n, "max_order": self.max_order,
                "prolongation_dim": self.prolongation_dim, "ok": self.ok,
                "rows": [r.to_json() for r in self.rows]}

    def to_csv(self) -> str:
        return "\n".join(f"{r.order},{r.dim_w},{r.dim_s}" for r in self.rows)

    def to_text(self) -> str:
        lines = [f"group {self.group}  n={self.n}  prolongation dim {self.prolongation_dim}",
                 f"{'k':>3} {'dim W^k':>8} {'dim S^k':>8}  checks"]
        for r in self.rows:
            flags = [f"split={'ok' if r.splitting_ok else 'FAIL'}",
                     f"equivariant={'ok' if r.equivariant else 'FAIL'}"]
            if r.specialized_match is not None:
                flags.append(f"closed-form={'ok' if r.specialized_match else 'MISMATCH'}")
            if r.epstein is not None:
                flags.append(f"epstein={r.epstein}")
            lines.append(f"{r.order:>3} {r.dim_w:>8} {r.dim_s:>8}  " + " ".join(flags))
        return "\n".join(lines)


def moduli_table(group, max_order: int, split: CanonicalSplitting | None = None) -> ModuliTable:
    from .lie import make_group
    g = make_group(group)
    pro = first_prolongation(g).dim
    if pro:
        raise ModuliError(f"first prolongation of {g.name} has dimension {pro}")
    split = split if split is not None else build_splitting(g)
    elements = sample_group_elements(g)
    rows = []
    total = 0
    for k in range(1, max_order + 1):
        w = w_module(k, split)
        total += w.dim
        spec = None
        if g.kind in ("o", "product", "scalar", "e"):
            spec = w.same_span(w_module_specialized(g, k))
        rep = z_splitting_check(k, split, w)
        equiv = all(w.check_invariance(f"g{i}", lambda t, a=a: gl_action(a, t)) for i, a in enumerate(elements))
        eps = epstein_dim(g.n, k) if g.kind == "o" else None
        rows.append(ModuliRow(k, w.dim, total, spec, rep.ok, equiv, eps, w))
    return ModuliTable(g.name, g.n, max_order, pro, rows)
