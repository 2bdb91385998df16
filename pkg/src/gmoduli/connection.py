"""Canonical connection of a frame jet.

Index layout used throughout: nested lists ``X[i][j][k]`` hold the quantity
with lower indices ``i, j`` and upper index ``k``.  In particular
``gamma[a][b][g]`` is the coefficient of ``d_g`` in ``nabla_{d_a} d_b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .exact import JetError, PolyJet, RatMatrix, jet_matrix_inverse
from .lie import CanonicalSplitting

__all__ = [
    "ConnectionDataError",
    "FrameJet",
    "ConnectionJet",
    "flat_torsion",
    "eta_from_frame",
    "gamma_bar",
    "f_tensor_jet",
    "christoffels_from_frame",
    "frame_torsion",
    "torsion_w_defect",
]


class ConnectionDataError(ValueError):
    pass


def _zero3(n, order, nv=None):
    nv = n if nv is None else nv
    return [[[PolyJet.zero(nv, order) for _ in range(n)] for _ in range(n)] for _ in range(n)]


def polyjet_to_json(p: PolyJet) -> dict:
    return {"n_vars": p.n_vars, "order": p.order,
            "terms": [{"exp": list(e), "val": str(v)} for e, v in p.items()]}


def polyjet_from_json(d: dict) -> PolyJet:
    from .exact import as_rational
    return PolyJet(int(d["n_vars"]), int(d["order"]),
                   {tuple(t["exp"]): as_rational(t["val"]) for t in d.get("terms", [])})


@dataclass(frozen=True, eq=False)
class FrameJet:
    """r-jet at 0 of a moving frame; column ``j`` of ``sigma`` is the vector ``X_j``."""

    n: int
    order: int
    sigma: tuple[tuple[PolyJet, ...], ...]

    def __post_init__(self):
        sig = tuple(tuple(row) for row in self.sigma)
        object.__setattr__(self, "sigma", sig)
        if len(sig) != self.n or any(len(row) != self.n for row in sig):
            raise JetError("frame matrix has the wrong shape")
        for row in sig:
            for p in row:
                if p.n_vars != self.n or p.order != self.order:
                    raise JetError(f"frame entries must be PolyJets with {self.n} vars and order {self.order}")
        if self.at_zero().det() == 0:
            raise JetError("frame is singular at the origin")

    @classmethod
    def from_matrix(cls, rows, order: int | None = None) -> "FrameJet":
        rows = [list(r) for r in rows]
        n = len(rows)
        if order is None:
            order = rows[0][0].order
        return cls(n, order, tuple(tuple(p if isinstance(p, PolyJet) else PolyJet.constant(n, order, p)
                                         for p in r) for r in rows))

    @classmethod
    def constant(cls, m: RatMatrix, order: int) -> "FrameJet":
        n = m.nrows
        return cls(n, order, tuple(tuple(PolyJet.constant(n, order, m[i, j]) for j in range(n)) for i in range(n)))

    @classmethod
    def identity(cls, n: int, order: int) -> "FrameJet":
        return cls.constant(RatMatrix.identity(n), order)

    def at_zero(self) -> RatMatrix:
        return RatMatrix.from_rows([[p.constant_term() for p in row] for row in self.sigma])

    @cached_property
    def inverse(self) -> tuple[tuple[PolyJet, ...], ...]:
        return tuple(tuple(r) for r in jet_matrix_inverse(self.sigma))

    def truncate(self, order: int) -> "FrameJet":
        if order > self.order:
            raise JetError("cannot truncate to a higher order")
        return FrameJet(self.n, order, tuple(tuple(p.truncate(order) for p in r) for r in self.sigma))

    def extend(self, order: int) -> "FrameJet":
        return FrameJet(self.n, order, tuple(tuple(p.extend(order) for p in r) for r in self.sigma))

    def right_multiply(self, g: RatMatrix) -> "FrameJet":
        n = self.n
        return FrameJet(n, self.order, tuple(tuple(
            sum((self.sigma[i][k] * g[k, j] for k in range(n) if g[k, j]), PolyJet.zero(n, self.order))
            for j in range(n)) for i in range(n)))

    def __eq__(self, other):
        return isinstance(other, FrameJet) and (self.n, self.order, self.sigma) == (other.n, other.order, other.sigma)

    def __hash__(self):
        return hash((self.n, self.order, self.sigma))

    def __repr__(self):
        return f"FrameJet(n={self.n}, order={self.order}, sigma={[list(r) for r in self.sigma]})"

    def to_json(self) -> dict:
        return {"n": self.n, "order": self.order,
                "sigma": [[polyjet_to_json(p) for p in row] for row in self.sigma]}

    @classmethod
    def from_json(cls, d: dict) -> "FrameJet":
        return cls(int(d["n"]), int(d["order"]),
                   tuple(tuple(polyjet_from_json(p) for p in row) for row in d["sigma"]))


@dataclass(frozen=True, eq=False)
class ConnectionJet:
    """Christoffel jets ``gamma[a][b][g] = Gamma^g_{ab}``."""

    n: int
    order: int
    gamma: tuple

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(tuple(tuple(k) for k in j) for j in self.gamma))

    def at_zero(self) -> list[list[list[Fraction]]]:
        return [[[p.constant_term() for p in row] for row in mat] for mat in self.gamma]

    def torsion(self):
        n = self.n
        return [[[self.gamma[a][b][g] - self.gamma[b][a][g] for g in range(n)] for b in range(n)] for a in range(n)]

    def is_zero(self) -> bool:
        return all(p.is_zero() for mat in self.gamma for row in mat for p in row)

    def __eq__(self, other):
        return isinstance(other, ConnectionJet) and (self.n, self.order, self.gamma) == (other.n, other.order, other.gamma)

    def __hash__(self):
        return hash((self.n, self.order, self.gamma))

    def to_json(self) -> dict:
        return {"n": self.n, "order": self.order,
                "gamma": [[[polyjet_to_json(p) for p in row] for row in mat] for mat in self.gamma]}

    @classmethod
    def from_json(cls, d: dict) -> "ConnectionJet":
        return cls(int(d["n"]), int(d["order"]),
                   tuple(tuple(tuple(polyjet_from_json(p) for p in row) for row in mat) for mat in d["gamma"]))


def _require_order(sigma: FrameJet):
    if sigma.order < 1:
        raise JetError("connection data needs a frame jet of order >= 1")


def _sum(terms, n, order):
    acc = PolyJet.zero(n, order)
    for t in terms:
        acc = acc + t
    return acc


def flat_torsion(sigma: FrameJet):
    """``t[i][j][k]``: torsion function of the flat connection of the frame, order r-1.

    Equals minus the structure functions: ``[X_i, X_j] = sum_k C^k_{ij} X_k``
    gives ``t^k_{ij} = -C^k_{ij}``.
    """
    _require_order(sigma)
    n, r = sigma.n, sigma.order - 1
    s = [[p.truncate(r) for p in row] for row in sigma.sigma]
    sinv = [[p.truncate(r) for p in row] for row in sigma.inverse]
    ds = [[[sigma.sigma[l][j].deriv(h) for h in range(n)] for j in range(n)] for l in range(n)]
    out = _zero3(n, r)
    for i in range(n):
        for j in range(i + 1, n):
            br = [_sum((s[h][i] * ds[l][j][h] - s[h][j] * ds[l][i][h] for h in range(n)), n, r)
                  for l in range(n)]
            for k in range(n):
                v = -_sum((sinv[k][l] * br[l] for l in range(n)), n, r)
                out[i][j][k] = v
                out[j][i][k] = -v
    return out


def eta_from_frame(sigma: FrameJet, split: CanonicalSplitting):
    """``eta[a][b][g]`` with ``nabla_{X_a} X_b = sum_g eta^g_{ab} X_g``."""
    if split.n != sigma.n:
        raise ConnectionDataError("splitting and frame have different dimensions")
    n, r = sigma.n, sigma.order - 1
    tau = split.contract(flat_torsion(sigma))
    return [[[-tau[a][b][g] if tau[a][b][g] is not None else PolyJet.zero(n, r) for g in range(n)]
             for b in range(n)] for a in range(n)]


def gamma_bar(sigma: FrameJet):
    """Christoffels of the flat connection making the frame parallel."""
    _require_order(sigma)
    n, r = sigma.n, sigma.order - 1
    sinv = [[p.truncate(r) for p in row] for row in sigma.inverse]
    ds = [[[sigma.sigma[g][i].deriv(a) for i in range(n)] for g in range(n)] for a in range(n)]
    return [[[-_sum((ds[a][g][i] * sinv[i][b] for i in range(n)), n, r) for g in range(n)]
             for b in range(n)] for a in range(n)]


def f_tensor_jet(sigma: FrameJet, split: CanonicalSplitting, eta=None):
    """``F[a][b][g]``: canonical connection minus the flat frame connection, in coordinates."""
    n, r = sigma.n, sigma.order - 1
    if eta is None:
        eta = eta_from_frame(sigma, split)
    s = [[p.truncate(r) for p in row] for row in sigma.sigma]
    sinv = [[p.truncate(r) for p in row] for row in sigma.inverse]
    # e[l][m][g] = sum_rho sigma_{g rho} eta^rho_{lm}
    e = [[[_sum((s[g][rho] * eta[l][m][rho] for rho in range(n)), n, r) for g in range(n)]
          for m in range(n)] for l in range(n)]
    # h[l][b][g] = sum_m sigma^{m b} e[l][m][g]
    h = [[[_sum((sinv[m][b] * e[l][m][g] for m in range(n)), n, r) for g in range(n)]
          for b in range(n)] for l in range(n)]
    return [[[_sum((sinv[l][a] * h[l][b][g] for l in range(n)), n, r) for g in range(n)]
             for b in range(n)] for a in range(n)]


def christoffels_from_frame(sigma: FrameJet, split: CanonicalSplitting, check: bool = True) -> ConnectionJet:
    """Christoffel jets (order r-1) of the canonical connection of the frame's G-structure."""
    gb = gamma_bar(sigma)
    f = f_tensor_jet(sigma, split)
    n = sigma.n
    gamma = [[[gb[a][b][g] + f[a][b][g] for g in range(n)] for b in range(n)] for a in range(n)]
    conn = ConnectionJet(n, sigma.order - 1, gamma)
    if check and torsion_w_defect(sigma, split, conn):
        raise ConnectionDataError("canonical connection torsion is not in the supplement")
    return conn


def frame_torsion(sigma: FrameJet, conn: ConnectionJet):
    """Torsion of ``conn`` in frame components: ``T^k_{ij} = sigma^{kg} T^g_{ab} sigma_{ai} sigma_{bj}``."""
    n, r = sigma.n, conn.order
    s = [[p.truncate(r) for p in row] for row in sigma.sigma]
    sinv = [[p.truncate(r) for p in row] for row in sigma.inverse]
    tor = conn.torsion()
    step1 = [[[_sum((sinv[k][g] * tor[a][b][g] for g in range(n)), n, r) for k in range(n)]
              for b in range(n)] for a in range(n)]
    step2 = [[[_sum((s[b][j] * step1[a][b][k] for b in range(n)), n, r) for k in range(n)]
              for j in range(n)] for a in range(n)]
    return [[[_sum((s[a][i] * step2[a][j][k] for a in range(n)), n, r) for k in range(n)]
             for j in range(n)] for i in range(n)]


def torsion_w_defect(sigma: FrameJet, split: CanonicalSplitting, conn: ConnectionJet) -> list:
    """Nonzero entries of ``(delta^{-1} o P_imdelta)`` applied to the frame torsion.

    Returns a list of ``(a, b, g, jet)``; empty means the torsion lies in W at
    every retained order.
    """
    tau = split.contract(frame_torsion(sigma, conn))
    n = sigma.n
    return [(a, b, g, tau[a][b][g]) for a in range(n) for b in range(n) for g in range(n)
            if tau[a][b][g] is not None and not tau[a][b][g].is_zero()]
