"""Origin-fixing diffeomorphism jets, geodesic jets, normal forms and parallel frames."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .connection import ConnectionJet, FrameJet, christoffels_from_frame, f_tensor_jet
from .exact import (
    JetError, PolyJet, RatMatrix, identity_map, jacobian, jet_compose, jet_invert_map, jet_matmul,
    jet_matrix_inverse,
)
from .lie import CanonicalSplitting, LieSubalgebra

__all__ = [
    "DiffeoJet",
    "FramedJet",
    "MembershipReport",
    "act_diffeo_on_frame",
    "exp_jet",
    "normalize",
    "normal_coordinate_defect",
    "parallel_frame",
    "s_r_membership",
    "g_action_on_slice",
    "same_structure",
]


@dataclass(frozen=True, eq=False)
class DiffeoJet:
    n: int
    order: int
    comps: tuple[PolyJet, ...]

    def __post_init__(self):
        comps = tuple(self.comps)
        object.__setattr__(self, "comps", comps)
        if len(comps) != self.n:
            raise JetError("wrong number of components")
        for p in comps:
            if p.n_vars != self.n or p.order != self.order:
                raise JetError("component does not match dimension/order")
            if p.constant_term():
                raise JetError("diffeomorphism jet must fix the origin")
        if self.order >= 1 and self.linear_part().det() == 0:
            raise JetError("linear part is singular")

    @classmethod
    def identity(cls, n: int, order: int) -> "DiffeoJet":
        return cls(n, order, tuple(identity_map(n, order)))

    @classmethod
    def linear(cls, a: RatMatrix, order: int) -> "DiffeoJet":
        n = a.nrows
        return cls(n, order, tuple(PolyJet(n, order, {tuple(int(h == j) for h in range(n)): a[k, j]
                                                     for j in range(n)}) for k in range(n)))

    def linear_part(self) -> RatMatrix:
        n = self.n
        return RatMatrix.from_rows([[self.comps[k].coeff(tuple(int(h == j) for h in range(n)))
                                     for j in range(n)] for k in range(n)])

    def compose(self, other: "DiffeoJet") -> "DiffeoJet":
        """``self o other``."""
        return DiffeoJet(self.n, min(self.order, other.order), tuple(jet_compose(self.comps, other.comps)))

    def inverse(self) -> "DiffeoJet":
        return DiffeoJet(self.n, self.order, tuple(jet_invert_map(self.comps)))

    def truncate(self, order: int) -> "DiffeoJet":
        return DiffeoJet(self.n, order, tuple(p.truncate(order) for p in self.comps))

    def is_identity(self) -> bool:
        return self.comps == tuple(identity_map(self.n, self.order))

    def __eq__(self, other):
        return isinstance(other, DiffeoJet) and (self.n, self.order, self.comps) == (other.n, other.order, other.comps)

    def __hash__(self):
        return hash((self.n, self.order, self.comps))

    def to_json(self) -> dict:
        from .connection import polyjet_to_json
        return {"n": self.n, "order": self.order, "components": [polyjet_to_json(p) for p in self.comps]}


@dataclass(frozen=True)
class FramedJet:
    """Frame jet plus a marked frame ``u`` at the origin (``u = sigma(0) g`` with ``g`` in G)."""

    frame: FrameJet
    marked: RatMatrix

    def check(self, g: LieSubalgebra) -> bool:
        try:
            h = self.frame.at_zero().inverse() @ self.marked
        except ZeroDivisionError:
            return False
        return g.contains_group_element(h)


def act_diffeo_on_frame(f: DiffeoJet, sigma: FrameJet) -> FrameJet:
    """Push the frame forward: ``(Df o f^{-1}) . (sigma o f^{-1})`` at the frame's order."""
    if f.n != sigma.n or f.order != sigma.order + 1:
        raise JetError(f"need a map jet of order {sigma.order + 1} for a frame of order {sigma.order}")
    n, r = sigma.n, sigma.order
    h = [p.truncate(r) for p in jet_invert_map(f.comps)]
    if r == 0:
        a = f.linear_part()
        return FrameJet.constant(a @ sigma.at_zero(), 0)
    jac = jacobian(f.comps)
    jac_h = [jet_compose(row, h) for row in jac]
    sig_h = [jet_compose(row, h) for row in sigma.sigma]
    return FrameJet(n, r, tuple(tuple(row) for row in jet_matmul(jac_h, sig_h)))


def exp_jet(sigma: FrameJet, u: RatMatrix, split: CanonicalSplitting, conn: ConnectionJet | None = None) -> DiffeoJet:
    """(r+1)-jet of ``x -> exp(u x)`` for the canonical connection of ``sigma``.

    Writing ``f = sum_m f_m`` in homogeneous parts, the geodesic equation for
    ``t -> f(t x)`` gives ``m (m-1) f_m = -[Gamma(f) (E f) (E f)]_m`` with
    ``E`` the Euler operator.
    """
    n, r = sigma.n, sigma.order
    if u.shape != (n, n) or u.det() == 0:
        raise JetError("marked frame must be an invertible n x n matrix")
    top = r + 1
    f = [PolyJet(n, top, {tuple(int(h == j) for h in range(n)): u[k, j] for j in range(n)}) for k in range(n)]
    if r == 0:
        return DiffeoJet(n, top, tuple(f))
    if conn is None:
        conn = christoffels_from_frame(sigma, split)
    gam = conn.gamma
    for m in range(2, top + 1):
        low = m - 2
        fl = [p.truncate(low) for p in f]
        gf = [[[jet_compose([gam[i][j][k].truncate(low)], fl)[0].extend(m) for k in range(n)]
               for j in range(n)] for i in range(n)]
        ef = [p.truncate(m).euler() for p in f]
        for k in range(n):
            acc = PolyJet.zero(n, m)
            for i in range(n):
                for j in range(n):
                    if gf[i][j][k].is_zero():
                        continue
                    acc = acc + gf[i][j][k] * ef[i] * ef[j]
            f[k] = f[k] - acc.homogeneous(m).extend(top) * Fraction(1, m * (m - 1))
    return DiffeoJet(n, top, tuple(f))


def normal_coordinate_defect(conn: ConnectionJet) -> list[tuple[int, tuple[int, ...], Fraction]]:
    """Nonzero coefficients of ``sum_{ij} x^i x^j Gamma^g_{ij}(x)`` (degrees 2..order+2)."""
    n, r = conn.n, conn.order
    xs = [PolyJet.variable(n, r + 2, i) for i in range(n)]
    out = []
    for g in range(n):
        acc = PolyJet.zero(n, r + 2)
        for i in range(n):
            for j in range(n):
                acc = acc + xs[i] * xs[j] * conn.gamma[i][j][g].extend(r + 2)
        out.extend((g, e, v) for e, v in acc.items())
    return out


def normalize(framed: FramedJet, split: CanonicalSplitting) -> tuple[FrameJet, DiffeoJet]:
    """Move a framed jet into normal coordinates with marked frame the identity.

    Returns the normalized frame jet (value ``I`` at the origin) and the
    geodesic map jet that was inverted.
    """
    sigma, u = framed.frame, framed.marked
    if not framed.check(split.g):
        raise JetError("marked frame is not in the G-orbit of the frame at the origin")
    f = exp_jet(sigma, u, split)
    moved = act_diffeo_on_frame(f.inverse(), sigma)
    c = moved.at_zero()
    return moved.right_multiply(c.inverse()), f


def parallel_frame(sigma: FrameJet, split: CanonicalSplitting, conn: ConnectionJet | None = None) -> FrameJet:
    """Frame obtained by parallel transport of the identity frame along rays from 0.

    Solves ``E s_{gi} = -sum_{j,a} x^j Gamma^g_{ja} s_{ai}`` degree by degree.
    """
    n, r = sigma.n, sigma.order
    if not split.g.contains_group_element(sigma.at_zero()):
        raise JetError("frame at the origin is not in G: marked frame mismatch")
    if r == 0:
        return FrameJet.identity(n, 0)
    if conn is None:
        conn = christoffels_from_frame(sigma, split)
    xs = [PolyJet.variable(n, r, j) for j in range(n)]
    # xg[g][a] = sum_j x^j Gamma^g_{ja}, degrees 1..r
    xg = [[sum((xs[j] * conn.gamma[j][a][g].extend(r) for j in range(n)), PolyJet.zero(n, r))
           for a in range(n)] for g in range(n)]
    s = [[PolyJet.constant(n, r, int(g == i)) for i in range(n)] for g in range(n)]
    for m in range(1, r + 1):
        new = [[PolyJet.zero(n, r) for _ in range(n)] for _ in range(n)]
        for g in range(n):
            for i in range(n):
                acc = PolyJet.zero(n, r)
                for a in range(n):
                    acc = acc + xg[g][a] * s[a][i]
                new[g][i] = s[g][i] - acc.homogeneous(m) * Fraction(1, m)
        s = new
    return FrameJet(n, r, tuple(tuple(row) for row in s))


@dataclass
class MembershipReport:
    order: int
    identity_at_zero: bool
    first_violations: list = field(default_factory=list)
    second_violations: list = field(default_factory=list)

    @property
    def first_ok(self) -> bool:
        return not self.first_violations

    @property
    def second_ok(self) -> bool:
        return not self.second_violations

    @property
    def ok(self) -> bool:
        return self.identity_at_zero and self.first_ok and self.second_ok

    def to_json(self) -> dict:
        def fmt(vs):
            return [{"gamma": g + 1, **({"alpha": a + 1} if a is not None else {}), "exp": list(e), "val": str(v)}
                    for g, a, e, v in vs]
        return {"order": self.order, "ok": self.ok, "identity_at_zero": self.identity_at_zero,
                "first_equations": {"ok": self.first_ok, "violations": fmt(self.first_violations)},
                "second_equations": {"ok": self.second_ok, "violations": fmt(self.second_violations)}}


def s_r_membership(sigma: FrameJet, split: CanonicalSplitting) -> MembershipReport:
    """Test the slice equations; violations are reported as polynomial coefficients.

    First family: ``sum_i x^i sigma_{gi}(x)`` has no terms of degree 2..r+1.
    Second family: ``sum_i x^i F^g_{ia}(x)`` has no terms of degree 1..r.
    A coefficient at exponent ``e`` equals the cyclic sum of derivatives at
    the index multiset ``e`` divided by ``e!``.
    """
    n, r = sigma.n, sigma.order
    ident = sigma.at_zero() == RatMatrix.identity(n)
    first, second = [], []
    xs = [PolyJet.variable(n, r + 1, i) for i in range(n)]
    for g in range(n):
        acc = sum((xs[i] * sigma.sigma[g][i].extend(r + 1) for i in range(n)), PolyJet.zero(n, r + 1))
        first.extend((g, None, e, v) for e, v in acc.items() if sum(e) >= 2)
    if r >= 1:
        f = f_tensor_jet(sigma, split)
        xr = [PolyJet.variable(n, r, i) for i in range(n)]
        for g in range(n):
            for a in range(n):
                acc = sum((xr[i] * f[i][a][g].extend(r) for i in range(n)), PolyJet.zero(n, r))
                second.extend((g, a, e, v) for e, v in acc.items())
    return MembershipReport(r, ident, first, second)


def g_action_on_slice(g: RatMatrix, sigma: FrameJet, split: CanonicalSplitting) -> FrameJet:
    """Right action of ``g`` in G: ``y -> g^{-1} sigma(g y) g``."""
    if not split.g.contains_group_element(g):
        raise JetError("matrix is not an element of the structure group")
    n, r = sigma.n, sigma.order
    lin = DiffeoJet.linear(g, r).comps if r >= 1 else None
    ginv = g.inverse()
    if r == 0:
        return FrameJet.constant(ginv @ sigma.at_zero() @ g, 0)
    comp = [jet_compose(row, lin) for row in sigma.sigma]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = PolyJet.zero(n, r)
            for a in range(n):
                if not ginv[i, a]:
                    continue
                for b in range(n):
                    if g[b, j]:
                        acc = acc + comp[a][b] * (ginv[i, a] * g[b, j])
            row.append(acc)
        out.append(tuple(row))
    return FrameJet(n, r, tuple(out))


def same_structure(s1: FrameJet, s2: FrameJet, g: LieSubalgebra) -> bool:
    """Whether two frame jets span the same G-structure jet.

    With ``m = s1^{-1} s2``: ``m(0)`` must be in G and every coefficient of
    ``m^{-1} dm/dx^h`` must lie in the Lie algebra.
    """
    if (s1.n, s1.order) != (s2.n, s2.order):
        return False
    n, r = s1.n, s1.order
    m = jet_matmul(s1.inverse, s2.sigma)
    m0 = RatMatrix.from_rows([[p.constant_term() for p in row] for row in m])
    if not g.contains_group_element(m0):
        return False
    if r == 0:
        return True
    minv = [[p.truncate(r - 1) for p in row] for row in jet_matrix_inverse(m)]
    for h in range(n):
        dm = [[p.deriv(h) for p in row] for row in m]
        prod = jet_matmul(minv, dm)
        exps = {e for row in prod for p in row for e in p.coeffs}
        for e in exps:
            mat = RatMatrix.from_rows([[p.coeff(e) for p in row] for row in prod])
            if not g.in_span(mat):
                return False
    return True
