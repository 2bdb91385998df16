"""Named invariant checks, runnable from the CLI and the acceptance suite.

Each check returns a :class:`CheckResult`; failures carry a short list of
counterexamples (group, seed, what differed).  All comparisons are exact.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Callable

from .connection import christoffels_from_frame, eta_from_frame, torsion_w_defect
from .exact import RatMatrix
from .jets import FramedJet, g_action_on_slice, normal_coordinate_defect, normalize, parallel_frame, s_r_membership
from .lie import CanonicalSplitting, build_splitting, first_prolongation, make_group, sample_group_elements
from .moduli import (
    epstein_dim, f_r_map, l_apply, lift_section, q_r_eval, sigma_r, split_jet, w_module, w_module_specialized,
    z_splitting_check,
)
from .oracles import closed_form_inv_delta_matrix, levi_civita_at_zero, ray_parallel_frame, web_connection_at_zero
from .sampling import random_frame_jet
from .tensors import Tensor, TensorSpace, alternation_delta, gl_action, wedge2_from_coords, wedge2_keys

__all__ = ["VerifyConfig", "CheckResult", "CHECKS", "run_checks", "select_checks"]

ROT345 = RatMatrix.from_rows([[Fraction(3, 5), Fraction(-4, 5)], [Fraction(4, 5), Fraction(3, 5)]])


@dataclass
class VerifyConfig:
    seeds: int = 25
    groups: tuple[str, ...] = ("o:2", "o:3", "product:1,2", "product:2,1", "scalar:2", "scalar:3", "e:2")
    fault: str | None = None
    max_failures: int = 5


@dataclass
class CheckResult:
    name: str
    criterion: int
    ok: bool
    cases: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"name": self.name, "criterion": self.criterion, "ok": self.ok, "cases": self.cases,
                "failures": self.failures}


class _Collector:
    def __init__(self, cfg: VerifyConfig):
        self.cases = 0
        self.failures: list = []
        self.limit = cfg.max_failures
        self.failed = False

    def check(self, cond: bool, **info):
        self.cases += 1
        if not cond:
            self.failed = True
            if len(self.failures) < self.limit:
                self.failures.append({k: str(v) for k, v in info.items()})


class _Splits:
    def __init__(self, cfg: VerifyConfig):
        self.cfg = cfg
        self._cache: dict = {}

    def __call__(self, spec: str) -> CanonicalSplitting:
        if spec not in self._cache:
            sp = build_splitting(make_group(spec))
            self._cache[spec] = sp.with_fault(self.cfg.fault) if self.cfg.fault else sp
        return self._cache[spec]


def _seed(spec: str, i: int) -> str:
    return f"{spec}#{i}"


# ---------------------------------------------------------------------------


def check_prolongation(cfg, splits, c):
    for spec in ("o:2", "o:3", "o:4", "product:1,2", "product:2,2", "scalar:2", "scalar:3"):
        d = first_prolongation(make_group(spec)).dim
        c.check(d == 0, group=spec, dim=d)
    d = first_prolongation(make_group("gl:2")).dim
    c.check(d == 6, group="gl:2", dim=d)


def check_projector(cfg, splits, c):
    for spec in ("o:2", "o:3", "scalar:2", "scalar:3", "product:1,2"):
        g = make_group(spec)
        sp = splits(spec)
        c.check(sp.inv_delta_proj == closed_form_inv_delta_matrix(g.kind, g.n, g.blocks), group=spec)


def check_torsion_in_w(cfg, splits, c):
    for spec in cfg.groups:
        sp = splits(spec)
        for i in range(cfg.seeds):
            s = random_frame_jet(sp.n, 2, _seed(spec, i))
            conn = christoffels_from_frame(s, sp, check=False)
            c.check(not torsion_w_defect(s, sp, conn), group=spec, seed=i)


def check_levi_civita(cfg, splits, c):
    for spec in ("o:2", "o:3"):
        sp = splits(spec)
        for i in range(cfg.seeds):
            s = random_frame_jet(sp.n, 1, _seed(spec, i))
            got = christoffels_from_frame(s, sp, check=False).at_zero()
            c.check(got == levi_civita_at_zero(s.sigma), group=spec, seed=i)


def check_web(cfg, splits, c):
    sp = splits("scalar:3")
    for i in range(10):
        s = random_frame_jet(3, 1, _seed("scalar:3", i))
        eta = [[[p.constant_term() for p in row] for row in m] for m in eta_from_frame(s, sp)]
        c.check(eta == web_connection_at_zero(s.sigma), group="scalar:3", seed=i)


def check_normal_coordinates(cfg, splits, c):
    for spec in ("o:2", "scalar:2"):
        sp = splits(spec)
        for order in (1, 2):
            for i in range(10):
                s = random_frame_jet(2, order, _seed(spec, i))
                low, _ = normalize(FramedJet(s, s.at_zero()), sp)
                defect = normal_coordinate_defect(christoffels_from_frame(low, sp, check=False))
                again, _ = normalize(FramedJet(low, low.at_zero()), sp)
                c.check(not defect and again == low, group=spec, order=order, seed=i)


def _ray_directions(n):
    units = [tuple(int(h == j) for h in range(n)) for j in range(n)]
    mixed = [tuple(int(h == a) + 2 * int(h == b) for h in range(n)) for a, b in itertools.permutations(range(n), 2)]
    return units + mixed


def check_parallel_frame(cfg, splits, c):
    for spec in cfg.groups:
        sp = splits(spec)
        n = sp.n
        for i in range(cfg.seeds):
            s = random_frame_jet(n, 2, _seed(spec, i), base=RatMatrix.identity(n))
            conn = christoffels_from_frame(s, sp, check=False)
            p = parallel_frame(s, sp, conn)
            gam0 = conn.at_zero()
            first = all(p.sigma[g][a].coeff(tuple(int(h == j) for h in range(n))) == -gam0[j][a][g]
                        for g in range(n) for a in range(n) for j in range(n))
            second = True
            for lam in _ray_directions(n):
                ray = ray_parallel_frame(conn.gamma, tuple(Fraction(x) for x in lam), 2)
                for g in range(n):
                    for a in range(n):
                        got = sum((v * prod(Fraction(x) ** d for x, d in zip(lam, e))
                                   for e, v in p.sigma[g][a].items() if sum(e) == 2), Fraction(0))
                        second &= got == ray[2][g][a]
            c.check(first and second, group=spec, seed=i, first=first, second=second)


def check_pipeline(cfg, splits, c):
    for spec in cfg.groups:
        sp = splits(spec)
        for order in (1, 2):
            for i in range(cfg.seeds if order == 1 else max(cfg.seeds // 2, 1)):
                s = random_frame_jet(sp.n, order, _seed(spec, i))
                low, _ = normalize(FramedJet(s, s.at_zero()), sp)
                rep = s_r_membership(parallel_frame(low, sp), sp)
                c.check(rep.ok, group=spec, order=order, seed=i)


def check_epstein(cfg, splits, c):
    expect = {2: 1, 3: 6, 4: 20}
    for n in (2, 3, 4):
        sp = splits(f"o:{n}")
        d1, d2 = w_module(1, sp).dim, w_module(2, sp).dim
        c.check(d1 == 0, group=f"o:{n}", k=1, dim=d1)
        c.check(d2 == expect[n] == n * n * (n * n - 1) // 12 == epstein_dim(n, 2), group=f"o:{n}", k=2, dim=d2)
    d3 = w_module(3, splits("o:2")).dim
    c.check(d3 == epstein_dim(2, 3), group="o:2", k=3, dim=d3, epstein=epstein_dim(2, 3))


def check_closed_form_w(cfg, splits, c):
    for spec in cfg.groups:
        sp = splits(spec)
        if sp.n > 3:
            continue
        for k in (1, 2, 3):
            w, ws = w_module(k, sp), w_module_specialized(sp.g, k)
            c.check(w.same_span(ws), group=spec, k=k, dim_general=w.dim, dim_closed_form=ws.dim)


def check_splitting(cfg, splits, c):
    for spec in cfg.groups:
        sp = splits(spec)
        for k in (1, 2, 3):
            rep = z_splitting_check(k, sp)
            c.check(rep.ok, group=spec, k=k, **{key: v for key, v in rep.to_json().items() if key != "order"})


def check_decomposition(cfg, splits, c):
    for spec in cfg.groups:
        sp = splits(spec)
        n = sp.n
        for r in (0, 1, 2):
            for i in range(cfg.seeds):
                s = random_frame_jet(n, r + 1, _seed(spec, i), base=RatMatrix.identity(n))
                lhs = f_r_map(s, sp)
                rhs = l_apply(sigma_r(s), sp) + q_r_eval(s.truncate(r), sp)
                c.check(lhs == rhs, group=spec, r=r, seed=i)


def _elements(sp):
    out = list(sample_group_elements(sp.g))
    if sp.g.kind == "o" and sp.n == 2:
        out.append(ROT345)
    return out


def check_equivariance(cfg, splits, c):
    for spec in cfg.groups:
        sp = splits(spec)
        g, n = sp.g, sp.n
        elems = _elements(sp)
        wedge = [wedge2_from_coords(n, [int(i == j) for j in range(len(wedge2_keys(n)))])
                 for i in range(len(wedge2_keys(n)))]
        w2 = w_module(2, sp)
        slice1 = [parallel_frame(normalize(FramedJet(s, s.at_zero()), sp)[0], sp)
                  for s in (random_frame_jet(n, 1, _seed(spec, i)) for i in range(2))]
        slice2 = [parallel_frame(normalize(FramedJet(s, s.at_zero()), sp)[0], sp)
                  for s in (random_frame_jet(n, 2, _seed(spec, i)) for i in range(2))]
        t2 = [Tensor.from_vector(TensorSpace(n, 2, 1, 1), [Fraction((7 * j + i) % 5 - 2, 1 + j % 3)
                                                           for j in range(TensorSpace(n, 2, 1, 1).dim)])
              for i in range(2)]
        for a in elems:
            ainv = a.inverse()
            for tau in g.tau_basis:
                c.check(alternation_delta(gl_action(a, tau), g) == gl_action(a, alternation_delta(tau, g)),
                        group=spec, map="delta")
            for t in wedge:
                c.check(sp.project(gl_action(a, t)) == gl_action(a, sp.project(t)), group=spec, map="P")
            for t in t2:
                c.check(l_apply(gl_action(a, t), sp) == gl_action(a, l_apply(t, sp)), group=spec, map="L")
            c.check(w2.check_invariance("a", lambda t: gl_action(a, t)), group=spec, map="W2")
            for s in slice2:
                c.check(sigma_r(g_action_on_slice(a, s, sp)) == gl_action(ainv, sigma_r(s)), group=spec, map="Sigma")
                _, comp = split_jet(s, sp)
                _, comp_a = split_jet(g_action_on_slice(a, s, sp), sp)
                c.check(comp_a == gl_action(ainv, comp), group=spec, map="split")
            for s in slice1:
                c.check(lift_section(g_action_on_slice(a, s, sp), sp) == g_action_on_slice(a, lift_section(s, sp), sp),
                        group=spec, map="lift")


def check_mutation(cfg, splits, c):
    sub = VerifyConfig(seeds=min(cfg.seeds, 5), groups=("o:2", "o:3"), fault="a-sign")
    bad = run_checks(sub, ["torsion-in-w", "levi-civita"])
    for r in bad:
        c.check(not r.ok, check=r.name, note="fault not detected")


@dataclass(frozen=True)
class _Check:
    name: str
    criterion: int
    fn: Callable
    tags: tuple[str, ...] = ()


CHECKS: tuple[_Check, ...] = (
    _Check("prolongation", 1, check_prolongation),
    _Check("projector", 2, check_projector),
    _Check("torsion-in-w", 3, check_torsion_in_w, ("connection",)),
    _Check("levi-civita", 4, check_levi_civita, ("connection",)),
    _Check("web", 5, check_web, ("connection",)),
    _Check("normal-coordinates", 6, check_normal_coordinates, ("jets",)),
    _Check("parallel-frame", 7, check_parallel_frame, ("jets",)),
    _Check("pipeline", 8, check_pipeline, ("jets",)),
    _Check("epstein", 9, check_epstein, ("moduli", "dims")),
    _Check("closed-form-w", 9, check_closed_form_w, ("moduli", "dims")),
    _Check("splitting", 10, check_splitting, ("moduli",)),
    _Check("decomposition", 11, check_decomposition, ("moduli",)),
    _Check("equivariance", 12, check_equivariance),
    _Check("mutation", 13, check_mutation),
)


def select_checks(only=None) -> list[_Check]:
    if not only:
        return list(CHECKS)
    wanted = set(only)
    known = {c.name for c in CHECKS} | {t for c in CHECKS for t in c.tags} | {str(c.criterion) for c in CHECKS}
    unknown = wanted - known
    if unknown:
        raise ValueError(f"unknown check(s): {', '.join(sorted(unknown))}")
    return [c for c in CHECKS if c.name in wanted or str(c.criterion) in wanted or wanted & set(c.tags)]


def run_checks(cfg: VerifyConfig | None = None, only=None) -> list[CheckResult]:
    cfg = cfg or VerifyConfig()
    splits = _Splits(cfg)
    out = []
    for chk in select_checks(only):
        col = _Collector(cfg)
        t0 = time.perf_counter()
        chk.fn(cfg, splits, col)
        out.append(CheckResult(chk.name, chk.criterion, not col.failed and col.cases > 0, col.cases,
                               col.failures, time.perf_counter() - t0))
    return out
