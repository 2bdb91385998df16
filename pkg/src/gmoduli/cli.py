"""Command-line front end.

Exit codes: 0 success, 1 a reported check failed (nonzero prolongation,
membership failure, a failed table flag or verification), 2 bad usage or bad input.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

from .connection import christoffels_from_frame
from .exact import JetError, RatMatrix
from .io import InputError, dump_json, load_frame, load_tensor
from .jets import FramedJet, normalize, parallel_frame, s_r_membership
from .lie import LieError, build_splitting, first_prolongation, make_group
from .moduli import ModuliError, moduli_table
from .sampling import random_frame_jet
from .tensors import TensorSpace, is_antisymmetric
from .verify import VerifyConfig, run_checks, select_checks

FORMATS = {
    "prolong": ("json", "text"),
    "project": ("json",),
    "connect": ("json",),
    "normalize": ("json",),
    "parallel-frame": ("json",),
    "membership": ("json", "text"),
    "moduli-dims": ("json", "csv", "text"),
    "verify": ("json", "text"),
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    group: str | None = None
    dim: int | None = None
    order: int | None = None
    max_order: int = 2
    fmt: str = "json"
    seed: int | None = None
    frame: str | None = None
    inp: str | None = None
    out: str | None = None
    only: tuple[str, ...] = ()
    inject_fault: str | None = None
    seeds: int = 25
    cap: int = 4

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        raw = os.environ.get("GMODULI_MAX_ORDER", "4")
        try:
            cap = int(raw)
        except ValueError:
            raise UsageError(f"GMODULI_MAX_ORDER must be an integer, got {raw!r}") from None
        cfg = cls(
            command=ns.command,
            group=getattr(ns, "group", None),
            dim=getattr(ns, "dim", None),
            order=getattr(ns, "order", None),
            max_order=getattr(ns, "max_order", None) or 2,
            fmt=ns.format,
            seed=getattr(ns, "seed", None),
            frame=getattr(ns, "frame", None),
            inp=getattr(ns, "inp", None),
            out=ns.out,
            only=tuple(x for part in (getattr(ns, "only", None) or []) for x in part.split(",") if x),
            inject_fault=getattr(ns, "inject_fault", None),
            seeds=getattr(ns, "seeds", None) or 25,
            cap=cap,
        )
        cfg.validate()
        return cfg

    def validate(self):
        if self.fmt not in FORMATS[self.command]:
            raise UsageError(f"{self.command} supports --format {'/'.join(FORMATS[self.command])}")
        for name, val in (("--order", self.order), ("--max-order", self.max_order)):
            if val is not None and val < 0:
                raise UsageError(f"{name} must be nonnegative")
            if val is not None and val > self.cap:
                raise UsageError(f"{name} {val} exceeds the cap GMODULI_MAX_ORDER={self.cap}")
        if self.frame and self.inp and self.frame != self.inp:
            raise UsageError("give the frame jet with either --frame or --in, not both")
        if self.command != "verify" and self.group is None:
            raise UsageError("--group is required")

    def group_spec(self) -> str:
        spec = self.group
        if spec is not None and ":" not in spec and spec in ("o", "scalar", "e", "gl"):
            if self.dim is None:
                raise UsageError(f"--group {spec} needs --dim")
            spec = f"{spec}:{self.dim}"
        return spec


def _group(cfg: RunConfig):
    g = make_group(cfg.group_spec())
    if cfg.dim is not None and cfg.dim != g.n:
        raise UsageError(f"--dim {cfg.dim} does not match group dimension {g.n}")
    return g


def _frame(cfg: RunConfig, n: int, identity_base: bool = False):
    path = cfg.frame or cfg.inp
    if path:
        fr = load_frame(path)
        if fr.n != n:
            raise InputError("/n", f"frame dimension {fr.n} does not match group dimension {n}", path)
        if fr.order > cfg.cap:
            raise UsageError(f"frame order {fr.order} exceeds the cap GMODULI_MAX_ORDER={cfg.cap}")
        return fr
    if cfg.seed is None:
        raise UsageError("give a frame jet with --frame PATH or generate one with --seed K")
    order = 2 if cfg.order is None else cfg.order
    return random_frame_jet(n, order, cfg.seed, base=RatMatrix.identity(n) if identity_base else None)


def _emit(cfg: RunConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _matrix_json(m: RatMatrix):
    return [[str(x) for x in row] for row in m.tolist()]


# ---------------------------------------------------------------------------


def cmd_prolong(cfg: RunConfig) -> int:
    g = _group(cfg)
    pro = first_prolongation(g)
    if cfg.fmt == "text":
        lines = [f"group {g.name}  algebra dim {g.dim}  first prolongation dim {pro.dim}"]
        lines += [f"  {v.to_json()['entries']}" for v in pro.vectors]
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        _emit(cfg, dump_json({"group": g.name, "n": g.n, "algebra_dim": g.dim, "prolongation_dim": pro.dim,
                              "basis": [v.to_json() for v in pro.vectors]}))
    return 0 if pro.dim == 0 else 1


def cmd_project(cfg: RunConfig) -> int:
    g = _group(cfg)
    sp = build_splitting(g)
    if cfg.inp:
        t = load_tensor(cfg.inp)
        if t.space != TensorSpace(g.n, 0, 2, 1):
            raise InputError("/space", f"expected n={g.n}, r=0, p=2, q=1", cfg.inp)
        if not is_antisymmetric(t, [0, 1]):
            raise InputError("/entries", "tensor is not antisymmetric in its two lower indices", cfg.inp)
        proj = sp.project(t)
        out = {"group": g.name, "input": t.to_json(), "projection": proj.to_json(),
               "supplement_part": (t - proj).to_json(), "inv_delta": sp.tau_of(t).to_json(),
               "in_supplement": proj.is_zero()}
    else:
        out = {"group": g.name, "n": g.n, "algebra": g.to_json(),
               "supplement_basis": [v.to_json() for v in sp.W_basis.vectors],
               "projection_matrix": _matrix_json(sp.proj_imdelta),
               "inv_delta_matrix": _matrix_json(sp.inv_delta_proj),
               "a_table": sp.a_table_json(),
               "a_table_convention": "tau^gamma_{alpha beta} = sum over i<j and k of A * T^k_{ij}; indices 1-based"}
    _emit(cfg, dump_json(out))
    return 0


def cmd_connect(cfg: RunConfig) -> int:
    g = _group(cfg)
    sp = build_splitting(g)
    fr = _frame(cfg, g.n)
    if fr.order < 1:
        raise UsageError("connect needs a frame jet of order >= 1")
    conn = christoffels_from_frame(fr, sp)
    _emit(cfg, dump_json({"group": g.name, "frame": fr.to_json(), "connection": conn.to_json()}))
    return 0


def cmd_normalize(cfg: RunConfig) -> int:
    g = _group(cfg)
    sp = build_splitting(g)
    fr = _frame(cfg, g.n)
    low, f = normalize(FramedJet(fr, fr.at_zero()), sp)
    _emit(cfg, dump_json({"group": g.name, "frame": low.to_json(), "diffeo": f.to_json(),
                          "diffeo_is_identity": f.is_identity()}))
    return 0


def cmd_parallel(cfg: RunConfig) -> int:
    g = _group(cfg)
    sp = build_splitting(g)
    fr = _frame(cfg, g.n, identity_base=True)
    _emit(cfg, dump_json({"group": g.name, "frame": parallel_frame(fr, sp).to_json()}))
    return 0


def cmd_membership(cfg: RunConfig) -> int:
    g = _group(cfg)
    sp = build_splitting(g)
    fr = _frame(cfg, g.n)
    rep = s_r_membership(fr, sp)
    if cfg.fmt == "text":
        js = rep.to_json()
        lines = [f"order {rep.order}: {'in slice' if rep.ok else 'NOT in slice'}",
                 f"  value at origin is identity: {rep.identity_at_zero}",
                 f"  first equations: {len(rep.first_violations)} violated coefficient(s)",
                 f"  second equations: {len(rep.second_violations)} violated coefficient(s)"]
        for fam in ("first_equations", "second_equations"):
            lines += [f"    {fam}: {v}" for v in js[fam]["violations"]]
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        _emit(cfg, dump_json({"group": g.name, **rep.to_json()}))
    return 0 if rep.ok else 1


def cmd_moduli(cfg: RunConfig) -> int:
    g = _group(cfg)
    table = moduli_table(g, cfg.max_order)
    if cfg.fmt == "csv":
        _emit(cfg, table.to_csv() + "\n")
    elif cfg.fmt == "text":
        _emit(cfg, table.to_text() + "\n")
    else:
        _emit(cfg, dump_json(table.to_json()))
    return 0 if table.ok else 1


def cmd_verify(cfg: RunConfig) -> int:
    try:
        select_checks(cfg.only)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    vcfg = VerifyConfig(seeds=cfg.seeds, fault=cfg.inject_fault)
    results = run_checks(vcfg, cfg.only)
    ok = all(r.ok for r in results)
    if cfg.fmt == "text":
        lines = [f"[{'PASS' if r.ok else 'FAIL'}] {r.criterion:>2} {r.name} ({r.cases} cases)" for r in results]
        for r in results:
            lines += [f"    {r.name}: {f}" for f in r.failures]
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        _emit(cfg, dump_json({"ok": ok, "fault": cfg.inject_fault, "seeds": cfg.seeds,
                              "checks": [r.to_json() for r in results]}))
    return 0 if ok else 1


HANDLERS = {
    "prolong": cmd_prolong,
    "project": cmd_project,
    "connect": cmd_connect,
    "normalize": cmd_normalize,
    "parallel-frame": cmd_parallel,
    "membership": cmd_membership,
    "moduli-dims": cmd_moduli,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmoduli", description="Exact jets of G-structures and their moduli.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, *, group=True, frame=False, order=False):
        p = sub.add_parser(name, help=help_)
        if group:
            p.add_argument("--group", help="o:N | product:P,Q | scalar:N | e:N | gl:N | custom:PATH")
            p.add_argument("--dim", type=int, help="dimension n (checked against the group)")
        if frame:
            p.add_argument("--frame", help="frame jet JSON file")
            p.add_argument("--in", dest="inp", help="alias of --frame")
            p.add_argument("--seed", type=int, help="generate a random rational frame jet instead")
        if order:
            p.add_argument("--order", type=int, help="jet order for --seed (default 2)")
        p.add_argument("--format", default="json", choices=("json", "csv", "text"))
        p.add_argument("--out", help="write output here instead of stdout")
        return p

    add("prolong", "dimension of the first prolongation (exit 1 when nonzero)")
    pp = add("project", "canonical splitting data, or project a torsion tensor")
    pp.add_argument("--in", dest="inp", help="antisymmetric tensor in V^{0,2}_1 to decompose")
    add("connect", "canonical connection jet of a frame jet", frame=True, order=True)
    add("normalize", "normal form of a framed jet", frame=True, order=True)
    add("parallel-frame", "ray-parallel frame of a frame jet with value in G at 0", frame=True, order=True)
    add("membership", "test the slice equations", frame=True, order=True)
    pm = add("moduli-dims", "dimension table of the moduli modules")
    pm.add_argument("--max-order", type=int, default=2)
    pv = add("verify", "run the named invariant checks", group=False)
    pv.add_argument("--only", action="append", help="comma-separated check names, tags or criterion numbers")
    pv.add_argument("--inject-fault", choices=("a-sign",), help="corrupt the splitting to exercise failure paths")
    pv.add_argument("--seeds", type=int, default=25, help="random jets per group and check")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(ns)
        return HANDLERS[cfg.command](cfg)
    except (UsageError, InputError, LieError, JetError, ModuliError, ValueError) as exc:
        print(f"gmoduli {ns.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
