"""mm-rigidity command line.

Commands: profile, obsvar, dominate, models, generate, verify.  Every command
builds a record (for JSON) plus a header/rows table (for CSV and plain text)
and writes it to ``--out`` or stdout.  Library contract errors become nonzero
exit codes: 2 for bad input, 3 for size guards, 4 for resolution/coverage
problems, 5 for non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import models
from .domination import build_monotone_transport, sep_necessary_check
from .errors import DomainError, MMError, SchemaError
from .lambdas import get_lambda
from .measures1d import (
    DiscreteAtoms,
    Gaussian,
    SphericalModel,
    Uniform,
    half_line_profile,
    measure_from_json,
)
from .mmspace import (
    FiniteMMSpace,
    circle_space,
    complete_space,
    cycle_space,
    interval,
    path_space,
    profile_bruteforce,
    sphere_angle,
    star_space,
    two_point,
    warped_product,
)
from .obsvar import obsvar_maximize, verify_bound, verify_foliation
from .schemas import validate

THREADS_ENV = "MM_RIGIDITY_THREADS"


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    out: str | None = None
    tol: float | None = None
    seed: int = 0
    format: str = "json"
    threads: int = 1
    restarts: int = 8
    eps: float | None = None


@dataclass
class Output:
    record: object
    header: list[str]
    rows: list[list]


# --------------------------------------------------------------------------
# input parsing

_CALL = re.compile(r"^\s*([a-z0-9_]+)\s*(?:\((.*)\))?\s*$", re.IGNORECASE)


def _numbers(args: str | None) -> list[float]:
    if not args:
        return []
    try:
        return [float(a) for a in args.split(",") if a.strip()]
    except ValueError as exc:
        raise DomainError(f"bad numeric arguments {args!r}") from exc


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc.msg}") from exc


def parse_measure(text: str):
    """A JSON file or one of gaussian(m,s[,lo,hi]), uniform(a,b), uniform01,
    uniform02, sigma2, sphere(N), atoms(x:m;x:m...)."""
    if text.endswith(".json") or os.path.exists(text):
        obj = _load_json(text)
        validate(obj, "measure")
        return measure_from_json(obj)
    short = {"uniform01": Uniform(0.0, 1.0), "uniform02": Uniform(0.0, 2.0), "gaussian": Gaussian()}
    if text in short:
        return short[text]
    m = re.fullmatch(r"sigma(\d+(?:\.\d+)?)", text)
    if m:
        return SphericalModel(float(m.group(1)))
    m = _CALL.match(text)
    if not m:
        raise DomainError(f"cannot parse measure {text!r}")
    name, args = m.group(1).lower(), m.group(2)
    if name == "atoms":
        pairs = [p.split(":") for p in (args or "").split(";") if p.strip()]
        try:
            return DiscreteAtoms(tuple(float(a) for a, _ in pairs), tuple(float(b) for _, b in pairs))
        except ValueError as exc:
            raise DomainError(f"bad atoms spec {text!r}") from exc
    nums = _numbers(args)
    if name == "gaussian" and len(nums) in (0, 2, 4):
        return Gaussian(*nums)
    if name == "uniform" and len(nums) == 2:
        return Uniform(*nums)
    if name in ("sphere", "sigma") and len(nums) == 1:
        return SphericalModel(nums[0])
    raise DomainError(f"cannot parse measure {text!r}")


def parse_space(text: str) -> FiniteMMSpace:
    """A JSON file or a generator spec such as twopoint, path:n, cycle:m,
    complete:m, star:k, circle:m, sphere:N:res, interval:<measure>:res."""
    if text.endswith(".json") or os.path.exists(text):
        return FiniteMMSpace.from_json(_load_json(text))
    head, _, rest = text.partition(":")
    try:
        if head == "twopoint":
            return two_point(float(rest) if rest else 1.0)
        if head == "path":
            return path_space(np.arange(int(rest), dtype=float))
        if head == "cycle":
            return cycle_space(int(rest))
        if head == "circle":
            return circle_space(int(rest))
        if head == "complete":
            return complete_space(int(rest))
        if head == "star":
            return star_space(int(rest))
        if head == "sphere":
            N, res = rest.split(":")
            return sphere_angle(float(N), int(res))
        if head == "interval":
            meas, _, res = rest.rpartition(":")
            return interval(parse_measure(meas), int(res), "midpoint")
    except ValueError as exc:
        if isinstance(exc, MMError):
            raise
        raise DomainError(f"cannot parse space {text!r}") from exc
    raise DomainError(f"cannot parse space {text!r}")


# --------------------------------------------------------------------------
# output


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def render(out: Output, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_plain(out.record), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(out.header)
        w.writerows([[_cell(c) for c in row] for row in out.rows])
        return buf.getvalue()
    cells = [out.header] + [[_cell(c) for c in row] for row in out.rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(out.header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_profile(args, cfg: RunConfig) -> Output:
    if bool(args.measure) == bool(args.space):
        raise DomainError("profile needs exactly one of --measure or --space")
    if args.measure:
        curve = half_line_profile(parse_measure(args.measure))
    else:
        space = parse_space(args.space)
        eps = cfg.eps if cfg.eps is not None else space.nn_distance().max()
        curve = profile_bruteforce(space, eps, greedy=args.greedy)
    rows = [[a, b] for a, b in zip(curve.v.tolist(), curve.value.tolist())]
    return Output(curve.to_json(), ["v", "value"], rows)


def cmd_obsvar(args, cfg: RunConfig) -> Output:
    space = parse_space(args.space)
    lam = get_lambda(args.lam)
    res = obsvar_maximize(space, lam, restarts=cfg.restarts, seed=cfg.seed, threads=cfg.threads)
    record = {"schema": "mm-rigidity/obsvar@1", "lambda": lam.name, "n": space.n, "result": res.to_json()}
    rows = [["obsvar", res.value]]
    passed = True
    if args.nu:
        rep = verify_bound(space, parse_measure(args.nu), lam, tol=cfg.tol if cfg.tol is not None else 0.05,
                           restarts=cfg.restarts, seed=cfg.seed, threads=cfg.threads)
        record["bound"] = rep.to_json()
        rows += [["var_nu", rep.var_nu], ["gap", rep.gap], ["bound_pass", rep.passed]]
        passed &= rep.passed
    if args.foliation:
        tol = args.foliation_tol if args.foliation_tol is not None else 2.0 * float(space.nn_distance().max())
        fol = verify_foliation(space, res.maximizer, tol)
        record["foliation"] = fol.to_json()
        rows += [["foliation_case", fol.case]]
    record["pass"] = passed
    return Output(record, ["quantity", "value"], rows)


def cmd_dominate(args, cfg: RunConfig) -> Output:
    src, tgt = parse_measure(args.source), parse_measure(args.target)
    rep = build_monotone_transport(src, tgt, m=args.m)
    record = rep.to_json()
    rows = [["verdict", rep.verdict], ["slope", rep.slope], ["levy", rep.levy]]
    if args.sep:
        seps = sep_necessary_check(src, tgt)
        record["sep_checks"] = [asdict(r) for r in seps]
        rows += [[f"sep({r.kappa0},{r.kappa1})", r.passed] for r in seps]
    return Output(record, ["quantity", "value"], rows)


def cmd_models(args, cfg: RunConfig) -> Output:
    kind = args.kind
    if kind == "zeta":
        val = models.hurwitz_zeta2(args.h)
        lo, hi = models.hurwitz_tail_bracket(args.h)
        return Output({"h": args.h, "zeta2": val, "bracket": [lo, hi]}, ["h", "zeta2", "lo", "hi"],
                      [[args.h, val, lo, hi]])
    if args.N is None:
        raise DomainError(f"models {kind} needs --N")
    Ns = models.parse_N_range(args.N)
    if kind == "variance":
        rows = [[N, models.spherical_variance_closed_form(N), models.variance_upper_bound(N - 1) if N > 1 else ""]
                for N in Ns]
        rec = [{"N": r[0], "value": r[1]} for r in rows]
        return Output(rec, ["N", "value", "bound"], rows)
    if kind == "asympt":
        table = models.spherical_asymptotic_check(Ns)
        rows = [[r.N, r.value, r.n_times_value, r.deviation, r.over_sqrt_n] for r in table]
        return Output([dict(zip(("N", "value", "N_value", "deviation", "value_sqrtN"), r)) for r in rows],
                      ["N", "value", "N_value", "deviation", "value_sqrtN"], rows)
    if kind == "recurrence":
        rows = [[N, models.recurrence_I(N), models.recurrence_K(N), models.variance_via_recurrence(N + 1)]
                for N in Ns]
        return Output([dict(zip(("N", "I", "K", "value_next"), r)) for r in rows],
                      ["N", "I", "K", "value_next"], rows)
    raise DomainError(f"unknown models subcommand {kind!r}")


def cmd_generate(args, cfg: RunConfig) -> Output:
    if args.model == "warped":
        space = warped_product(args.phi, args.n, args.F, args.res)
    elif args.model == "sphere":
        space = sphere_angle(args.N, args.res)
    elif args.model == "interval":
        space = interval(parse_measure(args.measure), args.res, args.mode)
    else:
        raise DomainError(f"unknown model {args.model!r}")
    obj = space.to_json()
    validate(obj, "space")
    header = ["i", "weight"] + [f"d{j}" for j in range(space.n)]
    rows = [[i, space.weight[i]] + space.dist[i].tolist() for i in range(space.n)]
    return Output(obj, header, rows)


def cmd_verify(args, cfg: RunConfig) -> Output:
    from .acceptance import run_all

    results = run_all(None)
    rec = [{"criterion": c.number, "name": c.name, "pass": c.passed, "detail": c.detail} for c in results]
    rows = [[c.number, "PASS" if c.passed else "FAIL", c.name, c.detail] for c in results]
    out = Output(rec, ["criterion", "status", "name", "detail"], rows)
    out.failed = not all(c.passed for c in results)
    return out


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mm-rigidity", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "table"))
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--config", help="JSON file with seed/threads/tol/format/restarts/eps")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("profile", parents=[common])
    sp.add_argument("--measure")
    sp.add_argument("--space")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--greedy", action="store_true")

    sp = sub.add_parser("obsvar", parents=[common])
    sp.add_argument("--space", required=True)
    sp.add_argument("--lambda", dest="lam", default="t2")
    sp.add_argument("--nu")
    sp.add_argument("--foliation", action="store_true")
    sp.add_argument("--foliation-tol", type=float)
    sp.add_argument("--restarts", type=int)

    sp = sub.add_parser("dominate", parents=[common])
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("--m", type=int, default=2048)
    sp.add_argument("--sep", action="store_true", help="also run the separation necessary check")

    sp = sub.add_parser("models", parents=[common])
    sp.add_argument("kind", choices=("variance", "asympt", "recurrence", "zeta"))
    sp.add_argument("--N")
    sp.add_argument("--h", type=float, default=0.5)

    sp = sub.add_parser("generate", parents=[common])
    sp.add_argument("model", choices=("warped", "sphere", "interval"))
    sp.add_argument("--phi", default="sin")
    sp.add_argument("--n", type=float, default=1.0)
    sp.add_argument("--F", default="circle:8")
    sp.add_argument("--N", type=float, default=2.0)
    sp.add_argument("--measure", default="gaussian")
    sp.add_argument("--mode", default="midpoint", choices=("uniform", "midpoint", "quantile"))
    sp.add_argument("--res", type=int, default=32)

    sub.add_parser("verify", parents=[common])
    return p


DEFAULT_FORMAT = {"profile": "csv", "models": "csv", "verify": "table"}
COMMANDS = {
    "profile": cmd_profile,
    "obsvar": cmd_obsvar,
    "dominate": cmd_dominate,
    "models": cmd_models,
    "generate": cmd_generate,
    "verify": cmd_verify,
}


def make_config(args) -> RunConfig:
    cfg = RunConfig(command=args.command, format=DEFAULT_FORMAT.get(args.command, "json"))
    if args.config:
        obj = _load_json(args.config)
        validate(obj, "config")
        for key, val in obj.items():
            setattr(cfg, key, val)
    env = os.environ.get(THREADS_ENV)
    if env is not None and args.threads is None and not (args.config and "threads" in obj):
        try:
            cfg.threads = int(env)
        except ValueError as exc:
            raise SchemaError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
    for key in ("format", "out", "seed", "threads", "tol", "restarts", "eps"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if cfg.threads < 1:
        raise DomainError("threads must be >= 1")
    if cfg.seed < 0:
        raise DomainError("seed must be >= 0")
    cfg.inputs = [v for k in ("space", "measure", "source", "target", "nu") if (v := getattr(args, k, None))]
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(args)
        out = COMMANDS[args.command](args, cfg)
        emit(render(out, cfg.format), cfg.out)
    except MMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    if getattr(out, "failed", False):
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
