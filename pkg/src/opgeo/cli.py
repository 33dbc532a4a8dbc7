"""``opgeo`` command line.

Exit codes: 0 success, 1 a verification suite failed, 2 usage or parse error,
3 a mathematical precondition failed (the error class name goes to stderr).
stdout carries only the requested artifact.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import curves as cv
from . import matfun as mf
from .errors import ConfigInvalid, MathError, OpGeoError
from .experiments import SUITES, TrialConfig, bound_constant, run_suite
from .fileio import (
    FormatError,
    dumps,
    matrix_to_csv,
    matrix_to_dict,
    read_matrix,
    read_spec,
)
from .manifolds import (
    MetricKind,
    as_group_point,
    polar_dist,
    polar_geodesic,
    spd_dist,
    spd_geodesic,
    unitary_dist,
)
from .subgroups import (
    BUILTIN_KINDS,
    SubgroupContext,
    builtin_algebra,
    cartan_split,
    triple_system_check,
    validate_algebra,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_MATH = 0, 1, 2, 3
FORMATS = ("json", "csv", "pretty")


class UsageError(Exception):
    pass


def _p_value(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return float("inf")
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _emit(record: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(record, indent=2) + "\n"
    flat = {k: v for k, v in record.items() if not isinstance(v, (dict, list))}
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
        w.writeheader()
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in flat.items()})
        return buf.getvalue()
    width = max(len(k) for k in flat)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in flat.items())


def _emit_matrix(a: np.ndarray, fmt: str) -> str:
    if fmt == "csv":
        return matrix_to_csv(a)
    if fmt == "json":
        return dumps(matrix_to_dict(a), indent=2) + "\n"
    return np.array2string(np.asarray(a), precision=12, max_line_width=160) + "\n"


# -- subcommands ---------------------------------------------------------------


def cmd_distance(args) -> int:
    p = read_matrix(args.p_file)
    q = read_matrix(args.q_file)
    rec = {"metric": args.metric}
    if args.metric == "positive":
        rec.update(label="distance", value=spd_dist(p, q))
    elif args.metric == "unitary":
        rec.update(label="distance", value=unitary_dist(p, q))
    elif args.metric == "polar":
        rec.update(label="distance", value=polar_dist(p, q))
    else:
        gp, gq = as_group_point(p), as_group_point(q)
        metric = MetricKind.left_invariant(args.p_norm)
        length = cv.curve_length(cv.polar_geodesic_curve(gp, gq), metric)
        c = bound_constant(gp, gq)
        d = polar_dist(gp, gq)
        rec.update(label="upper bound", value=length, p_norm=args.p_norm,
                   c=c, polar_distance=d, c_times_polar_distance=c * d)
    sys.stdout.write(_emit(rec, args.format))
    return EXIT_OK


def cmd_geodesic(args) -> int:
    p = read_matrix(args.p_file)
    if args.manifold == "group":
        ctx = SubgroupContext.builtin(args.kind, p.shape[0])
        curve = cv.polar_group_geodesic_curve(ctx, p)
    else:
        if args.q_file is None:
            raise UsageError(f"geodesic {args.manifold} needs P_FILE and Q_FILE")
        q = read_matrix(args.q_file)
        if args.manifold == "spd":
            curve = cv.spd_geodesic_curve(p, q)
        elif args.manifold == "unitary":
            curve = cv.unitary_geodesic_curve(p, q)
        else:
            curve = cv.polar_geodesic_curve(p, q)
    if args.samples is not None:
        if args.samples < 1:
            raise UsageError("--samples must be >= 1")
        if args.format == "json":
            t, mats = curve.sample(args.samples)
            out = [{"t": float(ti), **matrix_to_dict(m)} for ti, m in zip(t, mats)]
            sys.stdout.write(dumps(out, indent=2) + "\n")
        else:
            sys.stdout.write(cv.curve_to_csv(curve, args.samples))
        return EXIT_OK
    t = 0.0 if args.t is None else args.t
    if args.manifold == "spd":
        a = spd_geodesic(p, q, t)
    elif args.manifold == "polar":
        a = polar_geodesic(p, q, t).g
    else:
        a = curve(t)
    sys.stdout.write(_emit_matrix(a, args.format))
    return EXIT_OK


def _config_from(args) -> TrialConfig:
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigInvalid("config file must hold a JSON object")
    if "seed" not in base and os.environ.get("OPGEO_SEED"):
        try:
            base["seed"] = int(os.environ["OPGEO_SEED"])
        except ValueError:
            raise ConfigInvalid("OPGEO_SEED must be an integer") from None
    flags = {
        "group": args.group, "n": args.dim, "trials": args.trials, "seed": args.seed,
        "spread": args.spread, "p_norm": args.p_norm, "threads": args.threads,
    }
    base.update({k: v for k, v in flags.items() if v is not None})
    return TrialConfig.from_dict(base)


def cmd_verify(args) -> int:
    cfg = _config_from(args)
    report = run_suite(args.suite, cfg)
    if args.format == "csv":
        text = report.to_csv()
    elif args.format == "pretty":
        s = report.summary
        text = (f"{report.suite}: {'PASS' if report.passed else 'FAIL'} "
                f"({s['trials'] - s['failures']}/{s['trials']} trials) "
                f"digest {report.digest()[:16]} in {report.runtime_ms:.0f} ms\n")
    else:
        text = report.to_json()
    if args.out:
        Path(args.out).write_text(text)
        print(f"{report.suite}: {'pass' if report.passed else 'FAIL'}; report in {args.out}",
              file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_algebra(args) -> int:
    if args.spec_file:
        spec = read_spec(args.spec_file)
    else:
        if args.kind is None or args.dim is None:
            raise UsageError("algebra needs --kind and --dim, or --spec-file")
        spec = builtin_algebra(args.kind, args.dim)
    val = validate_algebra(spec)
    rec = {"name": spec.name, "dim": spec.dim, **{f"validation_{k}": v
                                                  for k, v in val.as_dict().items()
                                                  if k != "name"}}
    ok = val.passed
    if ok:
        split = cartan_split(spec)
        tri = triple_system_check(split)
        rec.update(k_dim=split.dims[0], m_dim=split.dims[1],
                   **{f"triple_{k}": v for k, v in tri.as_dict().items()})
        ok = tri.passed
    rec["pass"] = ok
    sys.stdout.write(_emit(rec, args.format))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_polar(args) -> int:
    g = read_matrix(args.file)
    u, p = mf.polar_decompose(g)
    if args.format == "json":
        sys.stdout.write(dumps({"u": matrix_to_dict(u), "abs": matrix_to_dict(p)}, indent=2) + "\n")
    else:
        sys.stdout.write(_emit_matrix(u, args.format) + "\n" + _emit_matrix(p, args.format))
    return EXIT_OK


def cmd_norm(args) -> int:
    x = read_matrix(args.file)
    value = float(mf.schatten_norm(x, args.p))
    sys.stdout.write(_emit({"p": args.p, "value": value}, args.format))
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=FORMATS, default="json")
    parser = argparse.ArgumentParser(
        prog="opgeo", description="Geometry of invertible operators: distances, "
        "geodesics and seeded verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("distance", parents=[fmt], help="distance between two matrices")
    d.add_argument("metric", choices=("left", "positive", "unitary", "polar"))
    d.add_argument("p_file")
    d.add_argument("q_file")
    d.add_argument("--p-norm", type=_p_value, default=2.0)
    d.set_defaults(func=cmd_distance)

    g = sub.add_parser("geodesic", parents=[fmt], help="points on a geodesic")
    g.add_argument("manifold", choices=("spd", "unitary", "polar", "group"))
    g.add_argument("p_file", help="start point (for 'group': the initial velocity)")
    g.add_argument("q_file", nargs="?")
    g.add_argument("--kind", choices=BUILTIN_KINDS, default="full_gl")
    when = g.add_mutually_exclusive_group()
    when.add_argument("--t", type=float)
    when.add_argument("--samples", type=int)
    g.set_defaults(func=cmd_geodesic)

    v = sub.add_parser("verify", parents=[fmt], help="run a verification suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--group", choices=BUILTIN_KINDS)
    v.add_argument("--dim", type=int)
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--spread", type=float)
    v.add_argument("--p-norm", type=_p_value)
    v.add_argument("--threads", type=int)
    v.add_argument("--config", help="JSON file mirroring TrialConfig; flags override it")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("algebra", parents=[fmt], help="validate a Lie algebra and split it")
    a.add_argument("--kind", choices=BUILTIN_KINDS)
    a.add_argument("--dim", type=int)
    a.add_argument("--spec-file")
    a.set_defaults(func=cmd_algebra)

    pol = sub.add_parser("polar", parents=[fmt], help="polar decomposition of a matrix file")
    pol.add_argument("file")
    pol.set_defaults(func=cmd_polar)

    nm = sub.add_parser("norm", parents=[fmt], help="Schatten p-norm of a matrix file")
    nm.add_argument("file")
    nm.add_argument("--p", type=_p_value, default=2.0)
    nm.set_defaults(func=cmd_norm)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    try:
        return args.func(args)
    except (UsageError, FormatError, ConfigInvalid) as exc:
        parser.print_usage(sys.stderr)
        print(f"opgeo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MathError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH
    except (OpGeoError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
