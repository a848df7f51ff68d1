"""Command-line front end: run / study / probe / list with CSV output.

CSV files are locale-independent ('.' decimals, ',' separators, LF endings,
17 significant digits) and byte-identical across repeated invocations.
Exit codes: 0 success, 2 usage or config error, 3 numerical failure (with
any committed steps written to the output file for post-mortem).
"""

import argparse
import json
import math
import os
import sys

from . import diagnostics
from .config import (
    UsageError,
    build_problem,
    build_run_config,
    echo_pairs,
    parse_config_file,
    FileConfig,
)
from .errors import PathFollowError
from .problems import PROBLEMS
from .solvers import adaptive_path_follow, uniform_path_follow

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _header(subcommand, pairs, seed=None):
    lines = [f"# pathfollow {subcommand}"]
    lines.extend(f"# {key} = {_fmt(value)}" for key, value in pairs)
    if seed is not None:
        lines.append(f"# seed = {seed}")
    return lines


def _write(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def trajectory_csv_lines(traj, problem, header_lines):
    n = problem.n
    cols = (
        ["k", "t"]
        + [f"x_{i+1}" for i in range(n)]
        + [f"d_{i+1}" for i in range(n)]
        + ["residual", "err", "c_k", "h", "refinements"]
    )
    lines = list(header_lines)
    lines.append(",".join(cols))
    for rec in traj.records:
        row = [str(rec.k), _fmt(rec.t)]
        row += [_fmt(float(v)) for v in rec.x]
        row += [_fmt(float(v)) for v in rec.d]
        row += [_fmt(rec.residual), _fmt(rec.err), _fmt(rec.c_k), _fmt(rec.h), str(rec.refinements)]
        lines.append(",".join(row))
    return lines


def _load_file_config(args):
    path = args.config or os.environ.get("PATHFOLLOW_CONFIG")
    if path is None:
        return FileConfig()
    return parse_config_file(path)


def _problem_flag_overrides(args):
    return {"lambda": getattr(args, "lam", None)}


def cmd_run(args):
    file_cfg = _load_file_config(args)
    problem = build_problem(args.problem, file_cfg, _problem_flag_overrides(args))
    flag_keys = (
        "algorithm",
        "steps",
        "hmax",
        "a",
        "imax",
        "refine_tol",
        "refine_max",
        "kappa",
        "ell",
        "tol_zero",
        "drift",
        "ell_hat_factor",
    )
    cfg = build_run_config(file_cfg, {k: getattr(args, k) for k in flag_keys})
    try:
        resolved_pairs = echo_pairs(problem, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    header = _header("run", resolved_pairs, seed=args.seed)
    try:
        if cfg.algorithm == "uniform":
            traj = uniform_path_follow(problem, cfg)
        else:
            traj = adaptive_path_follow(problem, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    except PathFollowError as exc:
        if exc.partial is not None:
            _write(args.out, trajectory_csv_lines(exc.partial, problem, header))
        print(f"pathfollow run: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _write(args.out, trajectory_csv_lines(traj, problem, header))
    max_err = traj.summary.max_err
    print(
        f"problem={problem.name} algo={cfg.algorithm} steps={len(traj.records) - 1} "
        f"max_residual={_fmt(traj.summary.max_residual)} "
        f"max_err={_fmt(max_err) if max_err is not None else 'n/a'}"
    )
    return EXIT_OK


def _parse_steps_spec(spec):
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError(f"steps spec {spec!r} is not start:factor:count")
        try:
            start, factor, count = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise UsageError(f"steps spec {spec!r} has non-integer fields") from None
        if start < 1 or factor < 2 or count < 1:
            raise UsageError(f"steps spec {spec!r} out of range")
        Ns = [start * factor**k for k in range(count)]
    else:
        try:
            Ns = [int(part) for part in spec.split(",") if part.strip()]
        except ValueError:
            raise UsageError(f"steps list {spec!r} has non-integer entries") from None
    if len(Ns) < 2:
        raise UsageError("rate studies need at least two grid counts")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise UsageError("grid counts must be strictly increasing")
    return Ns


def cmd_study(args):
    file_cfg = _load_file_config(args)
    problem = build_problem(args.problem, file_cfg, _problem_flag_overrides(args))
    Ns = _parse_steps_spec(args.steps)
    table = diagnostics.rate_study(problem, Ns)
    pairs = [("problem", problem.name), ("algorithm", "uniform"), ("lambda", problem.lam), ("T", problem.T)]
    lines = _header("study", pairs, seed=args.seed)
    lines.append("N,h,max_err,observed_order")
    for row in table.rows:
        lines.append(
            ",".join([str(row.N), _fmt(row.h), _fmt(row.max_err), _fmt(row.observed_order)])
        )
    _write(args.out, lines)
    if all(row.failed for row in table.rows):
        print("pathfollow study: every grid count failed", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"problem={problem.name} rows={len(table.rows)} final_order={_fmt(table.final_order())}")
    return EXIT_OK


def cmd_probe(args):
    file_cfg = _load_file_config(args)
    problem = build_problem(args.problem, file_cfg, _problem_flag_overrides(args))
    if args.radii is not None:
        try:
            deltas = [float(part) for part in args.radii.split(",") if part.strip()]
        except ValueError:
            raise UsageError(f"bad radii list {args.radii!r}") from None
    elif args.radius is not None:
        deltas = [args.radius]
    else:
        raise UsageError("probe needs --radius or --radii")
    if not deltas or any(d <= 0 for d in deltas):
        raise UsageError("probe radii must be positive")
    if not 0.0 <= args.t <= problem.T:
        raise UsageError(f"--t must lie in [0, {problem.T}]")
    try:
        reports = diagnostics.probe_report(problem, args.t, deltas, args.samples, seed=args.seed)
    except PathFollowError as exc:
        print(f"pathfollow probe: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    pairs = [("problem", problem.name), ("lambda", problem.lam), ("t", args.t), ("samples", args.samples)]
    lines = _header("probe", pairs, seed=args.seed)
    lines.append("t,delta,samples,kappa_hat,eps_hat")
    for rep in reports:
        lines.append(
            ",".join([_fmt(rep.t), _fmt(rep.delta), str(rep.samples), _fmt(rep.kappa_hat), _fmt(rep.eps_hat)])
        )
    _write(args.out, lines)
    print(f"problem={problem.name} t={_fmt(args.t)} rows={len(reports)}")
    return EXIT_OK


def cmd_list(args):
    catalog = []
    for name in PROBLEMS:
        problem = PROBLEMS[name]()
        entry = {"name": name, "n": problem.n, "T": problem.T}
        if args.verbose or args.json:
            entry.update(
                {
                    "lambda": problem.lam,
                    "kappa_subreg": problem.kappa_subreg,
                    "ell_path": problem.ell_path,
                    "c_mono": problem.c_mono,
                    "has_reference": problem.reference is not None,
                }
            )
        catalog.append(entry)
    if args.json:
        print(json.dumps(catalog, indent=2, sort_keys=True))
        return EXIT_OK
    for entry in catalog:
        line = f"{entry['name']}  n={entry['n']}  T={_fmt(entry['T'])}"
        if args.verbose:
            line += (
                f"  lambda={_fmt(entry['lambda'])}  kappa={_fmt(entry['kappa_subreg'])}"
                f"  ell={_fmt(entry['ell_path'])}"
            )
        print(line)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # match the documented exit code for usage errors without argparse's
        # default SystemExit(2) traceback path through main()
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="pathfollow", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, with_out=True):
        p.add_argument("--problem", required=True, choices=sorted(PROBLEMS))
        p.add_argument("--config", default=None, help="config file (default: $PATHFOLLOW_CONFIG)")
        p.add_argument("--lambda", dest="lam", type=float, default=None, help="resolvent parameter override")
        p.add_argument("--seed", type=int, default=0)
        if with_out:
            p.add_argument("--out", required=True, help="output CSV path")

    run = sub.add_parser("run", help="follow the path with one driver and write the trajectory CSV")
    add_common(run)
    run.add_argument("--algorithm", choices=("uniform", "adaptive"), default=None)
    run.add_argument("--steps", type=int, default=None, help="uniform grid count N")
    run.add_argument("--hmax", type=float, default=None)
    run.add_argument("--a", type=float, default=None, help="step backoff ratio in (0,1)")
    run.add_argument("--imax", type=int, default=None)
    run.add_argument("--refine-tol", dest="refine_tol", type=float, default=None)
    run.add_argument("--refine-max", dest="refine_max", type=int, default=None)
    run.add_argument("--kappa", type=float, default=None)
    run.add_argument("--ell", type=float, default=None)
    run.add_argument("--tol-zero", dest="tol_zero", type=float, default=None)
    run.add_argument("--drift", choices=("on", "off"), default=None)
    run.add_argument("--ell-hat-factor", dest="ell_hat_factor", type=float, default=None)

    study = sub.add_parser("study", help="grid-refinement rate study (uniform driver)")
    add_common(study)
    study.add_argument("--steps", required=True, help="comma list of N or start:factor:count")

    probe = sub.add_parser("probe", help="regularity probes around the reference path")
    add_common(probe)
    probe.add_argument("--t", type=float, required=True)
    probe.add_argument("--radius", type=float, default=None)
    probe.add_argument("--radii", default=None, help="comma list of radii")
    probe.add_argument("--samples", type=int, default=1000)

    lst = sub.add_parser("list", help="list shipped problems")
    lst.add_argument("--verbose", action="store_true")
    lst.add_argument("--json", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "run": cmd_run,
            "study": cmd_study,
            "probe": cmd_probe,
            "list": cmd_list,
        }[args.subcommand]
        return handler(args)
    except UsageError as exc:
        print(f"pathfollow: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
