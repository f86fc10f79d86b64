"""Command-line entry point for the solver and its experiment studies.

Subcommands
-----------
solve           run one simulation per requested epsilon, write snapshots
table-temporal  time-step refinement study (error table + uniform-error rows)
table-spatial   mesh refinement study against a spectrally finer reference
interp-error    continuous-in-time reconstruction error at a probe point
limits          comparison against the oscillatory and Schrodinger limit models
dynamics2d      two-dimensional run with symmetry and energy diagnostics
coeff-dump      write the per-mode integrator coefficient table as CSV

Exit codes: 0 when every requested run completed with finite results,
2 for configuration errors, 1 for runtime failures (divergence,
non-finite output).  Non-zero exits print a JSON failure report to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Any, Callable

import numpy as np

from .coefficients import build_coeff_table
from .harness import (
    ExperimentConfig,
    cmd_dynamics2d,
    cmd_interp_error,
    cmd_limits,
    cmd_solve,
    cmd_table_spatial,
    cmd_table_temporal,
)
from .problems import get_problem
from .stepper import DivergenceError

# Default sweeps per subcommand, at the scale of the published studies.
_DEFAULTS: dict[str, dict[str, Any]] = {
    "solve": {
        "eps_list": [0.5],
        "h_list": [1.0 / 32.0],
        "tau_list": [1e-4],
        "t_end": 1.0,
    },
    "table-temporal": {
        "eps_list": [0.5 / 2**k for k in range(14)],
        "h_list": [1.0 / 32.0],
        "tau_list": [0.2 / 4**k for k in range(5)],
        "tau_ref": 1e-5,
        "t_end": 1.0,
    },
    "table-spatial": {
        "eps_list": [0.5, 0.5 / 2**4],
        "h_list": [1.0, 0.5, 0.25, 0.125],
        "h_ref": 1.0 / 16.0,
        "tau_list": [1e-5],
        "tau_ref": 1e-5,
        "t_end": 1.0,
    },
    "interp-error": {
        "eps_list": [0.5, 0.05, 0.005],
        "h_list": [1.0 / 32.0],
        "tau_list": [0.05],
        "tau_ref": 1e-5,
        "t_end": 1.0,
        "n_query": 1001,
    },
    "limits": {
        "eps_list": [0.1, 0.05, 0.025],
        "h_list": [0.125],
        "tau_list": [1e-4],
        "t_end": 2.0,
        "sample_dt": 0.1,
    },
    "dynamics2d": {
        "problem": "twin-gauss-2d",
        "eps_list": [1.0],
        "h_list": [40.0 / 128.0],
        "tau_list": [1e-3],
        "t_end": 1.0,
    },
}


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgmti",
        description="Uniformly accurate oscillatory Klein-Gordon solver and studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
        p.add_argument("--eps", type=_float_list, metavar="E1[,E2..]",
                       help="epsilon values to sweep")
        p.add_argument("--tau", type=_float_list, metavar="T1[,T2..]",
                       help="time steps to sweep")
        p.add_argument("--h", type=_float_list, metavar="H1[,H2..]",
                       help="mesh sizes to sweep")
        p.add_argument("--t-end", type=float, dest="t_end", help="final time")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--format", choices=["csv", "json"], action="append",
                       help="output format (repeatable; default both)")
        p.add_argument("--jobs", type=int, help="parallel workers for sweeps")
        p.add_argument("--ref-tau", type=float, dest="ref_tau",
                       help="reference-solution time step")
        p.add_argument("--seed", type=int, help="seed recorded in run metadata")
        p.add_argument("--problem", help="built-in problem name")

    for name in ["solve", "table-temporal", "table-spatial", "interp-error",
                 "limits", "dynamics2d"]:
        add_common(sub.add_parser(name))

    cd = sub.add_parser("coeff-dump", help="write the per-mode coefficient table")
    cd.add_argument("--tau", type=float, default=0.1, help="time step")
    cd.add_argument("--eps", type=float, default=0.5, help="epsilon")
    cd.add_argument("--h", type=float, default=1.0 / 32.0, help="mesh size")
    cd.add_argument("--problem", default="sech-gauss", help="built-in problem name")
    cd.add_argument("--out", default="out", metavar="DIR", help="output directory")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
    else:
        cfg = ExperimentConfig()
        for key, val in _DEFAULTS[args.command].items():
            setattr(cfg, key, val)
    if args.problem is not None:
        cfg.problem = args.problem
    if args.eps is not None:
        cfg.eps_list = args.eps
    if args.tau is not None:
        cfg.tau_list = args.tau
    if args.h is not None:
        cfg.h_list = args.h
    if args.t_end is not None:
        cfg.t_end = args.t_end
    if args.out is not None:
        cfg.out_dir = args.out
    if args.format:
        cfg.formats = list(dict.fromkeys(args.format))
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.ref_tau is not None:
        cfg.tau_ref = args.ref_tau
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _dump_coeffs(args: argparse.Namespace) -> tuple[list[str], list[float]]:
    problem = get_problem(args.problem)
    n = ExperimentConfig.grid_n(problem, args.h)
    grid = problem.grid(n)
    if grid.dim != 1:
        raise ValueError("coeff-dump expects a 1D problem")
    table = build_coeff_table(args.tau, args.eps, grid)
    spacing = 2.0 * math.pi / grid.length
    names = ["a", "a_prime", "b", "b_prime", "c", "c_prime", "p", "p_prime"]
    lines = [
        f"# problem: {problem.name}",
        f"# tau: {args.tau!r}",
        f"# eps: {args.eps!r}",
        f"# n: {n}",
        "l,mu,omega,lambda_plus,lambda_minus,"
        + ",".join(f"{nm}_re,{nm}_im" for nm in names),
    ]
    values: list[float] = []
    for j in range(n):
        l = int(round(grid.mu[j] / spacing))
        row = [str(l), format(grid.mu[j], ".17g"), format(table.omega[j], ".17g"),
               format(table.lambda_plus[j], ".17g"),
               format(table.lambda_minus[j], ".17g")]
        for nm in names:
            z = getattr(table, nm)[j]
            row += [format(z.real, ".17g"), format(z.imag, ".17g")]
            values += [z.real, z.imag]
        values += [table.omega[j], table.lambda_plus[j], table.lambda_minus[j]]
        lines.append(",".join(row))
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "coeff_table.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return [path], values


def _collect_finite(obj: Any) -> list[float]:
    """Flatten the numeric leaves of a result summary for the exit-code check."""
    out: list[float] = []
    if isinstance(obj, (int, float)):
        out.append(float(obj))
    elif isinstance(obj, np.ndarray):
        out.extend(np.asarray(obj, dtype=float).ravel().tolist())
    elif isinstance(obj, dict):
        for v in obj.values():
            out.extend(_collect_finite(v))
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            out.extend(_collect_finite(v))
    return out


def _run_command(args: argparse.Namespace) -> tuple[list[str], list[float]]:
    """Dispatch one subcommand; return (output paths, numbers to finiteness-check)."""
    if args.command == "coeff-dump":
        return _dump_coeffs(args)

    cfg = config_from_args(args)
    if args.command == "solve":
        paths: list[str] = []
        numbers: list[float] = []
        for eps in cfg.eps_list:
            res = cmd_solve(cfg, eps=eps)
            paths += res.paths
            numbers.append(res.energy_drift)
            numbers += _collect_finite(res.trajectory.final.u)
        return paths, numbers
    if args.command == "table-temporal":
        table, paths = cmd_table_temporal(cfg)
        return paths, [c.e_h1 for c in table.cells.values()]
    if args.command == "table-spatial":
        table, paths = cmd_table_spatial(cfg)
        return paths, [c.e_h1 for c in table.cells.values()]
    if args.command == "interp-error":
        res = cmd_interp_error(cfg)
        return res.paths, _collect_finite([res.max_err, res.endpoint_err])
    if args.command == "limits":
        res = cmd_limits(cfg)
        return res.paths, _collect_finite(res.series)
    if args.command == "dynamics2d":
        res = cmd_dynamics2d(cfg)
        return res.paths, _collect_finite([res.max_asymmetry, res.energy_drift])
    raise ValueError(f"unknown command {args.command!r}")


def _fail(command: str, kind: str, messages: list[str]) -> int:
    report = {"status": "failure", "command": command, "kind": kind,
              "errors": messages}
    print(json.dumps(report, indent=2), file=sys.stderr)
    return 2 if kind == "config" else 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        paths, numbers = _run_command(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        return _fail(args.command, "config", [str(exc)])
    except DivergenceError as exc:
        return _fail(args.command, "runtime", [str(exc)])
    bad = [v for v in numbers if not math.isfinite(v)]
    if bad:
        return _fail(args.command, "runtime",
                     [f"{len(bad)} non-finite values in results"])
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
