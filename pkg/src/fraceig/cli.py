"""Command-line interface: eval, solve, study.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
4 solver non-convergence (report still written), 5 study failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import load_config, resolve_config
from .errors import ConfigError, NumericalError, OracleError, StudyError
from .experiments import STUDIES, run_study
from .geometry import Field
from .operators import evaluate
from .solver import Problem, solve_dirichlet

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NONCONVERGED = 4
EXIT_STUDY = 5

EPILOG = """\
defaults (echoed, fully resolved, in every report):
  quadrature: delta = max grid spacing, T = 8 * domain diameter,
              nodes_per_decade = 16, tail_mode = zero_tail
  directions: M = 32 (N=2: angles k*pi/M; N=3: M^2 half-sphere points),
              subspace_M = 8 (N=3 intermediate eigenvalue only)
  solver:     tol = 1e-8 * (1 + datum bound), max_iter = 1000000,
              damping = 0.9, initial guess = datum mean near the boundary
  rhs:        constant 0
studies: nonlinearity, s_limit, eigen_limit, properties
"""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraceig",
        description="Directional fractional eigenvalue operators: point "
        "evaluation, Dirichlet solves, and verification studies.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("eval", "evaluate operators at configured points"),
        ("solve", "solve the Dirichlet problem on the configured grid"),
        ("study", "run a named verification study"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="cap on worker threads for per-direction sweeps")
        p.add_argument("--verbose", action="store_true",
                       help="print the resolved configuration")
    return parser


def _float_repr(v) -> str:
    return repr(float(v))


def cmd_eval(args) -> int:
    cfg = resolve_config(load_config(args.config), need="eval")
    field = Field.from_datum(cfg.grid, cfg.datum)
    if args.verbose:
        print(json.dumps(cfg.echo, indent=2), file=sys.stderr)
    results = []
    for x in cfg.points:
        ev = evaluate(cfg.spec, field, x, cfg.directions, cfg.subspaces,
                      cfg.quadrature)
        results.append(
            {
                "x": [float(v) for v in ev.x],
                "lambdas": [float(v) for v in ev.lambdas],
                "witnesses": [[float(c) for c in w] for w in ev.witnesses],
                "operator_value": float(ev.operator_value),
                "kind": ev.kind,
            }
        )
    payload = {"resolved_config": cfg.echo, "evaluations": results}
    print(json.dumps(payload, indent=2))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "evaluations.json").write_text(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = resolve_config(load_config(args.config), need="solve")
    if args.verbose:
        print(json.dumps(cfg.echo, indent=2), file=sys.stderr)
    problem = Problem(
        grid=cfg.grid, spec=cfg.spec, rhs=cfg.rhs, datum=cfg.datum,
        quadrature=cfg.quadrature, directions=cfg.directions,
        subspaces=cfg.subspaces, threads=max(1, args.threads),
    )
    report = solve_dirichlet(
        problem,
        tol=cfg.solver["tol"],
        max_iter=cfg.solver["max_iter"],
        damping=cfg.solver["damping"],
        initial_guess=cfg.solver["initial_guess"],
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    nodes = cfg.grid.interior_nodes()
    values = report.solution.interior_values
    with open(out / "solution.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(cfg.grid.dimension)] + ["value"])
        for point, value in zip(nodes, values):
            writer.writerow([_float_repr(c) for c in point] + [_float_repr(value)])

    payload = {
        "converged": report.converged,
        "iterations": report.iterations,
        "final_residual": report.final_residual,
        "tolerance": report.tolerance,
        "damping": report.damping,
        "wall_time": report.wall_time,
        "residual_history": report.residual_history,
        "resolved_config": cfg.echo,
    }
    (out / "report.json").write_text(json.dumps(payload, indent=2))
    print(json.dumps({k: payload[k] for k in
                      ("converged", "iterations", "final_residual", "wall_time")},
                     indent=2))
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_study(args) -> int:
    cfg = resolve_config(load_config(args.config), need="study")
    name = cfg.study["name"]
    if name not in STUDIES:
        raise ConfigError(f"unknown study {name!r}; choose from {sorted(STUDIES)}")
    if args.verbose:
        print(json.dumps(cfg.echo, indent=2), file=sys.stderr)
    result = run_study(name, cfg.study.get("params"), out_dir=args.out,
                       threads=max(1, args.threads))
    for row in result.rows:
        status = "pass" if row["passed"] else "FAIL"
        print(f"[{status}] {result.name}/{row['stage']} ({row['parameter']}): "
              f"error={row['error']:.3e} tolerance={row['tolerance']:.3e}")
    print(json.dumps({"study": result.name, "passed": result.passed,
                      "artifacts": result.artifacts}, indent=2))
    return EXIT_OK if result.passed else EXIT_STUDY


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "solve":
            return cmd_solve(args)
        return cmd_study(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, OracleError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except StudyError as exc:
        print(f"study failure: {exc}", file=sys.stderr)
        return EXIT_STUDY


if __name__ == "__main__":
    sys.exit(main())
