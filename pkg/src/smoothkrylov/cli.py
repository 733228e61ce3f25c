"""Command-line front end.

One subcommand, ``solve``, which assembles a problem from a matrix
source, runs a named solver, prints a summary, and optionally writes
the per-iteration history to CSV or JSON.

Exit codes: 0 converged, 2 iteration limit reached, 3 solver breakdown,
4 configuration or parse error.
"""

import argparse
import sys

from .block_solvers import BlockSolverConfig
from .errors import (
    BreakdownError,
    ConfigurationError,
    MatrixMarketParseError,
    SmoothKrylovError,
)
from .global_solvers import GlobalSolverConfig
from .harness import (
    BLOCK_SOLVER_NAMES,
    SOLVERS,
    emit_results,
    make_problem,
    run_experiment,
)
from .history import TerminalStatus
from .matrices import SUITESPARSE_MANIFEST, gen_toeplitz, load_named_matrix, read_matrix_market

__all__ = ["main", "build_parser"]

_STATUS_EXIT = {
    TerminalStatus.CONVERGED: 0,
    TerminalStatus.MAX_ITERATIONS: 2,
    TerminalStatus.BREAKDOWN: 3,
}


class _CliParseError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 by default; that slot is taken by the
    # iteration-limit outcome, so funnel parse failures to exit code 4.
    def error(self, message):
        raise _CliParseError(message)


def _parse_maxit(text):
    if text.strip().lower() == "2n":
        return None
    try:
        value = int(text)
    except ValueError:
        raise _CliParseError(f"--maxit expects an integer or '2n', got {text!r}")
    if value < 1:
        raise _CliParseError(f"--maxit must be >= 1, got {value}")
    return value


def _load_matrix(spec):
    """Matrix source: a Matrix Market path, toeplitz:N, or name:ID."""
    if spec.startswith("toeplitz:"):
        try:
            n = int(spec.split(":", 1)[1])
        except ValueError:
            raise _CliParseError(f"bad size in matrix spec {spec!r}")
        if n < 1:
            raise _CliParseError(f"matrix size must be >= 1, got {n}")
        return gen_toeplitz(n)
    if spec.startswith("name:"):
        name = spec.split(":", 1)[1]
        try:
            return load_named_matrix(name)
        except KeyError:
            known = ", ".join(sorted(SUITESPARSE_MANIFEST))
            raise _CliParseError(f"unknown matrix name {name!r}; known: {known}")
    return read_matrix_market(spec)


def build_parser():
    parser = _Parser(
        prog="smoothkrylov",
        description="Residual-smoothed global and block Krylov solvers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    solve = sub.add_parser(
        "solve",
        help="run one solver on one problem",
        description=(
            "Run a solver on A X = B, or on A X - X C = B when a "
            "coupling matrix is given."
        ),
    )
    solve.add_argument(
        "--matrix",
        required=True,
        help="coefficient matrix: Matrix Market path, toeplitz:N, or name:ID",
    )
    solve.add_argument(
        "--sylvester-c",
        default=None,
        metavar="PATH",
        help="coupling matrix C (Matrix Market path or name:ID); "
        "switches to the generalized operator",
    )
    solve.add_argument(
        "--solver", required=True, choices=sorted(SOLVERS), help="solver name"
    )
    solve.add_argument(
        "--nrhs",
        type=int,
        default=None,
        help="right-hand sides (default 1; fixed by C when --sylvester-c)",
    )
    solve.add_argument("--tol", type=float, default=1e-14, help="relative stopping tolerance")
    solve.add_argument(
        "--maxit",
        default="2n",
        help="iteration cap: an integer or '2n' (twice the matrix size)",
    )
    solve.add_argument("--seed", type=int, default=0, help="RNG seed for B and shadow residuals")
    solve.add_argument(
        "--theta",
        type=float,
        default=1e-2,
        help="block smoothing switch threshold; 0 keeps smoothing on throughout",
    )
    solve.add_argument(
        "--gap-every",
        type=int,
        default=None,
        metavar="G",
        help="true-residual sampling stride (default: 1 if n <= 1000 else 6)",
    )
    solve.add_argument(
        "--bounds",
        action="store_true",
        help="evaluate the applicable residual-gap bounds at termination",
    )
    solve.add_argument("--out", default=None, metavar="PATH", help="write history to this file")
    solve.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="history file format"
    )
    return parser


def _build_config(args):
    maxit = _parse_maxit(args.maxit)
    if args.solver in BLOCK_SOLVER_NAMES:
        if args.theta < 0:
            raise _CliParseError(f"--theta must be >= 0, got {args.theta}")
        smoothing = "cirs_switched" if args.theta > 0 else "cirs"
        return BlockSolverConfig(
            tolerance=args.tol,
            max_iterations=maxit,
            seed=args.seed,
            smoothing=smoothing,
            theta=args.theta,
        )
    return GlobalSolverConfig(
        tolerance=args.tol,
        max_iterations=maxit,
        seed=args.seed,
        smoothing="cirs",
    )


def _print_summary(name, history, out=None):
    out = sys.stdout if out is None else out
    final_true = history.final_true_residual_norm
    true_text = "n/a" if final_true is None else f"{final_true:.3e}"
    print(
        f"{name}: status={history.status.value} iterations={history.iterations} "
        f"final_true_res={true_text}",
        file=out,
    )


def _print_bounds(reports, out=None):
    out = sys.stdout if out is None else out
    for report in reports:
        state = "VIOLATED" if report.violated else "ok"
        print(
            f"  bound {report.theorem}: measured_gap={report.measured_gap:.3e} "
            f"<= bound={report.bound_value:.3e} [{state}]",
            file=out,
        )


def _run_solve(args):
    matrix = _load_matrix(args.matrix)
    c = None
    if args.sylvester_c is not None:
        c = _load_matrix(args.sylvester_c)
    problem = make_problem(
        matrix, nrhs=args.nrhs, sylvester_c=c, seed=args.seed, label=args.matrix
    )
    gap_every = "auto" if args.gap_every is None else args.gap_every
    try:
        x, history, reports = run_experiment(
            problem,
            args.solver,
            _build_config(args),
            gap_every=gap_every,
            with_bounds=args.bounds,
        )
    except BreakdownError as err:
        print(f"breakdown: {err}", file=sys.stderr)
        if err.history is not None:
            _print_summary(args.solver, err.history, out=sys.stderr)
            if args.out is not None:
                emit_results(
                    [(args.solver, err.history)], format=args.format, path=args.out
                )
        return 3
    _print_summary(args.solver, history)
    if args.bounds:
        _print_bounds(reports)
    if args.out is not None:
        emit_results(
            [(args.solver, history, reports)], format=args.format, path=args.out
        )
        print(f"history written to {args.out}")
    return _STATUS_EXIT[history.status]


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _run_solve(args)
    except _CliParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except (ConfigurationError, MatrixMarketParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except SmoothKrylovError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
