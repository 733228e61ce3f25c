"""Experiment harness: problem assembly, solver dispatch, result files.

The harness owns the conventions the experiments rely on: right-hand
sides are random blocks normalized to unit Frobenius norm, solvers are
addressed by their registry names, true-residual sampling defaults to
every iteration on small problems and every sixth on large ones, and
each converged run can be annotated with the rounding-error bounds that
apply to its solver.
"""

import csv
import io
import json
from dataclasses import dataclass

from .block_solvers import (
    BlockSolverConfig,
    bl_bicggr_rq,
    bl_bicgstab_pq,
    s_bl_bicggr_rq,
    s_bl_bicgstab_pq,
)
from .bounds import evaluate_bound
from .errors import ConfigurationError
from .global_solvers import (
    GlobalSolverConfig,
    gl_bicgstab,
    gl_cgs2,
    s_gl_bicgstab,
    s_gl_cgs2,
)
from .history import ConvergenceHistory, IterationRecord
from .linalg import ProblemOperator, SparseMatrix
from .matrices import gen_random_block

__all__ = [
    "SOLVERS",
    "GLOBAL_SOLVER_NAMES",
    "BLOCK_SOLVER_NAMES",
    "Problem",
    "make_problem",
    "run_experiment",
    "bound_plan",
    "emit_results",
    "read_results_csv",
]

SOLVERS = {
    "gl-cgs2": gl_cgs2,
    "s-gl-cgs2": s_gl_cgs2,
    "gl-bicgstab": gl_bicgstab,
    "s-gl-bicgstab": s_gl_bicgstab,
    "bl-bicgstab-pq": bl_bicgstab_pq,
    "s-bl-bicgstab-pq": s_bl_bicgstab_pq,
    "bl-bicggr-rq": bl_bicggr_rq,
    "s-bl-bicggr-rq": s_bl_bicggr_rq,
}

GLOBAL_SOLVER_NAMES = ("gl-cgs2", "s-gl-cgs2", "gl-bicgstab", "s-gl-bicgstab")
BLOCK_SOLVER_NAMES = (
    "bl-bicgstab-pq",
    "s-bl-bicgstab-pq",
    "bl-bicggr-rq",
    "s-bl-bicggr-rq",
)


@dataclass
class Problem:
    """An operator with a right-hand side block, ready to solve."""

    operator: ProblemOperator
    b: object
    label: str = ""

    @property
    def n(self):
        return self.operator.n

    @property
    def s(self):
        return self.b.shape[1]


def make_problem(matrix, *, nrhs=None, sylvester_c=None, seed=0, label=""):
    """Assemble a Problem from matrices and a seeded right-hand side.

    For the generalized problem the block width is pinned by the
    coupling matrix; passing a conflicting ``nrhs`` is an error.
    """
    if not isinstance(matrix, SparseMatrix):
        raise ConfigurationError("matrix must be a SparseMatrix")
    if sylvester_c is not None:
        op = ProblemOperator.sylvester(matrix, sylvester_c)
        width = sylvester_c.n_rows
        if nrhs is not None and nrhs != width:
            raise ConfigurationError(
                f"nrhs={nrhs} conflicts with coupling matrix width {width}"
            )
    else:
        op = ProblemOperator.standard(matrix)
        width = 1 if nrhs is None else int(nrhs)
        if width < 1:
            raise ConfigurationError(f"nrhs must be >= 1, got {nrhs}")
    b = gen_random_block(op.n, width, seed, normalize=True)
    return Problem(operator=op, b=b, label=label)


def default_gap_every(n):
    """Sampling cadence: every iteration up to n = 1000, else every 6th."""
    return 1 if n <= 1000 else 6


def bound_plan(solver_name, kind, smoothed):
    """Bound ids attached to a run of the given solver.

    The first entry is the primary applicable bound (asserted by the
    acceptance suite); the rest are diagnostics.
    """
    if kind == "sylvester":
        return ("T6",)
    if solver_name.endswith("bicgstab-pq"):
        ids = ["C1", "T2"]
    else:
        ids = ["T1"]
    if smoothed:
        ids += ["T4", "T5"]
    return tuple(ids)


def run_experiment(problem, solver, config=None, *, gap_every="auto",
                   with_bounds=False):
    """Run one named solver on a problem.

    Returns ``(x, history, bound_reports)``.  ``bound_reports`` is empty
    unless ``with_bounds`` is set, in which case every bound applicable
    to the solver and operator kind is evaluated at termination.
    ``gap_every="auto"`` resolves via :func:`default_gap_every`.
    Breakdown errors propagate to the caller with the partial history
    attached to the exception.
    """
    if not isinstance(problem, Problem):
        raise ConfigurationError("problem must be a Problem")
    if solver not in SOLVERS:
        known = ", ".join(sorted(SOLVERS))
        raise ConfigurationError(f"unknown solver {solver!r}; known: {known}")
    kind = problem.operator.kind
    if solver in BLOCK_SOLVER_NAMES and kind == "sylvester":
        raise ConfigurationError(
            f"{solver} supports the standard operator only; "
            "the generalized problem needs a global solver"
        )
    if config is not None:
        expected = (
            GlobalSolverConfig if solver in GLOBAL_SOLVER_NAMES else BlockSolverConfig
        )
        if not isinstance(config, expected):
            raise ConfigurationError(
                f"{solver} expects {expected.__name__}, "
                f"got {type(config).__name__}"
            )
    if gap_every == "auto":
        gap_every = default_gap_every(problem.n)
    elif gap_every is not None and gap_every < 1:
        raise ConfigurationError(f"gap_every must be >= 1, got {gap_every}")

    x, history = SOLVERS[solver](
        problem.operator, problem.b, config, gap_every=gap_every
    )
    bound_reports = []
    if with_bounds:
        a = problem.operator.a
        for theorem in bound_plan(solver, kind, history.smoothed):
            bound_reports.append(
                evaluate_bound(
                    theorem,
                    history,
                    a_norm=problem.operator.a_norm(),
                    m=a.max_row_nnz,
                    s=problem.s,
                    c_norm=problem.operator.c_norm(),
                )
            )
    return x, history, bound_reports


# --------------------------------------------------------------------
# Result emission
# --------------------------------------------------------------------

_CSV_COLUMNS = (
    "iteration",
    "recursive_res",
    "smoothed_res",
    "true_res",
    "gap",
    "eta",
    "xi_cond",
    "op_applies",
)

_RECORD_FIELDS = (
    "iteration",
    "recursive_residual_norm",
    "smoothed_residual_norm",
    "true_residual_norm",
    "gap_norm",
    "eta",
    "xi_condition",
    "operator_applications",
)


def _normalize_runs(results):
    """Accept (name, history) or (name, history, bounds); sort by name."""
    runs = []
    for idx, item in enumerate(results):
        if len(item) == 2:
            name, history = item
            bounds = []
        else:
            name, history, bounds = item
        runs.append((name, history, list(bounds), idx))
    runs.sort(key=lambda r: (r[0], r[3]))
    return [(name, history, bounds) for name, history, bounds, _ in runs]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        # plain-float repr round-trips exactly; numpy scalars do not
        return repr(float(value))
    return str(value)


def summary_path_for(path):
    """Companion summary file path: stem gets a _summary suffix."""
    text = str(path)
    dot = text.rfind(".")
    if dot <= text.replace("\\", "/").rfind("/"):
        return text + "_summary"
    return text[:dot] + "_summary" + text[dot:]


def emit_results(results, format="csv", path=None):
    """Write run histories to disk (or return the text when path=None).

    ``csv`` writes the per-iteration table to ``path`` (one row per
    iteration, runs concatenated, ordered by solver name) and the
    summary table (solver, iterations, final true residual) to the
    companion ``*_summary`` file.  ``json`` writes a single document
    holding both plus any bound reports.  Histories round-trip exactly:
    floats are emitted with repr precision.
    """
    runs = _normalize_runs(results)
    if format == "csv":
        body = io.StringIO()
        writer = csv.writer(body, lineterminator="\n")
        writer.writerow(("solver",) + _CSV_COLUMNS)
        for name, history, _ in runs:
            for rec in history.records:
                writer.writerow(
                    [name] + [_fmt(getattr(rec, f)) for f in _RECORD_FIELDS]
                )
        summary = io.StringIO()
        writer = csv.writer(summary, lineterminator="\n")
        writer.writerow(("solver", "iterations", "final_true_res"))
        for name, history, _ in runs:
            writer.writerow(
                (
                    name,
                    history.iterations,
                    _fmt(history.final_true_residual_norm),
                )
            )
        if path is None:
            return body.getvalue() + "\n" + summary.getvalue()
        with open(path, "w", encoding="ascii") as fh:
            fh.write(body.getvalue())
        with open(summary_path_for(path), "w", encoding="ascii") as fh:
            fh.write(summary.getvalue())
        return str(path)
    if format == "json":
        doc = {"runs": []}
        for name, history, bounds in runs:
            doc["runs"].append(
                {
                    "solver": name,
                    "summary": history.summary(),
                    "b_norm": history.b_norm,
                    "bounds": [
                        {
                            "theorem": b.theorem,
                            "bound_value": b.bound_value,
                            "measured_gap": b.measured_gap,
                            "violated": b.violated,
                            "inputs": b.inputs,
                        }
                        for b in bounds
                    ],
                    "iterations": [
                        {f: getattr(rec, f) for f in _RECORD_FIELDS}
                        for rec in history.records
                    ],
                }
            )
        text = json.dumps(doc, indent=2)
        if path is None:
            return text
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)
        return str(path)
    raise ConfigurationError(f"unknown format {format!r}; use 'csv' or 'json'")


def read_results_csv(path):
    """Parse a per-iteration CSV back into records keyed by solver name."""
    out = {}
    with open(path, "r", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = ["solver"] + list(_CSV_COLUMNS)
        if header != expected:
            raise ConfigurationError(
                f"unexpected results header {header!r} in {path}"
            )
        for row in reader:
            name = row[0]
            values = []
            for field_name, cell in zip(_RECORD_FIELDS, row[1:]):
                if cell == "":
                    values.append(None)
                elif field_name in ("iteration", "operator_applications"):
                    values.append(int(cell))
                else:
                    values.append(float(cell))
            out.setdefault(name, []).append(IterationRecord(*values))
    return out
