"""Residual-smoothed global and block Krylov solvers.

Solves A X = B with many right-hand sides, and the generalized problem
A X - X C = B, using transpose-free Lanczos-type product methods.  Each
baseline solver is paired with a smoothed variant that runs a
cross-interactive smoothing recurrence alongside the primary recursion:
the smoothed residual decreases monotonically, the smoothed residual
gap stays near rounding level even when the primary residual spikes,
and no extra operator applications are spent.

Example
-------
>>> import smoothkrylov as sk
>>> a = sk.gen_toeplitz(200)
>>> b = sk.gen_random_block(200, 4, seed=7)
>>> x, history = sk.s_gl_cgs2(a, b)
>>> history.converged
True

The same pair of lines runs every solver; block solvers take the same
``(operator, b)`` arguments with an optional ``BlockSolverConfig``.
The experiment harness adds named test matrices, residual-gap bound
reports, and CSV/JSON emission:

>>> problem = sk.make_problem(a, nrhs=4, seed=7)
>>> x, history, reports = sk.run_experiment(problem, "s-gl-cgs2", with_bounds=True)

Numba-accelerated kernels are used when available; set
``SMOOTHKRYLOV_BACKEND=numpy`` to force the pure-numpy fallback or
``SMOOTHKRYLOV_BACKEND=numba`` to require the compiled path.
"""

from ._backends import ACTIVE_BACKEND, HAS_NUMBA, get_backend_info
from .block_solvers import (
    BlockSolverConfig,
    bl_bicggr_rq,
    bl_bicgstab_pq,
    s_bl_bicggr_rq,
    s_bl_bicgstab_pq,
    switching_controller,
)
from .bounds import BOUND_IDS, BoundReport, evaluate_bound
from .errors import (
    BreakdownError,
    ConfigurationError,
    DimensionMismatchError,
    MatrixMarketParseError,
    SmoothKrylovError,
    XiSingularError,
)
from .global_solvers import (
    GlobalSolverConfig,
    gl_bicgstab,
    gl_cgs2,
    s_gl_bicgstab,
    s_gl_cgs2,
)
from .harness import (
    BLOCK_SOLVER_NAMES,
    GLOBAL_SOLVER_NAMES,
    SOLVERS,
    Problem,
    emit_results,
    make_problem,
    read_results_csv,
    run_experiment,
)
from .history import ConvergenceHistory, IterationRecord, TerminalStatus
from .linalg import (
    UNIT_ROUNDOFF,
    ProblemOperator,
    SparseMatrix,
    enable_solve_checks,
    frobenius_inner,
    frobenius_norm,
    qr_thin,
    solve_right_block,
    solve_small,
    spmm,
)
from .matrices import (
    SUITESPARSE_MANIFEST,
    default_data_dir,
    gen_random_block,
    gen_random_sparse,
    gen_toeplitz,
    load_named_matrix,
    read_matrix_market,
    write_matrix_market,
)
from .smoothing import SmootherState, SrsState, cirs_step, smoothing_parameter, srs_step

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ACTIVE_BACKEND",
    "HAS_NUMBA",
    "get_backend_info",
    "UNIT_ROUNDOFF",
    "SparseMatrix",
    "ProblemOperator",
    "spmm",
    "frobenius_inner",
    "frobenius_norm",
    "qr_thin",
    "solve_small",
    "solve_right_block",
    "enable_solve_checks",
    "SmootherState",
    "SrsState",
    "cirs_step",
    "srs_step",
    "smoothing_parameter",
    "GlobalSolverConfig",
    "gl_cgs2",
    "s_gl_cgs2",
    "gl_bicgstab",
    "s_gl_bicgstab",
    "BlockSolverConfig",
    "bl_bicgstab_pq",
    "s_bl_bicgstab_pq",
    "bl_bicggr_rq",
    "s_bl_bicggr_rq",
    "switching_controller",
    "ConvergenceHistory",
    "IterationRecord",
    "TerminalStatus",
    "BOUND_IDS",
    "BoundReport",
    "evaluate_bound",
    "Problem",
    "SOLVERS",
    "GLOBAL_SOLVER_NAMES",
    "BLOCK_SOLVER_NAMES",
    "make_problem",
    "run_experiment",
    "emit_results",
    "read_results_csv",
    "gen_toeplitz",
    "gen_random_block",
    "gen_random_sparse",
    "read_matrix_market",
    "write_matrix_market",
    "load_named_matrix",
    "SUITESPARSE_MANIFEST",
    "default_data_dir",
    "SmoothKrylovError",
    "DimensionMismatchError",
    "BreakdownError",
    "XiSingularError",
    "MatrixMarketParseError",
    "ConfigurationError",
]
