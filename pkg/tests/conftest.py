"""Shared fixtures: solve verification on, JIT warmed before timing."""

import numpy as np
import pytest

from smoothkrylov import (
    get_backend_info,
    gen_random_sparse,
    make_problem,
    run_experiment,
)
from smoothkrylov.linalg import enable_solve_checks


@pytest.fixture(scope="session", autouse=True)
def _solve_checks():
    # every s x s solve in the suite is residual-verified
    enable_solve_checks(True)
    yield
    enable_solve_checks(False)


@pytest.fixture(scope="session", autouse=True)
def warm_backend(_solve_checks):
    """Run one tiny solve per solver family so any JIT compilation cost
    lands here, not inside a wall-clock budget."""
    a = gen_random_sparse(30, seed=1, diag_dominance=2.0)
    prob = make_problem(a, nrhs=2, seed=0)
    for name in ("s-gl-cgs2", "s-gl-bicgstab", "s-bl-bicgstab-pq", "s-bl-bicggr-rq"):
        run_experiment(prob, name)
    return get_backend_info()


def assert_blocks_close(x, y, rtol, label=""):
    scale = max(float(np.linalg.norm(x)), float(np.linalg.norm(y)), 1.0)
    err = float(np.linalg.norm(np.asarray(x) - np.asarray(y)))
    assert err <= rtol * scale, f"{label} off by {err:.3e} (scale {scale:.3e})"
