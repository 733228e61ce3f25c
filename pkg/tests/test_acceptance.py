"""Acceptance gate: nine criteria, one printed verdict line each.

Each test evaluates one criterion end to end, prints
``criterion N (<label>): PASS`` or ``... FAIL`` to the real terminal,
and then asserts.  Reproduction criteria run on the packaged
deterministic stand-ins when the published matrix files are absent.
"""

import time

import numpy as np
import pytest

from smoothkrylov.block_solvers import BlockSolverConfig
from smoothkrylov.harness import make_problem, run_experiment
from smoothkrylov.linalg import (
    ProblemOperator,
    SparseMatrix,
    frobenius_inner,
    frobenius_norm,
    qr_thin,
    solve_right_block,
    solve_small,
    spmm,
)
from smoothkrylov.matrices import (
    gen_random_block,
    gen_random_sparse,
    gen_toeplitz,
    load_named_matrix,
)
from smoothkrylov.smoothing import (
    SmootherState,
    SrsState,
    cirs_step,
    srs_step,
)

SMOOTHED_SOLVERS = (
    "s-gl-cgs2",
    "s-gl-bicgstab",
    "s-bl-bicgstab-pq",
    "s-bl-bicggr-rq",
)


def _report(capsys, number, label, ok, detail=""):
    line = f"criterion {number} ({label}): {'PASS' if ok else 'FAIL'}"
    if detail and not ok:
        line += f" [{detail}]"
    with capsys.disabled():
        print(line, flush=True)
    assert ok, line


@pytest.fixture(scope="module")
def toeplitz_runs():
    """Criterion 3 family: squared pair on the nonnormal Toeplitz problem."""
    matrix = gen_toeplitz(2000)
    runs = []
    start = time.perf_counter()
    for seed in (0, 1, 2):
        problem = make_problem(matrix, nrhs=16, seed=seed)
        base = run_experiment(problem, "gl-cgs2", with_bounds=True)
        smoothed = run_experiment(problem, "s-gl-cgs2", with_bounds=True)
        runs.append((seed, problem, base, smoothed))
    wall = time.perf_counter() - start
    return runs, wall


@pytest.fixture(scope="module")
def block_runs():
    """Criterion 4 family: all four block solvers on the spiky problem."""
    problem = make_problem(load_named_matrix("cdde2"), nrhs=32, seed=4)
    runs = {}
    start = time.perf_counter()
    for name in (
        "bl-bicgstab-pq",
        "s-bl-bicgstab-pq",
        "bl-bicggr-rq",
        "s-bl-bicggr-rq",
    ):
        runs[name] = run_experiment(problem, name, with_bounds=True)
    wall = time.perf_counter() - start
    return problem, runs, wall


@pytest.fixture(scope="module")
def sylvester_runs():
    """Criterion 5 family: squared pair on the two-sided operator."""
    problem = make_problem(
        load_named_matrix("fs_680_1"),
        sylvester_c=load_named_matrix("can_24"),
        seed=5,
    )
    start = time.perf_counter()
    base = run_experiment(problem, "gl-cgs2", with_bounds=True)
    smoothed = run_experiment(problem, "s-gl-cgs2", with_bounds=True)
    wall = time.perf_counter() - start
    return problem, base, smoothed, wall


def test_criterion_1_smoothing_monotonicity(capsys):
    start = time.perf_counter()
    cases = []
    seed = 0
    while len(cases) < 20:
        for n in (50, 200):
            for s in (2, 4, 8):
                if len(cases) < 20:
                    cases.append((n, s, seed))
                    seed += 1
    failures = []
    for idx, (n, s, seed) in enumerate(cases):
        solver = SMOOTHED_SOLVERS[idx % len(SMOOTHED_SOLVERS)]
        problem = make_problem(
            gen_random_sparse(n, seed=seed, diag_dominance=2.0),
            nrhs=s,
            seed=seed,
        )
        x, history, _ = run_experiment(problem, solver)
        smoothed = history.column("smoothed_residual_norm")
        recursive = history.column("recursive_residual_norm")
        for prev, cur in zip(smoothed, smoothed[1:]):
            if not cur <= prev * (1.0 + 1e-12):
                failures.append(f"{solver} n={n} s={s} seed={seed}: rose")
        for s_norm, r_norm in zip(smoothed, recursive):
            if not s_norm <= r_norm * (1.0 + 1e-12):
                failures.append(f"{solver} n={n} s={s} seed={seed}: above r")
    wall = time.perf_counter() - start
    ok = not failures and wall < 30.0
    _report(
        capsys, 1, "smoothing monotonicity", ok,
        f"violations={failures[:3]} wall={wall:.1f}s",
    )


def test_criterion_2_smoother_agreement(capsys):
    start = time.perf_counter()
    op = ProblemOperator.standard(
        gen_random_sparse(100, seed=11, diag_dominance=3.0)
    )
    b = gen_random_block(100, 4, 11)
    rng = np.random.default_rng(1100)
    cross = SmootherState.initial(np.zeros_like(b), b)
    one_way = SrsState.initial(np.zeros_like(b), b)
    r = b.copy()
    worst = 0.0
    for _ in range(50):
        g = op.apply_adjoint(r)
        ag = op.apply(g)
        tau = frobenius_inner(g, g) / frobenius_inner(ag, ag)
        p_hat = (rng.uniform(1.2, 1.6) * tau) * g
        x, r = cirs_step(cross, p_hat, op)
        srs_step(one_way, x, r)
        scale = max(frobenius_norm(one_way.s), 1e-300)
        worst = max(worst, frobenius_norm(one_way.s - cross.s_hat) / scale)
        scale = max(frobenius_norm(one_way.y), 1e-300)
        worst = max(worst, frobenius_norm(one_way.y - cross.y_hat) / scale)
    wall = time.perf_counter() - start
    ok = worst <= 1e-10 and wall < 5.0
    _report(
        capsys, 2, "cross-interactive equals one-way smoothing", ok,
        f"worst={worst:.2e} wall={wall:.1f}s",
    )


def test_criterion_3_gap_improvement(capsys, toeplitz_runs):
    runs, wall = toeplitz_runs
    ok = wall < 60.0
    details = []
    for seed, problem, (xb, hb, _), (xs, hs, _) in runs:
        base_true = hb.final_true_residual_norm
        sm_true = hs.final_true_residual_norm
        ratio = base_true / sm_true
        details.append(
            f"seed {seed}: base={base_true:.2e} smoothed={sm_true:.2e}"
        )
        ok = ok and hb.converged and hs.converged
        ok = ok and base_true >= 1e-13
        ok = ok and sm_true <= 1e-13
        ok = ok and ratio >= 10.0
    _report(
        capsys, 3, "true-residual improvement on Toeplitz", ok,
        "; ".join(details) + f"; wall={wall:.1f}s",
    )


def test_criterion_4_block_reproduction(capsys, block_runs):
    problem, runs, wall = block_runs
    ok = wall < 30.0
    details = [f"wall={wall:.1f}s"]
    for name in ("s-bl-bicgstab-pq", "s-bl-bicggr-rq"):
        x, history, _ = runs[name]
        true = history.final_true_residual_norm
        details.append(f"{name}: {true:.2e}@{history.iterations}")
        ok = ok and history.converged
        ok = ok and true <= 5e-13
        ok = ok and history.iterations <= 120
    for name in ("bl-bicgstab-pq", "bl-bicggr-rq"):
        x, history, _ = runs[name]
        true = history.final_true_residual_norm
        details.append(f"{name}: {true:.2e}")
        ok = ok and history.converged
        ok = ok and 1e-13 <= true <= 1e-8
    _report(capsys, 4, "block-solver reproduction", ok, "; ".join(details))


def test_criterion_5_two_sided_reproduction(capsys, sylvester_runs):
    problem, (xb, hb, _), (xs, hs, _), wall = sylvester_runs
    cap = 2 * problem.n
    ok = (
        wall < 60.0
        and hb.converged
        and hs.converged
        and hs.final_true_residual_norm <= 5e-13
        and hb.final_true_residual_norm >= 1e-12
        and hb.iterations <= cap
        and hs.iterations <= cap
    )
    _report(
        capsys, 5, "two-sided operator reproduction", ok,
        f"base={hb.final_true_residual_norm:.2e}@{hb.iterations} "
        f"smoothed={hs.final_true_residual_norm:.2e}@{hs.iterations} "
        f"wall={wall:.1f}s",
    )


def test_criterion_6_switching_strategy(capsys):
    start = time.perf_counter()
    problem = make_problem(load_named_matrix("bfwa782"), nrhs=16, seed=0)
    config = BlockSolverConfig(smoothing="cirs_switched", theta=1e-2)
    x, history, _ = run_experiment(problem, "s-bl-bicggr-rq", config=config)
    wall = time.perf_counter() - start
    true = history.final_true_residual_norm
    ok = wall < 30.0 and history.converged and true <= 5e-12
    _report(
        capsys, 6, "switched smoothing converges", ok,
        f"true={true:.2e}@{history.iterations} wall={wall:.1f}s",
    )


def test_criterion_7_gap_bounds(capsys, toeplitz_runs, block_runs,
                                sylvester_runs):
    checked = 0
    worst = 0.0
    ok = True
    asserted_ids = {"T1", "T2", "C1", "T6"}

    def check(history, reports):
        nonlocal checked, worst, ok
        if not history.converged:
            return
        for report in reports:
            if report.theorem not in asserted_ids:
                continue
            checked += 1
            ratio = report.measured_gap / report.bound_value
            worst = max(worst, ratio)
            ok = ok and report.measured_gap <= 10.0 * report.bound_value

    for seed, problem, (xb, hb, rb), (xs, hs, rs) in toeplitz_runs[0]:
        check(hb, rb)
        check(hs, rs)
    for name, (x, history, reports) in block_runs[1].items():
        check(history, reports)
    check(sylvester_runs[1][1], sylvester_runs[1][2])
    check(sylvester_runs[2][1], sylvester_runs[2][2])
    ok = ok and checked >= 10
    _report(
        capsys, 7, "residual-gap bounds hold", ok,
        f"checked={checked} worst gap/bound={worst:.2e}",
    )


def test_criterion_8_cost_parity(capsys, toeplitz_runs, block_runs,
                                 sylvester_runs):
    pairs = []
    for seed, problem, (xb, hb, _), (xs, hs, _) in toeplitz_runs[0]:
        pairs.append((f"toeplitz seed {seed}", hb, hs))
    pairs.append((
        "block orthodir",
        block_runs[1]["bl-bicgstab-pq"][1],
        block_runs[1]["s-bl-bicgstab-pq"][1],
    ))
    pairs.append((
        "block residual-qr",
        block_runs[1]["bl-bicggr-rq"][1],
        block_runs[1]["s-bl-bicggr-rq"][1],
    ))
    pairs.append(("two-sided", sylvester_runs[1][1], sylvester_runs[2][1]))

    ok = True
    details = []
    for label, h_base, h_sm in pairs:
        base = h_base.per_iteration_operator_applications()
        sm = h_sm.per_iteration_operator_applications()
        common = min(len(base), len(sm))
        same = base[: common - 1] == sm[: common - 1]
        ok = ok and same
        if not same:
            details.append(f"{label}: mismatch")
    _report(
        capsys, 8, "operator-application parity", ok, "; ".join(details)
    )


def test_criterion_9_kernel_oracles(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(99)
    failures = []

    for i in range(100):
        n = int(rng.integers(5, 40))
        s = int(rng.integers(1, 6))
        a = gen_random_sparse(n, seed=int(rng.integers(0, 10_000)))
        v = rng.standard_normal((n, s))
        got = spmm(a, v)
        want = a.to_dense() @ v
        scale = max(np.linalg.norm(want), 1.0)
        if np.linalg.norm(got - want) > 1e-12 * scale:
            failures.append(f"spmm[{i}]")

    for i in range(100):
        n = int(rng.integers(3, 20))
        s = int(rng.integers(2, 7))
        a = gen_random_sparse(n, seed=int(rng.integers(0, 10_000)))
        c = gen_random_sparse(s, seed=int(rng.integers(0, 10_000)))
        op = ProblemOperator.sylvester(a, c)
        x = rng.standard_normal((n, s))
        got = op.apply(x)
        kron = np.kron(np.eye(s), a.to_dense()) - np.kron(
            c.to_dense().T, np.eye(n)
        )
        want = (kron @ x.ravel(order="F")).reshape((n, s), order="F")
        scale = max(np.linalg.norm(want), 1.0)
        if np.linalg.norm(got - want) > 1e-12 * scale:
            failures.append(f"apply[{i}]")

    for i in range(100):
        n = int(rng.integers(3, 40))
        s = int(rng.integers(1, min(n, 6) + 1))
        m = rng.standard_normal((n, s))
        q, r = qr_thin(m)
        if np.linalg.norm(q.T @ q - np.eye(s)) > 1e-13 * s:
            failures.append(f"qr_thin[{i}]: not orthonormal")
        if np.linalg.norm(q @ r - m) > 1e-13 * max(np.linalg.norm(m), 1.0):
            failures.append(f"qr_thin[{i}]: product")
        if np.any(np.diag(r) < 0.0) or np.linalg.norm(np.tril(r, -1)) != 0.0:
            failures.append(f"qr_thin[{i}]: shape")

    for i in range(100):
        s = int(rng.integers(1, 9))
        m = rng.standard_normal((s, s)) + s * np.eye(s)
        rhs = rng.standard_normal((s, int(rng.integers(1, 5))))
        x = solve_small(m, rhs)
        scale = np.linalg.norm(m) * np.linalg.norm(x) + np.linalg.norm(rhs)
        if np.linalg.norm(m @ x - rhs) > 1e-12 * scale:
            failures.append(f"solve_small[{i}]")

    for i in range(100):
        s = int(rng.integers(1, 9))
        m = rng.standard_normal((s, s)) + s * np.eye(s)
        if i % 2 == 0:
            m = np.triu(m)
        rhs = rng.standard_normal((int(rng.integers(1, 30)), s))
        x = solve_right_block(rhs, m)
        scale = np.linalg.norm(m) * np.linalg.norm(x) + np.linalg.norm(rhs)
        if np.linalg.norm(x @ m - rhs) > 1e-12 * scale:
            failures.append(f"solve_right_block[{i}]")

    wall = time.perf_counter() - start
    ok = not failures and wall < 10.0
    _report(
        capsys, 9, "kernel oracles", ok,
        f"failures={failures[:3]} wall={wall:.1f}s",
    )
