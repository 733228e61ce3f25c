"""Block Krylov solvers for AX = B with a tall right-hand-side block.

Two families, each with a baseline and a smoothed variant:

* ``bl_bicgstab_pq`` / ``s_bl_bicgstab_pq`` -- stabilized family with
  the direction block re-orthonormalized every iteration.
* ``bl_bicggr_rq`` / ``s_bl_bicggr_rq`` -- generalized-residual family
  that keeps the residual block factored as Q xi with Q orthonormal and
  xi upper triangular.

Both families work on the standard operator only (no right coupling
term).  The smoothed variants support two modes through
``BlockSolverConfig.smoothing``: plain ``cirs`` smooths every
iteration; ``cirs_switched`` runs the smoother only while the smoothed
residual is still large relative to ``theta * ||B||`` and falls back to
the direct updates afterwards, which avoids inverting the increasingly
ill-conditioned triangular residual factor near convergence.  Every
variant consumes exactly two operator applications per iteration.
"""

from dataclasses import dataclass

import numpy as np

from ._solver_utils import (
    CountingOperator,
    RunRecorder,
    as_operator,
    breakdown_with_history,
    check_rhs,
    require_alive,
)
from .errors import BreakdownError, ConfigurationError, XiSingularError
from .history import TerminalStatus
from .linalg import (
    frobenius_inner,
    frobenius_norm,
    qr_thin,
    solve_right_block,
    solve_small,
)
from .smoothing import SmootherState, cirs_step

__all__ = [
    "BlockSolverConfig",
    "switching_controller",
    "bl_bicgstab_pq",
    "s_bl_bicgstab_pq",
    "bl_bicggr_rq",
    "s_bl_bicggr_rq",
]


@dataclass
class BlockSolverConfig:
    """Run parameters for the block solvers.

    ``theta`` is the relative residual level below which the
    ``cirs_switched`` mode hands over to direct updates.  ``seed`` is
    unused by these methods (their shadow block is the right-hand side)
    but kept for uniform serialization with the global config.
    """

    tolerance: float = 1e-14
    max_iterations: int | None = None
    seed: int = 0
    smoothing: str = "cirs"
    theta: float = 1e-2

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ConfigurationError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ConfigurationError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )
        if self.smoothing not in ("none", "cirs", "cirs_switched"):
            raise ConfigurationError(
                "smoothing must be 'none', 'cirs', or 'cirs_switched', "
                f"got {self.smoothing!r}"
            )
        if not self.theta >= 0.0:
            raise ConfigurationError(f"theta must be >= 0, got {self.theta}")

    def resolve_max_iterations(self, n):
        return 2 * n if self.max_iterations is None else self.max_iterations


def switching_controller(s_hat_norm, b_norm, theta):
    """Decide the smoothing phase for the next iteration.

    Returns ``"smooth"`` while ``s_hat_norm > theta * b_norm`` and
    ``"direct"`` once the smoothed residual has dropped to (or below)
    that level.  ``theta = 0`` therefore never hands over.
    """
    return "smooth" if s_hat_norm > theta * b_norm else "direct"


def bl_bicgstab_pq(op, b, config=None, *, gap_every=None):
    """Baseline stabilized block solver with orthonormalized directions."""
    return _run_bl_bicgstab_pq(op, b, config, mode="none", gap_every=gap_every,
                               solver_name="bl-bicgstab-pq")


def s_bl_bicgstab_pq(op, b, config=None, *, gap_every=None):
    """Smoothed stabilized block solver; honors config.smoothing."""
    mode = _smoothed_mode(config, "s_bl_bicgstab_pq")
    return _run_bl_bicgstab_pq(op, b, config, mode=mode, gap_every=gap_every,
                               solver_name="s-bl-bicgstab-pq")


def bl_bicggr_rq(op, b, config=None, *, gap_every=None):
    """Baseline generalized-residual block solver (factored residual)."""
    return _run_bl_bicggr_rq(op, b, config, mode="none", gap_every=gap_every,
                             solver_name="bl-bicggr-rq")


def s_bl_bicggr_rq(op, b, config=None, *, gap_every=None):
    """Smoothed generalized-residual block solver; honors config.smoothing."""
    mode = _smoothed_mode(config, "s_bl_bicggr_rq")
    return _run_bl_bicggr_rq(op, b, config, mode=mode, gap_every=gap_every,
                             solver_name="s-bl-bicggr-rq")


def _smoothed_mode(config, name):
    if config is None:
        return "cirs"
    if config.smoothing == "none":
        raise ConfigurationError(
            f"{name} requires smoothing enabled; "
            f"use {name.replace('s_', '', 1)} for the baseline"
        )
    return config.smoothing


def _check_block_problem(op, b, name):
    op = as_operator(op)
    if op.kind != "standard":
        raise ConfigurationError(
            f"{name} supports the standard operator only; "
            "use the global solvers for the generalized problem"
        )
    b = check_rhs(op, b)
    if b.shape[1] > op.n:
        raise ConfigurationError(
            f"block width {b.shape[1]} exceeds problem dimension {op.n}"
        )
    return op, b


def _solve_named(m, rhs, quantity, iteration):
    """Small solve with breakdown errors renamed to the recurrence scalar."""
    try:
        return solve_small(m, rhs)
    except BreakdownError as err:
        raise BreakdownError(
            f"small system for {quantity} singular: {err}",
            quantity=quantity,
            iteration=iteration,
            magnitude=err.magnitude,
        ) from err


def _xi_condition(xi):
    """1-norm condition estimate of the triangular residual factor."""
    try:
        return float(np.linalg.cond(xi, 1))
    except np.linalg.LinAlgError:
        return float("inf")


def _run_bl_bicgstab_pq(op, b, config, *, mode, gap_every, solver_name):
    op, b = _check_block_problem(op, b, solver_name)
    config = config or BlockSolverConfig()
    n = op.n
    maxit = config.resolve_max_iterations(n)
    tol = config.tolerance
    theta = config.theta

    counting = CountingOperator(op)
    rec = RunRecorder(solver_name, op, b, tol, maxit, mode != "none", gap_every)
    b_norm = rec.b_norm
    if b_norm == 0.0:
        x = np.zeros_like(b)
        return x, rec.finish(TerminalStatus.CONVERGED, x=x, r=b.copy())

    x = np.zeros_like(b)
    r = b.copy()
    r0_tilde = b.copy()
    z0_tilde = counting.apply_adjoint(r0_tilde)

    p = r.copy()
    r_prime = np.zeros_like(b)
    x_prime = np.zeros_like(b)
    omega = 0.0
    smoother = SmootherState.initial(x, r) if mode != "none" else None
    smoothing_active = mode != "none"

    def displayed():
        if smoother is not None:
            return smoother.y_hat, smoother.s_hat
        return x, r

    status = TerminalStatus.MAX_ITERATIONS
    for k in range(1, maxit + 1):
        if mode == "cirs_switched":
            decision = switching_controller(
                frobenius_norm(smoother.s_hat), b_norm, theta
            )
            want_smooth = decision == "smooth"
            if want_smooth and not smoothing_active:
                # Resuming: restart smoothing from the current iterates
                # and re-base the half-step bookkeeping so the first
                # increment is P alpha alone.
                smoother.resync(x, r)
                r_prime = np.zeros_like(b)
                omega = 0.0
            smoothing_active = want_smooth
        ran_smoother = smoothing_active
        try:
            p = qr_thin(p)[0]
            sigma = z0_tilde.T @ p
            alpha = _solve_named(sigma, r0_tilde.T @ r, "sigma", k)
            if smoothing_active:
                p_hat = omega * r_prime + p @ alpha
                x_prime, r_prime_new = cirs_step(smoother, p_hat, counting)
                try:
                    v = solve_right_block(r - r_prime_new, alpha)
                except BreakdownError as err:
                    raise BreakdownError(
                        f"small system for alpha singular: {err}",
                        quantity="alpha",
                        iteration=k,
                        magnitude=err.magnitude,
                    ) from err
            else:
                v = counting.apply(p)
                x_prime = x + p @ alpha
                r_prime_new = r - v @ alpha
            r_prime = r_prime_new
            t = counting.apply(r_prime)
            tt = frobenius_inner(t, t)
            if tt == 0.0:
                raise BreakdownError(
                    "scalar <t, t> died: stabilization direction vanished",
                    quantity="t_inner",
                    iteration=k,
                    magnitude=0.0,
                )
            rt = frobenius_inner(r_prime, t)
            require_alive(
                rt, frobenius_norm(r_prime) * frobenius_norm(t), "omega", k
            )
            omega = rt / tt
            x = x_prime + omega * r_prime
            r = r_prime - omega * t
            beta = _solve_named(sigma, r0_tilde.T @ t, "beta", k)
            p = r - (p - omega * v) @ beta
        except BreakdownError as err:
            if err.iteration is None:
                err.iteration = k
            dx, dr = displayed()
            breakdown_with_history(
                err, rec, x=dx, r=dr, prime_pair=(x_prime, r_prime)
            )

        if smoother is not None and not ran_smoother:
            # Direct phase: keep the smoothed pair mirroring the
            # recurrence so the controller and the stopping test see a
            # well-defined quantity.
            smoother.y_hat = x.copy()
            smoother.s_hat = r.copy()

        r_norm = frobenius_norm(r)
        half_norm = frobenius_norm(r_prime)
        rec.history.update_max("x", frobenius_norm(x))
        rec.history.update_max("r", r_norm)
        rec.history.update_max("x_prime", frobenius_norm(x_prime))
        rec.history.update_max("r_prime", half_norm)
        if smoother is not None:
            s_norm = frobenius_norm(smoother.s_hat)
            rec.history.update_max("y_hat", frobenius_norm(smoother.y_hat))
            rec.history.update_max("s_hat", s_norm)
            stop_norm = s_norm
        else:
            s_norm = None
            stop_norm = r_norm
        # The smoother minimizes along the line through the half-step
        # residual, so smoothed iterations pair the record with that
        # norm; direct phases report the full-step recurrence.
        recorded_r_norm = half_norm if ran_smoother else r_norm
        done = stop_norm / b_norm < tol
        dx, dr = displayed()
        rec.record(
            k,
            displayed_x=dx,
            displayed_r=dr,
            recursive_norm=recorded_r_norm,
            smoothed_norm=s_norm,
            eta=smoother.eta_hat if ran_smoother else None,
            op_count=counting.count,
            terminal=done or k == maxit,
        )
        if done:
            status = TerminalStatus.CONVERGED
            break

    dx, dr = displayed()
    history = rec.finish(
        status,
        x=dx,
        r=dr,
        primary_pair=(x, r) if smoother is not None else None,
        prime_pair=(x_prime, r_prime),
    )
    return dx, history


def _run_bl_bicggr_rq(op, b, config, *, mode, gap_every, solver_name):
    op, b = _check_block_problem(op, b, solver_name)
    config = config or BlockSolverConfig()
    n = op.n
    maxit = config.resolve_max_iterations(n)
    tol = config.tolerance
    theta = config.theta

    counting = CountingOperator(op)
    rec = RunRecorder(solver_name, op, b, tol, maxit, mode != "none", gap_every)
    b_norm = rec.b_norm
    if b_norm == 0.0:
        x = np.zeros_like(b)
        return x, rec.finish(TerminalStatus.CONVERGED, x=x, r=b.copy())

    x = np.zeros_like(b)
    r = b.copy()
    r0_tilde = b.copy()
    q, xi = qr_thin(r)
    w = counting.apply(q)
    rho_minus = r0_tilde.T @ q
    p = q.copy()
    v = w.copy()
    smoother = SmootherState.initial(x, r) if mode != "none" else None
    smoothing_active = mode != "none"

    def displayed():
        if smoother is not None:
            return smoother.y_hat, smoother.s_hat
        return x, r

    status = TerminalStatus.MAX_ITERATIONS
    for k in range(1, maxit + 1):
        if mode == "cirs_switched":
            decision = switching_controller(
                frobenius_norm(smoother.s_hat), b_norm, theta
            )
            want_smooth = decision == "smooth"
            if want_smooth and not smoothing_active:
                smoother.resync(x, r)
            smoothing_active = want_smooth
        ran_smoother = smoothing_active
        try:
            alpha = _solve_named(r0_tilde.T @ v, rho_minus, "sigma", k)
            ww = frobenius_inner(w, w)
            if ww == 0.0:
                raise BreakdownError(
                    "scalar <w, w> died: residual image vanished",
                    quantity="w_inner",
                    iteration=k,
                    magnitude=0.0,
                )
            wq = frobenius_inner(w, q)
            require_alive(wq, frobenius_norm(w) * frobenius_norm(q), "omega", k)
            omega = wq / ww
            u = (p - omega * v) @ alpha
            if smoothing_active:
                p_hat = (omega * q + u) @ xi
                x, r = cirs_step(smoother, p_hat, counting)
                try:
                    t = solve_right_block(r, xi)
                except BreakdownError as err:
                    raise XiSingularError(
                        "triangular residual factor is singular "
                        f"(pivot {err.magnitude:.3e}); rerun with "
                        "smoothing='cirs_switched' so the inversion is "
                        "skipped once the residual is small",
                        quantity="xi",
                        iteration=k,
                        magnitude=err.magnitude,
                    ) from err
                z = q - omega * w - t
                q, xi = qr_thin(r)
            else:
                x = x + (omega * q + u) @ xi
                z = counting.apply(u)
                q, tau = qr_thin(q - omega * w - z)
                xi = tau @ xi
                r = q @ xi
            w = counting.apply(q)
            rho_plus = r0_tilde.T @ q
            gamma = _solve_named(rho_minus, rho_plus / omega, "rho", k)
            rho_minus = rho_plus
            p = q + u @ gamma
            v = w + z @ gamma
        except BreakdownError as err:
            if err.iteration is None:
                err.iteration = k
            dx, dr = displayed()
            breakdown_with_history(err, rec, x=dx, r=dr)

        if smoother is not None and not ran_smoother:
            smoother.y_hat = x.copy()
            smoother.s_hat = r.copy()

        # The orthonormal factorization makes ||R|| = ||xi|| up to
        # roundoff; report the factor norm in the direct phases where
        # xi is the primary representation.
        r_norm = frobenius_norm(r) if ran_smoother else frobenius_norm(xi)
        xi_cond = _xi_condition(xi)
        rec.history.update_max("x", frobenius_norm(x))
        rec.history.update_max("r", r_norm)
        if smoother is not None:
            s_norm = frobenius_norm(smoother.s_hat)
            rec.history.update_max("y_hat", frobenius_norm(smoother.y_hat))
            rec.history.update_max("s_hat", s_norm)
            stop_norm = s_norm
        else:
            s_norm = None
            stop_norm = r_norm
        done = stop_norm / b_norm < tol
        dx, dr = displayed()
        rec.record(
            k,
            displayed_x=dx,
            displayed_r=dr,
            recursive_norm=r_norm,
            smoothed_norm=s_norm,
            eta=smoother.eta_hat if ran_smoother else None,
            xi_condition=xi_cond,
            op_count=counting.count,
            terminal=done or k == maxit,
        )
        if done:
            status = TerminalStatus.CONVERGED
            break

    dx, dr = displayed()
    history = rec.finish(
        status,
        x=dx,
        r=dr,
        primary_pair=(x, r) if smoother is not None else None,
    )
    return dx, history
