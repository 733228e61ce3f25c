"""Global Krylov solvers for AX = B and AX - XC = B.

Four entry points: ``gl_cgs2`` / ``s_gl_cgs2`` (squared-conjugate-
gradient family) and ``gl_bicgstab`` / ``s_gl_bicgstab`` (stabilized
family).  The ``s_`` variants run the cross-interactive smoother and
return the smoothed iterate; the plain variants apply the textbook
direct updates and return the recurrence iterate.  Both members of a
pair consume exactly two operator applications per iteration, so their
costs match application for application.

All four treat the block problem through the trace inner product, so
they accept the generalized operator (AX - XC = B) as well as plain
AX = B.
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
from .errors import BreakdownError, ConfigurationError
from .history import TerminalStatus
from .linalg import UNIT_ROUNDOFF, frobenius_inner, frobenius_norm
from .smoothing import SmootherState, cirs_step

__all__ = [
    "GlobalSolverConfig",
    "gl_cgs2",
    "s_gl_cgs2",
    "gl_bicgstab",
    "s_gl_bicgstab",
]


@dataclass
class GlobalSolverConfig:
    """Run parameters shared by the global solvers.

    ``max_iterations=None`` means twice the problem dimension.  The
    seed feeds the auxiliary shadow residual of the squared family; the
    stabilized family has no random state but keeps the field for
    uniform serialization.  ``smoothing`` is consulted only by the
    ``s_`` entry points.
    """

    tolerance: float = 1e-14
    max_iterations: int | None = None
    seed: int = 0
    smoothing: str = "cirs"

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ConfigurationError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ConfigurationError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )
        if self.smoothing not in ("none", "cirs"):
            raise ConfigurationError(
                f"smoothing must be 'none' or 'cirs', got {self.smoothing!r}"
            )

    def resolve_max_iterations(self, n):
        return 2 * n if self.max_iterations is None else self.max_iterations


def gl_cgs2(op, b, config=None, *, gap_every=None):
    """Baseline squared-family solver (direct updates, no smoothing)."""
    return _run_gl_cgs2(op, b, config, smoothed=False, gap_every=gap_every,
                        solver_name="gl-cgs2")


def s_gl_cgs2(op, b, config=None, *, gap_every=None):
    """Squared-family solver with cross-interactive smoothing."""
    if config is not None and config.smoothing == "none":
        raise ConfigurationError(
            "s_gl_cgs2 requires smoothing enabled; use gl_cgs2 for the baseline"
        )
    return _run_gl_cgs2(op, b, config, smoothed=True, gap_every=gap_every,
                        solver_name="s-gl-cgs2")


def gl_bicgstab(op, b, config=None, *, gap_every=None):
    """Baseline stabilized solver (direct updates, no smoothing)."""
    return _run_gl_bicgstab(op, b, config, smoothed=False, gap_every=gap_every,
                            solver_name="gl-bicgstab")


def s_gl_bicgstab(op, b, config=None, *, gap_every=None):
    """Stabilized solver with cross-interactive smoothing."""
    if config is not None and config.smoothing == "none":
        raise ConfigurationError(
            "s_gl_bicgstab requires smoothing enabled; "
            "use gl_bicgstab for the baseline"
        )
    return _run_gl_bicgstab(op, b, config, smoothed=True, gap_every=gap_every,
                            solver_name="s-gl-bicgstab")


def _run_gl_cgs2(op, b, config, *, smoothed, gap_every, solver_name):
    op = as_operator(op)
    b = check_rhs(op, b)
    config = config or GlobalSolverConfig()
    n = op.n
    maxit = config.resolve_max_iterations(n)
    tol = config.tolerance

    counting = CountingOperator(op)
    rec = RunRecorder(solver_name, op, b, tol, maxit, smoothed, gap_every)
    b_norm = rec.b_norm
    if b_norm == 0.0:
        x = np.zeros_like(b)
        return x, rec.finish(TerminalStatus.CONVERGED, x=x, r=b.copy())

    x = np.zeros_like(b)
    r = b.copy()
    # Shadow residuals: the fixed one is R0 itself, the auxiliary one is
    # random so the two quasi-orthogonality conditions stay independent.
    rng = np.random.default_rng(config.seed)
    r0_tilde = b.copy()
    r0_breve = rng.uniform(-1.0, 1.0, size=b.shape)
    z0_tilde = counting.apply_adjoint(r0_tilde)
    z0_breve = counting.apply_adjoint(r0_breve)
    r0_tilde_norm = frobenius_norm(r0_tilde)
    r0_breve_norm = frobenius_norm(r0_breve)

    p = r.copy()
    u = r.copy()
    t = r.copy()
    smoother = SmootherState.initial(x, r) if smoothed else None

    def displayed():
        if smoothed:
            return smoother.y_hat, smoother.s_hat
        return x, r

    status = TerminalStatus.MAX_ITERATIONS
    for k in range(1, maxit + 1):
        try:
            v = counting.apply(p)
            v_norm = frobenius_norm(v)
            sigma = frobenius_inner(r0_tilde, v)
            require_alive(sigma, r0_tilde_norm * v_norm, "sigma", k)
            sigma_breve = frobenius_inner(r0_breve, v)
            require_alive(sigma_breve, r0_breve_norm * v_norm, "sigma_breve", k)
            rho = frobenius_inner(r0_tilde, r)
            require_alive(rho, r0_tilde_norm * frobenius_norm(r), "alpha", k)
            alpha = rho / sigma
            alpha_breve = frobenius_inner(r0_breve, r) / sigma_breve
            w = t - alpha * v
            q = u - alpha_breve * v
            p_hat = alpha * u + alpha_breve * w
            if smoothed:
                x, r = cirs_step(smoother, p_hat, counting)
            else:
                x = x + p_hat
                r = r - counting.apply(p_hat)
            beta = frobenius_inner(z0_tilde, w) / sigma
            beta_breve = frobenius_inner(z0_breve, q) / sigma_breve
            u = r - beta * q
            t = r - beta_breve * w
            p = t - beta * (q - beta_breve * p)
        except BreakdownError as err:
            if err.iteration is None:
                err.iteration = k
            dx, dr = displayed()
            breakdown_with_history(err, rec, x=dx, r=dr)

        r_norm = frobenius_norm(r)
        rec.history.update_max("x", frobenius_norm(x))
        rec.history.update_max("r", r_norm)
        if smoothed:
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
            eta=smoother.eta_hat if smoothed else None,
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
        primary_pair=(x, r) if smoothed else None,
    )
    return dx, history


def _require_divisible(value, numerator, quantity, iteration):
    """Declare a division scalar dead only when the quotient blows up.

    The stabilized recurrence survives near-breakdowns in which its
    bi-orthogonality scalars shrink together, so each denominator is
    measured against the numerator it will divide rather than against
    the norms of its operands; the step is dead when the quotient would
    exceed 1/u or the scalar is not finite.
    """
    if not np.isfinite(value) or value == 0.0 or (
        abs(value) < UNIT_ROUNDOFF * abs(numerator)
    ):
        raise BreakdownError(
            f"scalar {quantity} died: |{value:.3e}| < u * |{numerator:.3e}|",
            quantity=quantity,
            iteration=iteration,
            magnitude=abs(value),
        )


def _run_gl_bicgstab(op, b, config, *, smoothed, gap_every, solver_name):
    op = as_operator(op)
    b = check_rhs(op, b)
    config = config or GlobalSolverConfig()
    n = op.n
    maxit = config.resolve_max_iterations(n)
    tol = config.tolerance

    counting = CountingOperator(op)
    rec = RunRecorder(solver_name, op, b, tol, maxit, smoothed, gap_every)
    b_norm = rec.b_norm
    if b_norm == 0.0:
        x = np.zeros_like(b)
        return x, rec.finish(TerminalStatus.CONVERGED, x=x, r=b.copy())

    x = np.zeros_like(b)
    r = b.copy()
    r0_tilde = b.copy()
    r0_tilde_norm = frobenius_norm(r0_tilde)
    if smoothed:
        # Only the smoothed recurrence projects against the transposed
        # image of the shadow residual; the baseline has A P explicitly.
        z0_tilde = counting.apply_adjoint(r0_tilde)
        z0_tilde_norm = frobenius_norm(z0_tilde)

    p = r.copy()
    v = np.zeros_like(b)
    r_prime = np.zeros_like(b)
    x_prime = np.zeros_like(b)
    omega = 0.0
    alpha = 0.0
    rho_prev = 0.0
    smoother = SmootherState.initial(x, r) if smoothed else None

    def displayed():
        if smoothed:
            return smoother.y_hat, smoother.s_hat
        return x, r

    status = TerminalStatus.MAX_ITERATIONS
    for k in range(1, maxit + 1):
        try:
            if smoothed:
                # The quasi-orthogonality scalar is evaluated through
                # the transposed image so no extra application is spent
                # on A P.
                sigma = frobenius_inner(z0_tilde, p)
                require_alive(
                    sigma, z0_tilde_norm * frobenius_norm(p), "sigma", k
                )
                rho = frobenius_inner(r0_tilde, r)
                require_alive(rho, r0_tilde_norm * frobenius_norm(r), "rho", k)
                alpha = rho / sigma
                p_hat = omega * r_prime + alpha * p
                # The smoother tracks the half-step sequence; its
                # increment from the previous half-step is p_hat.
                x_prime, r_prime = cirs_step(smoother, p_hat, counting)
                v = (r - r_prime) / alpha
                half_stop = frobenius_norm(smoother.s_hat)
            else:
                rho = frobenius_inner(r0_tilde, r)
                if not np.isfinite(rho) or rho == 0.0:
                    raise BreakdownError(
                        f"scalar alpha died: shadow projection {rho:.3e} "
                        "vanished",
                        quantity="alpha",
                        iteration=k,
                        magnitude=abs(rho),
                    )
                if k > 1:
                    _require_divisible(omega, alpha, "omega", k)
                    beta = (rho / rho_prev) * (alpha / omega)
                    p = r + beta * (p - omega * v)
                v = counting.apply(p)
                sigma = frobenius_inner(r0_tilde, v)
                _require_divisible(sigma, rho, "sigma", k)
                alpha = rho / sigma
                x_prime = x + alpha * p
                r_prime = r - alpha * v
                rho_prev = rho
                half_stop = frobenius_norm(r_prime)
            if half_stop / b_norm < tol:
                # The first half-step already meets the tolerance; the
                # stabilization direction is then (numerically) zero and
                # its scalars are undefined, so accept the half-step.
                x = x_prime
                r = r_prime
            else:
                t = counting.apply(r_prime)
                tt = frobenius_inner(t, t)
                if tt == 0.0:
                    raise BreakdownError(
                        "scalar <t, t> died: stabilization direction vanished",
                        quantity="t_inner",
                        iteration=k,
                        magnitude=0.0,
                    )
                omega = frobenius_inner(r_prime, t) / tt
                x = x_prime + omega * r_prime
                r = r_prime - omega * t
                if smoothed:
                    beta = frobenius_inner(r0_tilde, t) / sigma
                    p = r - beta * (p - omega * v)
        except BreakdownError as err:
            if err.iteration is None:
                err.iteration = k
            dx, dr = displayed()
            breakdown_with_history(
                err, rec, x=dx, r=dr, prime_pair=(x_prime, r_prime)
            )

        r_norm = frobenius_norm(r)
        half_norm = frobenius_norm(r_prime)
        rec.history.update_max("x", frobenius_norm(x))
        rec.history.update_max("r", r_norm)
        rec.history.update_max("x_prime", frobenius_norm(x_prime))
        rec.history.update_max("r_prime", half_norm)
        if smoothed:
            s_norm = frobenius_norm(smoother.s_hat)
            rec.history.update_max("y_hat", frobenius_norm(smoother.y_hat))
            rec.history.update_max("s_hat", s_norm)
            stop_norm = s_norm
            # The smoother minimizes along the line through the half-step
            # residual, so that is the recurrence norm its record pairs
            # with; the stabilization half is not smoothed until the next
            # combined direction consumes it.
            recorded_r_norm = half_norm
        else:
            s_norm = None
            stop_norm = r_norm
            recorded_r_norm = r_norm
        done = stop_norm / b_norm < tol
        dx, dr = displayed()
        rec.record(
            k,
            displayed_x=dx,
            displayed_r=dr,
            recursive_norm=recorded_r_norm,
            smoothed_norm=s_norm,
            eta=smoother.eta_hat if smoothed else None,
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
        primary_pair=(x, r) if smoothed else None,
        prime_pair=(x_prime, r_prime),
    )
    return dx, history
