"""Shared plumbing for the iterative solvers.

Nothing here is public API; the solver modules re-export what callers
need.
"""

import numpy as np

from .errors import BreakdownError, DimensionMismatchError
from .history import ConvergenceHistory, IterationRecord, TerminalStatus
from .linalg import (
    UNIT_ROUNDOFF,
    ProblemOperator,
    SparseMatrix,
    frobenius_norm,
)


class CountingOperator:
    """Per-run wrapper that counts operator applications.

    Solvers own one of these per run so the shared, read-only
    ProblemOperator never carries mutable state.  Both the forward and
    the transposed map count toward the same total.
    """

    __slots__ = ("op", "count")

    def __init__(self, op):
        self.op = op
        self.count = 0

    def apply(self, v):
        self.count += 1
        return self.op.apply(v)

    def apply_adjoint(self, v):
        self.count += 1
        return self.op.apply_adjoint(v)


def as_operator(op):
    if isinstance(op, ProblemOperator):
        return op
    if isinstance(op, SparseMatrix):
        return ProblemOperator.standard(op)
    raise TypeError(f"expected ProblemOperator or SparseMatrix, got {type(op)!r}")


def check_rhs(op, b):
    b = np.ascontiguousarray(b, dtype=np.float64)
    if b.ndim != 2:
        raise DimensionMismatchError(
            "right-hand side must be a 2-d block", expected="2-d", got=f"{b.ndim}-d"
        )
    if b.shape[0] != op.n:
        raise DimensionMismatchError(
            "right-hand side rows do not match operator",
            expected=op.n,
            got=b.shape[0],
        )
    if op.block_width is not None and b.shape[1] != op.block_width:
        raise DimensionMismatchError(
            "right-hand side columns do not match coupling matrix",
            expected=op.block_width,
            got=b.shape[1],
        )
    if b.shape[1] < 1:
        raise DimensionMismatchError(
            "right-hand side needs at least one column", expected=">= 1", got=0
        )
    return b


def require_alive(value, scale, quantity, iteration):
    """Declare a recurrence scalar dead when it is negligible.

    A scalar is dead when |value| < u * scale, where scale is the
    product of the norms of the operands that produced it.  Exact zero
    is always dead.
    """
    if abs(value) < UNIT_ROUNDOFF * scale or value == 0.0:
        raise BreakdownError(
            f"scalar {quantity} died: |{value:.3e}| < u * {scale:.3e}",
            quantity=quantity,
            iteration=iteration,
            magnitude=abs(value),
        )


class RunRecorder:
    """Collects the per-iteration history for one solver run.

    * ``raw_op`` is the uncounted operator, used only to sample true
      residuals and gaps; sampling never touches solver state or the
      application counter.
    * Residual columns are stored relative to ||B||; running maxima are
      stored absolute.
    * ``gap_every`` selects the sampling cadence (None disables mid-run
      sampling); the terminal iteration is always sampled.
    """

    def __init__(
        self,
        solver_name,
        raw_op,
        b,
        tolerance,
        max_iterations,
        smoothed,
        gap_every,
    ):
        self.raw_op = raw_op
        self.b = b
        self.b_norm = frobenius_norm(b)
        self.gap_every = gap_every
        self.history = ConvergenceHistory(
            solver=solver_name,
            b_norm=self.b_norm,
            tolerance=tolerance,
            max_iterations=max_iterations,
            smoothed=smoothed,
        )
        self.history.update_max("r", self.b_norm)
        if smoothed:
            self.history.update_max("s_hat", self.b_norm)

    def should_sample(self, iteration, terminal):
        if terminal:
            return True
        return self.gap_every is not None and iteration % self.gap_every == 0

    def sample_gap(self, x, r):
        """Absolute true-residual and gap norms for an iterate pair."""
        true_block = self.b - self.raw_op.apply(x)
        true_norm = frobenius_norm(true_block)
        gap_norm = frobenius_norm(true_block - r)
        return true_norm, gap_norm

    def record(
        self,
        iteration,
        *,
        displayed_x,
        displayed_r,
        recursive_norm,
        smoothed_norm=None,
        eta=None,
        xi_condition=None,
        op_count,
        terminal=False,
    ):
        """Append one iteration row.

        ``displayed_x`` / ``displayed_r`` are the iterates the run will
        ultimately return (the smoothed pair for smoothed runs); the
        true-residual and gap columns describe them.
        """
        b_norm = self.b_norm
        true_rel = gap_rel = None
        if self.should_sample(iteration, terminal):
            true_norm, gap_norm = self.sample_gap(displayed_x, displayed_r)
            true_rel = true_norm / b_norm
            gap_rel = gap_norm / b_norm
        self.history.records.append(
            IterationRecord(
                iteration=iteration,
                recursive_residual_norm=recursive_norm / b_norm,
                smoothed_residual_norm=(
                    None if smoothed_norm is None else smoothed_norm / b_norm
                ),
                true_residual_norm=true_rel,
                gap_norm=gap_rel,
                eta=eta,
                xi_condition=xi_condition,
                operator_applications=op_count,
            )
        )

    def finish(
        self,
        status,
        *,
        x,
        r,
        detail="",
        primary_pair=None,
        prime_pair=None,
    ):
        """Seal the history with terminal status and final norms.

        ``primary_pair`` supplies (x_k, r_k) of the driving recurrence
        when it differs from the returned pair (smoothed runs);
        ``prime_pair`` supplies the intermediate half-step pair for the
        stabilized family.  Their gaps feed the corresponding bounds.
        """
        h = self.history
        h.status = status
        h.status_detail = detail
        h.final_x_norm = frobenius_norm(x)
        h.final_r_norm = frobenius_norm(r)
        true_norm, gap_norm = self.sample_gap(x, r)
        h.final_true_residual_norm = true_norm / self.b_norm
        h.final_gap_norm = gap_norm / self.b_norm
        if primary_pair is not None:
            px, pr = primary_pair
            h.final_x_norm = frobenius_norm(px)
            h.final_r_norm = frobenius_norm(pr)
            _, pgap = self.sample_gap(px, pr)
            h.final_primary_gap_norm = pgap / self.b_norm
        else:
            h.final_primary_gap_norm = h.final_gap_norm
        if prime_pair is not None:
            _, qgap = self.sample_gap(*prime_pair)
            h.final_prime_gap_norm = qgap / self.b_norm
        return h


def breakdown_with_history(err, recorder, *, x, r, **finish_kwargs):
    """Attach the partial history to a breakdown error and re-raise."""
    err.history = recorder.finish(
        TerminalStatus.BREAKDOWN,
        x=x,
        r=r,
        detail=str(err),
        **finish_kwargs,
    )
    raise err
