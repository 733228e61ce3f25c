"""Rounding-error bounds on the residual gap.

The gap of an iterate pair is ``(B - op(X_k)) - R_k``: the difference
between the true and the recursively updated residual.  Floating-point
analysis of the update recurrences bounds its norm by expressions in
the iteration count k, the unit roundoff u, the operator norms, the
maximum row fill m of A, the block width s, and running maxima of the
iterate norms.  ``evaluate_bound`` evaluates one of six such bounds
against the maxima a solver run recorded.

Bound ids and the sequences they apply to
-----------------------------------------
T1   direct solution/residual recurrences (global and the
     generalized-residual block family):
         k (5 + 2m) u ||A|| max_j ||X_j|| + 5 (k+1) u max_j ||R_j||
T2   block half-step recurrences driven by an orthonormalized
     direction block (maxima over the half-step sequence):
         k (3 + 4 s sqrt(s) + 2 m sqrt(s)) u ||A|| max ||X'_j||
         + 3 (k+1) u max ||R'_j||
C1   full stabilized block iterates, combining the half step and the
     polynomial step:
         k (4 + 2 s sqrt(s) + m + m sqrt(s)) u ||A||
           (max ||X'_j|| + max ||X_j||)
         + 4 (k+1) u (max ||R'_j|| + max ||R_j||)
T4   the smoothed pair produced by cross-interactive smoothing (same
     form as T1 with the smoothed maxima)
T5   the reconstructed primary pair of a smoothed run: the T4 value
     plus (2 + m) u ||A|| ||X_k|| + 2 u ||R_k|| for the final iterates
T6   the generalized (two-sided) operator:
         k u ((7 + 2m) ||A|| + (7 + 2s) ||C||) max ||X_j||
         + 5 (k+1) u max ||R_j||

All norms are Frobenius by convention, u = 2^-53.
"""

from dataclasses import dataclass

from .errors import ConfigurationError
from .history import ConvergenceHistory
from .linalg import UNIT_ROUNDOFF

__all__ = ["BOUND_IDS", "BoundReport", "evaluate_bound"]

BOUND_IDS = ("T1", "T2", "C1", "T4", "T5", "T6")


@dataclass
class BoundReport:
    """Outcome of one bound evaluation.

    ``measured_gap`` is the absolute gap of the sequence the bound
    applies to, taken from the run's terminal sampling.  ``inputs``
    records every quantity that entered the formula.
    """

    theorem: str
    bound_value: float
    measured_gap: float
    inputs: dict

    @property
    def violated(self):
        return self.measured_gap > self.bound_value

    def __str__(self):
        state = "VIOLATED" if self.violated else "ok"
        return (
            f"{self.theorem}: gap {self.measured_gap:.3e} vs "
            f"bound {self.bound_value:.3e} [{state}]"
        )


def _absolute(history, relative_value, what):
    if relative_value is None:
        raise ConfigurationError(
            f"history for {history.solver!r} has no recorded {what}; "
            "rerun with gap sampling enabled"
        )
    return relative_value * history.b_norm


def evaluate_bound(theorem, history, *, a_norm, m, s, c_norm=0.0):
    """Evaluate one gap bound against a finished run.

    Parameters
    ----------
    theorem : str
        One of ``BOUND_IDS``.
    history : ConvergenceHistory
        Must carry terminal gap information (solvers always sample the
        terminal iteration).
    a_norm, c_norm : float
        Frobenius norms of the operator matrices (c_norm only enters
        T6).
    m : int
        Maximum number of stored entries in any row of A.
    s : int
        Block width.
    """
    if not isinstance(history, ConvergenceHistory):
        raise TypeError("history must be a ConvergenceHistory")
    if theorem not in BOUND_IDS:
        raise ConfigurationError(
            f"unknown bound id {theorem!r}; valid: {', '.join(BOUND_IDS)}"
        )
    u = UNIT_ROUNDOFF
    k = history.iterations
    mx = history.max_norms
    s_root = float(s) ** 0.5
    inputs = {
        "k": k,
        "u": u,
        "a_norm": a_norm,
        "c_norm": c_norm,
        "m": m,
        "s": s,
    }

    if theorem == "T1":
        max_x, max_r = mx["x"], mx["r"]
        bound = (
            k * (5.0 + 2.0 * m) * u * a_norm * max_x
            + 5.0 * (k + 1) * u * max_r
        )
        measured = _absolute(history, history.final_primary_gap_norm, "gap")
        inputs.update(max_x_norm=max_x, max_r_norm=max_r)
    elif theorem == "T2":
        max_x, max_r = mx["x_prime"], mx["r_prime"]
        bound = (
            k * (3.0 + 4.0 * s * s_root + 2.0 * m * s_root) * u * a_norm * max_x
            + 3.0 * (k + 1) * u * max_r
        )
        measured = _absolute(
            history, history.final_prime_gap_norm, "half-step gap"
        )
        inputs.update(max_x_norm=max_x, max_r_norm=max_r)
    elif theorem == "C1":
        max_xp, max_rp = mx["x_prime"], mx["r_prime"]
        max_x, max_r = mx["x"], mx["r"]
        bound = (
            k
            * (4.0 + 2.0 * s * s_root + m + m * s_root)
            * u
            * a_norm
            * (max_xp + max_x)
            + 4.0 * (k + 1) * u * (max_rp + max_r)
        )
        measured = _absolute(history, history.final_primary_gap_norm, "gap")
        inputs.update(
            max_x_norm=max_x,
            max_r_norm=max_r,
            max_x_prime_norm=max_xp,
            max_r_prime_norm=max_rp,
        )
    elif theorem == "T4":
        if not history.smoothed:
            raise ConfigurationError(
                "T4 applies to smoothed runs only; "
                f"{history.solver!r} did not smooth"
            )
        max_y, max_s = mx["y_hat"], mx["s_hat"]
        bound = (
            k * (5.0 + 2.0 * m) * u * a_norm * max_y
            + 5.0 * (k + 1) * u * max_s
        )
        measured = _absolute(history, history.final_gap_norm, "smoothed gap")
        inputs.update(max_x_norm=max_y, max_r_norm=max_s)
    elif theorem == "T5":
        if not history.smoothed:
            raise ConfigurationError(
                "T5 applies to smoothed runs only; "
                f"{history.solver!r} did not smooth"
            )
        max_y, max_s = mx["y_hat"], mx["s_hat"]
        bound = (
            k * (5.0 + 2.0 * m) * u * a_norm * max_y
            + 5.0 * (k + 1) * u * max_s
            + (2.0 + m) * u * a_norm * history.final_x_norm
            + 2.0 * u * history.final_r_norm
        )
        measured = _absolute(history, history.final_primary_gap_norm, "gap")
        inputs.update(
            max_x_norm=max_y,
            max_r_norm=max_s,
            final_x_norm=history.final_x_norm,
            final_r_norm=history.final_r_norm,
        )
    else:  # T6
        max_x, max_r = mx["x"], mx["r"]
        bound = (
            k * u * ((7.0 + 2.0 * m) * a_norm + (7.0 + 2.0 * s) * c_norm) * max_x
            + 5.0 * (k + 1) * u * max_r
        )
        measured = _absolute(history, history.final_primary_gap_norm, "gap")
        inputs.update(max_x_norm=max_x, max_r_norm=max_r)

    return BoundReport(
        theorem=theorem,
        bound_value=float(bound),
        measured_gap=float(measured),
        inputs=inputs,
    )
