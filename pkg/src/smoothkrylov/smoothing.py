"""Residual smoothing schemes.

Two schemes live here.  The cross-interactive scheme keeps a smoothed
pair (y_hat, s_hat) together with an accumulated direction v_hat and
its image u_hat under the operator, and *reconstructs* the driving
iterates (x, r) from that state every step, so the smoothed and primary
sequences exchange information in both directions.  The simple scheme
is the classical one-way smoother that only averages whatever iterates
it is shown.

Cross-interactive update, given the increment p_hat of the primary
solution recurrence:

    v_hat <- zeta_hat * v_hat + p_hat
    u_hat <- op(v_hat)                       (one operator application)
    eta   <- <s_hat, u_hat> / <u_hat, u_hat>
    zeta  <- 1 - eta
    y_hat <- y_hat + eta * v_hat
    s_hat <- s_hat - eta * u_hat
    x     <- y_hat + zeta * v_hat            (returned primary iterates)
    r     <- s_hat - zeta * u_hat

eta minimizes ||s_hat - eta * u_hat|| over eta, which makes the
smoothed residual norm non-increasing and never above the primary one.
The returned (x, r) are the authoritative primary iterates: callers
must feed their recurrences from these values instead of keeping an
independently updated copy.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BreakdownError
from .linalg import frobenius_inner

__all__ = [
    "SmootherState",
    "SrsState",
    "smoothing_parameter",
    "cirs_step",
    "srs_step",
]


@dataclass
class SmootherState:
    """State of the cross-interactive smoother.

    Invariants: ``zeta_hat == 1 - eta_hat`` and ``u_hat`` is the
    operator image of ``v_hat`` from the most recent step.  At
    initialization y_hat == X0, s_hat == R0, v_hat == u_hat == O and
    eta_hat == 0.
    """

    y_hat: np.ndarray
    s_hat: np.ndarray
    v_hat: np.ndarray
    u_hat: np.ndarray
    eta_hat: float = 0.0
    zeta_hat: float = 1.0

    @classmethod
    def initial(cls, x0, r0):
        return cls(
            y_hat=np.array(x0, dtype=np.float64, copy=True),
            s_hat=np.array(r0, dtype=np.float64, copy=True),
            v_hat=np.zeros_like(r0, dtype=np.float64),
            u_hat=np.zeros_like(r0, dtype=np.float64),
        )

    def resync(self, x, r):
        """Restart smoothing from the given primary pair.

        Used by the switched block variants: after a stretch of direct
        (non-smoothed) iterations the accumulated direction is stale,
        so smoothing resumes fresh from the current iterates.
        """
        self.y_hat = np.array(x, dtype=np.float64, copy=True)
        self.s_hat = np.array(r, dtype=np.float64, copy=True)
        self.v_hat = np.zeros_like(self.v_hat)
        self.u_hat = np.zeros_like(self.u_hat)
        self.eta_hat = 0.0
        self.zeta_hat = 1.0


def smoothing_parameter(s_hat, u_hat):
    """Minimizer of ``||s_hat - eta * u_hat||`` over scalar eta.

    Raises
    ------
    BreakdownError
        If ``<u_hat, u_hat>`` is exactly zero, i.e. the accumulated
        direction was annihilated by the operator.
    """
    denom = frobenius_inner(u_hat, u_hat)
    if denom == 0.0:
        raise BreakdownError(
            "smoothing direction annihilated by the operator "
            "(<u_hat, u_hat> = 0)",
            quantity="u_hat_inner",
            magnitude=0.0,
        )
    return frobenius_inner(s_hat, u_hat) / denom


def cirs_step(state, p_hat, op):
    """Advance the cross-interactive smoother by one primary increment.

    Parameters
    ----------
    state : SmootherState
        Mutated in place.
    p_hat : ndarray
        Increment of the primary solution recurrence for this step.
    op : object with ``apply``
        The problem operator (or a counting wrapper around it); applied
        exactly once.

    Returns
    -------
    (x, r) : pair of ndarray
        The reconstructed primary iterates.
    """
    state.v_hat = state.zeta_hat * state.v_hat + p_hat
    state.u_hat = op.apply(state.v_hat)
    eta = smoothing_parameter(state.s_hat, state.u_hat)
    zeta = 1.0 - eta
    state.eta_hat = eta
    state.zeta_hat = zeta
    state.y_hat = state.y_hat + eta * state.v_hat
    state.s_hat = state.s_hat - eta * state.u_hat
    x = state.y_hat + zeta * state.v_hat
    r = state.s_hat - zeta * state.u_hat
    return x, r


@dataclass
class SrsState:
    """State of the simple one-way smoother: the averaged pair (y, s)."""

    y: np.ndarray
    s: np.ndarray

    @classmethod
    def initial(cls, x0, r0):
        return cls(
            y=np.array(x0, dtype=np.float64, copy=True),
            s=np.array(r0, dtype=np.float64, copy=True),
        )


def srs_step(state, x_k, r_k):
    """Fold one externally produced iterate pair into the average.

    Uses the norm-minimizing weight
    ``eta = -<s, r_k - s> / ||r_k - s||^2``; when the new residual
    equals the current smoothed one the step is a no-op with eta = 1.
    Returns the eta used.
    """
    d = r_k - state.s
    dd = frobenius_inner(d, d)
    if dd == 0.0:
        eta = 1.0
    else:
        eta = -frobenius_inner(state.s, d) / dd
    state.y = (1.0 - eta) * state.y + eta * x_k
    state.s = (1.0 - eta) * state.s + eta * r_k
    return eta
