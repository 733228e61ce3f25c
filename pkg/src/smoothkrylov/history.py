"""Per-run convergence records shared by the solvers and the harness."""

import enum
from dataclasses import dataclass, field


class TerminalStatus(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    BREAKDOWN = "breakdown"

    def __str__(self):
        return self.value


@dataclass
class IterationRecord:
    """One row of a convergence history.

    All residual and gap norms are relative to the right-hand side norm
    stored on the parent history; ``operator_applications`` is the
    cumulative count at the end of the iteration.  Fields that do not
    apply to a solver (eta for baselines, xi_condition for everything
    but the residual-orthonormalizing family) hold None.
    """

    iteration: int
    recursive_residual_norm: float
    smoothed_residual_norm: float | None
    true_residual_norm: float | None
    gap_norm: float | None
    eta: float | None
    xi_condition: float | None
    operator_applications: int


# Keys of the running maxima tracked for the rounding-error bounds.
MAX_NORM_KEYS = ("x", "r", "x_prime", "r_prime", "y_hat", "s_hat")


@dataclass
class ConvergenceHistory:
    """Everything observable about one solver run.

    Residual columns are relative; ``b_norm`` restores absolute scale.
    ``max_norms`` carries absolute running maxima over every iterate
    seen (iteration 0 included), keyed by sequence: the solution and
    residual recurrences ("x", "r"), the intermediate half-step
    sequences where the method has them ("x_prime", "r_prime"), and the
    smoothed sequences ("y_hat", "s_hat").  The ``final_*`` fields are
    filled in when the run terminates.
    """

    solver: str
    b_norm: float
    tolerance: float
    max_iterations: int
    smoothed: bool
    records: list[IterationRecord] = field(default_factory=list)
    status: TerminalStatus | None = None
    status_detail: str = ""
    max_norms: dict[str, float] = field(
        default_factory=lambda: {k: 0.0 for k in MAX_NORM_KEYS}
    )
    final_x_norm: float = 0.0
    final_r_norm: float = 0.0
    final_true_residual_norm: float | None = None
    final_gap_norm: float | None = None
    final_primary_gap_norm: float | None = None
    final_prime_gap_norm: float | None = None

    @property
    def iterations(self):
        """Number of completed iterations."""
        return self.records[-1].iteration if self.records else 0

    @property
    def converged(self):
        return self.status is TerminalStatus.CONVERGED

    def update_max(self, key, value):
        if value > self.max_norms[key]:
            self.max_norms[key] = float(value)

    def column(self, name):
        """One record field across all iterations, as a list."""
        return [getattr(rec, name) for rec in self.records]

    def per_iteration_operator_applications(self):
        """Operator applications consumed by each recorded iteration."""
        counts = self.column("operator_applications")
        out = []
        prev = None
        for c in counts:
            out.append(c if prev is None else c - prev)
            prev = c
        return out

    def summary(self):
        return {
            "solver": self.solver,
            "status": str(self.status) if self.status is not None else "running",
            "status_detail": self.status_detail,
            "iterations": self.iterations,
            "final_true_residual_norm": self.final_true_residual_norm,
            "final_gap_norm": self.final_gap_norm,
            "operator_applications": (
                self.records[-1].operator_applications if self.records else 0
            ),
        }
