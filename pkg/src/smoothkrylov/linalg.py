"""Core dense/sparse linear algebra used by the solvers.

Conventions: all dense blocks are C-contiguous float64 arrays of shape
(n, s); sparse matrices are CSR with column indices sorted strictly
increasing inside each row; the block inner product is
``<X, Y> = trace(X^T Y)`` and the block norm is the Frobenius norm it
induces.
"""

import os
import warnings

import numpy as np
import scipy.linalg

from ._backends import csr_block_product, frobenius_inner_kernel
from .errors import BreakdownError, DimensionMismatchError

__all__ = [
    "UNIT_ROUNDOFF",
    "SparseMatrix",
    "ProblemOperator",
    "frobenius_inner",
    "frobenius_norm",
    "spmm",
    "qr_thin",
    "solve_small",
    "solve_right_block",
    "enable_solve_checks",
]

UNIT_ROUNDOFF = 2.0 ** -53

# Relative pivot threshold below which an LU factor counts as singular.
_PIVOT_RTOL = 100.0 * UNIT_ROUNDOFF

# When enabled, every small solve is verified against its residual.
# Cheap insurance for test runs; off by default in production use.
_check_solves = os.environ.get("SMOOTHKRYLOV_CHECK_SOLVES", "").strip().lower() in (
    "1",
    "true",
    "yes",
    "on",
)


def enable_solve_checks(enabled=True):
    """Toggle residual verification of solve_small / solve_right_block."""
    global _check_solves
    _check_solves = bool(enabled)


def _as_block(x, name="block"):
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(
            f"{name} must be a 2-d array", expected="2-d", got=f"{arr.ndim}-d"
        )
    return arr


class SparseMatrix:
    """Sparse matrix in CSR form.

    Parameters
    ----------
    n_rows, n_cols : int
    row_offsets : (n_rows + 1,) int64 array
        ``row_offsets[i]:row_offsets[i+1]`` slices row i out of
        ``col_indices`` / ``values``.
    col_indices : (nnz,) int64 array
        Strictly increasing within each row.
    values : (nnz,) float64 array

    Use :meth:`from_coo` to build from unsorted triplets; it sorts and
    sums duplicates.  The raw constructor validates the invariants and
    raises ``ValueError`` on the first violation it finds.
    """

    __slots__ = ("n_rows", "n_cols", "row_offsets", "col_indices", "values")

    def __init__(self, n_rows, n_cols, row_offsets, col_indices, values):
        n_rows = int(n_rows)
        n_cols = int(n_cols)
        if n_rows < 0 or n_cols < 0:
            raise ValueError(f"negative dimensions ({n_rows}, {n_cols})")
        row_offsets = np.ascontiguousarray(row_offsets, dtype=np.int64)
        col_indices = np.ascontiguousarray(col_indices, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if row_offsets.shape != (n_rows + 1,):
            raise ValueError(
                f"row_offsets has shape {row_offsets.shape}, "
                f"expected ({n_rows + 1},)"
            )
        if col_indices.shape != values.shape or col_indices.ndim != 1:
            raise ValueError(
                f"col_indices {col_indices.shape} and values {values.shape} "
                "must be 1-d arrays of equal length"
            )
        if row_offsets[0] != 0:
            raise ValueError(f"row_offsets[0] must be 0, got {row_offsets[0]}")
        if row_offsets[-1] != values.shape[0]:
            raise ValueError(
                f"row_offsets[-1]={row_offsets[-1]} does not match "
                f"nnz={values.shape[0]}"
            )
        counts = np.diff(row_offsets)
        if np.any(counts < 0):
            bad = int(np.argmax(counts < 0))
            raise ValueError(f"row_offsets decreases at row {bad}")
        if values.shape[0]:
            if col_indices.min() < 0 or col_indices.max() >= n_cols:
                raise ValueError(
                    f"column index out of range [0, {n_cols}): "
                    f"min={col_indices.min()}, max={col_indices.max()}"
                )
            row_of = np.repeat(np.arange(n_rows, dtype=np.int64), counts)
            same_row = row_of[1:] == row_of[:-1]
            nondecreasing = np.diff(col_indices) <= 0
            if np.any(same_row & nondecreasing):
                bad = int(np.argmax(same_row & nondecreasing))
                raise ValueError(
                    f"column indices not strictly increasing in row "
                    f"{row_of[bad]} near entry {bad}"
                )
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.row_offsets = row_offsets
        self.col_indices = col_indices
        self.values = values

    @classmethod
    def from_coo(cls, n_rows, n_cols, rows, cols, values):
        """Build from triplets; duplicate positions are summed."""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        values = np.asarray(values, dtype=np.float64).ravel()
        if not (rows.shape == cols.shape == values.shape):
            raise ValueError("rows, cols, values must have equal length")
        if rows.shape[0]:
            if rows.min() < 0 or rows.max() >= n_rows:
                raise ValueError(f"row index out of range [0, {n_rows})")
            if cols.min() < 0 or cols.max() >= n_cols:
                raise ValueError(f"column index out of range [0, {n_cols})")
            order = np.lexsort((cols, rows))
            rows, cols, values = rows[order], cols[order], values[order]
            fresh = np.empty(rows.shape[0], dtype=bool)
            fresh[0] = True
            fresh[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(fresh)
            values = np.add.reduceat(values, starts)
            rows, cols = rows[starts], cols[starts]
        counts = np.bincount(rows, minlength=n_rows)
        row_offsets = np.zeros(n_rows + 1, dtype=np.int64)
        np.cumsum(counts, out=row_offsets[1:])
        return cls(n_rows, n_cols, row_offsets, cols, values)

    @classmethod
    def from_dense(cls, a, *, keep_zeros=False):
        """Build from a dense array, dropping exact zeros by default."""
        a = _as_block(a, "matrix")
        if keep_zeros:
            mask = np.ones(a.shape, dtype=bool)
        else:
            mask = a != 0.0
        rows, cols = np.nonzero(mask)
        return cls.from_coo(a.shape[0], a.shape[1], rows, cols, a[rows, cols])

    @classmethod
    def identity(cls, n):
        idx = np.arange(n, dtype=np.int64)
        return cls(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))

    @property
    def nnz(self):
        return int(self.values.shape[0])

    @property
    def max_row_nnz(self):
        """Largest number of stored entries in any row."""
        if self.n_rows == 0:
            return 0
        return int(np.max(np.diff(self.row_offsets)))

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def frobenius_norm(self):
        return float(np.linalg.norm(self.values))

    def transpose(self):
        counts = np.diff(self.row_offsets)
        rows = np.repeat(np.arange(self.n_rows, dtype=np.int64), counts)
        return SparseMatrix.from_coo(
            self.n_cols, self.n_rows, self.col_indices, rows, self.values
        )

    def to_dense(self):
        out = np.zeros((self.n_rows, self.n_cols))
        counts = np.diff(self.row_offsets)
        rows = np.repeat(np.arange(self.n_rows, dtype=np.int64), counts)
        out[rows, self.col_indices] = self.values
        return out

    def matmul(self, block):
        return spmm(self, block)

    def __repr__(self):
        return (
            f"SparseMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz}, "
            f"max_row_nnz={self.max_row_nnz})"
        )


def spmm(a, block):
    """Sparse-times-dense product ``a @ block``."""
    block = _as_block(block)
    if a.n_cols != block.shape[0]:
        raise DimensionMismatchError(
            "spmm operand rows do not match matrix columns",
            expected=a.n_cols,
            got=block.shape[0],
        )
    return csr_block_product(a.row_offsets, a.col_indices, a.values, block)


def frobenius_inner(x, y):
    """Block inner product trace(x^T y)."""
    x = _as_block(x, "x")
    y = _as_block(y, "y")
    if x.shape != y.shape:
        raise DimensionMismatchError(
            "inner product operands differ in shape", expected=x.shape, got=y.shape
        )
    return frobenius_inner_kernel(x, y)


def frobenius_norm(x):
    """Frobenius norm, computed through the backend inner product."""
    x = _as_block(x)
    inner = frobenius_inner_kernel(x, x)
    return float(np.sqrt(inner)) if inner > 0.0 else 0.0


class ProblemOperator:
    """The linear map applied to iterate blocks.

    ``standard`` wraps ``V -> A V``; ``sylvester`` wraps
    ``V -> A V - V C`` with a small square coupling matrix C acting from
    the right.  The transposed map (adjoint under the block inner
    product) is ``V -> A^T V`` respectively ``V -> A^T V - V C^T``; the
    transposed factors are built once at construction.

    Instances are immutable and safe to share between runs.
    """

    __slots__ = ("a", "c", "_a_t", "_c_dense", "_c_t_dense")

    def __init__(self, a, c=None):
        if not isinstance(a, SparseMatrix):
            raise TypeError("a must be a SparseMatrix")
        if a.n_rows != a.n_cols:
            raise DimensionMismatchError(
                "operator matrix must be square",
                expected=f"({a.n_rows}, {a.n_rows})",
                got=a.shape,
            )
        self.a = a
        self._a_t = a.transpose()
        if c is not None:
            if not isinstance(c, SparseMatrix):
                raise TypeError("c must be a SparseMatrix")
            if c.n_rows != c.n_cols:
                raise DimensionMismatchError(
                    "coupling matrix must be square",
                    expected=f"({c.n_rows}, {c.n_rows})",
                    got=c.shape,
                )
            # s stays small (block width), so C is used densely.
            self._c_dense = c.to_dense()
            self._c_t_dense = np.ascontiguousarray(self._c_dense.T)
        else:
            self._c_dense = None
            self._c_t_dense = None
        self.c = c

    @classmethod
    def standard(cls, a):
        return cls(a, None)

    @classmethod
    def sylvester(cls, a, c):
        if c is None:
            raise ValueError("sylvester operator requires a coupling matrix")
        return cls(a, c)

    @property
    def kind(self):
        return "standard" if self.c is None else "sylvester"

    @property
    def n(self):
        return self.a.n_rows

    @property
    def block_width(self):
        """Required block width, or None when any width is accepted."""
        return None if self.c is None else self.c.n_rows

    def _check(self, v):
        v = _as_block(v, "operand")
        if v.shape[0] != self.a.n_cols:
            raise DimensionMismatchError(
                "operand rows do not match operator dimension",
                expected=self.a.n_cols,
                got=v.shape[0],
            )
        if self.c is not None and v.shape[1] != self.c.n_rows:
            raise DimensionMismatchError(
                "operand columns do not match coupling matrix",
                expected=self.c.n_rows,
                got=v.shape[1],
            )
        return v

    def apply(self, v):
        """A v, or A v - v C for the generalized form."""
        v = self._check(v)
        out = csr_block_product(
            self.a.row_offsets, self.a.col_indices, self.a.values, v
        )
        if self._c_dense is not None:
            out -= v @ self._c_dense
        return out

    def apply_adjoint(self, v):
        """A^T v, or A^T v - v C^T for the generalized form."""
        v = self._check(v)
        out = csr_block_product(
            self._a_t.row_offsets, self._a_t.col_indices, self._a_t.values, v
        )
        if self._c_t_dense is not None:
            out -= v @ self._c_t_dense
        return out

    def a_norm(self):
        return self.a.frobenius_norm()

    def c_norm(self):
        return 0.0 if self.c is None else self.c.frobenius_norm()

    def __repr__(self):
        return f"ProblemOperator(kind={self.kind!r}, n={self.n})"


def qr_thin(x):
    """Thin QR with the diagonal of the triangular factor made >= 0.

    Returns ``(q, r)`` with q of shape (n, s) having orthonormal
    columns and r upper triangular of shape (s, s).  Requires n >= s.
    Rank-deficient input does not raise; the corresponding diagonal
    entries of r come out (near) zero.
    """
    x = _as_block(x, "x")
    n, s = x.shape
    if n < s:
        raise DimensionMismatchError(
            "thin QR needs at least as many rows as columns",
            expected=f">= {s} rows",
            got=f"{n} rows",
        )
    q, r = np.linalg.qr(x, mode="reduced")
    signs = np.sign(np.diag(r))
    signs[signs == 0.0] = 1.0
    return q * signs, signs[:, None] * r


def _pivot_check(diag_abs, scale, *, what, context):
    """Raise BreakdownError when an LU/triangular diagonal is dead."""
    min_pivot = float(diag_abs.min()) if diag_abs.size else 0.0
    threshold = _PIVOT_RTOL * scale
    if min_pivot == 0.0 or min_pivot < threshold:
        raise BreakdownError(
            f"{context}: {what} pivot {min_pivot:.3e} below "
            f"threshold {threshold:.3e}",
            quantity=what,
            magnitude=min_pivot,
        )


def _verify_solution(residual_norm, backward_scale, context):
    # Backward-error test: a correct solve of an ill-conditioned system
    # still leaves residual ~ u * ||m|| * ||x||, so the residual is
    # measured against ||m|| ||x|| + ||rhs||, not the right-hand side
    # alone.
    if residual_norm > 1e-10 * max(backward_scale, 1e-300):
        raise BreakdownError(
            f"{context}: solution residual {residual_norm:.3e} exceeds "
            f"1e-10 * {backward_scale:.3e}; factorization unreliable",
            quantity="solve_residual",
            magnitude=residual_norm,
        )


def solve_small(m, rhs):
    """Solve ``m @ x = rhs`` for a small dense square system.

    LU with partial pivoting; any pivot smaller than
    ``100 * u * ||m||_F`` counts as singular and raises
    :class:`BreakdownError` carrying the pivot magnitude.
    """
    m = _as_block(m, "m")
    rhs = _as_block(rhs, "rhs")
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(
            "solve_small needs a square matrix", expected="square", got=m.shape
        )
    if rhs.shape[0] != m.shape[0]:
        raise DimensionMismatchError(
            "rhs rows do not match matrix", expected=m.shape[0], got=rhs.shape[0]
        )
    scale = float(np.linalg.norm(m))
    if scale == 0.0:
        raise BreakdownError(
            "solve_small: zero matrix", quantity="pivot", magnitude=0.0
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    _pivot_check(np.abs(np.diag(lu)), scale, what="pivot", context="solve_small")
    x = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
    if _check_solves:
        _verify_solution(
            float(np.linalg.norm(m @ x - rhs)),
            scale * float(np.linalg.norm(x)) + float(np.linalg.norm(rhs)),
            "solve_small",
        )
    return x


def solve_right_block(rhs, m):
    """Solve ``x @ m = rhs`` for x, with m small and square.

    Upper-triangular m takes the direct back-substitution path; general
    m goes through LU of its transpose.  The same pivot threshold as
    :func:`solve_small` applies.
    """
    rhs = _as_block(rhs, "rhs")
    m = _as_block(m, "m")
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(
            "solve_right_block needs a square matrix",
            expected="square",
            got=m.shape,
        )
    if rhs.shape[1] != m.shape[0]:
        raise DimensionMismatchError(
            "rhs columns do not match matrix", expected=m.shape[0], got=rhs.shape[1]
        )
    scale = float(np.linalg.norm(m))
    if scale == 0.0:
        raise BreakdownError(
            "solve_right_block: zero matrix", quantity="pivot", magnitude=0.0
        )
    if m.shape[0] > 1 and not np.any(np.tril(m, -1)):
        _pivot_check(
            np.abs(np.diag(m)), scale, what="diagonal", context="solve_right_block"
        )
        # x m = rhs  <=>  m^T x^T = rhs^T with m^T lower triangular
        xt = scipy.linalg.solve_triangular(
            m.T, rhs.T, lower=True, check_finite=False
        )
        x = np.ascontiguousarray(xt.T)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(m.T, check_finite=False)
        _pivot_check(
            np.abs(np.diag(lu)), scale, what="pivot", context="solve_right_block"
        )
        xt = scipy.linalg.lu_solve((lu, piv), rhs.T, check_finite=False)
        x = np.ascontiguousarray(xt.T)
    if _check_solves:
        _verify_solution(
            float(np.linalg.norm(x @ m - rhs)),
            scale * float(np.linalg.norm(x)) + float(np.linalg.norm(rhs)),
            "solve_right_block",
        )
    return x
