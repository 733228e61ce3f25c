"""Pure-numpy reference kernels.

Fallback backend used when numba is unavailable or when
``SMOOTHKRYLOV_BACKEND=numpy`` is set.  Each function here must be
call-compatible with its twin in ``_kernels_numba``.
"""

import numpy as np


def csr_block_product(row_offsets, col_indices, values, block):
    """Multiply a CSR matrix by a dense block, row by row.

    ``np.add.reduceat`` repeats the segment start element for empty
    segments instead of producing zero, so empty rows are masked out and
    written as zero explicitly.
    """
    n_rows = row_offsets.shape[0] - 1
    out = np.zeros((n_rows, block.shape[1]), dtype=np.float64)
    if values.shape[0] == 0:
        return out
    products = values[:, None] * block[col_indices, :]
    counts = np.diff(row_offsets)
    nonempty = counts > 0
    starts = row_offsets[:-1][nonempty]
    out[nonempty, :] = np.add.reduceat(products, starts, axis=0)
    return out


def frobenius_inner(x, y):
    """Sum of elementwise products, accumulated by numpy."""
    return float(np.einsum("ij,ij->", x, y))
