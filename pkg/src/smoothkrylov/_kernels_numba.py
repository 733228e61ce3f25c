"""Numba-compiled hot kernels.

Importing this module requires numba; backend selection with the
fallback path lives in ``_backends``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def csr_block_product(row_offsets, col_indices, values, block):
    """Multiply a CSR matrix by a dense block.

    Sequential over rows so the accumulation order is fixed and results
    are reproducible bit for bit across runs and thread settings.
    """
    n_rows = row_offsets.shape[0] - 1
    s = block.shape[1]
    out = np.zeros((n_rows, s), dtype=np.float64)
    for i in range(n_rows):
        for k in range(row_offsets[i], row_offsets[i + 1]):
            a = values[k]
            j = col_indices[k]
            for col in range(s):
                out[i, col] += a * block[j, col]
    return out


@njit(cache=True)
def frobenius_inner(x, y):
    """Sum of elementwise products, accumulated sequentially column-major."""
    acc = 0.0
    for j in range(x.shape[1]):
        for i in range(x.shape[0]):
            acc += x[i, j] * y[i, j]
    return acc
