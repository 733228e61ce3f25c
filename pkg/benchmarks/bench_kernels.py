"""Time the hot kernels on both backends.

The package selects its kernel implementation at import time from
``SMOOTHKRYLOV_BACKEND``; this script sidesteps that and imports both
implementations directly so one process can compare them.

Usage:
    python benchmarks/bench_kernels.py [--sizes 500,2000,8000] [--nrhs 16]
        [--repeats 25]
"""

import argparse
import time

import numpy as np

from smoothkrylov import _kernels_numpy
from smoothkrylov.matrices import gen_random_block, gen_random_sparse

try:
    from smoothkrylov import _kernels_numba

    HAVE_NUMBA = True
except ImportError:  # numba not installed; numpy rows only
    _kernels_numba = None
    HAVE_NUMBA = False


def time_call(fn, *args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_size(n, nrhs, repeats):
    matrix = gen_random_sparse(n, offdiag_per_row=4, seed=0)
    block = gen_random_block(n, nrhs, 1)
    args = (matrix.row_offsets, matrix.col_indices, matrix.values, block)

    rows = []
    base = time_call(_kernels_numpy.csr_block_product, *args, repeats=repeats)
    rows.append(("csr_block_product", "numpy", base, 1.0))
    if HAVE_NUMBA:
        _kernels_numba.csr_block_product(*args)  # compile outside the timer
        jit = time_call(
            _kernels_numba.csr_block_product, *args, repeats=repeats
        )
        rows.append(("csr_block_product", "numba", jit, base / jit))

    x = gen_random_block(n, nrhs, 2)
    y = gen_random_block(n, nrhs, 3)
    base = time_call(_kernels_numpy.frobenius_inner, x, y, repeats=repeats)
    rows.append(("frobenius_inner", "numpy", base, 1.0))
    if HAVE_NUMBA:
        _kernels_numba.frobenius_inner(x, y)
        jit = time_call(_kernels_numba.frobenius_inner, x, y, repeats=repeats)
        rows.append(("frobenius_inner", "numba", jit, base / jit))
    return rows


def check_agreement(n, nrhs):
    """The two implementations must agree before timings mean anything."""
    if not HAVE_NUMBA:
        return True
    matrix = gen_random_sparse(n, offdiag_per_row=4, seed=0)
    block = gen_random_block(n, nrhs, 1)
    args = (matrix.row_offsets, matrix.col_indices, matrix.values, block)
    a = _kernels_numpy.csr_block_product(*args)
    b = _kernels_numba.csr_block_product(*args)
    scale = max(float(np.linalg.norm(a)), 1e-300)
    return float(np.linalg.norm(a - b)) <= 1e-13 * scale


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="500,2000,8000")
    parser.add_argument("--nrhs", type=int, default=16)
    parser.add_argument("--repeats", type=int, default=25)
    args = parser.parse_args()
    sizes = [int(tok) for tok in args.sizes.split(",") if tok]

    if not HAVE_NUMBA:
        print("numba not available; numpy timings only")
    elif not check_agreement(sizes[0], args.nrhs):
        raise SystemExit("backends disagree; timings would be meaningless")

    header = f"{'n':>7} {'kernel':<18} {'backend':<7} {'best (us)':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        for kernel, backend, seconds, speedup in bench_size(
            n, args.nrhs, args.repeats
        ):
            print(
                f"{n:>7} {kernel:<18} {backend:<7} "
                f"{seconds * 1e6:>10.1f} {speedup:>7.2f}x"
            )


if __name__ == "__main__":
    main()
