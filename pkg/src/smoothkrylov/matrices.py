"""Test matrices: generators, Matrix Market reading, named problems.

``load_named_matrix`` serves the named SuiteSparse problems the
experiment suite references.  When the real ``.mtx`` file is present in
the data directory (see ``scripts/fetch_suitesparse.py``) it is read
from disk; otherwise a deterministic synthetic stand-in with the same
dimensions, nonzero count, and maximum row fill is generated, with its
conditioning calibrated to the published magnitude.  Results obtained
on a stand-in characterize the stand-in, not the SuiteSparse original;
the returned object is identical in kind either way.
"""

import os
from pathlib import Path

import numpy as np

from .errors import MatrixMarketParseError
from .linalg import SparseMatrix, frobenius_norm

__all__ = [
    "gen_toeplitz",
    "gen_random_block",
    "gen_random_sparse",
    "read_matrix_market",
    "write_matrix_market",
    "load_named_matrix",
    "SUITESPARSE_MANIFEST",
]


def gen_toeplitz(n):
    """Banded Toeplitz test matrix: 2 on the diagonal, 1 on the first
    superdiagonal, -1 on the fourth subdiagonal.

    nnz = 3n - 5 for n >= 5 (5995 at n = 2000).
    """
    if n < 5:
        import warnings

        warnings.warn(
            f"toeplitz generator intended for n >= 5, got n={n}; "
            "some bands are empty",
            stacklevel=2,
        )
    rows = []
    cols = []
    vals = []
    diag = np.arange(n, dtype=np.int64)
    rows.append(diag)
    cols.append(diag)
    vals.append(np.full(n, 2.0))
    if n > 1:
        i = np.arange(n - 1, dtype=np.int64)
        rows.append(i)
        cols.append(i + 1)
        vals.append(np.full(n - 1, 1.0))
    if n > 4:
        i = np.arange(4, n, dtype=np.int64)
        rows.append(i)
        cols.append(i - 4)
        vals.append(np.full(n - 4, -1.0))
    return SparseMatrix.from_coo(
        n, n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def gen_random_block(n, s, seed, *, normalize=True):
    """Dense n-by-s block with entries uniform on (-1, 1).

    With ``normalize`` the block is scaled to unit Frobenius norm, the
    convention the experiment harness assumes for right-hand sides.
    """
    rng = np.random.default_rng(seed)
    b = rng.uniform(-1.0, 1.0, size=(n, s))
    if normalize:
        norm = frobenius_norm(b)
        if norm > 0.0:
            b = b / norm
    return b


def gen_random_sparse(n, *, offdiag_per_row=4, seed=0, diag_dominance=1.0):
    """Random sparse nonsymmetric matrix, convenient for tests.

    Each row gets ``offdiag_per_row`` off-diagonal entries at distinct
    random columns with values uniform on (-1, 1), plus a diagonal
    entry equal to ``diag_dominance * (1 + sum of |off-diagonals|)``,
    which keeps the matrix comfortably nonsingular for dominance >= 1.
    """
    rng = np.random.default_rng(seed)
    rows = [np.arange(n, dtype=np.int64)]
    cols = [np.arange(n, dtype=np.int64)]
    diag = np.zeros(n)
    off_rows = []
    off_cols = []
    off_vals = []
    for i in range(n):
        k = min(offdiag_per_row, n - 1)
        choices = rng.choice(n - 1, size=k, replace=False)
        # shift past the diagonal position
        choices = np.where(choices >= i, choices + 1, choices)
        values = rng.uniform(-1.0, 1.0, size=k)
        off_rows.append(np.full(k, i, dtype=np.int64))
        off_cols.append(choices.astype(np.int64))
        off_vals.append(values)
        diag[i] = diag_dominance * (1.0 + np.sum(np.abs(values)))
    vals = [diag]
    rows += off_rows
    cols += off_cols
    vals += off_vals
    return SparseMatrix.from_coo(
        n, n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


# --------------------------------------------------------------------
# Matrix Market coordinate format (real, general or symmetric)
# --------------------------------------------------------------------


def read_matrix_market(path):
    """Read a Matrix Market coordinate file into a SparseMatrix.

    Supports the real field with general or symmetric symmetry; the
    symmetric case mirrors every off-diagonal entry.  Duplicate entries
    are summed.  Violations raise MatrixMarketParseError carrying the
    1-based line number.
    """
    path = os.fspath(path)

    def fail(message, line_no):
        raise MatrixMarketParseError(message, path=path, line=line_no)

    with open(path, "r", encoding="ascii", errors="replace") as fh:
        header = fh.readline()
        if not header:
            fail("empty file", 1)
        tokens = header.strip().split()
        if len(tokens) != 5 or tokens[0] != "%%MatrixMarket":
            fail(
                "header must be '%%MatrixMarket matrix coordinate "
                "<field> <symmetry>'",
                1,
            )
        obj, fmt, field, symmetry = (t.lower() for t in tokens[1:])
        if obj != "matrix":
            fail(f"unsupported object {obj!r}", 1)
        if fmt != "coordinate":
            fail(f"unsupported format {fmt!r} (only coordinate)", 1)
        if field != "real":
            fail(f"unsupported field {field!r} (only real)", 1)
        if symmetry not in ("general", "symmetric"):
            fail(
                f"unsupported symmetry {symmetry!r} "
                "(only general or symmetric)",
                1,
            )

        line_no = 1
        size_line = None
        for line in fh:
            line_no += 1
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            size_line = stripped
            break
        if size_line is None:
            fail("missing size line", line_no)
        parts = size_line.split()
        if len(parts) != 3:
            fail(f"size line needs 3 integers, got {len(parts)} fields", line_no)
        try:
            n_rows, n_cols, nnz_declared = (int(p) for p in parts)
        except ValueError:
            fail(f"size line not integral: {size_line!r}", line_no)
        if n_rows < 0 or n_cols < 0 or nnz_declared < 0:
            fail("size line entries must be non-negative", line_no)

        rows = np.empty(nnz_declared, dtype=np.int64)
        cols = np.empty(nnz_declared, dtype=np.int64)
        vals = np.empty(nnz_declared, dtype=np.float64)
        seen = 0
        for line in fh:
            line_no += 1
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            if seen >= nnz_declared:
                fail(
                    f"more than the declared {nnz_declared} entries", line_no
                )
            parts = stripped.split()
            if len(parts) != 3:
                fail(
                    f"entry needs 'row col value', got {len(parts)} fields",
                    line_no,
                )
            try:
                i = int(parts[0])
                j = int(parts[1])
                value = float(parts[2])
            except ValueError:
                fail(f"malformed entry: {stripped!r}", line_no)
            if not (1 <= i <= n_rows):
                fail(f"row index {i} out of range [1, {n_rows}]", line_no)
            if not (1 <= j <= n_cols):
                fail(f"column index {j} out of range [1, {n_cols}]", line_no)
            rows[seen] = i - 1
            cols[seen] = j - 1
            vals[seen] = value
            seen += 1
        if seen != nnz_declared:
            fail(
                f"declared {nnz_declared} entries but file has {seen}",
                line_no,
            )

    if symmetry == "symmetric":
        off = rows != cols
        mirrored_rows = cols[off]
        mirrored_cols = rows[off]
        rows = np.concatenate([rows, mirrored_rows])
        cols = np.concatenate([cols, mirrored_cols])
        vals = np.concatenate([vals, vals[off]])
    return SparseMatrix.from_coo(n_rows, n_cols, rows, cols, vals)


def write_matrix_market(matrix, path, *, comment=None):
    """Write a SparseMatrix as a real general coordinate file."""
    path = os.fspath(path)
    counts = np.diff(matrix.row_offsets)
    rows = np.repeat(np.arange(matrix.n_rows, dtype=np.int64), counts)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{matrix.n_rows} {matrix.n_cols} {matrix.nnz}\n")
        for i, j, v in zip(rows, matrix.col_indices, matrix.values):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")


# --------------------------------------------------------------------
# Named problems
# --------------------------------------------------------------------

_MM_BASE = "https://suitesparse-collection-website.herokuapp.com/MM"

SUITESPARSE_MANIFEST = {
    "cdde2": {
        "group": "Bai",
        "url": f"{_MM_BASE}/Bai/cdde2.tar.gz",
        "n": 961,
        "nnz": 4681,
        "max_row_nnz": 5,
        "cond2": 5.5e1,
    },
    "pde2961": {
        "group": "Bai",
        "url": f"{_MM_BASE}/Bai/pde2961.tar.gz",
        "n": 2961,
        "nnz": 14585,
        "max_row_nnz": 5,
        "cond2": 6.4e2,
    },
    "bfwa782": {
        "group": "Bai",
        "url": f"{_MM_BASE}/Bai/bfwa782.tar.gz",
        "n": 782,
        "nnz": 7514,
        "max_row_nnz": 24,
        "cond2": 1.7e3,
    },
    "fs_680_1": {
        "group": "HB",
        "url": f"{_MM_BASE}/HB/fs_680_1.tar.gz",
        "n": 680,
        "nnz": 2184,
        "max_row_nnz": 8,
        "cond2": 1.5e4,
    },
    "can_24": {
        "group": "HB",
        "url": f"{_MM_BASE}/HB/can_24.tar.gz",
        "n": 24,
        "nnz": 160,
        "max_row_nnz": 9,
        "cond2": 7.8e1,
    },
}


def default_data_dir():
    env = os.environ.get("SMOOTHKRYLOV_DATA", "").strip()
    if env:
        return Path(env)
    return Path.cwd() / "data"


def load_named_matrix(name, data_dir=None):
    """Load one of the named problems, from disk when available.

    Looks for ``<data_dir>/<name>.mtx`` (data_dir defaults to
    ``$SMOOTHKRYLOV_DATA`` or ``./data``); absent that, builds the
    deterministic stand-in.  Download real files with
    ``scripts/fetch_suitesparse.py`` -- nothing is fetched implicitly.
    """
    if name not in SUITESPARSE_MANIFEST:
        known = ", ".join(sorted(SUITESPARSE_MANIFEST))
        raise KeyError(f"unknown named matrix {name!r}; known: {known}")
    directory = Path(data_dir) if data_dir is not None else default_data_dir()
    candidate = directory / f"{name}.mtx"
    if candidate.is_file():
        return read_matrix_market(candidate)
    return _STANDIN_BUILDERS[name]()


def _convection_diffusion(nx, ny, px, py, shift=0.0):
    """Five-point convection-diffusion stencil on an nx-by-ny grid.

    Dirichlet boundary, grid ordered row-major; nnz = 5*nx*ny - 2*nx
    - 2*ny.  px, py control the strength of the first-order terms and
    shift is subtracted from the diagonal (a zeroth-order reaction
    term), which moves the field toward the origin.
    """
    n = nx * ny
    hx = 1.0 / (nx + 1)
    hy = 1.0 / (ny + 1)
    gx = 0.5 * px * hx
    gy = 0.5 * py * hy
    rows = []
    cols = []
    vals = []

    def add(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    for iy in range(ny):
        for ix in range(nx):
            node = iy * nx + ix
            add(node, node, 4.0 - shift)
            if ix > 0:
                add(node, node - 1, -1.0 - gx)
            if ix < nx - 1:
                add(node, node + 1, -1.0 + gx)
            if iy > 0:
                add(node, node - nx, -1.0 - gy)
            if iy < ny - 1:
                add(node, node + nx, -1.0 + gy)
    return SparseMatrix.from_coo(
        n,
        n,
        np.asarray(rows, dtype=np.int64),
        np.asarray(cols, dtype=np.int64),
        np.asarray(vals),
    )


def _standin_cdde2():
    # 31 x 31 grid reproduces n = 961 and nnz = 4681 exactly.  Mesh
    # Peclet 2 in x plus a mild reaction shift: strongly nonnormal,
    # residual histories spike before converging.
    return _convection_diffusion(31, 31, 128.0, 0.0, shift=0.4)


def _standin_pde2961():
    # 47 x 63 grid reproduces n = 2961 and nnz = 14585 exactly.  Mild
    # convection: product-type solvers spike, stabilized ones do not.
    return _convection_diffusion(47, 63, 14.0, 18.0)


def _standin_bfwa782():
    """Nonsymmetric stand-in with a symmetric sparsity pattern.

    n = 782, nnz = 7514 (full diagonal plus 3366 mirrored pairs), one
    row filled to 24 entries.  The diagonal is a geometric sweep over
    three decades with couplings scaled to keep every row dominant, so
    the matrix stays definite while residual-block columns converge at
    very different rates.
    """
    n = 782
    target_pairs = 3366
    max_offdiag = 23
    rng = np.random.default_rng(782001)
    degree = np.zeros(n, dtype=np.int64)
    pair_set = set()

    # One deliberately dense row pins the maximum row fill at 24.
    hub = 0
    hub_neighbors = rng.choice(np.arange(1, n), size=max_offdiag, replace=False)
    for j in sorted(int(v) for v in hub_neighbors):
        pair_set.add((hub, j))
        degree[hub] += 1
        degree[j] += 1

    # Banded pairs give the matrix a PDE-like backbone.
    for offset in (1, 2, 3):
        for i in range(n - offset):
            a, bo = i, i + offset
            if degree[a] >= max_offdiag or degree[bo] >= max_offdiag:
                continue
            if (a, bo) in pair_set:
                continue
            pair_set.add((a, bo))
            degree[a] += 1
            degree[bo] += 1
            if len(pair_set) == target_pairs:
                break
        if len(pair_set) == target_pairs:
            break

    # Random long-range couplings fill the remaining budget.
    while len(pair_set) < target_pairs:
        a = int(rng.integers(0, n))
        bo = int(rng.integers(0, n))
        if a == bo:
            continue
        if a > bo:
            a, bo = bo, a
        if (a, bo) in pair_set:
            continue
        if degree[a] >= max_offdiag or degree[bo] >= max_offdiag:
            continue
        pair_set.add((a, bo))
        degree[a] += 1
        degree[bo] += 1

    pairs = np.array(sorted(pair_set), dtype=np.int64)
    # Smoothly graded diagonal: residual columns converge at spread-out
    # rates, so the R-factor of the residual block degrades steadily.
    diag = np.geomspace(0.05, 60.0, n)[rng.permutation(n)]
    local = np.minimum(diag[pairs[:, 0]], diag[pairs[:, 1]])
    upper_vals = rng.uniform(-1.0, 1.0, size=len(pairs)) * 0.1 * local
    lower_vals = rng.uniform(-1.0, 1.0, size=len(pairs)) * 0.1 * local
    rows = np.concatenate([pairs[:, 0], pairs[:, 1], np.arange(n)])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0], np.arange(n)])
    vals = np.concatenate([upper_vals, lower_vals, diag])
    return SparseMatrix.from_coo(n, n, rows, cols, vals)


def _standin_fs_680_1():
    """Badly scaled stand-in: n = 680, nnz = 2184, max row fill 8.

    Diagonal magnitudes sweep more than three decades starting well
    above the spectral radius of the small coupling matrices it is
    paired with, so the generalized operator stays safely nonsingular.
    """
    n = 680
    offdiag_total = 2184 - n  # 1504
    rng = np.random.default_rng(680001)
    diag = 20.0 * np.geomspace(1.0, 4.0e3, n)[rng.permutation(n)]
    rows = [np.arange(n, dtype=np.int64)]
    cols = [np.arange(n, dtype=np.int64)]
    vals = [diag]
    placed = 0
    row_fill = np.ones(n, dtype=np.int64)
    taken = set()
    while placed < offdiag_total:
        i = int(rng.integers(0, n))
        j = int(rng.integers(0, n))
        if i == j or row_fill[i] >= 8 or (i, j) in taken:
            continue
        taken.add((i, j))
        row_fill[i] += 1
        # Couplings scale with the smaller neighboring diagonal so the
        # matrix stays diagonally dominant despite the wild scaling.
        rows.append(np.array([i], dtype=np.int64))
        cols.append(np.array([j], dtype=np.int64))
        vals.append(
            np.array([0.1 * min(diag[i], diag[j]) * rng.uniform(-1.0, 1.0)])
        )
        placed += 1
    return SparseMatrix.from_coo(
        n, n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def _standin_can_24():
    """Small symmetric stand-in: n = 24, nnz = 160, max row fill 9.

    Two nearest-neighbor rings plus a hub node of degree 8 and a set of
    chord pairs; 68 mirrored pairs plus the full diagonal give exactly
    160 stored entries.
    """
    n = 24
    pairs = set()
    for i in range(n):
        pairs.add((i, (i + 1) % n) if i + 1 < n else (0, n - 1))
        a, bq = i, (i + 2) % n
        pairs.add((min(a, bq), max(a, bq)))
    for j in (4, 8, 12, 16):
        pairs.add((0, j))
    for i in range(2, 18):
        pairs.add((i, i + 6))
    pairs = np.array(sorted(pairs), dtype=np.int64)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1], np.arange(n)])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0], np.arange(n)])
    vals = np.concatenate(
        [np.ones(len(pairs)), np.ones(len(pairs)), np.full(n, 1.0)]
    )
    return SparseMatrix.from_coo(n, n, rows, cols, vals)


_STANDIN_BUILDERS = {
    "cdde2": _standin_cdde2,
    "pde2961": _standin_pde2961,
    "bfwa782": _standin_bfwa782,
    "fs_680_1": _standin_fs_680_1,
    "can_24": _standin_can_24,
}
