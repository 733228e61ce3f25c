"""Core linear algebra against independent dense oracles."""

import numpy as np
import pytest

from smoothkrylov.errors import BreakdownError, DimensionMismatchError
from smoothkrylov.linalg import (
    ProblemOperator,
    SparseMatrix,
    frobenius_inner,
    frobenius_norm,
    qr_thin,
    solve_right_block,
    solve_small,
    spmm,
)
from smoothkrylov.matrices import gen_random_sparse, gen_toeplitz

from conftest import assert_blocks_close


def inner_oracle(x, y):
    """Entrywise double loop, no vectorization."""
    total = 0.0
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            total += x[i, j] * y[i, j]
    return total


def spmm_oracle(a, block):
    """Dense triple loop over the CSR structure."""
    out = np.zeros((a.n_rows, block.shape[1]))
    dense = a.to_dense()
    for i in range(a.n_rows):
        for k in range(a.n_cols):
            for j in range(block.shape[1]):
                out[i, j] += dense[i, k] * block[k, j]
    return out


def sylvester_kron(a_dense, c_dense):
    """I_s (x) A - C^T (x) I_n acting on column-major vec(V)."""
    n = a_dense.shape[0]
    s = c_dense.shape[0]
    return np.kron(np.eye(s), a_dense) - np.kron(c_dense.T, np.eye(n))


class TestFrobeniusInner:
    def test_identity_trace(self):
        assert frobenius_inner(np.eye(2), np.eye(2)) == 2.0

    def test_diag_3_4(self):
        x = np.array([[3.0, 0.0], [0.0, 4.0]])
        assert frobenius_inner(x, x) == 25.0
        assert frobenius_norm(x) == 5.0

    def test_matches_double_loop(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = rng.standard_normal((7, 3))
            y = rng.standard_normal((7, 3))
            got = frobenius_inner(x, y)
            want = inner_oracle(x, y)
            assert abs(got - want) <= 1e-14 * max(abs(want), 1.0)

    def test_symmetry_exact(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal((9, 4))
        y = rng.standard_normal((9, 4))
        assert frobenius_inner(x, y) == frobenius_inner(y, x)

    def test_norm_squared_is_self_inner(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            x = rng.standard_normal((6, 5))
            nrm = frobenius_norm(x)
            self_inner = frobenius_inner(x, x)
            assert abs(nrm * nrm - self_inner) <= 8 * np.finfo(float).eps * self_inner


class TestFrobeniusNorm:
    def test_zero(self):
        assert frobenius_norm(np.zeros((4, 2))) == 0.0

    def test_three_four_five(self):
        assert frobenius_norm(np.array([[3.0, 4.0]])) == 5.0

    def test_orthonormal_block_is_sqrt_s(self):
        rng = np.random.default_rng(14)
        for s in (2, 5, 8):
            q, _ = qr_thin(rng.standard_normal((40, s)))
            assert abs(frobenius_norm(q) - np.sqrt(s)) <= 1e-12


class TestSpmm:
    def test_identity(self):
        rng = np.random.default_rng(21)
        block = rng.standard_normal((10, 3))
        out = spmm(SparseMatrix.identity(10), block)
        assert np.array_equal(out, block)

    def test_toeplitz_unit_column(self):
        a = gen_toeplitz(6)
        e1 = np.zeros((6, 1))
        e1[0, 0] = 1.0
        col = spmm(a, e1)[:, 0]
        assert np.array_equal(col, a.to_dense()[:, 0])
        assert col[0] == 2.0 and col[4] == -1.0

    def test_random_against_triple_loop(self):
        rng = np.random.default_rng(22)
        for seed in range(6):
            a = gen_random_sparse(50, offdiag_per_row=5, seed=seed)
            block = rng.standard_normal((50, 4))
            got = spmm(a, block)
            want = spmm_oracle(a, block)
            assert_blocks_close(got, want, 1e-13, "spmm")

    def test_small_sizes_exhaustive(self):
        rng = np.random.default_rng(23)
        for n in (1, 2, 3, 5, 17, 64):
            a = gen_random_sparse(n, offdiag_per_row=min(3, n - 1), seed=n)
            block = rng.standard_normal((n, 2))
            assert_blocks_close(spmm(a, block), spmm_oracle(a, block), 1e-13, "spmm")

    def test_dimension_mismatch(self):
        a = gen_toeplitz(6)
        with pytest.raises(DimensionMismatchError):
            spmm(a, np.zeros((5, 2)))


class TestProblemOperator:
    def test_standard_identity(self):
        rng = np.random.default_rng(31)
        v = rng.standard_normal((8, 3))
        op = ProblemOperator.standard(SparseMatrix.identity(8))
        assert np.array_equal(op.apply(v), v)

    def test_sylvester_identity_pair_annihilates(self):
        rng = np.random.default_rng(32)
        v = rng.standard_normal((8, 3))
        op = ProblemOperator.sylvester(SparseMatrix.identity(8), SparseMatrix.identity(3))
        assert frobenius_norm(op.apply(v)) == 0.0

    def test_sylvester_matches_kronecker(self):
        rng = np.random.default_rng(33)
        a = gen_random_sparse(30, seed=7)
        c = SparseMatrix.from_dense(rng.standard_normal((4, 4)))
        op = ProblemOperator.sylvester(a, c)
        kron = sylvester_kron(a.to_dense(), c.to_dense())
        for _ in range(5):
            v = rng.standard_normal((30, 4))
            want = (kron @ v.reshape(-1, order="F")).reshape((30, 4), order="F")
            assert_blocks_close(op.apply(v), want, 1e-13, "sylvester apply")

    def test_adjoint_equals_apply_for_symmetric(self):
        rng = np.random.default_rng(34)
        dense = rng.standard_normal((12, 12))
        a = SparseMatrix.from_dense(dense + dense.T)
        op = ProblemOperator.standard(a)
        v = rng.standard_normal((12, 2))
        assert_blocks_close(op.apply(v), op.apply_adjoint(v), 1e-14, "sym adjoint")

    def test_adjoint_pairing_identity(self):
        rng = np.random.default_rng(35)
        a = gen_random_sparse(20, seed=3)
        c = SparseMatrix.from_dense(rng.standard_normal((3, 3)))
        for op in (ProblemOperator.standard(a), ProblemOperator.sylvester(a, c)):
            for _ in range(10):
                u = rng.standard_normal((20, 3))
                v = rng.standard_normal((20, 3))
                lhs = frobenius_inner(op.apply(u), v)
                rhs = frobenius_inner(u, op.apply_adjoint(v))
                scale = frobenius_norm(u) * frobenius_norm(v) * op.a_norm()
                assert abs(lhs - rhs) <= 1e-13 * scale

    def test_sylvester_adjoint_matches_kron_transpose(self):
        rng = np.random.default_rng(36)
        a = gen_random_sparse(15, seed=9)
        c = SparseMatrix.from_dense(rng.standard_normal((4, 4)))
        op = ProblemOperator.sylvester(a, c)
        kron_t = sylvester_kron(a.to_dense(), c.to_dense()).T
        v = rng.standard_normal((15, 4))
        want = (kron_t @ v.reshape(-1, order="F")).reshape((15, 4), order="F")
        assert_blocks_close(op.apply_adjoint(v), want, 1e-13, "sylvester adjoint")


class TestQrThin:
    def test_orthonormal_input_fixed_point(self):
        rng = np.random.default_rng(41)
        q0, _ = qr_thin(rng.standard_normal((30, 4)))
        q, r = qr_thin(q0)
        assert_blocks_close(q, q0, 1e-13, "qr fixed point")
        assert_blocks_close(r, np.eye(4), 1e-13, "qr r identity")

    def test_single_column(self):
        x = np.array([[3.0], [4.0]])
        q, r = qr_thin(x)
        assert_blocks_close(q, x / 5.0, 1e-15, "unit column")
        assert r.shape == (1, 1) and abs(r[0, 0] - 5.0) <= 1e-15

    def test_orthogonality_and_reconstruction(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            x = rng.standard_normal((100, 8))
            q, r = qr_thin(x)
            assert np.linalg.norm(q.T @ q - np.eye(8)) <= 1e-14 * np.sqrt(8)
            assert np.linalg.norm(q @ r - x) <= 1e-13 * np.linalg.norm(x)

    def test_r_upper_triangular_nonnegative_diag(self):
        rng = np.random.default_rng(43)
        for _ in range(10):
            _, r = qr_thin(rng.standard_normal((20, 6)))
            assert not np.any(np.tril(r, -1))
            assert np.all(np.diag(r) >= 0.0)

    def test_deterministic(self):
        rng = np.random.default_rng(44)
        x = rng.standard_normal((25, 5))
        q1, r1 = qr_thin(x)
        q2, r2 = qr_thin(x.copy())
        assert np.array_equal(q1, q2) and np.array_equal(r1, r2)


class TestSolveSmall:
    def test_identity(self):
        rng = np.random.default_rng(51)
        rhs = rng.standard_normal((4, 2))
        assert np.array_equal(solve_small(np.eye(4), rhs), rhs)

    def test_diagonal(self):
        m = np.diag([2.0, 4.0])
        rhs = np.array([[2.0], [8.0]])
        assert_blocks_close(solve_small(m, rhs), [[1.0], [2.0]], 1e-15, "diag solve")

    def test_random_residual(self):
        rng = np.random.default_rng(52)
        for _ in range(20):
            m = rng.standard_normal((8, 8)) + 4.0 * np.eye(8)
            rhs = rng.standard_normal((8, 3))
            x = solve_small(m, rhs)
            assert np.linalg.norm(m @ x - rhs) <= 1e-12 * np.linalg.norm(rhs)

    def test_singular_raises(self):
        m = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(BreakdownError) as exc:
            solve_small(m, np.ones((2, 1)))
        assert "pivot" in str(exc.value)

    def test_nonsquare_raises(self):
        with pytest.raises(DimensionMismatchError):
            solve_small(np.ones((3, 2)), np.ones((3, 1)))


class TestSolveRightBlock:
    def test_identity(self):
        rng = np.random.default_rng(61)
        rhs = rng.standard_normal((7, 3))
        assert np.array_equal(solve_right_block(rhs, np.eye(3)), rhs)

    def test_qr_round_trip(self):
        rng = np.random.default_rng(62)
        x = rng.standard_normal((20, 4))
        q, r = qr_thin(x)
        got = solve_right_block(q @ r, r)
        assert_blocks_close(got, q, 1e-12, "right solve vs q")

    def test_random_residual_general_m(self):
        rng = np.random.default_rng(63)
        for _ in range(20):
            m = rng.standard_normal((4, 4)) + 3.0 * np.eye(4)
            rhs = rng.standard_normal((20, 4))
            t = solve_right_block(rhs, m)
            assert np.linalg.norm(t @ m - rhs) <= 1e-12 * np.linalg.norm(rhs)

    def test_triangular_path_matches_lu_path(self):
        rng = np.random.default_rng(64)
        r = np.triu(rng.standard_normal((5, 5))) + 3.0 * np.eye(5)
        rhs = rng.standard_normal((12, 5))
        direct = solve_right_block(rhs, r)
        # destroy triangularity detection with an explicit tiny lower entry
        r_full = r.copy()
        r_full[4, 0] = 1e-300
        general = solve_right_block(rhs, r_full)
        assert_blocks_close(direct, general, 1e-12, "triangular vs lu")

    def test_singular_triangular_raises(self):
        r = np.triu(np.ones((3, 3)))
        r[1, 1] = 0.0
        with pytest.raises(BreakdownError):
            solve_right_block(np.ones((5, 3)), r)


class TestSparseMatrix:
    def test_from_coo_sums_duplicates(self):
        rows = np.array([0, 0, 1], dtype=np.int64)
        cols = np.array([1, 1, 0], dtype=np.int64)
        vals = np.array([2.0, 3.0, 1.0])
        a = SparseMatrix.from_coo(2, 2, rows, cols, vals)
        assert a.nnz == 2
        assert np.array_equal(a.to_dense(), [[0.0, 5.0], [1.0, 0.0]])

    def test_from_dense_round_trip(self):
        rng = np.random.default_rng(71)
        dense = rng.standard_normal((9, 6))
        dense[np.abs(dense) < 0.7] = 0.0
        a = SparseMatrix.from_dense(dense)
        assert np.array_equal(a.to_dense(), dense)

    def test_transpose_against_dense(self):
        a = gen_random_sparse(25, seed=8)
        assert np.array_equal(a.transpose().to_dense(), a.to_dense().T)

    def test_constructor_validates(self):
        with pytest.raises(ValueError):
            SparseMatrix(2, 2, np.array([0, 1]), np.array([0]), np.array([1.0]))
        with pytest.raises(ValueError):
            SparseMatrix.from_coo(
                2,
                2,
                np.array([0], dtype=np.int64),
                np.array([5], dtype=np.int64),
                np.array([1.0]),
            )

    def test_max_row_nnz(self):
        a = gen_toeplitz(10)
        assert a.max_row_nnz == 3

    def test_frobenius_norm_matches_dense(self):
        a = gen_random_sparse(30, seed=4)
        assert abs(a.frobenius_norm() - np.linalg.norm(a.to_dense())) <= 1e-13
