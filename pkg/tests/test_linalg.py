import warnings

import numpy as np
import pytest

from bakhvalov_nipg.linalg import (
    BlockLU,
    BlockTridiagonalMatrix,
    IllConditionedWarning,
    SingularBlockError,
    block_lu_solve,
    condition_estimate,
    dense_solve,
)
from bakhvalov_nipg.mesh import MeshConfig, bakhvalov_mesh
from bakhvalov_nipg.nipg import assemble, two_level_penalty, layer_test_problem


def random_system(rng, n=None, s=None):
    n = n or int(rng.integers(1, 17))
    s = s or int(rng.integers(1, 5))
    lower = rng.uniform(-1, 1, (n - 1, s, s))
    upper = rng.uniform(-1, 1, (n - 1, s, s))
    diag = rng.uniform(-1, 1, (n, s, s)) + np.eye(s) * (3 * s + 1)
    return BlockTridiagonalMatrix(diag, lower, upper), rng.standard_normal(n * s)


def test_identity():
    A = BlockTridiagonalMatrix.identity(5, 3)
    rhs = np.arange(15.0)
    np.testing.assert_array_equal(block_lu_solve(A, rhs), rhs)
    assert condition_estimate(A) == pytest.approx(1.0)


def test_single_block_matches_dense():
    rng = np.random.default_rng(0)
    A, rhs = random_system(rng, n=1, s=4)
    np.testing.assert_allclose(block_lu_solve(A, rhs), dense_solve(A.to_dense(), rhs), rtol=1e-14)


def test_random_systems_match_dense_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        A, rhs = random_system(rng)
        x = block_lu_solve(A, rhs)
        ref = dense_solve(A.to_dense(), rhs)
        assert np.linalg.norm(x - ref) <= 1e-10 * np.linalg.norm(ref)
        assert np.linalg.norm(A @ x - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_dense_solve_examples():
    np.testing.assert_allclose(dense_solve(np.eye(3), [1.0, 2.0, 3.0]), [1, 2, 3])
    np.testing.assert_allclose(dense_solve([[2.0, 0.0], [0.0, 4.0]], [2.0, 8.0]), [1, 2])
    P = np.eye(4)[[2, 0, 3, 1]]
    b = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_allclose(dense_solve(P, b), P.T @ b)


def test_dense_solve_against_numpy():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((12, 12))
    b = rng.standard_normal(12)
    np.testing.assert_allclose(dense_solve(A, b), np.linalg.solve(A, b), rtol=1e-10)


def test_dense_solve_singular():
    with pytest.raises(np.linalg.LinAlgError):
        dense_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), [1.0, 1.0])


def test_singular_block_reports_index():
    diag = np.stack([np.eye(2), np.zeros((2, 2)), np.eye(2)])
    A = BlockTridiagonalMatrix(diag, np.zeros((2, 2, 2)), np.zeros((2, 2, 2)))
    with pytest.raises(SingularBlockError) as info:
        block_lu_solve(A, np.ones(6))
    assert info.value.block == 1
    assert condition_estimate(A) == np.inf


def test_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError):
        BlockTridiagonalMatrix(np.zeros((3, 2, 2)), np.zeros((1, 2, 2)), np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        BlockTridiagonalMatrix(np.full((1, 1, 1), np.nan), np.zeros((0, 1, 1)), np.zeros((0, 1, 1)))
    A = BlockTridiagonalMatrix.identity(2, 2)
    with pytest.raises(ValueError):
        block_lu_solve(A, np.ones(3))


def test_diagonal_condition():
    A = BlockTridiagonalMatrix(np.diag([1.0, 1e-8])[None], np.zeros((0, 2, 2)), np.zeros((0, 2, 2)))
    est = condition_estimate(A)
    assert 1e7 <= est <= 1e9


def test_ill_conditioned_warning():
    A = BlockTridiagonalMatrix(np.diag([1.0, 1e-17])[None], np.zeros((0, 2, 2)), np.zeros((0, 2, 2)))
    with pytest.warns(IllConditionedWarning):
        block_lu_solve(A, np.ones(2))


def test_condition_estimate_against_exact():
    rng = np.random.default_rng(11)
    for _ in range(10):
        A, _ = random_system(rng)
        exact = np.linalg.cond(A.to_dense(), 1)
        est = condition_estimate(A)
        assert exact / 10 <= est <= exact * (1 + 1e-10)


@pytest.mark.parametrize("k, eps, N", [(3, 1e-9, 512), (2, 1e-9, 128)])
def test_condition_estimate_on_nipg_matrix(k, eps, N):
    # the estimate tracks the exact 1-norm condition number of the assembled matrix;
    # it grows like N^3 and is insensitive to eps
    problem = layer_test_problem(eps)
    mesh = bakhvalov_mesh(MeshConfig(N, k + 1, 2.0, eps))
    A = assemble(problem, mesh, k, two_level_penalty(N)).matrix
    exact = np.linalg.cond(A.to_dense(), 1)
    est = condition_estimate(A)
    assert exact / 10 <= est <= exact * (1 + 1e-8)


def test_transpose_and_matvec():
    rng = np.random.default_rng(3)
    A, x = random_system(rng, n=5, s=3)
    np.testing.assert_allclose(A @ x, A.to_dense() @ x, rtol=1e-14)
    np.testing.assert_array_equal(A.transpose().to_dense(), A.to_dense().T)
    assert A.norm1() == pytest.approx(np.abs(A.to_dense()).sum(axis=0).max())


def test_determinism():
    rng = np.random.default_rng(9)
    A, rhs = random_system(rng, n=12, s=4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a = BlockLU(A).solve(rhs)
        b = BlockLU(A).solve(rhs)
    assert a.tobytes() == b.tobytes()
