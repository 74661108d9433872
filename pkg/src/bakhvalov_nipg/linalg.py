"""Block-tridiagonal direct solver, a dense LU oracle and a 1-norm condition estimate."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

ILL_CONDITIONED = 1e15


class SingularBlockError(np.linalg.LinAlgError):
    """A pivot block became exactly singular during block elimination."""

    def __init__(self, block):
        super().__init__(f"pivot block {block} is singular")
        self.block = block


class IllConditionedWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class BlockTridiagonalMatrix:
    """Square matrix with ``n`` diagonal blocks of size ``s``.

    ``lower[i]`` couples block row ``i + 1`` to block column ``i``;
    ``upper[i]`` couples block row ``i`` to block column ``i + 1``.
    """

    diag: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        n, s, s2 = d.shape
        if s != s2:
            raise ValueError("diagonal blocks must be square")
        for name in ("lower", "upper"):
            off = np.asarray(getattr(self, name), dtype=float).reshape(-1, s, s)
            if off.shape[0] != n - 1:
                raise ValueError(f"{name} needs {n - 1} blocks, got {off.shape[0]}")
            object.__setattr__(self, name, off)
        object.__setattr__(self, "diag", d)
        if not all(np.all(np.isfinite(a)) for a in (d, self.lower, self.upper)):
            raise ValueError("matrix has non-finite entries")

    @property
    def n_blocks(self):
        return self.diag.shape[0]

    @property
    def block_size(self):
        return self.diag.shape[1]

    @property
    def shape(self):
        n = self.n_blocks * self.block_size
        return (n, n)

    @classmethod
    def identity(cls, n, s):
        return cls(np.tile(np.eye(s), (n, 1, 1)), np.zeros((n - 1, s, s)), np.zeros((n - 1, s, s)))

    def matvec(self, x):
        x = np.asarray(x, dtype=float).reshape(self.n_blocks, self.block_size)
        y = np.einsum("nij,nj->ni", self.diag, x)
        y[1:] += np.einsum("nij,nj->ni", self.lower, x[:-1])
        y[:-1] += np.einsum("nij,nj->ni", self.upper, x[1:])
        return y.ravel()

    __matmul__ = matvec

    def transpose(self):
        t = lambda a: np.swapaxes(a, 1, 2)
        return BlockTridiagonalMatrix(t(self.diag), t(self.upper), t(self.lower))

    def to_dense(self):
        n, s = self.n_blocks, self.block_size
        A = np.zeros((n * s, n * s))
        for i in range(n):
            A[i * s : (i + 1) * s, i * s : (i + 1) * s] = self.diag[i]
            if i + 1 < n:
                A[(i + 1) * s : (i + 2) * s, i * s : (i + 1) * s] = self.lower[i]
                A[i * s : (i + 1) * s, (i + 1) * s : (i + 2) * s] = self.upper[i]
        return A

    def norm1(self):
        """Exact 1-norm (maximum absolute column sum)."""
        col = np.abs(self.diag).sum(axis=1)
        col[:-1] += np.abs(self.lower).sum(axis=1)
        col[1:] += np.abs(self.upper).sum(axis=1)
        return float(col.max())


class BlockLU:
    """Block LU factorization without inter-block pivoting.

    Each Schur-complement pivot block is factorized by LU with partial
    pivoting. Elimination is sequential over the blocks.
    """

    def __init__(self, A):
        self.A = A
        n = A.n_blocks
        self.pivots = []
        self.gains = np.empty_like(A.lower)  # L_i D'_{i-1}^{-1}
        for i in range(n):
            D = A.diag[i].copy()
            if i > 0:
                D -= self.gains[i - 1] @ A.upper[i - 1]
            if not np.all(np.isfinite(D)):
                raise SingularBlockError(i)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                lu, piv = scipy.linalg.lu_factor(D, check_finite=False)
            if np.any(np.diag(lu) == 0.0):
                raise SingularBlockError(i)
            self.pivots.append((lu, piv))
            if i + 1 < n:
                # gains = L_{i+1} D_i^{-1}  <=>  D_i^T gains^T = L_{i+1}^T
                self.gains[i] = scipy.linalg.lu_solve(
                    (lu, piv), A.lower[i].T, trans=1, check_finite=False
                ).T

    def solve(self, rhs):
        A = self.A
        n, s = A.n_blocks, A.block_size
        y = np.array(rhs, dtype=float).reshape(n, s)
        for i in range(1, n):
            y[i] -= self.gains[i - 1] @ y[i - 1]
        x = np.empty_like(y)
        x[-1] = scipy.linalg.lu_solve(self.pivots[-1], y[-1], check_finite=False)
        for i in range(n - 2, -1, -1):
            x[i] = scipy.linalg.lu_solve(self.pivots[i], y[i] - A.upper[i] @ x[i + 1], check_finite=False)
        return x.ravel()


def block_lu_solve(A, rhs):
    """Solve ``A x = rhs`` for a block-tridiagonal ``A``.

    Raises ``SingularBlockError`` (carrying the block index) on an exactly
    singular pivot block, and emits ``IllConditionedWarning`` if the 1-norm
    condition estimate exceeds 1e15.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.size != A.shape[0]:
        raise ValueError(f"rhs has length {rhs.size}, expected {A.shape[0]}")
    lu = BlockLU(A)
    x = lu.solve(rhs)
    cond = condition_estimate(A, lu)
    if cond > ILL_CONDITIONED:
        warnings.warn(f"condition estimate {cond:.2e} exceeds {ILL_CONDITIONED:.0e}",
                      IllConditionedWarning, stacklevel=2)
    return x


def dense_solve(A, rhs):
    """Gaussian elimination with partial pivoting on a dense matrix.

    Kept deliberately independent of LAPACK; used as the reference solution
    for the block solver.
    """
    A = np.array(A, dtype=float)
    b = np.array(rhs, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape[0] != n:
        raise ValueError("dense_solve needs a square matrix and matching rhs")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite input")
    for col in range(n):
        p = col + int(np.argmax(np.abs(A[col:, col])))
        if A[p, col] == 0.0:
            raise np.linalg.LinAlgError(f"matrix is singular (column {col})")
        if p != col:
            A[[col, p]] = A[[p, col]]
            b[[col, p]] = b[[p, col]]
        factors = A[col + 1 :, col] / A[col, col]
        A[col + 1 :, col:] -= np.outer(factors, A[col, col:])
        b[col + 1 :] -= factors * b[col]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - A[i, i + 1 :] @ x[i + 1 :]) / A[i, i]
    return x


def condition_estimate(A, lu=None, maxiter=5):
    """Estimate the 1-norm condition number ``||A||_1 ||A^{-1}||_1``.

    ``||A^{-1}||_1`` comes from Hager's power iteration, which needs solves
    with A and with its transpose. Returns ``inf`` when A is singular.
    """
    try:
        lu = lu or BlockLU(A)
        lu_t = BlockLU(A.transpose())
    except SingularBlockError:
        return np.inf
    n = A.shape[0]
    x = np.full(n, 1.0 / n)
    est = 0.0
    for _ in range(maxiter):
        y = lu.solve(x)
        est = np.abs(y).sum()
        xi = np.where(y >= 0, 1.0, -1.0)
        z = lu_t.solve(xi)
        j = int(np.argmax(np.abs(z)))
        if np.abs(z[j]) <= z @ x:
            break
        x = np.zeros(n)
        x[j] = 1.0
    if not np.isfinite(est):
        return np.inf
    return A.norm1() * est
