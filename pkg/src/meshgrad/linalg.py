"""Dense linear algebra kernels used across the package.

Everything here operates on plain numpy arrays: matrices are 2-d float64
arrays in row-major (C) order, vectors are 1-d float64 arrays. The helpers
validate shapes and finiteness so the numeric modules can assume clean
inputs.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "LinalgError",
    "PowerIterationError",
    "SingularSystemError",
    "as_matrix",
    "as_vector",
    "matmul",
    "matvec",
    "transpose",
    "frobenius_norm",
    "spectral_norm",
    "min_norm_solution",
]


class LinalgError(ValueError):
    """Base class for linear algebra failures."""


class PowerIterationError(LinalgError):
    """Power iteration failed to converge; carries the last estimate."""

    def __init__(self, message, last_estimate):
        super().__init__(message)
        self.last_estimate = last_estimate


class SingularSystemError(LinalgError):
    """Gram system is numerically singular."""


def as_matrix(m) -> np.ndarray:
    """Validate and return `m` as a finite 2-d float64 array."""
    a = np.ascontiguousarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise LinalgError(f"expected a 2-d matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise LinalgError("matrix contains non-finite entries")
    return a


def as_vector(v) -> np.ndarray:
    """Validate and return `v` as a finite 1-d float64 array."""
    a = np.ascontiguousarray(v, dtype=np.float64)
    if a.ndim != 1:
        raise LinalgError(f"expected a 1-d vector, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise LinalgError("vector contains non-finite entries")
    return a


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise LinalgError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def matvec(a, x) -> np.ndarray:
    a, x = as_matrix(a), as_vector(x)
    if a.shape[1] != x.shape[0]:
        raise LinalgError(f"matvec shape mismatch: {a.shape} @ ({x.shape[0]},)")
    return a @ x


def transpose(a) -> np.ndarray:
    return np.ascontiguousarray(as_matrix(a).T)


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a), "fro"))


def _start_vector(n: int) -> np.ndarray:
    # Deterministic start: normalized (1, 2, ..., n). The all-ones vector is
    # orthogonal to the top eigenvector of W - (1/m)11^T, so it must not be
    # used here.
    v = np.arange(1.0, n + 1.0)
    return v / np.linalg.norm(v)


def spectral_norm(m, tol: float = 1e-12, max_iters: int = 10_000) -> float:
    """Largest singular value of `m` via power iteration on M^T M.

    Deterministic: the start vector is the normalized (1, 2, ..., n).
    Returns exactly 0.0 for the all-zeros matrix. Raises
    PowerIterationError if the relative change in the estimate stays above
    `tol` after `max_iters` iterations.
    """
    a = as_matrix(m)
    if a.size == 0:
        raise LinalgError("spectral_norm of an empty matrix")
    if tol <= 0:
        raise LinalgError("tol must be positive")
    if not a.any():
        return 0.0

    v = _start_vector(a.shape[1])
    est = 0.0
    for _ in range(max_iters):
        w = a.T @ (a @ v)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            # v landed in the null space; restart with a perturbed vector.
            v = _start_vector(a.shape[1])[::-1].copy()
            v /= np.linalg.norm(v)
            continue
        new_est = np.sqrt(nw)
        v = w / nw
        if abs(new_est - est) <= tol * max(new_est, 1e-300):
            return float(new_est)
        est = new_est
    raise PowerIterationError(
        f"power iteration did not converge in {max_iters} iterations "
        f"(last estimate {est:.6e})",
        last_estimate=est,
    )


def min_norm_solution(a, b) -> np.ndarray:
    """Least-norm interpolant x = A^T (A A^T)^{-1} b for full-row-rank A.

    Solves the N x N Gram system by Cholesky; on failure (or a condition
    estimate beyond 1e10) a single jitter of 1e-12 * trace/N is added to
    the diagonal before giving up with SingularSystemError.
    """
    a, b = as_matrix(a), as_vector(b)
    n_rows = a.shape[0]
    if b.shape[0] != n_rows:
        raise LinalgError(f"min_norm_solution shape mismatch: {a.shape} vs ({b.shape[0]},)")
    gram = a @ a.T

    def _try_solve(g):
        c = np.linalg.cholesky(g)
        # Condition estimate from the Cholesky diagonal (squared ratio
        # bounds cond(G) from below).
        diag = np.diag(c)
        if diag.min() <= 0 or (diag.max() / diag.min()) ** 2 > 1e10:
            raise np.linalg.LinAlgError("ill-conditioned Gram matrix")
        y = np.linalg.solve(c, b)
        return np.linalg.solve(c.T, y)

    try:
        z = _try_solve(gram)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * np.trace(gram) / n_rows
        try:
            z = _try_solve(gram + jitter * np.eye(n_rows))
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(
                "Gram matrix A A^T is numerically singular (rank-deficient A?)"
            ) from exc
    return a.T @ z
