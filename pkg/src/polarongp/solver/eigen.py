"""Lowest eigenpair of a Hermitian momentum block."""

from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as sla
from scipy.sparse.linalg import ArpackNoConvergence

__all__ = ["ConvergenceError", "lowest_eigenpair"]

_DENSE_LIMIT = 2


class ConvergenceError(RuntimeError):
    """Raised when the Krylov eigensolver fails; carries the residual norm."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual norm {residual:.3e})")
        self.residual = residual


def _start_vector(dim: int, dtype) -> np.ndarray:
    # deterministic start with weight on the vacuum (index 0)
    v0 = np.random.default_rng(12345).standard_normal(dim)
    v0[0] += np.sqrt(dim)
    return v0.astype(dtype)


def lowest_eigenpair(matrix, tol: float = 1e-9, maxiter: int | None = None, ncv: int | None = None):
    """Return ``(energy, vector)`` for the lowest eigenvalue of ``matrix``.

    Uses implicitly restarted Lanczos (ARPACK). The result is accepted when
    the residual norm is below ``sqrt(tol)``; for a Hermitian operator the
    eigenvalue error is then bounded by ``residual**2 / gap``, well under
    ``tol`` for any gap larger than ``tol``.
    """
    dim = matrix.shape[0]
    if dim <= _DENSE_LIMIT:
        w, v = la.eigh(matrix.toarray())
        return float(w[0]), v[:, 0]
    if ncv is None:
        ncv = min(dim, 24)
    try:
        w, v = sla.eigsh(
            matrix, k=1, which="SA", tol=min(tol, 1e-12) * 1e-1, v0=_start_vector(dim, matrix.dtype),
            ncv=ncv, maxiter=maxiter or max(1000, 10 * dim),
        )
    except ArpackNoConvergence as err:
        if len(err.eigenvalues):
            vec = err.eigenvectors[:, 0]
            res = float(np.linalg.norm(matrix @ vec - err.eigenvalues[0] * vec))
        else:
            res = float("inf")
        raise ConvergenceError("Lanczos eigensolver did not converge", res) from err
    vec = v[:, 0]
    res = float(np.linalg.norm(matrix @ vec - w[0] * vec))
    if res > np.sqrt(tol):
        raise ConvergenceError("Lanczos residual above tolerance", res)
    return float(w[0]), vec
