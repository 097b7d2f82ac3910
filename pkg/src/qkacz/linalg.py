"""Dense linear-algebra kernels shared by every other module.

Thin, contract-checked wrappers around LAPACK (via numpy) for SVD, spectral
summaries, and minimum-norm least squares.  All tolerances are relative to
the Frobenius norm so the contracts are scale-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class SpectralSummary:
    """Singular-value digest of a real matrix.

    Attributes
    ----------
    sigma_min : float
        Smallest singular value above the rank threshold (0.0 for the zero
        matrix).
    sigma_max : float
        Largest singular value.
    rank : int
        Number of singular values above ``rank_tol * sigma_max``.
    frob_sq : float
        Squared Frobenius norm, the sum of all squared singular values.
    kappa : float
        ``sigma_max / sigma_min``; ``inf`` when undefined.
    kappa_defined : bool
        False for rank-0 matrices, where the condition number has no meaning.
    """

    sigma_min: float
    sigma_max: float
    rank: int
    frob_sq: float
    kappa: float
    kappa_defined: bool = True


def as_matrix(M) -> np.ndarray:
    """Validate and return M as a finite 2-d float64 array (n, m >= 1)."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"expected a 2-d matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return M


def as_vector(v) -> np.ndarray:
    """Validate and return v as a finite 1-d float64 array."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def svd(M):
    """Reduced singular value decomposition M = U @ diag(S) @ V.T.

    Parameters
    ----------
    M : array_like
        Real matrix, any shape.

    Returns
    -------
    (U, S, V)
        ``S`` sorted descending with nonnegative entries; ``U`` and ``V``
        have orthonormal columns.
    """
    M = as_matrix(M)
    try:
        U, S, Vh = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"SVD did not converge for a {M.shape[0]}x{M.shape[1]} matrix: {exc}"
        ) from exc
    return U, S, Vh.T


def spectral_summary(M, rank_tol: float = DEFAULT_RANK_TOL) -> SpectralSummary:
    """Compute the SpectralSummary of M.

    ``rank_tol`` is relative: a singular value counts toward the rank when it
    exceeds ``rank_tol * sigma_max``.
    """
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    _, S, _ = svd(M)
    sigma_max = float(S[0]) if S.size else 0.0
    frob_sq = float(S @ S)
    if sigma_max == 0.0:
        return SpectralSummary(0.0, 0.0, 0, 0.0, float("inf"), kappa_defined=False)
    above = S > rank_tol * sigma_max
    rank = int(np.count_nonzero(above))
    sigma_min = float(S[above][-1]) if rank else 0.0
    kappa = sigma_max / sigma_min if sigma_min > 0 else float("inf")
    return SpectralSummary(sigma_min, sigma_max, rank, frob_sq, kappa,
                           kappa_defined=sigma_min > 0)


def least_squares_oracle(A, b) -> np.ndarray:
    """Minimum-norm least-squares solution, the pseudoinverse applied to b.

    The result x satisfies the normal equations A.T @ (A @ x - b) = 0.
    """
    A = as_matrix(A)
    b = as_vector(b)
    if b.size != A.shape[0]:
        raise ValueError(f"b has {b.size} entries, A has {A.shape[0]} rows")
    if not np.any(A):
        raise ValueError("zero matrix has no least-squares oracle")
    x, _, _, _ = np.linalg.lstsq(A, b, rcond=None)
    return x
