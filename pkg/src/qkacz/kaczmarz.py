"""Relaxed row-projection (Kaczmarz) solver.

One step projects the iterate onto the hyperplane of a single equation:

    x <- x + lam * (b_j - a_j @ x) / ||a_j||**2 * a_j

with relaxation ``lam`` in (0, 2].  Rows are chosen cyclically, uniformly at
random, or with probability proportional to their squared norm.  The module
also evaluates the expected-error decay bound and the iteration-count
predictions that follow from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import prng
from ._kernels import CYCLIC, NORM_WEIGHTED, UNIFORM, kaczmarz_sweep
from .linalg import (SpectralSummary, as_matrix, as_vector,
                     least_squares_oracle, spectral_summary)

STRATEGY_KINDS = ("cyclic", "uniform-random", "norm-weighted-random")

_MODE = {
    "cyclic": CYCLIC,
    "uniform-random": UNIFORM,
    "norm-weighted-random": NORM_WEIGHTED,
}


@dataclass(frozen=True)
class SelectionStrategy:
    """Row-selection rule plus the seed of its random stream."""

    kind: str
    seed: int = 0

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown selection kind {self.kind!r}; "
                             f"expected one of {STRATEGY_KINDS}")


class LinearSystem:
    """The pair (A, b) with cached row norms and spectral data.

    Parameters
    ----------
    A : array_like, shape (n, m)
    b : array_like, shape (n,)
    rank_tol : float, optional
        Relative threshold used for the cached spectral summary.
    """

    def __init__(self, A, b, rank_tol: float = 1e-10):
        A = as_matrix(A)
        b = as_vector(b)
        if b.size != A.shape[0]:
            raise ValueError(f"b has {b.size} entries, A has {A.shape[0]} rows")
        self.A = A
        self.b = b
        self.row_norms_sq = np.einsum("ij,ij->i", A, A)
        self.row_norms = np.sqrt(self.row_norms_sq)
        self.spectral: SpectralSummary = spectral_summary(A, rank_tol)
        self._cum = None
        self._solution = None

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[1]

    def row_probabilities(self) -> np.ndarray:
        """Sampling weights p_j = ||a_j||**2 / sum_i ||a_i||**2."""
        total = self.row_norms_sq.sum()
        if total == 0.0:
            raise ValueError("all rows are zero; no sampling distribution")
        return self.row_norms_sq / total

    def cumulative_probabilities(self) -> np.ndarray:
        if self._cum is None:
            self._cum = np.cumsum(self.row_probabilities())
        return self._cum

    def solution(self) -> np.ndarray:
        """Cached minimum-norm least-squares solution."""
        if self._solution is None:
            self._solution = least_squares_oracle(self.A, self.b)
        return self._solution

    def check_normalized(self, tol: float = 1e-10):
        """Require operator norm of A and l2 norm of b to be at most 1."""
        if self.spectral.sigma_max > 1.0 + tol:
            raise ValueError(
                f"operator norm {self.spectral.sigma_max:.6g} exceeds 1; "
                "rescale the system before block-encoded use")
        bnorm = float(np.linalg.norm(self.b))
        if bnorm > 1.0 + tol:
            raise ValueError(
                f"right-hand side norm {bnorm:.6g} exceeds 1; "
                "rescale the system before block-encoded use")


@dataclass
class IterateTrace:
    """The iterate sequence x(0)..x(T) of one run.

    ``errors_sq`` holds squared distances to a reference solution when one
    was supplied, else None.  ``selected_rows`` has one entry per step, so
    ``len(iterates) == len(selected_rows) + 1``.
    """

    iterates: np.ndarray
    selected_rows: np.ndarray
    errors_sq: np.ndarray | None
    lam: float

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]


def _check_lambda(lam: float):
    if not 0.0 < lam <= 2.0:
        raise ValueError(f"relaxation parameter must lie in (0, 2], got {lam}")


def kaczmarz_step(x, sys: LinearSystem, j: int, lam: float = 1.0) -> np.ndarray:
    """One relaxed projection of x onto the hyperplane of row j."""
    _check_lambda(lam)
    x = as_vector(x)
    nrm2 = sys.row_norms_sq[j]
    if nrm2 == 0.0:
        raise ValueError(f"degenerate row {j}: zero norm, projection undefined")
    row = sys.A[j]
    return x + lam * (sys.b[j] - float(row @ x)) / nrm2 * row


def select_row(strategy: SelectionStrategy, sys: LinearSystem, k: int) -> int:
    """Row index for iteration k, reproducible from (strategy.seed, k)."""
    if not np.any(sys.row_norms_sq):
        raise ValueError("all rows are zero; nothing to select")
    if strategy.kind == "cyclic":
        return k % sys.n
    u = prng.uniform(strategy.seed, k)
    if strategy.kind == "uniform-random":
        return min(int(u * sys.n), sys.n - 1)
    cum = sys.cumulative_probabilities()
    return min(int(np.searchsorted(cum, u, side="right")), sys.n - 1)


def run_kaczmarz(sys: LinearSystem, strategy: SelectionStrategy, lam: float,
                 T: int, x0=None, x_sol=None,
                 residual_tol: float | None = None) -> IterateTrace:
    """Run T steps (or stop early at ||A x - b|| <= residual_tol).

    Parameters
    ----------
    sys, strategy, lam
        System, row-selection rule, relaxation parameter.
    T : int
        Number of steps (the cap, when ``residual_tol`` is given).
    x0 : array_like, optional
        Start iterate, zero by default.
    x_sol : array_like, optional
        Reference solution; when given, ``errors_sq`` is populated.
    residual_tol : float, optional
        Residual-norm stopping threshold checked after every step.
    """
    _check_lambda(lam)
    if T < 0:
        raise ValueError("T must be nonnegative")
    x0 = np.zeros(sys.m) if x0 is None else as_vector(x0)
    if x0.size != sys.m:
        raise ValueError(f"x0 has {x0.size} entries, expected {sys.m}")
    if x_sol is not None:
        x_sol = as_vector(x_sol)

    if residual_tol is not None:
        return _run_until_residual(sys, strategy, lam, T, x0, x_sol,
                                   residual_tol)

    mode = _MODE[strategy.kind]
    cum = (sys.cumulative_probabilities() if mode == NORM_WEIGHTED
           else np.empty(0))
    iterates, selected, errors, fail_k, fail_j = kaczmarz_sweep(
        sys.A, sys.b, sys.row_norms_sq, cum, mode, x0, lam, T,
        strategy.seed, x_sol)
    if fail_k >= 0:
        raise ValueError(
            f"degenerate row {fail_j} selected at iteration {fail_k}")
    return IterateTrace(iterates, selected, errors, lam)


def _run_until_residual(sys, strategy, lam, T, x0, x_sol, residual_tol):
    iterates = [x0]
    selected = []
    x = x0
    for k in range(T):
        if float(np.linalg.norm(sys.A @ x - sys.b)) <= residual_tol:
            break
        j = select_row(strategy, sys, k)
        try:
            x = kaczmarz_step(x, sys, j, lam)
        except ValueError as exc:
            raise ValueError(f"iteration {k}: {exc}") from exc
        selected.append(j)
        iterates.append(x)
    iterates = np.array(iterates)
    errors = None
    if x_sol is not None:
        diff = iterates - x_sol
        errors = np.einsum("ij,ij->i", diff, diff)
    return IterateTrace(iterates, np.array(selected, dtype=np.int64),
                        errors, lam)


def convergence_bound(spectral: SpectralSummary, init_err_sq: float,
                      k: int) -> float:
    """Expected-error bound (1 - sigma_min**2 / frob_sq)**k * init_err_sq."""
    if spectral.frob_sq <= 0.0:
        raise ValueError("bound requires a nonzero matrix")
    rate = 1.0 - spectral.sigma_min ** 2 / spectral.frob_sq
    rate = min(max(rate, 0.0), 1.0)
    return rate ** k * init_err_sq


def iteration_count(spectral: SpectralSummary, eps: float) -> int:
    """Steps predicted to shrink the expected squared error by factor eps."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if spectral.sigma_min <= 0.0:
        raise ValueError("no convergence guarantee: smallest singular value is 0")
    ratio = min(spectral.sigma_min ** 2 / spectral.frob_sq, 1.0)
    if ratio == 1.0:
        return 1
    return max(1, math.ceil(math.log(1.0 / eps) / -math.log1p(-ratio)))


def t_upper_bound(spectral: SpectralSummary, eps: float) -> float:
    """Iteration-count upper bound log(1/eps) / log(r k^2 / (r k^2 - 1))."""
    _check_bound_args(spectral, eps)
    x = spectral.rank * spectral.kappa ** 2
    if x <= 1.0:
        raise ValueError(f"rank * kappa**2 = {x:.6g} <= 1; bound undefined")
    return math.log(1.0 / eps) / -math.log1p(-1.0 / x)


def t_lower_bound(spectral: SpectralSummary, eps: float) -> float:
    """Iteration-count lower bound log(1/eps) / log(r / (r - 1)); 0 if r = 1."""
    _check_bound_args(spectral, eps)
    r = spectral.rank
    if r == 1:
        return 0.0
    return math.log(1.0 / eps) / -math.log1p(-1.0 / r)


def _check_bound_args(spectral, eps):
    if spectral.rank < 1:
        raise ValueError("bounds require rank >= 1")
    if not spectral.kappa_defined or not math.isfinite(spectral.kappa):
        raise ValueError("bounds require a finite condition number")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
