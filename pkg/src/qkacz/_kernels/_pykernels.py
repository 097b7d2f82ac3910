"""Pure-numpy sweep kernel, the fallback when the compiled extension is absent.

Row selection is integer splitmix64 arithmetic, identical bit for bit to the
compiled kernel; only the floating-point accumulation order may differ at the
last ulp between the two implementations.
"""

import numpy as np

from ..prng import uniform

CYCLIC = 0
UNIFORM = 1
NORM_WEIGHTED = 2


def kaczmarz_sweep(A, b, row_norms_sq, cum, mode, x0, lam, T, seed, x_sol=None):
    """Run T relaxed row-projection steps.

    Returns ``(iterates, selected, errors_sq, fail_step, fail_row)`` where
    ``iterates`` is (T+1, m), ``selected`` is (T,), ``errors_sq`` is (T+1,)
    or None when no reference solution is given.  ``fail_step`` is -1 on
    success; otherwise the iteration at which a zero-norm row was selected
    (entries past that point are unspecified).
    """
    n, m = A.shape
    x = np.array(x0, dtype=np.float64)
    iterates = np.empty((T + 1, m))
    selected = np.full(T, -1, dtype=np.int64)
    errors = None
    iterates[0] = x
    if x_sol is not None:
        errors = np.empty(T + 1)
        d = x - x_sol
        errors[0] = float(d @ d)
    for k in range(T):
        if mode == CYCLIC:
            j = k % n
        else:
            u = uniform(seed, k)
            if mode == UNIFORM:
                j = min(int(u * n), n - 1)
            else:
                j = min(int(np.searchsorted(cum, u, side="right")), n - 1)
        nrm2 = row_norms_sq[j]
        if nrm2 == 0.0:
            return iterates, selected, errors, k, j
        row = A[j]
        coef = lam * (b[j] - float(row @ x)) / nrm2
        x += coef * row
        selected[k] = j
        iterates[k + 1] = x
        if errors is not None:
            d = x - x_sol
            errors[k + 1] = float(d @ d)
    return iterates, selected, errors, -1, -1
