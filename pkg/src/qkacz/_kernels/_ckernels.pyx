# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled sweep kernel: same contract and same integer PRNG path as
_pykernels.kaczmarz_sweep."""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

CYCLIC = 0
UNIFORM = 1
NORM_WEIGHTED = 2

cdef enum:
    MODE_CYCLIC = 0
    MODE_UNIFORM = 1

cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)

cdef inline double _uniform(uint64_t seed, uint64_t k) nogil:
    cdef uint64_t z = seed + (k + 1) * <uint64_t>0x9E3779B97F4A7C15
    return <double>(_mix(z) >> 11) * (1.0 / 9007199254740992.0)

cdef inline Py_ssize_t _searchsorted_right(const double[::1] cum, double u) nogil:
    # leftmost index i with u < cum[i]; matches np.searchsorted(side="right")
    cdef Py_ssize_t lo = 0, hi = cum.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


def kaczmarz_sweep(double[:, ::1] A, double[::1] b, double[::1] row_norms_sq,
                   double[::1] cum, int mode, double[::1] x0, double lam,
                   Py_ssize_t T, seed, x_sol=None):
    """See _pykernels.kaczmarz_sweep; identical contract."""
    cdef Py_ssize_t n = A.shape[0], m = A.shape[1]
    cdef uint64_t useed = <uint64_t>(int(seed) & ((1 << 64) - 1))
    cdef cnp.ndarray iterates_arr = np.empty((T + 1, m), dtype=np.float64)
    cdef cnp.ndarray selected_arr = np.full(T, -1, dtype=np.int64)
    cdef double[:, ::1] iterates = iterates_arr
    cdef int64_t[::1] selected = selected_arr

    cdef bint track = x_sol is not None
    cdef cnp.ndarray errors_arr = None
    cdef double[::1] errors = None
    cdef double[::1] sol = None
    if track:
        errors_arr = np.empty(T + 1, dtype=np.float64)
        errors = errors_arr
        sol = np.ascontiguousarray(x_sol, dtype=np.float64)

    cdef cnp.ndarray x_arr = np.array(x0, dtype=np.float64)
    cdef double[::1] x = x_arr

    cdef Py_ssize_t k, j, l
    cdef double u, nrm2, dot, coef, d, acc
    cdef Py_ssize_t fail_k = -1, fail_j = -1

    with nogil:
        for l in range(m):
            iterates[0, l] = x[l]
        if track:
            acc = 0.0
            for l in range(m):
                d = x[l] - sol[l]
                acc += d * d
            errors[0] = acc
        for k in range(T):
            if mode == MODE_CYCLIC:
                j = k % n
            else:
                u = _uniform(useed, <uint64_t>k)
                if mode == MODE_UNIFORM:
                    j = <Py_ssize_t>(u * n)
                    if j > n - 1:
                        j = n - 1
                else:
                    j = _searchsorted_right(cum, u)
                    if j > n - 1:
                        j = n - 1
            nrm2 = row_norms_sq[j]
            if nrm2 == 0.0:
                fail_k = k
                fail_j = j
                break
            dot = 0.0
            for l in range(m):
                dot += A[j, l] * x[l]
            coef = lam * (b[j] - dot) / nrm2
            for l in range(m):
                x[l] += coef * A[j, l]
            selected[k] = j
            for l in range(m):
                iterates[k + 1, l] = x[l]
            if track:
                acc = 0.0
                for l in range(m):
                    d = x[l] - sol[l]
                    acc += d * d
                errors[k + 1] = acc

    return iterates_arr, selected_arr, errors_arr, fail_k, fail_j
