# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in ``_pykernels``.

Inner loops are written as axpy updates over contiguous arrays so the C
compiler can vectorise them without reassociating floating-point sums.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def segment_f2(const double[::1] profile, Py_ssize_t s, basis, bint from_end=False):
    # transpose once so each basis vector is contiguous
    cdef const double[:, ::1] bt = np.ascontiguousarray(np.asarray(basis, dtype=np.float64).T)
    cdef Py_ssize_t n = profile.shape[0]
    cdef Py_ssize_t ns = n // s
    cdef Py_ssize_t p = bt.shape[0]
    cdef Py_ssize_t v, i, j, start
    cdef double c, acc
    cdef const double* y
    cdef const double* bj
    cdef double[::1] resid_arr = np.empty(s, dtype=np.float64)
    cdef double* resid = &resid_arr[0]
    out_arr = np.empty(ns, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for v in range(ns):
            start = n - (v + 1) * s if from_end else v * s
            y = &profile[start]
            for i in range(s):
                resid[i] = y[i]
            # project out each orthonormal column in turn
            for j in range(p):
                bj = &bt[j, 0]
                c = 0.0
                for i in range(s):
                    c += bj[i] * y[i]
                for i in range(s):
                    resid[i] -= c * bj[i]
            acc = 0.0
            for i in range(s):
                acc += resid[i] * resid[i]
            out[v] = acc / s
    return out_arr


DEF BLOCK = 512


cdef int _parity(const double* k, Py_ssize_t m) noexcept nogil:
    """+1 for an even kernel, -1 for an odd one, 0 otherwise (exact test)."""
    cdef Py_ssize_t j
    cdef bint even = True, odd = True
    for j in range(m // 2):
        if k[j] != k[m - 1 - j]:
            even = False
        if k[j] != -k[m - 1 - j]:
            odd = False
    if m % 2 and k[m // 2] != 0.0:
        odd = False
    return 1 if even else (-1 if odd else 0)


cdef void _correlate_valid(const double* xv, Py_ssize_t n_out, const double* k, Py_ssize_t m,
                           double* out) noexcept nogil:
    # outputs are processed in L1-sized blocks; a symmetric kernel is folded
    # so each tap pair costs one multiply
    cdef Py_ssize_t i, j, i0, nb, last = m - 1
    cdef double kj
    cdef double acc[BLOCK]
    cdef const double* xa
    cdef const double* xb
    cdef int par = _parity(k, m)
    for i0 in range(0, n_out, BLOCK):
        nb = min(BLOCK, n_out - i0)
        for i in range(nb):
            acc[i] = 0.0
        if par == 0:
            for j in range(m):
                kj = k[j]
                xa = xv + i0 + j
                for i in range(nb):
                    acc[i] += kj * xa[i]
        else:
            for j in range(m // 2):
                kj = k[j]
                xa = xv + i0 + j
                xb = xv + i0 + last - j
                if par > 0:
                    for i in range(nb):
                        acc[i] += kj * (xa[i] + xb[i])
                else:
                    for i in range(nb):
                        acc[i] += kj * (xa[i] - xb[i])
            if m % 2:
                kj = k[m // 2]
                xa = xv + i0 + m // 2
                for i in range(nb):
                    acc[i] += kj * xa[i]
        for i in range(nb):
            out[i0 + i] = acc[i]


def correlate(x, kernel, bint periodic):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] k = np.ascontiguousarray(kernel, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t m = k.shape[0]
    cdef Py_ssize_t half = m // 2
    cdef Py_ssize_t n_out
    cdef const double[::1] src = xv
    if periodic:
        if m > n:
            raise ValueError("periodic correlation needs len(kernel) <= len(x)")
        arr = np.asarray(xv)
        src = np.concatenate([arr[n - half:], arr, arr[:m - 1 - half]])
        n_out = n
    else:
        n_out = max(n - m + 1, 0)
    out_arr = np.empty(n_out, dtype=np.float64)
    cdef double[::1] out = out_arr
    if n_out > 0 and m > 0:
        with nogil:
            _correlate_valid(&src[0], n_out, &k[0], m, &out[0])
    elif n_out > 0:
        out_arr[:] = 0.0
    return out_arr


def local_maxima(a, double floor):
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0]
    cdef Py_ssize_t i, count = 0
    if n < 3:
        return np.empty(0, dtype=np.intp)
    out_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] out = out_arr
    with nogil:
        for i in range(1, n - 1):
            # branch-free append
            out[count] = i
            count += (av[i] > av[i - 1]) & (av[i] >= av[i + 1]) & (av[i] >= floor)
    return out_arr[:count].copy()
