# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Batched banded LU with partial pivoting (LAPACK ``gbtf2``/``gbtrs`` layout).

Every matrix in the batch uses LAPACK band storage with ``2*kl + ku + 1`` rows:
``A[i, j]`` lives at ``ab[kl + ku + i - j, j]``.  The systems are independent,
so the batch loop runs on ``nthreads`` OpenMP threads without changing results.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport fabs

cnp.import_array()


def banded_factor(double[:, :, ::1] ab, int kl, int ku, int nthreads=1):
    """Factor every matrix of ``ab`` in place; returns pivots ``(M, n)``."""
    cdef Py_ssize_t M = ab.shape[0], n = ab.shape[2]
    cdef Py_ssize_t kv = kl + ku
    cdef Py_ssize_t b, j, i, c, km, jp, ju
    cdef double amax, piv, tmp, lij, ajc
    cdef cnp.ndarray[cnp.int64_t, ndim=2] ipiv_arr = np.zeros((M, n), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] ipiv = ipiv_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] info_arr = np.zeros(M, dtype=np.int64)
    cdef cnp.int64_t[::1] info = info_arr
    for b in prange(M, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(ku + 1, min(kv, n)):
            for i in range(kv - j, kl):
                ab[b, i, j] = 0.0
        ju = 0
        for j in range(n):
            if j + kv < n:
                for i in range(kl):
                    ab[b, i, j + kv] = 0.0
            km = kl if kl < n - 1 - j else n - 1 - j
            jp = 0
            amax = fabs(ab[b, kv, j])
            for i in range(1, km + 1):
                if fabs(ab[b, kv + i, j]) > amax:
                    amax = fabs(ab[b, kv + i, j])
                    jp = i
            ipiv[b, j] = j + jp
            if ab[b, kv + jp, j] == 0.0:
                if info[b] == 0:
                    info[b] = j + 1
                continue
            c = j + ku + jp
            if c > n - 1:
                c = n - 1
            if c > ju:
                ju = c
            if jp != 0:
                for c in range(j, ju + 1):
                    tmp = ab[b, kv + jp - (c - j), c]
                    ab[b, kv + jp - (c - j), c] = ab[b, kv - (c - j), c]
                    ab[b, kv - (c - j), c] = tmp
            piv = ab[b, kv, j]
            for i in range(1, km + 1):
                ab[b, kv + i, j] /= piv
            for c in range(j + 1, ju + 1):
                ajc = ab[b, kv - (c - j), c]
                if ajc != 0.0:
                    for i in range(1, km + 1):
                        ab[b, kv + i - (c - j), c] -= ab[b, kv + i, j] * ajc
    return ipiv_arr, info_arr


def banded_solve(const double[:, :, ::1] lu, const cnp.int64_t[:, ::1] ipiv,
                 int kl, int ku, double[:, :, ::1] rhs, int nthreads=1):
    """Solve in place for ``rhs`` of shape ``(M, n, k)``."""
    cdef Py_ssize_t M = lu.shape[0], n = lu.shape[2], k = rhs.shape[2]
    cdef Py_ssize_t kv = kl + ku
    cdef Py_ssize_t b, j, i, q, l, lm, i0
    cdef double tmp, bj
    for b in prange(M, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(n - 1):
            lm = kl if kl < n - 1 - j else n - 1 - j
            l = ipiv[b, j]
            if l != j:
                for q in range(k):
                    tmp = rhs[b, l, q]
                    rhs[b, l, q] = rhs[b, j, q]
                    rhs[b, j, q] = tmp
            for q in range(k):
                bj = rhs[b, j, q]
                if bj != 0.0:
                    for i in range(1, lm + 1):
                        rhs[b, j + i, q] -= lu[b, kv + i, j] * bj
        for j in range(n - 1, -1, -1):
            i0 = j - kv if j - kv > 0 else 0
            for q in range(k):
                rhs[b, j, q] /= lu[b, kv, j]
                bj = rhs[b, j, q]
                if bj != 0.0:
                    for i in range(i0, j):
                        rhs[b, i, q] -= lu[b, kv + i - j, j] * bj
    return np.asarray(rhs)
