"""Pure-Python fallback for :mod:`bubblelab._banded` built on LAPACK.

The loop is sequential; ``nthreads`` is accepted for signature compatibility.
"""
import numpy as np
from scipy.linalg import lapack


def banded_factor(ab, kl, ku, nthreads=1):
    M, _, n = ab.shape
    ipiv = np.zeros((M, n), dtype=np.int64)
    info = np.zeros(M, dtype=np.int64)
    for b in range(M):
        lu, piv, inf = lapack.dgbtrf(ab[b], kl, ku, overwrite_ab=False)
        ab[b] = lu
        ipiv[b] = piv
        info[b] = inf
    return ipiv, info


def banded_solve(lu, ipiv, kl, ku, rhs, nthreads=1):
    M = lu.shape[0]
    for b in range(M):
        x, inf = lapack.dgbtrs(lu[b], kl, ku, rhs[b], ipiv[b].astype(np.int32))
        if inf:
            raise np.linalg.LinAlgError(f"dgbtrs failed with info={inf}")
        rhs[b] = x
    return rhs
