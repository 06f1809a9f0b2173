"""Batched banded LU: compiled kernel when available, LAPACK loop otherwise.

Set ``BUBBLELAB_PURE_PYTHON=1`` to force the fallback.  ``BUBBLELAB_THREADS``
caps the threads of the compiled batch loop; each system is solved by one
thread, so results do not depend on the thread count.
"""
from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

if os.environ.get("BUBBLELAB_PURE_PYTHON"):
    from . import _banded_py as _impl
    COMPILED = False
else:
    try:
        from . import _banded as _impl
        COMPILED = True
    except ImportError:  # pragma: no cover - depends on the build
        from . import _banded_py as _impl
        COMPILED = False

__all__ = ["COMPILED", "BandedBatch", "to_band", "thread_count"]


def thread_count() -> int:
    """Thread cap from ``BUBBLELAB_THREADS`` (default 1)."""
    raw = os.environ.get("BUBBLELAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"BUBBLELAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"BUBBLELAB_THREADS must be a positive integer, got {raw!r}")
    return n


def bandwidths(A: sp.spmatrix) -> tuple[int, int]:
    A = A.tocoo()
    d = A.row - A.col
    return int(max(d.max(), 0)), int(max(-d.min(), 0))


def to_band(A: sp.spmatrix, kl: int, ku: int) -> np.ndarray:
    """LAPACK ``gbtrf`` storage (with ``kl`` extra rows for fill-in)."""
    A = A.tocoo()
    n = A.shape[0]
    ab = np.zeros((2 * kl + ku + 1, n))
    ab[kl + ku + A.row - A.col, A.col] = A.data
    return ab


class BandedBatch:
    """LU factors of a stack of banded matrices sharing one sparsity band."""

    def __init__(self, ab: np.ndarray, kl: int, ku: int):
        self.kl, self.ku = kl, ku
        self.lu = np.ascontiguousarray(ab, dtype=float).copy()
        self.ipiv, info = _impl.banded_factor(self.lu, kl, ku, thread_count())
        bad = np.flatnonzero(np.asarray(info))
        if bad.size:
            raise np.linalg.LinAlgError(f"singular banded factor in systems {bad.tolist()}")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve for ``rhs`` of shape ``(M, n)`` or ``(M, n, k)``."""
        squeeze = rhs.ndim == 2
        b = np.ascontiguousarray(rhs[..., None] if squeeze else rhs, dtype=float).copy()
        _impl.banded_solve(self.lu, self.ipiv, self.kl, self.ku, b, thread_count())
        return b[..., 0] if squeeze else b
