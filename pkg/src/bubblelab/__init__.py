"""Bubble profiles, disk Green's functions, a polar Newton solver and blow-up
diagnostics for ``Delta u + |x|^{2N} H(x) e^u = 0``.

BLAS reductions change with the thread count, so the BLAS pools are pinned to
one thread unless the environment already says otherwise; parallelism is
controlled by ``BUBBLELAB_THREADS`` (see :mod:`bubblelab.banded`).
"""
import os as _os

for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    _os.environ.setdefault(_var, "1")

__version__ = "0.1.0"
