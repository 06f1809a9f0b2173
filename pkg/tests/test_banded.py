import os
import subprocess
import sys

import numpy as np
import pytest

from bubblelab import _banded_py
from bubblelab.banded import BandedBatch, bandwidths, thread_count, to_band

try:
    from bubblelab import _banded
except ImportError:  # pragma: no cover
    _banded = None


def random_batch(M, n, kl, ku, seed=0):
    rng = np.random.default_rng(seed)
    mats = []
    for _ in range(M):
        A = np.zeros((n, n))
        for k in range(-kl, ku + 1):
            A += np.diag(rng.standard_normal(n - abs(k)), k)
        A += np.diag(np.full(n, 0.1))  # keep it nonsingular but force pivoting
        mats.append(A)
    return mats


def test_band_storage_round_trip():
    import scipy.sparse as sp
    A = sp.csr_matrix(random_batch(1, 12, 2, 3)[0])
    kl, ku = bandwidths(A)
    assert (kl, ku) == (2, 3)
    ab = to_band(A, kl, ku)
    assert ab.shape == (2 * kl + ku + 1, 12)


def test_batch_solves_dense_reference():
    import scipy.sparse as sp
    mats = random_batch(5, 20, 2, 2)
    ab = np.stack([to_band(sp.csr_matrix(A), 2, 2) for A in mats])
    rhs = np.random.default_rng(1).standard_normal((5, 20))
    x = BandedBatch(ab, 2, 2).solve(rhs)
    for A, b, xi in zip(mats, rhs, x):
        np.testing.assert_allclose(A @ xi, b, atol=1e-10)


def test_singular_system_is_reported():
    ab = np.zeros((2, 5, 6))
    ab[:, 2, :] = 1.0
    ab[1, 2, 3] = 0.0
    with pytest.raises(np.linalg.LinAlgError, match=r"\[1\]"):
        BandedBatch(ab, 1, 1)


@pytest.mark.skipif(_banded is None, reason="compiled kernel not built")
@pytest.mark.parametrize("threads", [1, 2, 8])
def test_compiled_matches_fallback_bitwise(threads):
    import scipy.sparse as sp
    mats = random_batch(33, 40, 3, 2, seed=3)
    ab = np.stack([to_band(sp.csr_matrix(A), 3, 2) for A in mats])
    rhs = np.random.default_rng(4).standard_normal((33, 40, 2))
    out = []
    for impl, nt in ((_banded, threads), (_banded_py, 1)):
        lu = ab.copy()
        ipiv, info = impl.banded_factor(lu, 3, 2, nt)
        b = rhs.copy()
        impl.banded_solve(lu, ipiv, 3, 2, b, nt)
        out.append(b)
    np.testing.assert_allclose(out[0], out[1], rtol=1e-12, atol=1e-12)


def test_thread_count_validation(monkeypatch):
    monkeypatch.setenv("BUBBLELAB_THREADS", "3")
    assert thread_count() == 3
    for bad in ("0", "two"):
        monkeypatch.setenv("BUBBLELAB_THREADS", bad)
        with pytest.raises(ValueError):
            thread_count()


def test_pure_python_switch():
    code = "import bubblelab.banded as b; print(b.COMPILED)"
    env = dict(os.environ, BUBBLELAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "False"
