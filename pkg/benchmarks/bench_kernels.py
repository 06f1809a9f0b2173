"""Compiled versus pure-Python batched banded LU.

Times ``banded_factor`` + ``banded_solve`` for batches shaped like the
per-mode preconditioner (one banded radial system per angular mode) and an
end-to-end Newton solve under each implementation.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--no-solve]
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from bubblelab import _banded_py
from bubblelab.banded import COMPILED

try:
    from bubblelab import _banded
except ImportError:  # pragma: no cover
    _banded = None

SOLVE_SNIPPET = """
import time
import numpy as np
from bubblelab.grid import PolarGrid
from bubblelab.profiles import BubbleParams, global_profile
from bubblelab.cli import _smooth_perturbation
from bubblelab.solver import CoefficientField, newton_solve
p = BubbleParams(1, 6.0, 1.0)
g = PolarGrid.for_bubbles(4.0, 96, 256, ring=1.0, core=p.core_width)
V = global_profile(p, g.z)
u0 = V + _smooth_perturbation(g, 0.3, 0)
t = time.perf_counter()
u, rep = newton_solve(g, CoefficientField("1"), 1, V[-1], u0, tol=1e-10)
print(time.perf_counter() - t, rep.final_residual)
"""


def batch(M: int, n: int, kl: int, ku: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    ab = np.zeros((M, 2 * kl + ku + 1, n))
    ab[:, kl:, :] = rng.standard_normal((M, kl + ku + 1, n))
    ab[:, kl + ku, :] += 2.0 * (kl + ku + 1)  # diagonal dominance
    return ab


def time_kernel(impl, ab, rhs, kl, ku, repeat):
    def run():
        lu = ab.copy()
        ipiv, _ = impl.banded_factor(lu, kl, ku, 1)
        b = rhs.copy()
        impl.banded_solve(lu, ipiv, kl, ku, b, 1)
        return b

    best = min(timeit.repeat(run, number=1, repeat=repeat))
    return best, run()


def time_solve(pure: bool) -> str:
    env = dict(os.environ)
    env.pop("BUBBLELAB_PURE_PYTHON", None)
    if pure:
        env["BUBBLELAB_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET], env=env, capture_output=True,
                         text=True, check=True)
    t, res = out.stdout.split()
    return f"{float(t):8.3f} s  (residual {float(res):.1e})"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-solve", action="store_true", help="skip the end-to-end Newton timing")
    args = ap.parse_args(argv)
    if _banded is None:
        print("compiled kernel not built; nothing to compare")
        return 1
    print(f"compiled kernel selected at import: {COMPILED}")
    print(f"{'M':>5} {'n':>5} {'kl':>3} {'ku':>3} {'compiled':>11} {'fallback':>11} {'speedup':>8} {'max diff':>9}")
    for M, n, kl, ku in [(65, 96, 2, 2), (129, 128, 2, 2), (513, 128, 2, 2), (129, 256, 4, 4),
                         (1025, 128, 2, 2)]:
        ab = batch(M, n, kl, ku)
        rhs = np.random.default_rng(1).standard_normal((M, n, 1))
        tc, xc = time_kernel(_banded, ab, rhs, kl, ku, args.repeat)
        tp, xp = time_kernel(_banded_py, ab, rhs, kl, ku, args.repeat)
        diff = float(np.max(np.abs(xc - xp)))
        print(f"{M:5d} {n:5d} {kl:3d} {ku:3d} {tc * 1e3:9.2f}ms {tp * 1e3:9.2f}ms "
              f"{tp / tc:7.1f}x {diff:9.1e}")
    if not args.no_solve:
        print("Newton solve, N=1, mu=6, 96 x 256 grid")
        print(f"  compiled: {time_solve(False)}")
        print(f"  fallback: {time_solve(True)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
