"""Timing comparison of the numba kernels against the numpy fallback.

Runs the two hot kernels on simulator-scale workloads in this process,
then re-executes itself with WIRETAP_NO_NUMBA=1 to time the other path.

    python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import os
import subprocess
import sys
import time

import numpy as np

from wiretap._kernels import USE_NUMBA, codeword_scores, exact_z_table


def _bench(fn, repeats=5):
    fn()  # warm-up; includes the numba compile on the jit path
    best = min(
        (lambda t0: (fn(), time.perf_counter() - t0)[1])(time.perf_counter())
        for _ in range(repeats)
    )
    return best


def main() -> None:
    rng = np.random.default_rng(0)

    total, n = 65536, 200
    cb = rng.integers(0, 2, size=(total, n), dtype=np.int64)
    table = rng.normal(size=(2, 2))
    y = rng.integers(0, 2, size=n, dtype=np.int64)
    t_scores = _bench(lambda: codeword_scores(cb, table, y))

    total, n, msgs = 512, 8, 8
    cb2 = rng.integers(0, 2, size=(total, n), dtype=np.int64)
    wz = np.array([[0.8, 0.2], [0.2, 0.8]])
    t_table = _bench(lambda: exact_z_table(cb2, wz, msgs), repeats=3)

    label = "numba" if USE_NUMBA else "numpy"
    print(f"{label:>6}  codeword_scores(65536x200): {t_scores * 1e3:8.2f} ms")
    print(f"{label:>6}  exact_z_table(512x8, |Z|=2): {t_table * 1e3:8.2f} ms")

    if USE_NUMBA and os.environ.get("_WIRETAP_BENCH_CHILD") != "1":
        env = dict(os.environ, WIRETAP_NO_NUMBA="1", _WIRETAP_BENCH_CHILD="1")
        subprocess.run([sys.executable, os.path.abspath(__file__)], env=env, check=True)


if __name__ == "__main__":
    main()
