"""Hot numeric kernels for the simulator.

Two interchangeable implementations: numba @njit kernels (default) and a
pure-numpy fallback.  Set WIRETAP_NO_NUMBA=1 to force the fallback.  Each
path is deterministic; the two agree to float rounding (summation order
differs).  benchmarks/bench_kernels.py compares their speed.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("WIRETAP_NO_NUMBA", "").lower()
USE_NUMBA = _flag not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit, prange
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

__all__ = ["USE_NUMBA", "codeword_scores", "exact_z_table"]


# -- pure numpy implementations ---------------------------------------------


def _codeword_scores_np(codebook: np.ndarray, log_probs: np.ndarray,
                        out_vec: np.ndarray) -> np.ndarray:
    """scores[l] = sum_i log_probs[codebook[l, i], out_vec[i]]."""
    return log_probs[codebook, out_vec[None, :]].sum(axis=1)


def _exact_z_table_np(codebook: np.ndarray, wz: np.ndarray, msg_count: int) -> np.ndarray:
    """table[m, j] = (1/K) sum_{l in C(m)} prod_i wz[cb[l, i], z_i(j)].

    z-block index j decodes big-endian in base |Z| (first letter most
    significant), matching np.ndindex order.
    """
    total, n = codebook.shape
    nz = wz.shape[1]
    k = total // msg_count
    table = np.zeros((msg_count, nz**n))
    for l in range(total):
        t = wz[codebook[l, 0]]
        for i in range(1, n):
            t = (t[:, None] * wz[codebook[l, i]][None, :]).ravel()
        table[l // k] += t
    return table / k


# -- numba implementations ---------------------------------------------------

if USE_NUMBA:

    @njit(cache=True, parallel=True)
    def _codeword_scores_nb(codebook, log_probs, out_vec):
        total, n = codebook.shape
        scores = np.empty(total)
        for l in prange(total):
            acc = 0.0
            for i in range(n):
                acc += log_probs[codebook[l, i], out_vec[i]]
            scores[l] = acc
        return scores

    @njit(cache=True)
    def _exact_z_table_nb(codebook, wz, msg_count):
        total, n = codebook.shape
        nz = wz.shape[1]
        k = total // msg_count
        size = nz**n
        table = np.zeros((msg_count, size))
        digits = np.empty(n, dtype=np.int64)
        for j in range(size):
            rem = j
            for i in range(n - 1, -1, -1):
                digits[i] = rem % nz
                rem //= nz
            for l in range(total):
                p = 1.0
                for i in range(n):
                    p *= wz[codebook[l, i], digits[i]]
                table[l // k, j] += p
        return table / k


def codeword_scores(codebook: np.ndarray, log_probs: np.ndarray,
                    out_vec: np.ndarray) -> np.ndarray:
    """Per-codeword sum of single-letter log-probabilities along out_vec."""
    codebook = np.ascontiguousarray(codebook, dtype=np.int64)
    out_vec = np.ascontiguousarray(out_vec, dtype=np.int64)
    log_probs = np.ascontiguousarray(log_probs, dtype=np.float64)
    if USE_NUMBA:
        return _codeword_scores_nb(codebook, log_probs, out_vec)
    return _codeword_scores_np(codebook, log_probs, out_vec)


def exact_z_table(codebook: np.ndarray, wz: np.ndarray, msg_count: int) -> np.ndarray:
    """Exact eavesdropper block distribution P(z-block | message) per message."""
    codebook = np.ascontiguousarray(codebook, dtype=np.int64)
    wz = np.ascontiguousarray(wz, dtype=np.float64)
    if USE_NUMBA:
        return _exact_z_table_nb(codebook, wz, msg_count)
    return _exact_z_table_np(codebook, wz, msg_count)
