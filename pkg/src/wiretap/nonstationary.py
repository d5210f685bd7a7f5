"""Memoryless non-stationary symmetric degraded wiretap channel sequences.

Per-letter channel pairs (W_Y_i, W_Z_i) must each be weakly symmetric and
stochastically degraded; per-letter secrecy capacities are then the
differences of the closed-form symmetric capacities, and the object of
study is the convergence (or not) of their Cesaro means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .capacity import weakly_symmetric_capacity
from .channels import Channel, bsc, check_stochastic_degradedness, is_weakly_symmetric
from .prob import ValidationError
from .sim import wilson_interval

__all__ = [
    "ChannelSequence",
    "cesaro_means",
    "convergence_diagnostic",
    "fourth_moment_bound",
    "qn_quadratic_decay_check",
    "blockwise_doubling_crossovers",
]


@dataclass(frozen=True)
class ChannelSequence:
    """A validated horizon-length list of (main, eavesdropper) channel pairs."""

    pairs: tuple  # tuple[(Channel, Channel), ...]

    def __post_init__(self):
        seen: dict[bytes, None] = {}
        for i, (wy, wz) in enumerate(self.pairs, 1):
            key = wy.matrix.tobytes() + wz.matrix.tobytes()
            if key in seen:
                continue
            if not is_weakly_symmetric(wy) or not is_weakly_symmetric(wz):
                raise ValidationError(f"ChannelSequence: pair {i} is not weakly symmetric")
            if not check_stochastic_degradedness(wy, wz).degraded:
                raise ValidationError(f"ChannelSequence: pair {i} is not degraded")
            seen[key] = None

    @property
    def horizon(self) -> int:
        return len(self.pairs)

    @classmethod
    def constant(cls, wy: Channel, wz: Channel, horizon: int) -> "ChannelSequence":
        return cls(tuple((wy, wz) for _ in range(horizon)))

    @classmethod
    def bsc_family(cls, main_crossovers: Sequence[float], eaves_crossovers) -> "ChannelSequence":
        """BSC pairs; eaves_crossovers may be a scalar or a per-letter sequence."""
        if np.isscalar(eaves_crossovers):
            eaves_crossovers = [float(eaves_crossovers)] * len(main_crossovers)
        if len(main_crossovers) != len(eaves_crossovers):
            raise ValidationError("bsc_family: crossover lists differ in length")
        return cls(tuple(
            (bsc(p), bsc(q)) for p, q in zip(main_crossovers, eaves_crossovers)
        ))

    def capacities(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-letter main and eavesdropper capacities (bits), cached by matrix."""
        cache: dict[bytes, float] = {}

        def cap(c: Channel) -> float:
            key = c.matrix.tobytes()
            if key not in cache:
                cache[key] = weakly_symmetric_capacity(c).value
            return cache[key]

        cy = np.array([cap(wy) for wy, _ in self.pairs])
        cz = np.array([cap(wz) for _, wz in self.pairs])
        return cy, cz


def blockwise_doubling_crossovers(p_a: float, p_b: float, horizon: int) -> list[float]:
    """p_a for 1 letter, p_b for 2, p_a for 4, p_b for 8, ...

    The classical non-Cesaro-summable schedule: the running mean of any
    per-letter functional taking distinct values on p_a and p_b oscillates
    forever (liminf < limsup).
    """
    out: list[float] = []
    val, block = p_a, 1
    while len(out) < horizon:
        out.extend([val] * min(block, horizon - len(out)))
        val = p_b if val == p_a else p_a
        block *= 2
    return out


def cesaro_means(seq: ChannelSequence, n_list: Sequence[int]) -> list[dict]:
    """Running Cesaro means of the per-letter capacities and their difference."""
    n_list = sorted(set(int(n) for n in n_list))
    if not n_list or n_list[0] < 1:
        raise ValidationError("cesaro_means: blocklengths must be >= 1")
    if n_list[-1] > seq.horizon:
        raise ValidationError(
            f"cesaro_means: n={n_list[-1]} exceeds the sequence horizon {seq.horizon}"
        )
    cy, cz = seq.capacities()
    cum_y = np.cumsum(cy)
    cum_z = np.cumsum(cz)
    return [
        {
            "n": n,
            "mean_cy": float(cum_y[n - 1] / n),
            "mean_cz": float(cum_z[n - 1] / n),
            "diff": float((cum_y[n - 1] - cum_z[n - 1]) / n),
        }
        for n in n_list
    ]


def convergence_diagnostic(table: list[dict], window: int, tol: float) -> dict:
    """Windowed convergence check of the running secrecy-capacity mean.

    Converged iff max - min of the 'diff' column over the trailing window
    is <= tol; the trailing extremes proxy for liminf / limsup.  This is a
    finite-prefix diagnostic, never a proof that the limit exists.
    """
    if window > len(table):
        raise ValidationError("convergence_diagnostic: window exceeds table length")
    tail = [row["diff"] for row in table[-window:]]
    lo, hi = min(tail), max(tail)
    return {
        "converged": bool(hi - lo <= tol),
        "liminf_hat": lo,
        "limsup_hat": hi,
        "gap": hi - lo,
    }


def _letter_density_table(wz: Channel) -> np.ndarray:
    """log2(W(z|x) / P_Z(z)) with X uniform and the uniform output P_Z."""
    nz = wz.output_size
    with np.errstate(divide="ignore"):
        table = np.log2(wz.matrix) + math.log2(nz)
    table[wz.matrix == 0] = -np.inf
    return table


def fourth_moment_bound(seq: ChannelSequence, i: int, x: int | None = None):
    """Exact E[J^2], E[J^4] of the centered eavesdropper density at letter i.

    J = log2(W_Z_i(Z|X) / P_Z(Z)) - C(W_Z_i) with P_Z uniform.  With
    x=None the input is uniform (the capacity-achieving choice, which
    makes E[J] = 0); a fixed x conditions the moments on that symbol.
    """
    if not 1 <= i <= seq.horizon:
        raise ValidationError("fourth_moment_bound: letter index outside the horizon")
    wz = seq.pairs[i - 1][1]
    c = weakly_symmetric_capacity(wz).value
    table = _letter_density_table(wz) - c
    if x is None:
        probs = wz.matrix / wz.input_size
    else:
        probs = np.zeros_like(wz.matrix)
        probs[x] = wz.matrix[x]
    mask = probs > 0
    mean = float(np.sum(probs[mask] * table[mask]))
    m2 = float(np.sum(probs[mask] * table[mask] ** 2))
    m4 = float(np.sum(probs[mask] * table[mask] ** 4))
    return {"mean": mean, "m2": m2, "m4": m4}


def _markov_bound(seq: ChannelSequence, gamma: float, n: int) -> float:
    """16 E[(sum_i J_i)^4] / (n^4 gamma^4) with exact per-letter moments."""
    m2s = np.empty(n)
    m4s = np.empty(n)
    for i in range(1, n + 1):
        mom = fourth_moment_bound(seq, i)
        m2s[i - 1], m4s[i - 1] = mom["m2"], mom["m4"]
    cross = 0.5 * (m2s.sum() ** 2 - (m2s**2).sum())  # sum_{i<j} m2_i m2_j
    fourth = m4s.sum() + 6 * cross
    return min(1.0, 16 * fourth / (n**4 * gamma**4))


def qn_quadratic_decay_check(
    seq: ChannelSequence,
    gamma: float,
    n_list: Sequence[int],
    trials: int,
    stream: np.random.Generator,
) -> dict:
    """Monte Carlo deviation probabilities Pr[(1/n) sum J_i >= gamma/2].

    Returns per-n estimates, the exact fourth-moment Markov bounds, and a
    log-log fit.  Decay is accepted when the fitted slope is <= -1: the
    guarantee behind the bound is only O(1/n^2), and i.i.d.-like sequences
    decay exponentially, i.e. strictly faster.
    """
    n_list = sorted(set(int(n) for n in n_list))
    if n_list[-1] > seq.horizon:
        raise ValidationError("qn_quadratic_decay_check: n exceeds the horizon")
    n_max = n_list[-1]
    sums = np.zeros(trials)
    rows = []
    target = {n: None for n in n_list}
    for i in range(1, n_max + 1):
        wz = seq.pairs[i - 1][1]
        c = weakly_symmetric_capacity(wz).value
        table = (_letter_density_table(wz) - c).ravel()
        joint = (wz.matrix / wz.input_size).ravel()
        cdf = np.cumsum(joint)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, stream.random(trials), side="right")
        sums += np.where(joint[idx] > 0, table[idx], 0.0)
        if i in target:
            hits = int(np.sum(sums / i >= gamma / 2))
            qhat, ci = wilson_interval(hits, trials)
            rows.append(
                {
                    "n": i,
                    "q_hat": qhat,
                    "ci": ci,
                    "markov_bound": _markov_bound(seq, gamma, i),
                }
            )
    pos = [(r["n"], r["q_hat"]) for r in rows if r["q_hat"] > 0]
    slope = r2 = math.nan
    if len(pos) >= 2:
        x = np.log([n for n, _ in pos])
        y = np.log([q for _, q in pos])
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        sstot = float(((y - y.mean()) ** 2).sum())
        r2 = 1.0 - float((resid**2).sum()) / sstot if sstot > 0 else 1.0
    return {"rows": rows, "slope": float(slope), "r2": float(r2), "gamma": gamma}
