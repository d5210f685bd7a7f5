"""Monte Carlo estimation of normalized information-density spectra.

For memoryless channels the normalized density of a blocklength-n pair is
a mean of n i.i.d. per-letter log-ratios, so sampling draws per-letter
(input, output) pairs directly from the single-letter joint and sums.
Blocklength-n spectra feed the epsilon-quantile limit estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import Channel, WiretapChannel
from .prob import Distribution, ValidationError

__all__ = [
    "SpectrumEstimate",
    "EpsLimitEstimate",
    "sample_information_density",
    "sample_conditional_information_density",
    "estimate_eps_limits",
    "fit_loglog_slope",
]

_CHUNK = 4_000_000  # per-letter draws per block; keeps peak memory modest


@dataclass(frozen=True)
class SpectrumEstimate:
    n: int
    samples: np.ndarray  # sorted normalized densities, bits/symbol
    mean: float
    variance: float
    rejected: int = 0

    @property
    def count(self) -> int:
        return self.samples.size

    def cdf(self, r: float) -> float:
        return float(np.searchsorted(self.samples, r, side="right")) / self.count


def _finalize(values: np.ndarray, n: int, rejected: int = 0) -> SpectrumEstimate:
    values = np.sort(values)
    return SpectrumEstimate(
        n=n,
        samples=values,
        mean=float(values.mean()),
        variance=float(values.var(ddof=1)) if values.size > 1 else 0.0,
        rejected=rejected,
    )


def _sample_table_sums(
    joint_flat: np.ndarray,
    table_flat: np.ndarray,
    n: int,
    trials: int,
    stream: np.random.Generator,
) -> np.ndarray:
    """Row sums of per-letter table values under i.i.d. draws from joint_flat."""
    cdf = np.cumsum(joint_flat)
    cdf[-1] = 1.0
    sums = np.empty(trials)
    rows_per_chunk = max(1, _CHUNK // n)
    done = 0
    while done < trials:
        m = min(rows_per_chunk, trials - done)
        u = stream.random((m, n))
        idx = np.searchsorted(cdf, u, side="right")
        sums[done : done + m] = table_flat[idx].sum(axis=1)
        done += m
    return sums


def sample_information_density(
    px: Distribution, c: Channel, n: int, trials: int, stream: np.random.Generator
) -> SpectrumEstimate:
    """Samples of (1/n) sum_i log2(W(Y_i|X_i) / P_Y(Y_i)), (X, Y) ~ px x W."""
    if n < 1 or trials < 1:
        raise ValidationError("sample_information_density: n and trials must be >= 1")
    p = px.probs
    joint = p[:, None] * c.matrix
    py = p @ c.matrix
    table = np.zeros_like(joint)
    mask = joint > 0
    table[mask] = np.log2(c.matrix[mask] / np.broadcast_to(py, joint.shape)[mask])
    sums = _sample_table_sums(joint.ravel(), table.ravel(), n, trials, stream)
    return _finalize(sums / n, n)


def sample_conditional_information_density(
    px: Distribution,
    w: WiretapChannel,
    output_dist: np.ndarray,
    n: int,
    trials: int,
    stream: np.random.Generator,
) -> SpectrumEstimate:
    """Samples of (1/n) sum_i log2(W_{Y|Z}(Y_i|X_i,Z_i) / P_{Ybar|Zbar}(Y_i|Z_i)).

    `output_dist` is the capacity-achieving joint P_YbarZbar from the
    secrecy-capacity solver.  Trials that hit a reachable pair with zero
    reference density are rejected and counted.
    """
    if n < 1 or trials < 1:
        raise ValidationError("sample_conditional_information_density: n, trials >= 1")
    kernel = w.kernel
    joint = px.probs[:, None, None] * kernel
    pyz = np.asarray(output_dist, dtype=np.float64)
    pz = pyz.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ref = np.where(pz[None, :] > 0, pyz / pz[None, :], 0.0)
    wz = kernel.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        w_y_given_z = np.where(wz[:, None, :] > 0, kernel / wz[:, None, :], 0.0)

    table = np.zeros_like(kernel)
    reach = kernel > 0
    bad = reach & (ref[None, :, :] == 0)
    ok = reach & ~bad
    table[ok] = np.log2(w_y_given_z[ok] / np.broadcast_to(ref, kernel.shape)[ok])
    table[bad] = np.nan  # poisons the trial sum; rejected below

    sums = _sample_table_sums(joint.ravel(), table.ravel(), n, trials, stream)
    keep = ~np.isnan(sums)
    rejected = int(trials - keep.sum())
    if rejected == trials:
        raise ValidationError(
            "sample_conditional_information_density: every trial hit a zero "
            "reference density"
        )
    return _finalize(sums[keep] / n, n, rejected=rejected)


@dataclass(frozen=True)
class EpsLimitEstimate:
    epsilon: float
    r_lower: float  # bits/symbol
    r_upper: float  # bits/symbol
    per_n_quantiles: dict = field(default_factory=dict)
    monotone_trend: bool = True
    epsilon_substituted: bool = False


def _quantile_boundary(est: SpectrumEstimate, eps: float) -> tuple[float, float]:
    """Left/right limits of the empirical eps-quantile boundary."""
    s = est.samples
    k = int(math.floor(eps * s.size))
    k = min(k, s.size - 1)
    left = float(s[k])
    # Right limit differs from the left one only at an atom straddling eps.
    above = np.searchsorted(s, s[k], side="right")
    right = float(s[min(above, s.size - 1)])
    return left, right


def estimate_eps_limits(estimates: dict[int, SpectrumEstimate], epsilon: float) -> EpsLimitEstimate:
    """Per-n empirical eps-quantile boundaries with a trend diagnostic.

    r_lower / r_upper are the min / max boundary over the largest half of
    the swept n values; the true limit objects are not claimed.
    """
    if len(estimates) < 3:
        raise ValidationError("estimate_eps_limits: need at least 3 blocklengths")
    if not 0.0 <= epsilon < 1.0:
        raise ValidationError("estimate_eps_limits: epsilon must be in [0, 1)")
    substituted = False
    ns = sorted(estimates)
    eps_eff = epsilon
    if epsilon == 0.0:
        smallest = min(estimates[n].count for n in ns)
        eps_eff = 1.0 / smallest
        substituted = True
    per_n = {n: _quantile_boundary(estimates[n], eps_eff) for n in ns}
    tail = ns[len(ns) // 2 :]
    vals = [per_n[n][0] for n in tail]
    diffs = np.diff([per_n[n][0] for n in ns])
    trend = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    return EpsLimitEstimate(
        epsilon=epsilon,
        r_lower=float(min(vals)),
        r_upper=float(max(vals)),
        per_n_quantiles=per_n,
        monotone_trend=trend,
        epsilon_substituted=substituted,
    )


def fit_loglog_slope(ns, values) -> tuple[float, float]:
    """Least-squares slope and R^2 of log(values) against log(ns)."""
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(values, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2
