"""Degraded Gaussian wiretap channel: truncated power-constrained inputs
and closed-form information-density statistics.

The channel pair is Y = x + N(0, sigma1_sq), Z = Y + N(0, sigma2_sq -
sigma1_sq).  All reference densities are closed-form Gaussians, so no
discretization is ever needed:

  * conditional legitimate channel given the eavesdropper's letter:
      Y | (x, z) ~ N((x (s2-s1) + z s1) / s2,  s1 (s2-s1) / s2)
    with s1 = sigma1_sq, s2 = sigma2_sq (posterior of Y in the chain);
  * capacity-achieving reference:
      Ybar | Zbar = z ~ N(rho z, v),  rho = (S+s1)/(S+s2),
      v = (S+s1)(s2-s1)/(S+s2)
    from the jointly Gaussian (Ybar, Zbar) with input power S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capacity import gaussian_secrecy_capacity
from .prob import ValidationError
from .sim import wilson_interval

__all__ = [
    "GaussianWtcParams",
    "KStatEstimate",
    "RejectionError",
    "sample_truncated_input",
    "estimate_acceptance_rate",
    "conditional_logpdf_bits",
    "reference_logpdf_bits",
    "sample_K_statistic",
    "gaussian_qn_estimate",
    "k_stat_variance_bound",
]

LOG2E = math.log2(math.e)
REJECTION_CAP = 10_000


class RejectionError(RuntimeError):
    """Rejection sampler exhausted its attempt cap."""


@dataclass(frozen=True)
class GaussianWtcParams:
    S: float
    sigma1_sq: float
    sigma2_sq: float
    delta: float

    def __post_init__(self):
        if self.S <= 0:
            raise ValidationError("GaussianWtcParams: S must be positive")
        if not self.sigma2_sq > self.sigma1_sq > 0:
            raise ValidationError("GaussianWtcParams: need sigma2_sq > sigma1_sq > 0")
        if not 0 < self.delta < self.S:
            raise ValidationError("GaussianWtcParams: need 0 < delta < S")

    @property
    def secrecy_capacity(self) -> float:
        return gaussian_secrecy_capacity(self.S, self.sigma1_sq, self.sigma2_sq)


def sample_truncated_input(
    params: GaussianWtcParams, n: int, stream: np.random.Generator
) -> np.ndarray:
    """One input block from the truncated i.i.d. N(0, S - delta) law.

    Rejection sampling until the block lands inside the power ball
    ||x||^2 <= n*S, which realizes the truncated distribution exactly;
    the acceptance probability is the normalizer mu_n by construction.
    """
    sd = math.sqrt(params.S - params.delta)
    for _ in range(REJECTION_CAP):
        x = stream.normal(0.0, sd, size=n)
        if float(x @ x) <= n * params.S:
            return x
    raise RejectionError(
        f"no block inside the power ball after {REJECTION_CAP} attempts "
        f"(n={n}, S={params.S}, delta={params.delta})"
    )


def estimate_acceptance_rate(
    params: GaussianWtcParams, n: int, attempts: int, stream: np.random.Generator
) -> tuple[float, float]:
    """Empirical mu_n: fraction of untruncated blocks inside the power ball."""
    sd = math.sqrt(params.S - params.delta)
    accepted = 0
    chunk = max(1, 4_000_000 // n)
    done = 0
    while done < attempts:
        b = min(chunk, attempts - done)
        x = stream.normal(0.0, sd, size=(b, n))
        accepted += int(np.sum((x * x).sum(axis=1) <= n * params.S))
        done += b
    return wilson_interval(accepted, attempts)


def _normal_logpdf_bits(y, mu, var):
    return -0.5 * np.log2(2 * math.pi * var) - (y - mu) ** 2 / (2 * var) * LOG2E


def conditional_logpdf_bits(params: GaussianWtcParams, y, x, z):
    """log2 density of Y given (x, z) in the degraded chain."""
    s1, s2 = params.sigma1_sq, params.sigma2_sq
    mu = (x * (s2 - s1) + z * s1) / s2
    var = s1 * (s2 - s1) / s2
    return _normal_logpdf_bits(y, mu, var)


def reference_logpdf_bits(params: GaussianWtcParams, y, z):
    """log2 density of Ybar given Zbar = z under the capacity-achieving law."""
    S, s1, s2 = params.S, params.sigma1_sq, params.sigma2_sq
    rho = (S + s1) / (S + s2)
    var = (S + s1) * (s2 - s1) / (S + s2)
    return _normal_logpdf_bits(y, rho * z, var)


@dataclass(frozen=True)
class KStatEstimate:
    mean: float
    mean_ci: float
    variance: float
    variance_ci: float
    trials: int
    n: int


def sample_K_statistic(
    params: GaussianWtcParams,
    x_vec: np.ndarray,
    trials: int,
    stream: np.random.Generator,
) -> KStatEstimate:
    """First two moments of the per-block conditional density statistic.

    K = (1/n) sum_i log2[ W_{Y|Z}(Y_i|x_i,Z_i) / P_{Ybar|Zbar}(Y_i|Z_i) ]
    with (Y, Z) | x drawn through the Gaussian channel.
    """
    x_vec = np.asarray(x_vec, dtype=np.float64)
    n = x_vec.size
    if float(x_vec @ x_vec) > n * params.S * (1 + 1e-12):
        raise ValidationError("sample_K_statistic: x_vec outside the power ball")
    s1, s2 = params.sigma1_sq, params.sigma2_sq
    vals = np.empty(trials)
    chunk = max(1, 2_000_000 // n)
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        y = x_vec[None, :] + stream.normal(0.0, math.sqrt(s1), size=(b, n))
        z = y + stream.normal(0.0, math.sqrt(s2 - s1), size=(b, n))
        terms = conditional_logpdf_bits(params, y, x_vec[None, :], z) - reference_logpdf_bits(
            params, y, z
        )
        vals[done : done + b] = terms.mean(axis=1)
        done += b
    mean = float(vals.mean())
    var = float(vals.var(ddof=1))
    mean_ci = 1.959964 * math.sqrt(var / trials)
    m4 = float(((vals - mean) ** 4).mean())
    var_ci = 1.959964 * math.sqrt(max(m4 - var * var, 0.0) / trials)
    return KStatEstimate(mean, mean_ci, var, var_ci, trials, n)


def gaussian_qn_estimate(
    params: GaussianWtcParams,
    gamma: float,
    n: int,
    trials: int,
    stream: np.random.Generator,
) -> tuple[float, float]:
    """Resolvability tail for the eavesdropper under i.i.d. N(0, S - gamma/2).

    Pr[(1/n) sum_i log2(W_Z(Z_i|X_i) / P_Z(Z_i)) >= (1/2)log2(1+S/sigma2^2)
    + gamma/2], with P_Z the i.i.d. output N(0, S - gamma/2 + sigma2^2).
    """
    if gamma <= 0:
        raise ValidationError("gaussian_qn_estimate: gamma must be positive")
    S, s2 = params.S, params.sigma2_sq
    px_var = S - gamma / 2
    if px_var <= 0:
        raise ValidationError("gaussian_qn_estimate: gamma too large for the power budget")
    pz_var = px_var + s2
    threshold = 0.5 * math.log2(1 + S / s2) + gamma / 2
    hits = 0
    chunk = max(1, 4_000_000 // n)
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        x = stream.normal(0.0, math.sqrt(px_var), size=(b, n))
        z = x + stream.normal(0.0, math.sqrt(s2), size=(b, n))
        dens = _normal_logpdf_bits(z, x, s2) - _normal_logpdf_bits(z, 0.0, pz_var)
        hits += int(np.sum(dens.mean(axis=1) >= threshold))
        done += b
    return wilson_interval(hits, trials)


def k_stat_variance_bound(params: GaussianWtcParams) -> float:
    """Explicit constant bounding n * Var[K] uniformly over the power ball."""
    S, s1, s2 = params.S, params.sigma1_sq, params.sigma2_sq
    c = 2 * LOG2E * LOG2E
    return c * (
        9 * S * S / (4 * (S + s1))
        + s1 * S / (S + s1)
        + 9 * S * S / (4 * (S + s2))
        + s2 * S / (S + s2)
    )
