"""Capacity solvers for discrete channels and degraded wiretap channels.

Shannon capacity is computed by Blahut-Arimoto alternating maximization.
The secrecy capacity of a degraded wiretap channel maximizes the concave
objective I(X;Y|Z) with the analogous multiplicative ascent; the
per-symbol expectation

    D(x) = E[ log2( W_{Y|Z}(Y|x,Z) / P_{Y|Z}(Y|Z) ) | X = x ]

is the exact gradient of the objective, so max_x D(x) - I(X;Y|Z) is a
duality gap and a KKT optimality certificate at convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channels import Channel, WiretapChannel, degradedness_certificate, is_weakly_symmetric
from .prob import Distribution, ValidationError, entropy

LN2 = math.log(2.0)

__all__ = [
    "CapacityResult",
    "SigmaZeroSq",
    "mutual_information",
    "conditional_mutual_information",
    "shannon_capacity",
    "weakly_symmetric_capacity",
    "secrecy_capacity_degraded",
    "sigma0_sq",
    "gaussian_secrecy_capacity",
]


@dataclass(frozen=True)
class CapacityResult:
    value: float  # bits / channel use
    optimal_input: Distribution
    output_dist: np.ndarray  # P_Ybar, or P_YbarZbar for wiretap solves
    kkt_slack: float  # bits
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SigmaZeroSq:
    value: float  # bits^2
    argmax_input_symbol: int


def mutual_information(px: Distribution, c: Channel) -> float:
    """I(X;Y) in bits for the joint px x c."""
    if px.alphabet_size != c.input_size:
        raise ValidationError("mutual_information: dimension mismatch")
    p = px.probs
    py = p @ c.matrix
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(c.matrix > 0, c.matrix / py[None, :], 1.0)
        terms = np.where(c.matrix > 0, c.matrix * np.log2(ratio), 0.0)
    return max(0.0, float(p @ terms.sum(axis=1)))


def _cond_mi_nats(px: np.ndarray, kernel: np.ndarray):
    """I(X;Y|Z) in nats plus the per-input gradient D(x) (nats)."""
    pyz = np.einsum("x,xyz->yz", px, kernel)
    pz = pyz.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        py_given_z = np.where(pz[None, :] > 0, pyz / pz[None, :], 0.0)
    wz = kernel.sum(axis=1)  # (x, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        w_y_given_z = np.where(wz[:, None, :] > 0, kernel / wz[:, None, :], 0.0)
        log_ratio = np.where(
            kernel > 0, np.log(w_y_given_z) - np.log(py_given_z[None, :, :]), 0.0
        )
    d = np.einsum("xyz,xyz->x", kernel, log_ratio)
    return float(px @ d), d


def conditional_mutual_information(px: Distribution, w: WiretapChannel) -> float:
    """I(X;Y|Z) in bits under the joint px x W."""
    if px.alphabet_size != w.x_size:
        raise ValidationError("conditional_mutual_information: dimension mismatch")
    val, _ = _cond_mi_nats(px.probs, w.kernel)
    return max(0.0, val / LN2)


def shannon_capacity(c: Channel, tol: float = 1e-9, max_iter: int = 10000) -> CapacityResult:
    """Blahut-Arimoto; stops when the duality gap max_x D(x) - I <= tol bits."""
    # Unreachable outputs (all-zero columns) are dropped to avoid 0/0.
    keep = c.matrix.sum(axis=0) > 0
    w = np.ascontiguousarray(c.matrix[:, keep])
    nx = w.shape[0]
    p = np.full(nx, 1.0 / nx)
    logw = np.where(w > 0, np.log(w), 0.0)
    value = 0.0
    slack = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        q = p @ w
        with np.errstate(divide="ignore"):
            logq = np.where(q > 0, np.log(q), 0.0)
        d = np.einsum("xy,xy->x", w, np.where(w > 0, logw - logq[None, :], 0.0))
        value = float(p @ d)
        slack = float(np.max(d) - value)
        if slack <= tol * LN2:
            break
        p = p * np.exp(d - d.max())
        p /= p.sum()
    q_full = np.zeros(c.output_size)
    q_full[keep] = p @ w
    return CapacityResult(
        value=value / LN2,
        optimal_input=Distribution(p),
        output_dist=q_full,
        kkt_slack=slack / LN2,
        iterations=it,
        converged=slack <= tol * LN2,
    )


def weakly_symmetric_capacity(c: Channel, tol: float = 1e-9) -> CapacityResult:
    """Closed form log2|Y| - H(row); uniform input is optimal."""
    if not is_weakly_symmetric(c, tol):
        raise ValidationError("weakly_symmetric_capacity: channel is not weakly symmetric")
    value = math.log2(c.output_size) - entropy(Distribution(c.matrix[0]))
    px = Distribution.uniform(c.input_size)
    return CapacityResult(
        value=max(0.0, value),
        optimal_input=px,
        output_dist=px.probs @ c.matrix,
        kkt_slack=0.0,
        iterations=0,
        converged=True,
    )


def secrecy_capacity_degraded(
    w: WiretapChannel,
    tol: float = 1e-9,
    max_iter: int = 20000,
    check_degraded: bool = True,
) -> CapacityResult:
    """Maximize I(X;Y|Z) over the input simplex for a degraded wiretap channel.

    Multiplicative-ascent steps p <- p * exp(D) with a damped fallback that
    guarantees the objective never decreases; convergence is declared on
    the KKT slack max_x D(x) - I(X;Y|Z) <= tol.
    """
    if check_degraded and not degradedness_certificate(w).degraded:
        raise ValidationError("secrecy_capacity_degraded: channel is not degraded")
    kernel = w.kernel
    nx = w.x_size
    p = np.full(nx, 1.0 / nx)
    value, d = _cond_mi_nats(p, kernel)
    slack = float(np.max(d) - value)
    it = 0
    for it in range(1, max_iter + 1):
        if slack <= tol * LN2:
            break
        cand = p * np.exp(d - d.max())
        cand /= cand.sum()
        new_value, new_d = _cond_mi_nats(cand, kernel)
        if new_value < value - 1e-14:
            # Damped step toward the multiplicative iterate; the objective
            # is concave so a small enough step never decreases it.
            alpha, ok = 0.5, False
            while alpha > 1e-9:
                mixed = (1 - alpha) * p + alpha * cand
                mv, md = _cond_mi_nats(mixed, kernel)
                if mv >= value - 1e-14:
                    cand, new_value, new_d, ok = mixed, mv, md, True
                    break
                alpha *= 0.5
            if not ok:
                break  # no improving direction left; report current slack
        p, value, d = cand, new_value, new_d
        slack = float(np.max(d) - value)
    pyz = np.einsum("x,xyz->yz", p, kernel)
    return CapacityResult(
        value=max(0.0, value / LN2),
        optimal_input=Distribution(p),
        output_dist=pyz,
        kkt_slack=slack / LN2,
        iterations=it,
        converged=slack <= tol * LN2,
    )


def sigma0_sq(w: WiretapChannel, output_dist: np.ndarray) -> SigmaZeroSq:
    """max_x Var[log2(W_{Y|Z}(Y|x,Z) / P_{Ybar|Zbar}(Y|Z))] under (Y,Z)|x ~ W.

    `output_dist` is the capacity-achieving joint P_YbarZbar (|Y| x |Z|).
    Returns an infinite value when a reachable (y, z) pair has zero
    reference conditional probability.
    """
    kernel = w.kernel
    pyz = np.asarray(output_dist, dtype=np.float64)
    pz = pyz.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ref = np.where(pz[None, :] > 0, pyz / pz[None, :], 0.0)
    wz = kernel.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        w_y_given_z = np.where(wz[:, None, :] > 0, kernel / wz[:, None, :], 0.0)
    best = -1.0
    arg = 0
    for x in range(w.x_size):
        mask = kernel[x] > 0
        if np.any(ref[mask] == 0):
            return SigmaZeroSq(math.inf, x)
        logr = np.zeros_like(ref)
        logr[mask] = np.log2(w_y_given_z[x][mask] / ref[mask])
        mean = float(np.sum(kernel[x] * logr))
        var = float(np.sum(kernel[x] * (logr - mean) ** 2 * mask))
        if var > best:
            best, arg = var, x
    return SigmaZeroSq(best, arg)


def gaussian_secrecy_capacity(S: float, sigma1_sq: float, sigma2_sq: float) -> float:
    """Closed-form secrecy capacity of the degraded Gaussian pair, in bits."""
    if S <= 0:
        raise ValidationError("gaussian_secrecy_capacity: S must be positive")
    if not sigma2_sq > sigma1_sq > 0:
        raise ValidationError("gaussian_secrecy_capacity: need sigma2_sq > sigma1_sq > 0")
    return 0.5 * math.log2(1 + S / sigma1_sq) - 0.5 * math.log2(1 + S / sigma2_sq)
