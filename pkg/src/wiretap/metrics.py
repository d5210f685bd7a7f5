"""Exact secrecy metrics on explicit finite joints.

Six measures of dependence between a message M and an eavesdropper block Z:
divergence (s1), variational distance (s2), a log-ratio tail at a fixed
threshold (s3), their blocklength-normalized versions (s4, s5), and the
normalized-ratio tail (s6).  With Q the product of P's marginals, Q always
dominates P, so every quantity is finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .prob import JointDistribution, ValidationError

__all__ = ["MetricReport", "compute_metrics", "csiszar_bound_check"]

DEFAULT_ETA_BITS = 0.1


@dataclass(frozen=True)
class MetricReport:
    s1: float  # bits
    s2: float  # [0, 1]
    s3: float  # Pr[log2(P/Q) > eta1_bits]
    s4: float  # bits / symbol
    s5: float  # 1 / symbol
    s6: float  # Pr[(1/n) log2(P/Q) > eta2_bits]
    n: int
    eta1_bits: float
    eta2_bits: float


def compute_metrics(
    joint: JointDistribution,
    n: int = 1,
    eta1_bits: float = DEFAULT_ETA_BITS,
    eta2_bits: float = DEFAULT_ETA_BITS,
) -> MetricReport:
    """All six metrics of the joint against the product of its marginals.

    Tail events use the strict inequality '> eta'; ties at exactly eta are
    excluded.
    """
    if n < 1:
        raise ValidationError("compute_metrics: n must be >= 1")
    if eta1_bits <= 0 or eta2_bits <= 0:
        raise ValidationError("compute_metrics: thresholds must be positive")
    p = joint.probs
    q = np.outer(p.sum(axis=1), p.sum(axis=0))

    mask = p > 0
    log_ratio = np.zeros_like(p)
    log_ratio[mask] = np.log2(p[mask] / q[mask])

    s1 = float(np.sum(p[mask] * log_ratio[mask]))
    s2 = float(0.5 * np.abs(p - q).sum())
    s3 = float(p[mask & (log_ratio > eta1_bits)].sum())
    s6 = float(p[mask & (log_ratio > n * eta2_bits)].sum())
    return MetricReport(
        s1=s1,
        s2=s2,
        s3=s3,
        s4=s1 / n,
        s5=s2 / n,
        s6=s6,
        n=n,
        eta1_bits=eta1_bits,
        eta2_bits=eta2_bits,
    )


def csiszar_bound_check(s1_bits: float, s2: float, m_count: int) -> dict:
    """Check s1 <= s2 * log2(m_count / s2).

    The bound relates mutual information to variational distance; it is
    only applied on the conservative window s2 in (0, 1/4].  Outside the
    window the check is inapplicable and no verdict is returned.
    """
    if m_count < 2:
        raise ValidationError("csiszar_bound_check: m_count must be >= 2")
    if not 0.0 < s2 <= 0.25:
        return {"holds": None, "applicable": False, "lhs": s1_bits, "rhs": math.nan}
    rhs = s2 * math.log2(m_count / s2)
    return {"holds": bool(s1_bits <= rhs), "applicable": True, "lhs": s1_bits, "rhs": rhs}
