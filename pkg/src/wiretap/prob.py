"""Finite-alphabet probability primitives.

Conventions (fixed project-wide):
  * all public information quantities are in bits (log base 2),
  * 0 * log 0 = 0,
  * p * log(p/0) = +inf (reported as math.inf, never as a numeric error).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SIMPLEX_TOL = 1e-12

__all__ = [
    "Distribution",
    "JointDistribution",
    "entropy",
    "kl_divergence",
    "variational_distance",
    "sample",
    "load_distribution",
]


class ValidationError(ValueError):
    """Input fails a distribution/channel invariant."""


def _check_simplex(p: np.ndarray, what: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError(f"{what}: expected a non-empty 1-d array")
    if np.any(p < 0):
        raise ValidationError(f"{what}: negative entries")
    s = p.sum()
    if abs(s - 1.0) > SIMPLEX_TOL:
        raise ValidationError(f"{what}: entries sum to {s!r}, not 1 (tol {SIMPLEX_TOL})")
    # Renormalize only inside the tolerance window; anything worse was
    # rejected above so config errors are not silently hidden.
    return p / s


@dataclass(frozen=True)
class Distribution:
    """Probability vector on a finite alphabet. Immutable after construction."""

    probs: np.ndarray

    def __post_init__(self):
        p = _check_simplex(self.probs, "Distribution")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def alphabet_size(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, k: int) -> "Distribution":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def point_mass(cls, symbol: int, k: int) -> "Distribution":
        p = np.zeros(k)
        p[symbol] = 1.0
        return cls(p)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)


@dataclass(frozen=True)
class JointDistribution:
    """Joint probability matrix over (row alphabet x column alphabet)."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 2 or p.size == 0:
            raise ValidationError("JointDistribution: expected a non-empty 2-d array")
        if np.any(p < 0):
            raise ValidationError("JointDistribution: negative entries")
        s = p.sum()
        if abs(s - 1.0) > SIMPLEX_TOL:
            raise ValidationError(f"JointDistribution: total sum {s!r}, not 1")
        p = p / s
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def row_marginal(self) -> Distribution:
        return Distribution(self.probs.sum(axis=1))

    def col_marginal(self) -> Distribution:
        return Distribution(self.probs.sum(axis=0))


def entropy(d: Distribution) -> float:
    """Shannon entropy in bits; 0 log 0 = 0."""
    p = d.probs[d.probs > 0]
    return float(-np.sum(p * np.log2(p)))


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """D(p || q) in bits.

    Returns math.inf when supp(p) is not contained in supp(q); this is the
    infinite-divergence signal, distinct from a numeric failure.
    """
    if p.alphabet_size != q.alphabet_size:
        raise ValidationError("kl_divergence: alphabet mismatch")
    pv, qv = p.probs, q.probs
    mask = pv > 0
    if np.any(qv[mask] == 0):
        return math.inf
    return float(np.sum(pv[mask] * np.log2(pv[mask] / qv[mask])))


def variational_distance(p: Distribution, q: Distribution) -> float:
    """Total variation distance, half-L1 form; in [0, 1]."""
    if p.alphabet_size != q.alphabet_size:
        raise ValidationError("variational_distance: alphabet mismatch")
    return float(0.5 * np.abs(p.probs - q.probs).sum())


def variational_distance_maximal_set(p: Distribution, q: Distribution) -> float:
    """Same distance via the maximizing event {x: p(x) >= q(x)}.

    Kept as the second characterization for cross-checks; agrees exactly
    with the half-L1 form.
    """
    diff = p.probs - q.probs
    return float(diff[diff >= 0].sum())


def sample(d: Distribution, stream: np.random.Generator, n: int) -> np.ndarray:
    """n i.i.d. symbols from d. Deterministic given the stream state."""
    if n < 0:
        raise ValidationError("sample: n must be >= 0")
    cdf = np.cumsum(d.probs)
    cdf[-1] = 1.0
    u = stream.random(n)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


def load_distribution(path) -> Distribution:
    """One probability per line; '#' starts a comment."""
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            try:
                vals.append(float(body))
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: not a probability: {body!r}")
    return Distribution(np.array(vals))
