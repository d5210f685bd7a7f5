"""Random-coding wiretap simulation: subcodebooks, stochastic encoding,
threshold decoding, leakage, and the resolvability tail.

Each message owns a subcodebook of K = total_count / message_count i.i.d.
codewords; the encoder picks one uniformly at random.  The decoder is an
information-density threshold decoder, not maximum likelihood: it
succeeds iff exactly one message owns a codeword whose normalized
information density with the received block clears
(1/n) log2(total_count) + gamma.

Codebooks whose size is infeasible to materialize are handled in
"ensemble" mode: the reliability estimate Monte-Carlos the transmitted
codeword's density and accounts for the interfering codewords through
their exact change-of-measure union bound (the 2^{-n*gamma} term of the
standard random-coding error bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._kernels import codeword_scores, exact_z_table
from .channels import Channel, WiretapChannel
from .metrics import MetricReport, compute_metrics
from .prob import Distribution, JointDistribution, ValidationError, sample
from .rng import stream as make_stream

__all__ = [
    "CodebookSpec",
    "Codebook",
    "ReliabilityEstimate",
    "TailEstimate",
    "BudgetError",
    "wilson_interval",
    "generate_codebook",
    "encode",
    "threshold_decode",
    "run_reliability",
    "run_reliability_ensemble",
    "exact_leakage",
    "estimate_leakage_tails",
    "estimate_qn",
    "phase_sweep",
]

DEFAULT_GAMMA = 0.02
CODEBOOK_BYTE_BUDGET = 2**28
ENUMERATION_BUDGET = 2**26


class BudgetError(RuntimeError):
    def __init__(self, msg, required):
        super().__init__(msg)
        self.required = required


@dataclass(frozen=True)
class CodebookSpec:
    n: int
    message_count: int
    total_count: int
    gamma: float  # bits / symbol
    input_dist: Distribution
    seed: int

    def __post_init__(self):
        if self.n < 1 or self.message_count < 1:
            raise ValidationError("CodebookSpec: n and message_count must be >= 1")
        if self.total_count % self.message_count != 0:
            raise ValidationError("CodebookSpec: total_count must be a multiple of message_count")
        if self.gamma <= 0:
            raise ValidationError("CodebookSpec: gamma must be positive")

    @property
    def subcodebook_size(self) -> int:
        return self.total_count // self.message_count

    @property
    def total_rate(self) -> float:
        """(1/n) log2(total_count), bits/symbol."""
        return math.log2(self.total_count) / self.n

    @property
    def threshold(self) -> float:
        """Decoding threshold (1/n) log2(total_count) + gamma, bits/symbol."""
        return self.total_rate + self.gamma


@dataclass(frozen=True)
class Codebook:
    spec: CodebookSpec
    codewords: np.ndarray  # (total_count, n) int64

    def subcodebook(self, m: int) -> np.ndarray:
        """Codewords of 1-based message m: global indices (m-1)K .. mK-1."""
        k = self.spec.subcodebook_size
        return self.codewords[(m - 1) * k : m * k]


def generate_codebook(spec: CodebookSpec, byte_budget: int = CODEBOOK_BYTE_BUDGET) -> Codebook:
    """total_count i.i.d. codewords, each i.i.d. from spec.input_dist."""
    need = spec.total_count * spec.n * 8
    if need > byte_budget:
        raise BudgetError(
            f"codebook needs {need} bytes, budget is {byte_budget}", required=need
        )
    st = make_stream(spec.seed, 0)
    flat = sample(spec.input_dist, st, spec.total_count * spec.n)
    cw = flat.reshape(spec.total_count, spec.n)
    cw.setflags(write=False)
    return Codebook(spec=spec, codewords=cw)


def encode(cb: Codebook, m: int, stream: np.random.Generator) -> tuple[np.ndarray, int]:
    """Pick a codeword of message m uniformly; returns (x_vec, global index l)."""
    spec = cb.spec
    if not 1 <= m <= spec.message_count:
        raise ValidationError(f"encode: message {m} outside [1:{spec.message_count}]")
    k = spec.subcodebook_size
    l = (m - 1) * k + int(stream.integers(k)) + 1
    return cb.codewords[l - 1], l


def _density_table(px: Distribution, c: Channel) -> np.ndarray:
    """log2(W(y|x) / P_Y(y)) with -inf on zero transitions."""
    py = px.probs @ c.matrix
    with np.errstate(divide="ignore"):
        table = np.log2(c.matrix) - np.log2(py)[None, :]
    table[c.matrix == 0] = -np.inf
    return table


def threshold_decode(cb: Codebook, channel: Channel, y_vec: np.ndarray) -> Optional[int]:
    """Threshold decoder; returns the decoded message or None on failure.

    Failure covers both no codeword clearing the threshold and codewords
    of more than one message clearing it.
    """
    spec = cb.spec
    y_vec = np.asarray(y_vec, dtype=np.int64)
    if y_vec.shape != (spec.n,):
        raise ValidationError("threshold_decode: y_vec must have length n")
    table = _density_table(spec.input_dist, channel)
    scores = codeword_scores(cb.codewords, table, y_vec)
    clearing = np.flatnonzero(scores / spec.n >= spec.threshold)
    if clearing.size == 0:
        return None
    msgs = np.unique(clearing // spec.subcodebook_size)
    if msgs.size != 1:
        return None
    return int(msgs[0]) + 1


@dataclass(frozen=True)
class ReliabilityEstimate:
    error_prob: float
    ci_radius: float
    trials: int
    mode: str  # "explicit" | "ensemble"
    threshold_miss_rate: float
    interferer_term: float


def wilson_interval(successes: int, trials: int, z: float = 1.959964) -> tuple[float, float]:
    """Wilson 95% interval; returns (center estimate p_hat, radius)."""
    if trials <= 0:
        raise ValidationError("wilson_interval: trials must be positive")
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    rad = (z / denom) * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    lo, hi = center - rad, center + rad
    return phat, max(phat - lo, hi - phat)


def _channel_outputs(c: Channel, x: np.ndarray, stream: np.random.Generator) -> np.ndarray:
    """Memoryless outputs for a block (or batch of blocks) of inputs."""
    cdf = np.cumsum(c.matrix, axis=1)
    cdf[:, -1] = 1.0
    u = stream.random(x.shape)
    flatx = x.ravel()
    rows = cdf[flatx]
    out = (u.ravel()[:, None] > rows).sum(axis=1)
    return out.reshape(x.shape).astype(np.int64)


def run_reliability(
    cb: Codebook, w: WiretapChannel, trials: int, stream: np.random.Generator
) -> ReliabilityEstimate:
    """Monte Carlo average error probability of the explicit codebook."""
    spec = cb.spec
    wy = w.marginal_y()
    errors = 0
    table = _density_table(spec.input_dist, wy)
    for _ in range(trials):
        m = int(stream.integers(spec.message_count)) + 1
        x, _l = encode(cb, m, stream)
        y = _channel_outputs(wy, x[None, :], stream)[0]
        scores = codeword_scores(cb.codewords, table, y)
        clearing = np.flatnonzero(scores / spec.n >= spec.threshold)
        ok = False
        if clearing.size:
            msgs = np.unique(clearing // spec.subcodebook_size)
            ok = msgs.size == 1 and int(msgs[0]) + 1 == m
        errors += 0 if ok else 1
    phat, rad = wilson_interval(errors, trials)
    return ReliabilityEstimate(
        error_prob=phat,
        ci_radius=rad,
        trials=trials,
        mode="explicit",
        threshold_miss_rate=math.nan,
        interferer_term=0.0,
    )


def run_reliability_ensemble(
    input_dist: Distribution,
    wy: Channel,
    n: int,
    log2_total_count: float,
    gamma: float,
    trials: int,
    stream: np.random.Generator,
) -> ReliabilityEstimate:
    """Ensemble-averaged error estimate without materializing a codebook.

    Per trial the transmitted codeword is drawn fresh; the miss event is
    its density falling below the threshold.  The contribution of the
    other codewords is bounded exactly by the change-of-measure union
    bound (total_count * 2^{-n * threshold} <= 2^{-n*gamma}) and added as
    a deterministic term.
    """
    threshold = log2_total_count / n + gamma
    joint = input_dist.probs[:, None] * wy.matrix
    table = _density_table(input_dist, wy)
    tbl = np.where(joint > 0, table, 0.0)
    cdf = np.cumsum(joint.ravel())
    cdf[-1] = 1.0
    misses = 0
    chunk = max(1, 4_000_000 // n)
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        idx = np.searchsorted(cdf, stream.random((b, n)), side="right")
        dens = tbl.ravel()[idx].sum(axis=1) / n
        misses += int(np.sum(dens < threshold))
        done += b
    interferer = min(1.0, 2.0 ** (-n * gamma))
    phat, rad = wilson_interval(misses, trials)
    return ReliabilityEstimate(
        error_prob=min(1.0, phat + interferer),
        ci_radius=rad,
        trials=trials,
        mode="ensemble",
        threshold_miss_rate=phat,
        interferer_term=interferer,
    )


def exact_leakage(
    cb: Codebook,
    w: WiretapChannel,
    eta1_bits: float = 0.1,
    eta2_bits: float = 0.1,
    budget: int = ENUMERATION_BUDGET,
) -> MetricReport:
    """Exact secrecy metrics of the realized codebook's (M, Z^n) joint."""
    spec = cb.spec
    cost = spec.total_count * (w.z_size**spec.n)
    if cost > budget:
        raise BudgetError(
            f"exact leakage needs budget {cost}, configured budget {budget}",
            required=cost,
        )
    wz = w.marginal_z()
    table = exact_z_table(cb.codewords, wz.matrix, spec.message_count)
    joint = JointDistribution(table / spec.message_count)
    return compute_metrics(joint, n=spec.n, eta1_bits=eta1_bits, eta2_bits=eta2_bits)


@dataclass(frozen=True)
class TailEstimate:
    s3_hat: float
    s3_ci: float
    s6_hat: float
    s6_ci: float
    trials: int
    mode: str  # "mixture" | "dominant-term"


def _logsumexp2(a: np.ndarray) -> float:
    m = float(np.max(a))
    if m == -math.inf:
        return -math.inf
    return m + math.log2(np.sum(np.exp2(a - m)))


def estimate_leakage_tails(
    cb: Codebook,
    w: WiretapChannel,
    trials: int,
    stream: np.random.Generator,
    eta1_bits: float = 0.1,
    eta2_bits: float = 0.1,
) -> TailEstimate:
    """S3/S6 tail estimates by sampling (m, Z^n) from the true joint.

    Each sample evaluates the exact mixture log-ratio log2(P(z|m)/P_Z(z))
    at O(total_count) cost.  S1/S2 are deliberately not Monte Carlo
    estimated (their plug-in estimators are biased); they are only bounded
    through these tails.
    """
    spec = cb.spec
    wz = w.marginal_z()
    with np.errstate(divide="ignore"):
        logwz = np.log2(wz.matrix)
    logwz[wz.matrix == 0] = -np.inf
    k = spec.subcodebook_size
    s3 = s6 = 0
    for _ in range(trials):
        m = int(stream.integers(spec.message_count)) + 1
        x, _l = encode(cb, m, stream)
        z = _channel_outputs(wz, x[None, :], stream)[0]
        scores = codeword_scores(cb.codewords, logwz, z)
        log_pzm = _logsumexp2(scores[(m - 1) * k : m * k]) - math.log2(k)
        log_pz = _logsumexp2(scores) - math.log2(spec.total_count)
        ratio = log_pzm - log_pz
        s3 += ratio > eta1_bits
        s6 += ratio / spec.n > eta2_bits
    p3, r3 = wilson_interval(s3, trials)
    p6, r6 = wilson_interval(s6, trials)
    return TailEstimate(p3, r3, p6, r6, trials, mode="mixture")


def estimate_qn(
    input_dist: Distribution,
    wz: Channel,
    threshold: float,
    trials: int,
    n: int,
    stream: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo tail Pr[(1/n) i(X^n; Z^n) >= threshold], with Wilson radius.

    The density is measured against the i.i.d. output distribution of
    input_dist through wz; threshold is in bits/symbol (the resolvability
    threshold is (1/n) log2(total/messages) - gamma).
    """
    joint = input_dist.probs[:, None] * wz.matrix
    table = _density_table(input_dist, wz)
    tbl = np.where(joint > 0, table, 0.0)
    cdf = np.cumsum(joint.ravel())
    cdf[-1] = 1.0
    hits = 0
    chunk = max(1, 4_000_000 // n)
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        idx = np.searchsorted(cdf, stream.random((b, n)), side="right")
        dens = tbl.ravel()[idx].sum(axis=1) / n
        hits += int(np.sum(dens >= threshold))
        done += b
    return wilson_interval(hits, trials)


def _dominant_term_tail(
    input_dist: Distribution,
    wz: Channel,
    n: int,
    log2_k: float,
    eta_bits: float,
    trials: int,
    stream: np.random.Generator,
) -> tuple[float, float]:
    """Surrogate S6 tail for non-enumerable codebooks.

    Approximates the mixture ratio by its transmitted-codeword term:
    (1/n)(i(X^n;Z^n) - log2 K) > eta.  Used only when the exact mixture
    is out of budget; labeled as such in reports.
    """
    return estimate_qn(input_dist, wz, eta_bits + log2_k / n, trials, n, stream)


def phase_sweep(
    w: WiretapChannel,
    rate_grid,
    n_grid,
    trials: int,
    master_seed: int,
    gamma: float = DEFAULT_GAMMA,
    input_dist: Optional[Distribution] = None,
    codebook_byte_budget: int = CODEBOOK_BYTE_BUDGET,
) -> list[dict]:
    """Reliability / leakage-tail / resolvability table over (rate, n) cells.

    Subcodebook size follows the secrecy-from-resolvability rate
    I(X;Z) + 2*gamma.  Cells whose codebook fits the byte budget run the
    explicit construction; larger cells fall back to ensemble estimates.
    """
    from .capacity import mutual_information

    if input_dist is None:
        input_dist = Distribution.uniform(w.x_size)
    wy = w.marginal_y()
    wz = w.marginal_z()
    ixz = mutual_information(input_dist, wz)
    k_rate = ixz + 2 * gamma
    rows = []
    for cell, (rate, n) in enumerate((r, n) for r in rate_grid for n in n_grid):
        log2_m = rate * n
        log2_k = k_rate * n
        log2_mtil = log2_m + log2_k
        st = make_stream(master_seed, 1000 + cell)
        m_count = max(1, round(2.0**log2_m))
        k_count = max(1, math.ceil(2.0**log2_k))
        feasible = (
            log2_mtil < 40 and m_count * k_count * n * 8 <= codebook_byte_budget
        )
        if feasible:
            spec = CodebookSpec(
                n=n,
                message_count=m_count,
                total_count=m_count * k_count,
                gamma=gamma,
                input_dist=input_dist,
                seed=master_seed + cell,
            )
            cb = generate_codebook(spec, codebook_byte_budget)
            rel = run_reliability(cb, w, trials, st)
            tails = estimate_leakage_tails(cb, w, trials, st)
            s6_hat, s6_ci, s6_mode = tails.s6_hat, tails.s6_ci, tails.mode
            qn_thresh = (math.log2(spec.total_count) - math.log2(m_count)) / n - gamma
        else:
            rel = run_reliability_ensemble(input_dist, wy, n, log2_mtil, gamma, trials, st)
            s6_hat, s6_ci = _dominant_term_tail(
                input_dist, wz, n, log2_k, 0.1, trials, st
            )
            s6_mode = "dominant-term"
            qn_thresh = k_rate - gamma
        qn_hat, qn_ci = estimate_qn(input_dist, wz, qn_thresh, trials, n, st)
        rows.append(
            {
                "rate": rate,
                "n": n,
                "eps_hat": rel.error_prob,
                "eps_ci": rel.ci_radius,
                "s6_hat": s6_hat,
                "s6_ci": s6_ci,
                "qn_hat": qn_hat,
                "qn_ci": qn_ci,
                "mode": rel.mode,
                "s6_mode": s6_mode,
            }
        )
    return rows
