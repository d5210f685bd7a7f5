import math

import numpy as np
import pytest

from wiretap.channels import bsc
from wiretap.nonstationary import (
    ChannelSequence,
    blockwise_doubling_crossovers,
    cesaro_means,
    convergence_diagnostic,
    fourth_moment_bound,
    qn_quadratic_decay_check,
)
from wiretap.prob import ValidationError
from wiretap.rng import stream


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_sequence_validation():
    with pytest.raises(ValidationError):
        # reversed pair: eavesdropper cleaner than the main channel
        ChannelSequence.bsc_family([0.2], 0.1)
    with pytest.raises(ValidationError):
        ChannelSequence.bsc_family([0.1, 0.1], [0.2])
    seq = ChannelSequence.bsc_family([0.05, 0.1], 0.2)
    assert seq.horizon == 2


def test_constant_sequence_cesaro_is_flat():
    seq = ChannelSequence.constant(bsc(0.05), bsc(0.2), 64)
    table = cesaro_means(seq, [1, 2, 16, 64])
    expect = h2(0.2) - h2(0.05)
    for row in table:
        assert row["diff"] == pytest.approx(expect, abs=1e-12)
    diag = convergence_diagnostic(table, 4, 1e-9)
    assert diag["converged"]
    assert diag["gap"] <= 1e-12


def test_blockwise_doubling_schedule():
    xs = blockwise_doubling_crossovers(0.05, 0.2, 7)
    assert xs == [0.05, 0.2, 0.2, 0.05, 0.05, 0.05, 0.05]


def test_doubling_sequence_does_not_converge():
    horizon = 2048
    seq = ChannelSequence.bsc_family(
        blockwise_doubling_crossovers(0.05, 0.2, horizon), 0.25
    )
    n_list = [2**k for k in range(4, 12)]
    table = cesaro_means(seq, n_list)
    diag = convergence_diagnostic(table, len(n_list), 1e-3)
    assert not diag["converged"]
    assert diag["gap"] > 0.05


def test_cesaro_validation():
    seq = ChannelSequence.constant(bsc(0.05), bsc(0.2), 8)
    with pytest.raises(ValidationError):
        cesaro_means(seq, [16])
    with pytest.raises(ValidationError):
        cesaro_means(seq, [0])
    with pytest.raises(ValidationError):
        convergence_diagnostic(cesaro_means(seq, [1, 2]), 5, 1e-6)


def test_fourth_moment_matches_direct_enumeration():
    seq = ChannelSequence.constant(bsc(0.05), bsc(0.2), 4)
    mom = fourth_moment_bound(seq, 1)
    # direct loops: J = log2(2 W(z|x)) - (1 - h2(0.2)), uniform (x, z)
    c = 1 - h2(0.2)
    w = bsc(0.2).matrix
    mean = m2 = m4 = 0.0
    for x in range(2):
        for z in range(2):
            p = 0.5 * w[x, z]
            j = math.log2(2 * w[x, z]) - c
            mean += p * j
            m2 += p * j * j
            m4 += p * j**4
    assert mom["mean"] == pytest.approx(mean, abs=1e-14)
    assert abs(mom["mean"]) < 1e-12  # centered by construction
    assert mom["m2"] == pytest.approx(m2, abs=1e-14)
    assert mom["m4"] == pytest.approx(m4, abs=1e-14)
    with pytest.raises(ValidationError):
        fourth_moment_bound(seq, 9)


def test_qn_check_bound_dominates_and_decays():
    seq = ChannelSequence.constant(bsc(0.05), bsc(0.2), 800)
    out = qn_quadratic_decay_check(seq, 0.3, [100, 200, 400, 800], 4000, stream(17, 0))
    for row in out["rows"]:
        assert row["markov_bound"] <= 1.0
        assert row["q_hat"] - row["ci"] <= row["markov_bound"]
    qs = [r["q_hat"] for r in out["rows"]]
    assert qs[0] >= qs[-1]
    if not math.isnan(out["slope"]):
        assert out["slope"] < 0
