import math

import numpy as np
import pytest

from wiretap.capacity import mutual_information, secrecy_capacity_degraded
from wiretap.channels import bsc, compose
from wiretap.prob import Distribution, ValidationError
from wiretap.rng import stream
from wiretap.spectrum import (
    estimate_eps_limits,
    fit_loglog_slope,
    sample_conditional_information_density,
    sample_information_density,
)


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_density_mean_and_variance_match_single_letter_moments():
    px = Distribution.uniform(2)
    c = bsc(0.1)
    n, trials = 50, 20000
    est = sample_information_density(px, c, n, trials, stream(11, 0))
    mean = 1 - h2(0.1)
    # per-letter variance of the density, computed directly
    vals = np.array([math.log2(2 * 0.9), math.log2(2 * 0.1)])
    var1 = 0.9 * (vals[0] - mean) ** 2 + 0.1 * (vals[1] - mean) ** 2
    assert est.mean == pytest.approx(mean, abs=4 * math.sqrt(var1 / n / trials))
    assert est.variance == pytest.approx(var1 / n, rel=0.1)
    assert est.count == trials
    assert np.all(np.diff(est.samples) >= 0)


def test_density_sampling_is_deterministic():
    px = Distribution.uniform(2)
    a = sample_information_density(px, bsc(0.2), 10, 500, stream(3, 4))
    b = sample_information_density(px, bsc(0.2), 10, 500, stream(3, 4))
    assert np.array_equal(a.samples, b.samples)


def test_cdf_endpoints():
    est = sample_information_density(Distribution.uniform(2), bsc(0.3), 5, 1000, stream(0, 0))
    lo, hi = est.samples[0], est.samples[-1]
    assert est.cdf(lo - 1) == 0.0
    assert est.cdf(hi) == 1.0


def test_conditional_density_concentrates_at_secrecy_capacity():
    w = compose(bsc(0.05), bsc(1 / 6))
    res = secrecy_capacity_degraded(w, tol=1e-12)
    est = sample_conditional_information_density(
        Distribution.uniform(2), w, res.output_dist, 2000, 4000, stream(9, 0)
    )
    assert est.rejected == 0
    assert est.mean == pytest.approx(res.value, abs=0.01)


def test_eps_limits_and_trend():
    px = Distribution.uniform(2)
    c = bsc(0.1)
    ests = {
        n: sample_information_density(px, c, n, 4000, stream(2, i))
        for i, n in enumerate([100, 400, 1600])
    }
    out = estimate_eps_limits(ests, 0.1)
    # the 0.1-quantile rises toward capacity as n grows
    assert out.monotone_trend
    assert out.r_lower <= out.r_upper < 1 - h2(0.1) + 0.05
    assert not out.epsilon_substituted

    zero = estimate_eps_limits(ests, 0.0)
    assert zero.epsilon_substituted

    with pytest.raises(ValidationError):
        estimate_eps_limits({100: ests[100]}, 0.1)
    with pytest.raises(ValidationError):
        estimate_eps_limits(ests, 1.0)


def test_fit_loglog_slope_exact_power_law():
    ns = np.array([100, 200, 400, 800])
    slope, r2 = fit_loglog_slope(ns, 3.0 / ns)
    assert slope == pytest.approx(-1.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)
