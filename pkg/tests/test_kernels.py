"""Agreement of the numba kernels with the pure-numpy fallback.

The numpy implementations are imported directly so both paths run in this
process regardless of WIRETAP_NO_NUMBA; the dispatching wrappers are
exercised too.
"""

import numpy as np
import pytest

from wiretap._kernels import (
    USE_NUMBA,
    _codeword_scores_np,
    _exact_z_table_np,
    codeword_scores,
    exact_z_table,
)


@pytest.fixture
def workload(rng):
    cb = rng.integers(0, 3, size=(96, 7), dtype=np.int64)
    table = rng.normal(size=(3, 4))
    y = rng.integers(0, 4, size=7, dtype=np.int64)
    wz = rng.dirichlet(np.ones(2), size=3)
    return cb, table, y, wz


def test_codeword_scores_agree(workload):
    cb, table, y, _ = workload
    got = codeword_scores(cb, table, y)
    ref = _codeword_scores_np(cb, table, y)
    assert np.allclose(got, ref, atol=1e-12)
    # direct scalar check of one entry
    assert got[5] == pytest.approx(sum(table[cb[5, i], y[i]] for i in range(7)), abs=1e-12)


def test_exact_z_table_agree(workload):
    cb, _, _, wz = workload
    got = exact_z_table(cb, wz, 8)
    ref = _exact_z_table_np(cb, wz, 8)
    assert got.shape == (8, 2**7)
    assert np.allclose(got, ref, atol=1e-14)
    assert np.allclose(got.sum(axis=1), 1.0, atol=1e-12)


def test_dispatch_flag_is_boolean():
    assert isinstance(USE_NUMBA, bool)
