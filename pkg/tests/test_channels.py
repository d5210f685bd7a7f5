import math
import time

import numpy as np
import pytest

from wiretap.channels import (
    Channel,
    FileFormatError,
    WiretapChannel,
    bsc,
    check_stochastic_degradedness,
    compose,
    degradedness_certificate,
    is_weakly_symmetric,
    load_channel,
    load_wiretap,
    n_letter_density,
    save_channel,
)
from wiretap.prob import ValidationError

from conftest import fixture_path


def test_channel_validation():
    with pytest.raises(ValidationError):
        Channel(np.array([[0.5, 0.6], [0.5, 0.5]]))
    with pytest.raises(ValidationError):
        Channel(np.array([[1.1, -0.1], [0.5, 0.5]]))
    with pytest.raises(ValidationError):
        bsc(1.5)


def test_bsc_and_identity():
    c = bsc(0.1)
    assert np.allclose(c.matrix, [[0.9, 0.1], [0.1, 0.9]])
    assert np.allclose(Channel.identity(3).matrix, np.eye(3))


def test_compose_markov_chain_marginals():
    w = compose(bsc(0.1), bsc(0.125))
    # end-to-end eavesdropper crossover 0.1*0.875 + 0.9*0.125 = 0.2
    assert np.allclose(w.marginal_z().matrix, bsc(0.2).matrix, atol=1e-15)
    assert np.allclose(w.marginal_y().matrix, bsc(0.1).matrix, atol=1e-15)
    k = w.kernel
    assert k.shape == (2, 2, 2)
    assert np.allclose(k.sum(axis=(1, 2)), 1.0)


def test_wiretap_rejects_wrong_factorization():
    joint = np.einsum("xy,yz->xyz", bsc(0.1).matrix, bsc(0.2).matrix).reshape(2, 4)
    with pytest.raises(ValidationError):
        WiretapChannel(joint, y_size=2, z_size=2, w1=bsc(0.1), w2=bsc(0.3))


def test_conditional_y_given_z_is_stochastic_where_reachable():
    w = compose(bsc(0.05), bsc(0.125))
    cond = w.conditional_y_given_z()
    sums = cond.sum(axis=1)  # (x, z)
    wz = w.kernel.sum(axis=1)
    assert np.allclose(sums[wz > 0], 1.0)


def test_degradedness_witness_bsc():
    cert = check_stochastic_degradedness(bsc(0.1), bsc(0.2))
    assert cert.verdict == "stochastically_degraded"
    assert cert.degraded
    assert abs(cert.witness.matrix[0, 1] - 0.125) <= 1e-8
    # composing through the witness reproduces the Z marginal
    assert np.allclose(bsc(0.1).matrix @ cert.witness.matrix, bsc(0.2).matrix, atol=1e-9)


def test_degradedness_reversed_pair_rejected_fast():
    t0 = time.perf_counter()
    cert = check_stochastic_degradedness(bsc(0.2), bsc(0.1))
    elapsed = time.perf_counter() - t0
    assert cert.verdict == "not_degraded"
    assert not cert.degraded
    assert cert.residual > 1e-3
    assert elapsed < 0.1


def test_degradedness_certificate_prefers_factorization():
    w = compose(bsc(0.05), bsc(0.125))
    cert = degradedness_certificate(w)
    assert cert.verdict == "physically_factored"
    assert cert.residual == 0.0


def test_is_weakly_symmetric():
    assert is_weakly_symmetric(bsc(0.3))
    assert is_weakly_symmetric(Channel(np.array([[0.5, 0.3, 0.2],
                                                 [0.2, 0.5, 0.3],
                                                 [0.3, 0.2, 0.5]])))
    assert not is_weakly_symmetric(Channel(np.array([[0.7, 0.3], [0.4, 0.6]])))


def test_n_letter_density():
    c = bsc(0.1)
    x = np.array([0, 1, 0])
    y = np.array([0, 1, 1])
    assert n_letter_density(c.matrix, x, y) == pytest.approx(
        2 * math.log2(0.9) + math.log2(0.1), abs=1e-12
    )
    ident = Channel.identity(2)
    assert n_letter_density(ident.matrix, x, np.array([1, 1, 0])) == -math.inf


def test_channel_file_roundtrip(tmp_path):
    c = Channel(np.array([[0.25, 0.5, 0.25], [0.1, 0.2, 0.7]]))
    path = tmp_path / "c.ch"
    save_channel(c, path)
    back = load_channel(path)
    assert np.array_equal(back.matrix, c.matrix)


def test_channel_file_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad.ch"
    path.write_text("2 2\n0.9 0.1\n0.1\n")
    with pytest.raises(FileFormatError, match="3"):
        load_channel(path)
    path.write_text("2 2\n0.9 0.1\n0.1 oops\n")
    with pytest.raises(FileFormatError):
        load_channel(path)


def test_load_wiretap_factored_and_joint(tmp_path):
    w = load_wiretap(fixture_path("bsc010_020.wtc"))
    assert np.allclose(w.marginal_z().matrix, bsc(0.2).matrix, atol=1e-12)

    joint = np.einsum("xy,yz->xyz", bsc(0.1).matrix, bsc(0.125).matrix).reshape(2, 4)
    path = tmp_path / "j.wtc"
    lines = ["joint 2 2 2"] + [" ".join(f"{v:.17g}" for v in row) for row in joint]
    path.write_text("\n".join(lines) + "\n")
    w2 = load_wiretap(path)
    assert np.allclose(w2.joint, joint)

    path.write_text("mystery 2 2 2\n")
    with pytest.raises(FileFormatError, match="mystery"):
        load_wiretap(path)
