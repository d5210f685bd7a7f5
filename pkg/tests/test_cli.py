import json
import os
import subprocess
import sys

import numpy as np
import pytest

from wiretap.cli import main

from conftest import fixture_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_capacity_secrecy(capsys):
    code, out, _ = run(capsys, "capacity", "secrecy", fixture_path("bsc05_20.wtc"))
    assert code == 0
    rec = json.loads(out)
    assert rec["value_bits"] == pytest.approx(0.43553113777, abs=1e-9)
    assert rec["version"]
    assert rec["config"]["command"] == "capacity secrecy"


def test_capacity_shannon(capsys):
    code, out, _ = run(capsys, "capacity", "shannon", fixture_path("bsc010.ch"))
    assert code == 0
    assert json.loads(out)["value_bits"] == pytest.approx(0.53100, abs=1e-4)


def test_degraded_check_both_directions(capsys):
    code, out, _ = run(
        capsys, "degraded-check", fixture_path("bsc010.ch"), fixture_path("bsc020.ch")
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["verdict"] == "stochastically_degraded"
    assert rec["witness"][0][1] == pytest.approx(0.125, abs=1e-8)

    code, out, _ = run(
        capsys, "degraded-check", fixture_path("bsc020.ch"), fixture_path("bsc010.ch")
    )
    assert json.loads(out)["verdict"] == "not_degraded"


def test_metrics_subcommand(capsys):
    code, out, _ = run(capsys, "metrics", fixture_path("example_joint.dist"), "--n", "2")
    assert code == 0
    rec = json.loads(out)
    assert rec["s4"] == pytest.approx(rec["s1"] / 2, abs=1e-15)


def test_spectrum_writes_csv(tmp_path, capsys):
    csv_path = tmp_path / "spec.csv"
    json_path = tmp_path / "spec.json"
    code, out, _ = run(
        capsys, "spectrum", "--channel", fixture_path("bsc010.ch"),
        "--n-list", "20,40,80", "--trials", "500", "--seed", "1",
        "--csv-out", str(csv_path), "--out", str(json_path),
    )
    assert code == 0
    assert out == ""
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "n,quantile,mean,variance"
    assert len(lines) == 4
    rec = json.loads(json_path.read_text())
    assert "r_lower" in rec and "r_upper" in rec


def test_simulate_and_sweep(tmp_path, capsys):
    code, out, _ = run(
        capsys, "simulate", "--wiretap", fixture_path("bsc05_20.wtc"),
        "--n", "8", "--rate", "0.25", "--trials", "50", "--seed", "2",
        "--exact-leakage",
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["mode"] == "explicit"
    assert 0 <= rec["exact_leakage"]["s1"]

    csv_path = tmp_path / "sweep.csv"
    code, _, _ = run(
        capsys, "sweep", "--wiretap", fixture_path("bsc05_20.wtc"),
        "--rates", "0.1,0.2", "--n-list", "8", "--trials", "40", "--seed", "2",
        "--csv-out", str(csv_path),
    )
    assert code == 0
    assert len(csv_path.read_text().splitlines()) == 3


def test_gaussian_capacity(capsys):
    code, out, _ = run(
        capsys, "gaussian", "capacity", "--S", "1", "--sigma1sq", "1", "--sigma2sq", "4"
    )
    assert code == 0
    assert json.loads(out)["value_bits"] == pytest.approx(0.3390359526, abs=1e-9)


def test_gaussian_requires_seed(capsys):
    code, _, err = run(
        capsys, "gaussian", "k-stat", "--S", "1", "--sigma1sq", "1", "--sigma2sq", "4"
    )
    assert code == 2
    assert "seed" in err


def test_cesaro_families(capsys):
    code, out, _ = run(
        capsys, "cesaro", "--family", "bsc-doubling", "--params", "0.05,0.2,0.25",
        "--n-list", "16,64,256,1024",
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["diagnostic"]["converged"] is False

    code, _, _ = run(capsys, "cesaro", "--n-list", "4")
    assert code == 2  # neither --family nor --list


def test_exit_codes(tmp_path, capsys):
    assert run(capsys, "capacity", "shannon", str(tmp_path / "nope.ch"))[0] == 2
    assert run(capsys, "sweep", "--wiretap", fixture_path("bsc05_20.wtc"),
               "--rates", "zig", "--n-list", "8", "--trials", "1", "--seed", "0")[0] == 2

    bad = tmp_path / "bad.dist"
    bad.write_text("0.5 0.2\n0.1 0.1\n")  # sums to 0.9
    assert run(capsys, "metrics", str(bad))[0] == 3

    code, _, err = run(
        capsys, "simulate", "--wiretap", fixture_path("bsc05_20.wtc"),
        "--n", "64", "--rate", "0.2", "--trials", "5", "--seed", "1",
        "--exact-leakage",
    )
    assert code == 4
    assert "infeasible" in err


def test_atomic_write_leaves_no_temp_files(tmp_path, capsys):
    out_path = tmp_path / "rec.json"
    code, _, _ = run(
        capsys, "capacity", "shannon", fixture_path("bsc010.ch"), "--out", str(out_path)
    )
    assert code == 0
    assert json.loads(out_path.read_text())["converged"]
    assert os.listdir(tmp_path) == ["rec.json"]


def test_reruns_byte_identical_across_thread_counts(tmp_path):
    env = dict(os.environ)
    outs = []
    for threads, numba_threads in ((1, "1"), (4, "2")):
        path = tmp_path / f"run{threads}.json"
        env["NUMBA_NUM_THREADS"] = numba_threads
        subprocess.run(
            [sys.executable, "-m", "wiretap.cli", "simulate",
             "--wiretap", fixture_path("bsc05_20.wtc"), "--n", "8",
             "--rate", "0.25", "--trials", "60", "--seed", "11",
             "--exact-leakage", "--threads", str(threads), "--out", str(path)],
            env=env, check=True, capture_output=True,
        )
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
