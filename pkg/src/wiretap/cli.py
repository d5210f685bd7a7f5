"""Experiment runner.

Sub-commands: capacity, degraded-check, metrics, spectrum, simulate,
sweep, gaussian, cesaro.  Every run emits a JSON record carrying the
resolved configuration and the tool version; table-producing commands
also emit CSV.  Files are written atomically (temp file + rename).

Exit codes: 0 ok, 2 config/parse error, 3 validation or precondition
failure, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .capacity import (
    gaussian_secrecy_capacity,
    secrecy_capacity_degraded,
    shannon_capacity,
)
from .channels import (
    FileFormatError,
    bsc,
    check_stochastic_degradedness,
    load_channel,
    load_wiretap,
)
from .gaussian import (
    GaussianWtcParams,
    estimate_acceptance_rate,
    gaussian_qn_estimate,
    sample_K_statistic,
    sample_truncated_input,
)
from .metrics import compute_metrics
from .nonstationary import (
    ChannelSequence,
    blockwise_doubling_crossovers,
    cesaro_means,
    convergence_diagnostic,
)
from .prob import Distribution, JointDistribution, ValidationError, load_distribution
from .rng import stream
from .sim import (
    BudgetError,
    CodebookSpec,
    exact_leakage,
    estimate_leakage_tails,
    estimate_qn,
    generate_codebook,
    phase_sweep,
    run_reliability,
    run_reliability_ensemble,
)
from .spectrum import estimate_eps_limits, sample_information_density

EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_BUDGET = 4


class CliError(Exception):
    def __init__(self, msg, code):
        super().__init__(msg)
        self.code = code


def _atomic_write(path: str, data: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".wiretap-tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_json(record: dict, config: dict, out: str | None) -> None:
    record = dict(record)
    record["config"] = config
    record["version"] = __version__
    text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _emit_csv(rows: list[dict], header: list[str], out: str | None) -> None:
    """Write a CSV table; skipped when no --csv-out was given (the rows are
    always embedded in the JSON record, and mixing CSV and JSON on stdout
    would break piping)."""
    if out is None:
        return
    if not rows:
        raise CliError("refusing to write an empty table", EXIT_VALIDATION)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, extrasaction="ignore",
                            quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    if out:
        _atomic_write(out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise CliError(f"bad integer list: {text!r}", EXIT_CONFIG)


def _load_joint(path) -> JointDistribution:
    rows = []
    ncols = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            toks = body.split()
            if ncols is None and len(toks) == 2 and all("." not in t for t in toks):
                continue  # optional "<rows> <cols>" header
            try:
                vals = [float(t) for t in toks]
            except ValueError:
                raise FileFormatError(path, lineno, "non-numeric entry")
            if ncols is None:
                ncols = len(vals)
            elif len(vals) != ncols:
                raise FileFormatError(path, lineno, f"expected {ncols} entries")
            rows.append(vals)
    if not rows:
        raise FileFormatError(path, 0, "empty joint file")
    return JointDistribution(np.array(rows))


# -- sub-command handlers ----------------------------------------------------


def _cmd_capacity(args) -> None:
    if args.which == "shannon":
        res = shannon_capacity(load_channel(args.file), tol=args.tol, max_iter=args.max_iter)
    else:
        res = secrecy_capacity_degraded(
            load_wiretap(args.file), tol=args.tol, max_iter=args.max_iter
        )
    _emit_json(
        {
            "value_bits": res.value,
            "optimal_input": res.optimal_input.probs.tolist(),
            "kkt_slack": res.kkt_slack,
            "iterations": res.iterations,
            "converged": res.converged,
        },
        {"command": f"capacity {args.which}", "file": args.file,
         "tol": args.tol, "max_iter": args.max_iter},
        args.out,
    )


def _cmd_degraded_check(args) -> None:
    cert = check_stochastic_degradedness(
        load_channel(args.y_channel), load_channel(args.z_channel), tol=args.tol
    )
    _emit_json(
        {
            "verdict": cert.verdict,
            "residual": cert.residual,
            "witness": cert.witness.matrix.tolist() if cert.witness else None,
        },
        {"command": "degraded-check", "y_channel": args.y_channel,
         "z_channel": args.z_channel, "tol": args.tol},
        args.out,
    )


def _cmd_metrics(args) -> None:
    rep = compute_metrics(_load_joint(args.file), n=args.n,
                          eta1_bits=args.eta1, eta2_bits=args.eta2)
    _emit_json(
        {"s1": rep.s1, "s2": rep.s2, "s3": rep.s3, "s4": rep.s4, "s5": rep.s5,
         "s6": rep.s6},
        {"command": "metrics", "file": args.file, "n": args.n,
         "eta1": args.eta1, "eta2": args.eta2},
        args.out,
    )


def _cmd_spectrum(args) -> None:
    channel = load_channel(args.channel)
    px = load_distribution(args.input) if args.input else Distribution.uniform(channel.input_size)
    n_list = _int_list(args.n_list)
    estimates = {}
    rows = []
    for i, n in enumerate(sorted(set(n_list))):
        est = sample_information_density(px, channel, n, args.trials, stream(args.seed, i))
        estimates[n] = est
        rows.append({"n": n, "mean": est.mean, "variance": est.variance})
    limits = estimate_eps_limits(estimates, args.eps) if len(estimates) >= 3 else None
    for row in rows:
        q = limits.per_n_quantiles[row["n"]][0] if limits else math.nan
        row["quantile"] = q
    _emit_csv(rows, ["n", "quantile", "mean", "variance"], args.csv_out)
    summary = {"per_n": rows}
    if limits:
        summary.update(
            {"epsilon": limits.epsilon, "r_lower": limits.r_lower,
             "r_upper": limits.r_upper, "monotone_trend": limits.monotone_trend}
        )
    _emit_json(
        summary,
        {"command": "spectrum", "channel": args.channel, "input": args.input,
         "n_list": n_list, "trials": args.trials, "eps": args.eps,
         "seed": args.seed},
        args.out,
    )


def _simulate_record(w, args) -> dict:
    px = Distribution.uniform(w.x_size)
    from .capacity import mutual_information

    ixz = mutual_information(px, w.marginal_z())
    k_rate = ixz + 2 * args.gamma
    log2_m = args.rate * args.n
    log2_mtil = log2_m + k_rate * args.n
    st = stream(args.seed, 0)
    record: dict = {"k_rate_bits": k_rate, "log2_message_count": log2_m,
                    "log2_total_count": log2_mtil}
    feasible = log2_mtil < 30
    if feasible:
        m_count = max(1, round(2.0**log2_m))
        k_count = max(1, math.ceil(2.0 ** (k_rate * args.n)))
        spec = CodebookSpec(
            n=args.n, message_count=m_count, total_count=m_count * k_count,
            gamma=args.gamma, input_dist=px, seed=args.seed,
        )
        cb = generate_codebook(spec)
        rel = run_reliability(cb, w, args.trials, st)
        tails = estimate_leakage_tails(cb, w, args.trials, st)
        record["s3_hat"], record["s3_ci"] = tails.s3_hat, tails.s3_ci
        record["s6_hat"], record["s6_ci"] = tails.s6_hat, tails.s6_ci
        if args.exact_leakage:
            rep = exact_leakage(cb, w)
            record["exact_leakage"] = {
                "s1": rep.s1, "s2": rep.s2, "s3": rep.s3,
                "s4": rep.s4, "s5": rep.s5, "s6": rep.s6,
            }
    else:
        if args.exact_leakage:
            raise CliError(
                "exact leakage infeasible at this blocklength/rate", EXIT_BUDGET
            )
        rel = run_reliability_ensemble(
            px, w.marginal_y(), args.n, log2_mtil, args.gamma, args.trials, st
        )
    qn_hat, qn_ci = estimate_qn(
        px, w.marginal_z(), k_rate - args.gamma, args.trials, args.n, stream(args.seed, 1)
    )
    record.update(
        {"eps_hat": rel.error_prob, "eps_ci": rel.ci_radius, "mode": rel.mode,
         "qn_hat": qn_hat, "qn_ci": qn_ci}
    )
    return record


def _cmd_simulate(args) -> None:
    w = load_wiretap(args.wiretap)
    record = _simulate_record(w, args)
    _emit_json(
        record,
        {"command": "simulate", "wiretap": args.wiretap, "n": args.n,
         "rate": args.rate, "gamma": args.gamma, "trials": args.trials,
         "seed": args.seed, "exact_leakage": bool(args.exact_leakage)},
        args.out,
    )


def _parse_rates(text: str) -> list[float]:
    try:
        if ":" in text:
            a, b, step = (float(t) for t in text.split(":"))
            count = int(round((b - a) / step)) + 1
            return [a + i * step for i in range(count)]
        return [float(t) for t in text.split(",") if t]
    except ValueError:
        raise CliError(f"bad rate grid: {text!r}", EXIT_CONFIG)


def _cmd_sweep(args) -> None:
    w = load_wiretap(args.wiretap)
    rows = phase_sweep(
        w,
        _parse_rates(args.rates),
        _int_list(args.n_list),
        args.trials,
        args.seed,
        gamma=args.gamma,
    )
    _emit_csv(
        rows,
        ["rate", "n", "eps_hat", "eps_ci", "s6_hat", "s6_ci", "qn_hat", "qn_ci"],
        args.csv_out,
    )
    _emit_json(
        {"rows": rows},
        {"command": "sweep", "wiretap": args.wiretap, "rates": args.rates,
         "n_list": args.n_list, "trials": args.trials, "gamma": args.gamma,
         "seed": args.seed},
        args.out,
    )


def _gaussian_params(args) -> GaussianWtcParams:
    delta = args.delta if args.delta is not None else 0.1 * args.S
    return GaussianWtcParams(S=args.S, sigma1_sq=args.sigma1sq,
                             sigma2_sq=args.sigma2sq, delta=delta)


def _cmd_gaussian(args) -> None:
    base_cfg = {"command": f"gaussian {args.which}", "S": args.S,
                "sigma1sq": args.sigma1sq, "sigma2sq": args.sigma2sq}
    if args.which == "capacity":
        value = gaussian_secrecy_capacity(args.S, args.sigma1sq, args.sigma2sq)
        _emit_json({"value_bits": value}, base_cfg, args.out)
        return
    params = _gaussian_params(args)
    base_cfg["delta"] = params.delta
    if args.which == "k-stat":
        st = stream(args.seed, 0)
        x = sample_truncated_input(params, args.n, st)
        est = sample_K_statistic(params, x, args.trials, st)
        mu_hat, mu_ci = estimate_acceptance_rate(params, args.n, args.trials, stream(args.seed, 1))
        _emit_json(
            {"k_mean": est.mean, "k_mean_ci": est.mean_ci,
             "k_variance": est.variance, "k_variance_ci": est.variance_ci,
             "mu_hat": mu_hat, "mu_ci": mu_ci,
             "secrecy_capacity": params.secrecy_capacity},
            {**base_cfg, "n": args.n, "trials": args.trials, "seed": args.seed},
            args.out,
        )
        return
    # qn
    rows = []
    for i, n in enumerate(_int_list(args.n_list)):
        qhat, ci = gaussian_qn_estimate(params, args.gamma, n, args.trials, stream(args.seed, i))
        rows.append({"n": n, "qn_hat": qhat, "qn_ci": ci})
    _emit_csv(rows, ["n", "qn_hat", "qn_ci"], args.csv_out)
    _emit_json(
        {"rows": rows},
        {**base_cfg, "gamma": args.gamma, "n_list": args.n_list,
         "trials": args.trials, "seed": args.seed},
        args.out,
    )


def _cesaro_sequence(args, horizon: int) -> ChannelSequence:
    if args.list:
        mains, eaves = [], []
        with open(args.list) as fh:
            for lineno, line in enumerate(fh, 1):
                body = line.split("#", 1)[0].strip()
                if not body:
                    continue
                toks = body.split()
                if len(toks) != 2:
                    raise FileFormatError(args.list, lineno, "expected 'p_main p_eaves'")
                mains.append(float(toks[0]))
                eaves.append(float(toks[1]))
        return ChannelSequence.bsc_family(mains, eaves)
    params = [float(t) for t in args.params.split(",")] if args.params else []
    family = args.family
    if family == "bsc-constant":
        p, q = params
        return ChannelSequence.bsc_family([p] * horizon, q)
    if family == "bsc-alternating":
        pa, pb, q = params
        mains = [pa if i % 2 == 0 else pb for i in range(horizon)]
        return ChannelSequence.bsc_family(mains, q)
    if family == "bsc-doubling":
        pa, pb, q = params
        return ChannelSequence.bsc_family(
            blockwise_doubling_crossovers(pa, pb, horizon), q
        )
    if family == "bsc-convergent":
        p0, pstar, q = params
        mains = [pstar + (p0 - pstar) / (i + 1) for i in range(horizon)]
        return ChannelSequence.bsc_family(mains, q)
    raise CliError(f"unknown family {family!r}", EXIT_CONFIG)


def _cmd_cesaro(args) -> None:
    n_list = _int_list(args.n_list)
    seq = _cesaro_sequence(args, max(n_list))
    table = cesaro_means(seq, n_list)
    diag = convergence_diagnostic(table, min(args.window, len(table)), args.tol)
    _emit_csv(table, ["n", "mean_cy", "mean_cz", "diff"], args.csv_out)
    _emit_json(
        {"table": table, "diagnostic": diag},
        {"command": "cesaro", "family": args.family, "params": args.params,
         "list": args.list, "n_list": n_list, "window": args.window,
         "tol": args.tol},
        args.out,
    )


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wiretap", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seeded=False, csv_out=False):
        p.add_argument("--out", help="write the JSON record here (atomic)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap; results are identical for any value")
        if seeded:
            p.add_argument("--seed", type=int, required=True)
        if csv_out:
            p.add_argument("--csv-out", help="write the CSV table here (atomic)")

    p = sub.add_parser("capacity", help="Shannon or secrecy capacity")
    p.add_argument("which", choices=["shannon", "secrecy"])
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=20000)
    common(p)
    p.set_defaults(func=_cmd_capacity)

    p = sub.add_parser("degraded-check", help="stochastic degradedness LP")
    p.add_argument("y_channel")
    p.add_argument("z_channel")
    p.add_argument("--tol", type=float, default=1e-9)
    common(p)
    p.set_defaults(func=_cmd_degraded_check)

    p = sub.add_parser("metrics", help="exact secrecy metrics of a joint")
    p.add_argument("file")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--eta1", type=float, default=0.1)
    p.add_argument("--eta2", type=float, default=0.1)
    common(p)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("spectrum", help="information-density spectrum sweep")
    p.add_argument("--channel", required=True)
    p.add_argument("--input", help="input distribution file (default uniform)")
    p.add_argument("--n-list", required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--eps", type=float, default=0.1)
    common(p, seeded=True, csv_out=True)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("simulate", help="wiretap code simulation at one (rate, n)")
    p.add_argument("--wiretap", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.02)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--exact-leakage", action="store_true")
    common(p, seeded=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="phase-transition sweep over (rate, n)")
    p.add_argument("--wiretap", required=True)
    p.add_argument("--rates", required=True, help="a:b:step or comma list")
    p.add_argument("--n-list", required=True)
    p.add_argument("--gamma", type=float, default=0.02)
    p.add_argument("--trials", type=int, default=1000)
    common(p, seeded=True, csv_out=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("gaussian", help="Gaussian wiretap channel statistics")
    p.add_argument("which", choices=["capacity", "k-stat", "qn"])
    p.add_argument("--S", type=float, required=True)
    p.add_argument("--sigma1sq", type=float, required=True)
    p.add_argument("--sigma2sq", type=float, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--n-list", default="100,200,400")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--csv-out")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_gaussian)

    p = sub.add_parser("cesaro", help="Cesaro means of per-letter capacities")
    p.add_argument("--family", choices=[
        "bsc-constant", "bsc-alternating", "bsc-doubling", "bsc-convergent"])
    p.add_argument("--params", help="comma-separated family parameters")
    p.add_argument("--list", help="explicit per-letter 'p_main p_eaves' file")
    p.add_argument("--n-list", required=True)
    p.add_argument("--window", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-6)
    common(p, csv_out=True)
    p.set_defaults(func=_cmd_cesaro)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        if args.command == "gaussian" and args.which != "capacity" and args.seed is None:
            raise CliError("--seed is required for randomized gaussian runs", EXIT_CONFIG)
        if args.command == "cesaro" and not (args.family or args.list):
            raise CliError("cesaro needs --family or --list", EXIT_CONFIG)
        args.func(args)
        return 0
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetError as exc:
        print(f"error: {exc} (required budget {exc.required})", file=sys.stderr)
        return EXIT_BUDGET
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
