"""Command-line front end: generate, estimate, gp-sample, experiment, report.

All outputs are plain CSV/JSON/markdown so results can be consumed by any
plotting tool.  Every command is fully determined by (config file, seed);
existing result files are never overwritten without --force.

Exit codes: 0 success, 1 usage error, 2 runtime error, 3 finished but some
summary rows were flagged invalid.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .datagen import CensoredSample, RandomStream, generate_sample, true_model
from .errors import PlmixError
from .estimators import hazard_process, km, nelson_aalen, pl_process, rho_path
from .experiments import (
    fit_rate,
    run_experiment,
    write_markdown_report,
    write_rate_json,
    write_raw_csv,
    write_summary_csv,
)
from .gausslimit import (
    GammaKernel,
    b_cov,
    iid_hazard_variance_anchor,
    sample_b_direct_batch,
    sample_b_integral_batch,
    sample_kiefer_batch,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_FLAGGED = 3


class CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="plmix", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="increase log verbosity (-v info, -vv debug)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="draw a censored sample and write it as CSV")
    gen.add_argument("--config", required=True, help="TOML config with a [model] section")
    gen.add_argument("--n", type=int, required=True, help="sample size")
    gen.add_argument("--seed", type=int, default=0, help="master seed")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--force", action="store_true", help="overwrite existing outputs")

    est = sub.add_parser("estimate", help="fit estimators to a sample CSV")
    est.add_argument("--sample", required=True, help="input CSV with header z,delta")
    est.add_argument("--config", help="TOML config; enables truth-based process paths")
    est.add_argument("--out", required=True, help="output directory")
    est.add_argument("--force", action="store_true")
    est.add_argument("--epsilon", type=float, default=0.05, help="survival floor for tau")
    est.add_argument("--grid-size", type=int, default=512)
    est.add_argument("--p0", type=float, default=0.1)
    est.add_argument("--p1", type=float, default=0.9)
    est.add_argument("--p-grid-size", type=int, default=33)

    gps = sub.add_parser("gp-sample", help="draw limit-process paths")
    gps.add_argument("--config", required=True)
    gps.add_argument("--n-level", type=float, required=True, help="level of the second axis")
    gps.add_argument("--draws", type=int, default=1)
    gps.add_argument("--method", choices=("integral", "direct"), default="integral")
    gps.add_argument("--seed", type=int, default=0)
    gps.add_argument("--out", required=True, help="output directory")
    gps.add_argument("--force", action="store_true")

    exp = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    exp.add_argument("--config", required=True, help="TOML config with [model] and [experiment]")
    exp.add_argument("--out", required=True, help="output directory")
    exp.add_argument("--seed", type=int, help="override the seed in the config")
    exp.add_argument("--jobs", type=int, default=1, help="concurrent replication workers")
    exp.add_argument("--force", action="store_true")

    rep = sub.add_parser("report", help="render tables and plot data from experiment results")
    rep.add_argument("--results", required=True, help="directory written by `experiment`")
    rep.add_argument("--out", help="output directory (default: results dir)")
    rep.add_argument("--force", action="store_true")
    return parser


def _fresh(path: Path, force: bool) -> Path:
    if path.exists() and not force:
        raise PlmixError(f"refusing to overwrite {path} (use --force)")
    return path


def _cmd_generate(args) -> int:
    if args.n <= 0:
        raise CliUsageError(f"--n must be positive, got {args.n}")
    cfg = load_config(args.config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _fresh(out, args.force)
    sample = generate_sample(cfg.model, args.n, RandomStream(args.seed, 0))
    sample.to_csv(out)
    censored = 1.0 - sample.delta.mean()
    print(f"wrote {out} (n={sample.n}, censoring_proportion={censored:.6f})")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    sample = CensoredSample.from_csv(args.sample)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fhat = km(sample)
    lhat = nelson_aalen(sample)
    eval_times = np.unique(sample.z)

    with open(_fresh(out / "km.csv", args.force), "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "value"])
        for t, v in zip(eval_times, fhat(eval_times)):
            writer.writerow([repr(float(t)), repr(float(v))])
    with open(_fresh(out / "nelson_aalen.csv", args.force), "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "value"])
        for t, v in zip(eval_times, lhat(eval_times)):
            writer.writerow([repr(float(t)), repr(float(v))])
    with open(_fresh(out / "quantiles.csv", args.force), "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["p", "value"])
        for p, t in zip(fhat.values, fhat.jump_times):
            writer.writerow([repr(float(p)), repr(float(t))])
    print(f"wrote estimators for n={sample.n} to {out}")

    if args.config:
        cfg = load_config(args.config)
        truth = true_model(cfg.model)
        tau = truth.tau(args.epsilon)
        grid = np.linspace(tau / args.grid_size, tau, args.grid_size)
        sidecar = {"tau": tau, "epsilon": args.epsilon}
        hazard_process(lhat, truth, grid, sample.n, epsilon=args.epsilon).to_csv(
            _fresh(out / "hazard_process.csv", args.force), sidecar=sidecar
        )
        pl_process(fhat, truth, grid, sample.n, epsilon=args.epsilon).to_csv(
            _fresh(out / "pl_process.csv", args.force), sidecar=sidecar
        )
        p_grid = np.linspace(args.p0, args.p1, args.p_grid_size)
        rho_path(fhat, sample.n, truth, p_grid).to_csv(
            _fresh(out / "quantile_process.csv", args.force), sidecar=sidecar
        )
        print(f"wrote process paths on [0, {tau:.6g}]")
    return EXIT_OK


def _cmd_gp_sample(args) -> int:
    if args.draws < 1:
        raise CliUsageError(f"--draws must be >= 1, got {args.draws}")
    cfg = load_config(args.config)
    truth = true_model(cfg.model)
    kernel = GammaKernel.build(cfg.model, tol=cfg.gp.series_tol)
    tau = truth.tau(cfg.gp.epsilon)
    grid = np.linspace(tau / cfg.gp.grid_size, tau, cfg.gp.grid_size)
    stream = RandomStream(args.seed, 0)
    if args.method == "integral":
        kvals = sample_kiefer_batch(grid, args.n_level, kernel, stream,
                                    draws=args.draws, epsilon=cfg.gp.epsilon)
        bvals = sample_b_integral_batch(grid, kvals, args.n_level, truth)
    else:
        bvals = sample_b_direct_batch(grid, args.n_level, kernel, stream,
                                      draws=args.draws, epsilon=cfg.gp.epsilon)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    draws_path = _fresh(out / "draws.csv", args.force)
    with open(draws_path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([repr(float(g)) for g in grid])
        for row in bvals:
            writer.writerow([repr(float(v)) for v in row])

    # Covariance discrepancy at a handful of grid pairs, plus the iid
    # variance anchor recorded as a diagnostic (the limit-process weighting
    # intentionally differs from the classical one; see README).  Pairs
    # start away from the origin, where the variance is too small for a
    # meaningful z-score.
    idx = np.unique(np.linspace(grid.size // 10, grid.size - 1, 4).astype(int))
    pairs = [(i, j) for ii, i in enumerate(idx) for j in idx[ii:]]
    report = []
    for i, j in pairs:
        emp = float((bvals[:, i] * bvals[:, j]).mean())
        target = b_cov(grid[i], args.n_level, grid[j], args.n_level, kernel)
        var_i = b_cov(grid[i], args.n_level, grid[i], args.n_level, kernel)
        var_j = b_cov(grid[j], args.n_level, grid[j], args.n_level, kernel)
        se = math.sqrt(max(var_i * var_j + target ** 2, 0.0) / args.draws)
        report.append({
            "s": float(grid[i]), "t": float(grid[j]),
            "empirical": emp, "target": target, "se": se,
            "z": (emp - target) / se if se > 0 else 0.0,
        })
    summary = {
        "method": args.method,
        "n_level": args.n_level,
        "draws": args.draws,
        "grid_size": int(grid.size),
        "tau": tau,
        "series_k_max": kernel.k_max,
        "series_tail_bound": kernel.tail_bound,
        "covariance_pairs": report,
        "iid_anchor_diagnostic": {
            "t": float(grid[-1]),
            "b_variance": b_cov(grid[-1], args.n_level, grid[-1], args.n_level, kernel)
            if args.n_level > 0 else 0.0,
            "classical_hazard_variance": iid_hazard_variance_anchor(truth, float(grid[-1])),
        },
    }
    report_path = _fresh(out / "covariance_report.json", args.force)
    with open(report_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.draws} draw(s) and covariance report to {out}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed, need_experiment=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: _fresh(out / name, args.force)
             for name in ("raw.csv", "summary.csv", "rate_fits.json", "report.md")}
    result = run_experiment(cfg.experiment, jobs=max(1, args.jobs))
    write_raw_csv(paths["raw.csv"], result.raw_rows)
    write_summary_csv(paths["summary.csv"], result.summaries)
    write_rate_json(paths["rate_fits.json"], result.rate_fits)
    write_markdown_report(paths["report.md"], result)
    flagged = [r for r in result.summaries if r.flagged]
    print(f"wrote experiment results to {out} "
          f"({len(result.summaries)} summary rows, {len(flagged)} flagged)")
    if flagged:
        for r in flagged:
            print(f"FLAGGED: {r.statistic} at n={r.n}: "
                  f"{r.reps_valid}/{r.reps_total} valid replications", file=sys.stderr)
        return EXIT_FLAGGED
    return EXIT_OK


def _cmd_report(args) -> int:
    results = Path(args.results)
    summary_path = results / "summary.csv"
    if not summary_path.exists():
        raise PlmixError(f"no summary.csv under {results}")
    rows = []
    with open(summary_path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append({
                "statistic": row["statistic"], "n": int(row["n"]),
                "median": float(row["median"]), "mean": float(row["mean"]),
                "q05": float(row["q05"]), "q95": float(row["q95"]),
                "reps_valid": int(row["reps_valid"]),
            })
    totals: dict[tuple[str, int], int] = {}
    raw_path = results / "raw.csv"
    if raw_path.exists():
        with open(raw_path, newline="") as fh:
            for row in csv.DictReader(fh):
                key = (row["statistic"], int(row["n"]))
                totals[key] = totals.get(key, 0) + 1

    out = Path(args.out) if args.out else results
    out.mkdir(parents=True, exist_ok=True)
    stats = list(dict.fromkeys(r["statistic"] for r in rows))
    fits = []
    flagged = False
    print(f"{'statistic':<12} {'n':>7} {'median':>12} {'q05':>12} {'q95':>12} {'valid':>6}")
    for stat in stats:
        stat_rows = [r for r in rows if r["statistic"] == stat]
        plot_path = _fresh(out / f"plotdata_{stat}.csv", args.force)
        with open(plot_path, "w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n", "median", "log_n", "log_median"])
            for r in stat_rows:
                log_med = math.log(r["median"]) if r["median"] > 0 else float("nan")
                writer.writerow([r["n"], repr(r["median"]),
                                 repr(math.log(r["n"])), repr(log_med)])
        for r in stat_rows:
            total = totals.get((stat, r["n"]))
            is_flagged = total is not None and r["reps_valid"] < 0.9 * total
            flagged = flagged or is_flagged
            mark = " FLAGGED" if is_flagged else ""
            print(f"{stat:<12} {r['n']:>7} {r['median']:>12.6g} {r['q05']:>12.6g} "
                  f"{r['q95']:>12.6g} {r['reps_valid']:>6}{mark}")
        positive = [r for r in stat_rows if r["median"] > 0]
        if len(positive) >= 3:
            slope, stderr = fit_rate([r["n"] for r in positive],
                                     [r["median"] for r in positive])
            fits.append({"statistic": stat, "slope": slope, "stderr": stderr})
            print(f"{'':<12} log-log slope {slope:.4f} (stderr {stderr:.4f})")
    with open(_fresh(out / "report_rate_fits.json", args.force), "w") as fh:
        json.dump(fits, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_FLAGGED if flagged else EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except CliUsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    handlers = {
        "generate": _cmd_generate,
        "estimate": _cmd_estimate,
        "gp-sample": _cmd_gp_sample,
        "experiment": _cmd_experiment,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except CliUsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PlmixError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
