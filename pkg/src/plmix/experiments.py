"""Monte Carlo harness: per-replication statistics, aggregation, rate fits.

Each statistic turns one censored sample (plus the known truth) into a
scalar whose behavior across sample sizes is the measurable form of an
asymptotic claim: sup-deviations for consistency rates, iterated-logarithm
normalizations for boundedness, sliding-window oscillation, Bahadur-type
coupling errors, and two-sample Kolmogorov-Smirnov distances between
empirical-process functionals and draws of the limiting Gaussian process.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .datagen import CensoredSample, MixingModel, RandomStream, TrueModel, true_model
from .errors import PlmixError
from .estimators import (
    km,
    nelson_aalen,
    pl_quantile_grid,
    rho_path,
    sup_step_vs_fn,
)
from .gausslimit import GammaKernel, sample_b_integral_batch, sample_kiefer_batch

logger = logging.getLogger(__name__)

VALID_STATISTICS = (
    "sup_pl",
    "sup_hazard",
    "lil",
    "bahadur",
    "qdev",
    "oscillation",
    "coupling",
    "rel38",
    "sup_rho",
    "ksdist",
    "ksdist_q",
)

# Stream ids for limit-process draws sit far above replication indices so
# the two families of generators can never collide.
_GP_STREAM_PL = 2_000_000_000
_GP_STREAM_Q = 2_100_000_000


def a_n(n: int) -> float:
    """Iterated-logarithm rate (log log n / n)^(1/2)."""
    return math.sqrt(math.log(math.log(n)) / n)


def b_n(n: int, lam: float = 1.0) -> float:
    """Approximation rate n^(-1/2) (log n)^(-lam)."""
    return math.log(n) ** (-lam) / math.sqrt(n)


def lambda_n(n: int, const: float = 1.0, lam: float = 1.0) -> float:
    """Oscillation window width const * b_n."""
    return const * b_n(n, lam)


@lru_cache(maxsize=64)
def _tau_cached(truth: TrueModel, epsilon: float) -> float:
    return truth.tau(epsilon)


def sup_norm(path, weight=None) -> float:
    """Largest absolute path value, optionally weighted by w(grid)."""
    values = np.asarray(path.values, dtype=float)
    if values.size == 0:
        raise ValueError("empty path")
    if weight is not None:
        w = weight(path.grid) if callable(weight) else np.asarray(weight, dtype=float)
        values = w * values
    return float(np.abs(values).max())


def lil_stat(
    sample: CensoredSample,
    truth: TrueModel,
    which: str = "hazard",
    epsilon: float = 0.05,
    grid_size: int = 512,
) -> float:
    """Sup-deviation on [0, tau] scaled by (n / log log n)^(1/2)."""
    n = sample.n
    if n < 10:
        raise ValueError(f"need n >= 10 for the iterated-logarithm scaling, got {n}")
    tau = _tau_cached(truth, epsilon)
    if which == "hazard":
        sup = sup_step_vs_fn(nelson_aalen(sample), truth.Lambda, hi=tau, grid_size=grid_size)
    elif which == "pl":
        sup = sup_step_vs_fn(km(sample), truth.F, hi=tau, grid_size=grid_size)
    else:
        raise ValueError(f"which must be 'hazard' or 'pl', got {which!r}")
    return sup * math.sqrt(n / math.log(math.log(n)))


def bahadur_stat(sample: CensoredSample, p_grid) -> float:
    """sup_p |Fhat(Qn(p)) - p|; never exceeds the largest jump of Fhat."""
    return _bahadur_from(km(sample), np.asarray(p_grid, dtype=float))


def _bahadur_from(fhat, p_grid: np.ndarray) -> float:
    q_est = pl_quantile_grid(fhat, p_grid)
    return float(np.abs(fhat(q_est) - p_grid).max())


def qdev_stat(sample: CensoredSample, truth: TrueModel, p_grid) -> float:
    """sup_p sqrt(n)|Qn(p) - Q(p)| / sqrt(log log n)."""
    n = sample.n
    if n < 10:
        raise ValueError(f"need n >= 10 for the iterated-logarithm scaling, got {n}")
    p_grid = np.asarray(p_grid, dtype=float)
    q_est = pl_quantile_grid(km(sample), p_grid)
    sup = float(np.abs(q_est - truth.Q(p_grid)).max())
    return sup * math.sqrt(n) / math.sqrt(math.log(math.log(n)))


def oscillation_stat(
    sample: CensoredSample,
    truth: TrueModel,
    width: float,
    epsilon: float = 0.05,
    grid_size: int = 512,
) -> float:
    """Largest |Z_n2(s) - Z_n2(t)| over pairs with |s - t| <= width in [0, tau]."""
    if width < 0:
        raise ValueError(f"window width must be >= 0, got {width}")
    if width == 0.0:
        return 0.0
    tau = _tau_cached(truth, epsilon)
    # Refine the grid when the window is narrower than the default spacing.
    pts = max(grid_size, min(20_000, int(math.ceil(2.0 * tau / width)) + 1))
    grid = np.linspace(0.0, tau, pts)
    fhat = km(sample)
    values = math.sqrt(sample.n) * (fhat(grid) - truth.F(grid))
    return _window_oscillation(grid, values, width)


def _window_oscillation(grid: np.ndarray, values: np.ndarray, width: float) -> float:
    """Sliding-window max minus min via monotone deques."""
    n = grid.size
    best = 0.0
    max_dq: list[int] = []
    min_dq: list[int] = []
    left = 0
    for right in range(n):
        while max_dq and values[max_dq[-1]] <= values[right]:
            max_dq.pop()
        max_dq.append(right)
        while min_dq and values[min_dq[-1]] >= values[right]:
            min_dq.pop()
        min_dq.append(right)
        while grid[right] - grid[left] > width:
            if max_dq[0] == left:
                max_dq.pop(0)
            if min_dq[0] == left:
                min_dq.pop(0)
            left += 1
        best = max(best, values[max_dq[0]] - values[min_dq[0]])
    return float(best)


def coupling_stat(sample: CensoredSample, truth: TrueModel, p_grid) -> float:
    """sup_p |rho_n(p) - Z_n2(Q(p))|: the quantile-process coupling error."""
    p_grid = np.asarray(p_grid, dtype=float)
    fhat = km(sample)
    rho = rho_path(fhat, sample.n, truth, p_grid).values
    z_at_q = math.sqrt(sample.n) * (fhat(truth.Q(p_grid)) - p_grid)
    return float(np.abs(rho - z_at_q).max())


def rel38_stat(
    sample: CensoredSample,
    truth: TrueModel,
    epsilon: float = 0.05,
    grid_size: int = 512,
) -> float:
    """Remainder linking the PL and hazard deviations, scaled by n / log log n.

    Computes sup over [0, tau] of |(Fhat - F) - (1 - F)(Lhat - Lambda)|,
    evaluating at event points from both sides plus a uniform grid.
    """
    n = sample.n
    if n < 3:
        raise ValueError(f"need n >= 3 for the log log n scaling, got {n}")
    tau = _tau_cached(truth, epsilon)
    return _rel38_from(km(sample), nelson_aalen(sample), truth, n, tau, grid_size)


def _rel38_from(fhat, lhat, truth: TrueModel, n: int, tau: float, grid_size: int) -> float:
    def remainder(fh_vals, lh_vals, pts):
        return np.abs((fh_vals - truth.F(pts)) - truth.Sf(pts) * (lh_vals - truth.Lambda(pts)))

    jt = fhat.jump_times
    inside = jt[(jt > 0) & (jt <= tau)]
    uni = np.linspace(0.0, tau, grid_size)
    pts = np.concatenate((inside, uni))
    best = float(remainder(fhat(pts), lhat(pts), pts).max())
    if inside.size:
        best = max(
            best,
            float(remainder(fhat.left_limit(inside), lhat.left_limit(inside), inside).max()),
        )
    return best * n / math.log(math.log(n))


def ks_distance(sample_a, sample_b) -> float:
    """Exact two-sample Kolmogorov-Smirnov statistic."""
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    merged = np.concatenate((a, b))
    cdf_a = np.searchsorted(a, merged, side="right") / a.size
    cdf_b = np.searchsorted(b, merged, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of a Monte Carlo experiment."""

    model: MixingModel
    sizes: tuple[int, ...]
    reps: int
    seed: int
    statistics: tuple[str, ...]
    tau_epsilon: float = 0.05
    p0: float = 0.1
    p1: float = 0.9
    grid_size: int = 512
    p_grid_size: int = 33
    gp_grid_size: int = 256
    lambda_exponent: float = 1.0
    osc_const: float = 1.0

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sizes must be a nonempty strictly increasing sequence")
        object.__setattr__(self, "sizes", sizes)
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not 0 < self.p0 <= self.p1 < 1:
            raise ValueError(f"need 0 < p0 <= p1 < 1, got p0={self.p0}, p1={self.p1}")
        if self.gp_grid_size < 256:
            raise ValueError(
                f"gp_grid_size must be >= 256 for the integral sampler, got {self.gp_grid_size}"
            )
        stats = tuple(self.statistics)
        unknown = [s for s in stats if s not in VALID_STATISTICS]
        if unknown:
            raise ValueError(
                f"unknown statistic(s) {unknown}; valid names: {', '.join(VALID_STATISTICS)}"
            )
        object.__setattr__(self, "statistics", stats)

    def p_grid(self) -> np.ndarray:
        return np.linspace(self.p0, self.p1, self.p_grid_size)


@dataclass(frozen=True)
class RawRow:
    statistic: str
    n: int
    rep: int
    value: float
    valid: bool


@dataclass(frozen=True)
class SummaryRow:
    statistic: str
    n: int
    median: float
    mean: float
    q05: float
    q95: float
    reps_valid: int
    reps_total: int

    @property
    def flagged(self) -> bool:
        """True when fewer than 90% of replications produced a value."""
        return self.reps_valid < 0.9 * self.reps_total


@dataclass(frozen=True)
class RateFit:
    statistic: str
    slope: float
    stderr: float


@dataclass
class RateSummary:
    """Aggregated output of one experiment run."""

    config: ExperimentConfig
    raw_rows: list[RawRow]
    summaries: list[SummaryRow]
    rate_fits: list[RateFit]

    def summary(self, statistic: str, n: int) -> SummaryRow:
        for row in self.summaries:
            if row.statistic == statistic and row.n == n:
                return row
        raise KeyError(f"no summary for ({statistic}, {n})")

    def medians(self, statistic: str) -> tuple[list[int], list[float]]:
        rows = [r for r in self.summaries if r.statistic == statistic]
        return [r.n for r in rows], [r.median for r in rows]

    @property
    def any_flagged(self) -> bool:
        return any(r.flagged for r in self.summaries)


def fit_rate(sizes, medians) -> tuple[float, float]:
    """Least-squares slope (with standard error) of log(median) vs log(n)."""
    if len(sizes) < 3:
        raise ValueError(f"need at least 3 sizes to fit a rate, got {len(sizes)}")
    pairs = [(n, m) for n, m in zip(sizes, medians) if m > 0]
    dropped = len(sizes) - len(pairs)
    if dropped:
        logger.warning("fit_rate: excluded %d non-positive median(s)", dropped)
    if len(pairs) < 2:
        raise ValueError("fewer than 2 positive medians; cannot fit a rate")
    x = np.log([p[0] for p in pairs])
    y = np.log([p[1] for p in pairs])
    xc = x - x.mean()
    slope = float(np.dot(xc, y) / np.dot(xc, xc))
    resid = y - (y.mean() + slope * xc)
    dof = len(pairs) - 2
    if dof > 0:
        stderr = float(math.sqrt(np.dot(resid, resid) / dof / np.dot(xc, xc)))
    else:
        stderr = float("nan")
    return slope, stderr


def _replication_values(
    model: MixingModel,
    truth: TrueModel,
    seed: int,
    n: int,
    rep: int,
    stats: tuple[str, ...],
    epsilon: float,
    p_grid: np.ndarray,
    grid_size: int,
    osc_width: float,
) -> dict[str, tuple[float, bool]]:
    """Compute all requested per-sample statistics for one replication.

    A failing statistic (for example an unattained quantile under heavy
    censoring) is recorded as invalid for that statistic only.
    """
    from .datagen import generate_sample

    sample = generate_sample(model, n, RandomStream(seed, rep))
    tau = _tau_cached(truth, epsilon)
    fhat = km(sample)
    needs_hazard = any(s in stats for s in ("sup_hazard", "lil", "rel38"))
    lhat = nelson_aalen(sample) if needs_hazard else None
    out: dict[str, tuple[float, bool]] = {}
    for stat in stats:
        try:
            if stat == "sup_pl":
                value = sup_step_vs_fn(fhat, truth.F, hi=tau, grid_size=grid_size)
            elif stat == "sup_hazard":
                value = sup_step_vs_fn(lhat, truth.Lambda, hi=tau, grid_size=grid_size)
            elif stat == "lil":
                sup = sup_step_vs_fn(lhat, truth.Lambda, hi=tau, grid_size=grid_size)
                value = sup * math.sqrt(n / math.log(math.log(n)))
            elif stat == "bahadur":
                value = _bahadur_from(fhat, p_grid)
            elif stat == "qdev":
                q_est = pl_quantile_grid(fhat, p_grid)
                sup = float(np.abs(q_est - truth.Q(p_grid)).max())
                value = sup * math.sqrt(n) / math.sqrt(math.log(math.log(n)))
            elif stat == "oscillation":
                value = oscillation_stat(
                    sample, truth, osc_width, epsilon=epsilon, grid_size=grid_size
                )
            elif stat == "coupling":
                rho = rho_path(fhat, n, truth, p_grid).values
                z_at_q = math.sqrt(n) * (fhat(truth.Q(p_grid)) - p_grid)
                value = float(np.abs(rho - z_at_q).max())
            elif stat == "sup_rho":
                value = sup_norm(rho_path(fhat, n, truth, p_grid))
            elif stat == "rel38":
                value = _rel38_from(fhat, lhat, truth, n, tau, grid_size)
            else:
                raise ValueError(f"not a per-sample statistic: {stat}")
            out[stat] = (value, True)
        except (PlmixError, ValueError) as exc:
            logger.warning("replication (n=%d, rep=%d) failed for %s: %s", n, rep, stat, exc)
            out[stat] = (float("nan"), False)
    return out


def _worker(args) -> tuple[int, dict[str, tuple[float, bool]]]:
    (model, truth, seed, n, rep, stats, epsilon, p_grid, grid_size, osc_width) = args
    return rep, _replication_values(
        model, truth, seed, n, rep, stats, epsilon, p_grid, grid_size, osc_width
    )


def _limit_sup_draws(
    config: ExperimentConfig,
    truth: TrueModel,
    kernel: GammaKernel,
    n: int,
    draws: int,
    kind: str,
) -> np.ndarray:
    """Sup-functional draws of the limiting process.

    kind 'pl': sup over [0, tau] of (1-F)|B|; kind 'quantile': sup over the
    p-grid of (1-p)|B(Q(p))|.
    """
    if kind == "pl":
        tau = _tau_cached(truth, config.tau_epsilon)
        grid = np.linspace(tau / config.gp_grid_size, tau, config.gp_grid_size)
        weights = np.asarray(truth.Sf(grid), dtype=float)
        eps = config.tau_epsilon
        stream = RandomStream(config.seed, _GP_STREAM_PL + n)
        cols = slice(None)
    else:
        p_grid = config.p_grid()
        q_pts = np.asarray(truth.Q(p_grid), dtype=float)
        base = np.linspace(q_pts.max() / config.gp_grid_size, q_pts.max(), config.gp_grid_size)
        grid = np.unique(np.concatenate((base, q_pts)))
        eps = min(config.tau_epsilon, float(truth.Hbar(grid.max())) * (1.0 - 1e-9))
        weights = 1.0 - p_grid
        stream = RandomStream(config.seed, _GP_STREAM_Q + n)
        cols = np.searchsorted(grid, q_pts)
    kvals = sample_kiefer_batch(grid, n, kernel, stream, draws=draws, epsilon=eps)
    bvals = sample_b_integral_batch(grid, kvals, n, truth)
    return np.abs(bvals[:, cols] * weights[None, :]).max(axis=1)


def run_experiment(
    config: ExperimentConfig,
    jobs: int = 1,
    kernel: GammaKernel | None = None,
) -> RateSummary:
    """Run all replications for every (statistic, size) pair and aggregate."""
    truth = true_model(config.model)
    needs_ks = any(s in config.statistics for s in ("ksdist", "ksdist_q"))
    if needs_ks and kernel is None:
        kernel = GammaKernel.build(config.model)
    sample_stats = tuple(s for s in config.statistics if s not in ("ksdist", "ksdist_q"))
    internal = set(sample_stats)
    if "ksdist" in config.statistics:
        internal.add("sup_pl")
    if "ksdist_q" in config.statistics:
        internal.add("sup_rho")
    internal_stats = tuple(sorted(internal))
    p_grid = config.p_grid()

    raw_rows: list[RawRow] = []
    values_by_key: dict[tuple[str, int], list[tuple[float, bool]]] = {}
    for n in config.sizes:
        osc_width = lambda_n(n, config.osc_const, config.lambda_exponent)
        tasks = [
            (config.model, truth, config.seed, n, rep, internal_stats,
             config.tau_epsilon, p_grid, config.grid_size, osc_width)
            for rep in range(config.reps)
        ]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = dict(pool.map(_worker, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
        else:
            results = dict(map(_worker, tasks))
        per_rep = [results[rep] for rep in range(config.reps)]
        for stat in internal_stats:
            vals = [per_rep[rep][stat] for rep in range(config.reps)]
            values_by_key[(stat, n)] = vals
            if stat in sample_stats:
                for rep, (value, valid) in enumerate(vals):
                    raw_rows.append(RawRow(stat, n, rep, value, valid))
        for ks_name, base_stat, kind in (
            ("ksdist", "sup_pl", "pl"),
            ("ksdist_q", "sup_rho", "quantile"),
        ):
            if ks_name not in config.statistics:
                continue
            base_vals = values_by_key[(base_stat, n)]
            emp = np.array([v for v, ok in base_vals if ok])
            if kind == "pl":
                emp = emp * math.sqrt(n)  # sup_pl is unscaled; Z_n2 carries sqrt(n)
            try:
                limit = _limit_sup_draws(config, truth, kernel, n, emp.size, kind)
                value, valid = ks_distance(emp, limit), True
            except (PlmixError, ValueError) as exc:
                logger.warning("ksdist computation failed at n=%d: %s", n, exc)
                value, valid = float("nan"), False
            raw_rows.append(RawRow(ks_name, n, 0, value, valid))
            values_by_key[(ks_name, n)] = [(value, valid)]

    summaries: list[SummaryRow] = []
    for stat in config.statistics:
        for n in config.sizes:
            vals = values_by_key[(stat, n)]
            good = np.array([v for v, ok in vals if ok])
            total = len(vals)
            if good.size:
                summaries.append(
                    SummaryRow(
                        stat, n,
                        float(np.median(good)), float(good.mean()),
                        float(np.quantile(good, 0.05)), float(np.quantile(good, 0.95)),
                        int(good.size), total,
                    )
                )
            else:
                nan = float("nan")
                summaries.append(SummaryRow(stat, n, nan, nan, nan, nan, 0, total))

    rate_fits: list[RateFit] = []
    for stat in config.statistics:
        rows = [r for r in summaries if r.statistic == stat and not math.isnan(r.median)]
        if len(rows) >= 3:
            try:
                slope, stderr = fit_rate([r.n for r in rows], [r.median for r in rows])
                rate_fits.append(RateFit(stat, slope, stderr))
            except ValueError as exc:
                logger.warning("rate fit skipped for %s: %s", stat, exc)
    return RateSummary(config=config, raw_rows=raw_rows, summaries=summaries,
                       rate_fits=rate_fits)


def write_raw_csv(path, rows: list[RawRow]) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["statistic", "n", "rep", "value", "valid"])
        for r in rows:
            writer.writerow([r.statistic, r.n, r.rep, repr(r.value), int(r.valid)])


def write_summary_csv(path, rows: list[SummaryRow]) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["statistic", "n", "median", "mean", "q05", "q95", "reps_valid"])
        for r in rows:
            writer.writerow(
                [r.statistic, r.n, repr(r.median), repr(r.mean), repr(r.q05), repr(r.q95),
                 r.reps_valid]
            )


def write_rate_json(path, fits: list[RateFit]) -> None:
    payload = [
        {"statistic": f.statistic, "slope": f.slope, "stderr": f.stderr} for f in fits
    ]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


_STAT_NOTES = {
    "sup_pl": "sup over [0, tau] of |Fhat_n - F|: global accuracy of the product-limit "
              "estimate; shrinks like (log log n / n)^(1/2).",
    "sup_hazard": "sup over [0, tau] of |Lhat_n - Lambda|: global accuracy of the "
                  "cumulative-hazard estimate.",
    "lil": "sup-hazard deviation scaled by (n / log log n)^(1/2); bounded medians across "
           "n reflect the iterated-logarithm rate.",
    "bahadur": "sup_p |Fhat_n(Qn(p)) - p|; structurally below the largest jump of Fhat_n "
               "and shrinking at roughly 1/n.",
    "qdev": "sup_p sqrt(n)|Qn - Q| / sqrt(log log n); bounded medians mean the quantile "
            "estimate tracks at the iterated-logarithm rate.",
    "oscillation": "largest |Z_n2(s) - Z_n2(t)| over |s - t| <= lambda_n: modulus of "
                   "continuity of the scaled product-limit process.",
    "coupling": "sup_p |rho_n(p) - Z_n2(Q(p))|: Bahadur-type coupling error between the "
                "quantile and distribution-function processes.",
    "rel38": "n / log log n times sup |(Fhat - F) - (1 - F)(Lhat - Lambda)|: second-order "
             "remainder linking the two deviation processes.",
    "sup_rho": "sup_p |rho_n(p)|: size of the normed quantile process.",
    "ksdist": "two-sample KS distance between sup|Z_n2| over replications and "
              "sup|(1 - F) B| over limit-process draws.",
    "ksdist_q": "two-sample KS distance between sup|rho_n| over replications and "
                "sup (1 - p)|B(Q(p))| over limit-process draws.",
}


def write_markdown_report(path, result: RateSummary) -> None:
    cfg = result.config
    lines = ["# Experiment report", ""]
    lines.append(f"- sizes: {list(cfg.sizes)}")
    lines.append(f"- replications per size: {cfg.reps}")
    lines.append(f"- master seed: {cfg.seed}")
    lines.append(f"- survival floor epsilon: {cfg.tau_epsilon}")
    lines.append(f"- quantile range: [{cfg.p0}, {cfg.p1}]")
    lines.append("")
    for stat in cfg.statistics:
        lines.append(f"## {stat}")
        lines.append("")
        note = _STAT_NOTES.get(stat)
        if note:
            lines.append(note)
            lines.append("")
        lines.append("| n | median | mean | q05 | q95 | valid reps |")
        lines.append("|---|--------|------|-----|-----|------------|")
        for row in result.summaries:
            if row.statistic != stat:
                continue
            flag = " (FLAGGED: <90% valid)" if row.flagged else ""
            lines.append(
                f"| {row.n} | {row.median:.6g} | {row.mean:.6g} | {row.q05:.6g} "
                f"| {row.q95:.6g} | {row.reps_valid}/{row.reps_total}{flag} |"
            )
        fits = [f for f in result.rate_fits if f.statistic == stat]
        if fits:
            lines.append("")
            lines.append(
                f"Fitted log-log slope: {fits[0].slope:.4f} (stderr {fits[0].stderr:.4f})"
            )
        lines.append("")
    if result.any_flagged:
        lines.append("Some rows are FLAGGED: fewer than 90% of replications were valid.")
        lines.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
