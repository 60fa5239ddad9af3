"""Product-limit, cumulative-hazard and quantile estimators for censored data.

All estimators are pure functions of a CensoredSample.  Step functions are
immutable after construction and evaluated by binary search, so they are
safe to share across threads.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass

import numpy as np

from .datagen import CensoredSample, TrueModel
from .errors import EmptySampleError, QuantileNotAttainedError, RangeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function given by jump locations and post-jump values.

    Right-continuous by default: the value at t is the value of the last
    jump at or before t, or initial_value if there is none.  With
    left_continuous=True the jump at t takes effect only after t (used for
    the at-risk proportion, which counts observations >= t).
    """

    jump_times: np.ndarray
    values: np.ndarray
    initial_value: float = 0.0
    left_continuous: bool = False

    def __post_init__(self):
        jt = np.asarray(self.jump_times, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if jt.shape != vals.shape or jt.ndim != 1:
            raise ValueError("jump_times and values must be 1-d arrays of equal length")
        if jt.size > 1 and not (np.diff(jt) > 0).all():
            raise ValueError("jump_times must be strictly increasing")
        jt.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "jump_times", jt)
        object.__setattr__(self, "values", vals)

    def __call__(self, t):
        side = "left" if self.left_continuous else "right"
        idx = np.searchsorted(self.jump_times, np.asarray(t, dtype=float), side=side) - 1
        return self._pick(idx, np.ndim(t))

    def left_limit(self, t):
        """Value just before t (limit from the left)."""
        idx = np.searchsorted(self.jump_times, np.asarray(t, dtype=float), side="left") - 1
        return self._pick(idx, np.ndim(t))

    def _pick(self, idx, ndim):
        idx = np.asarray(idx)
        padded = np.concatenate(([self.initial_value], self.values))
        out = padded[idx + 1]
        return out if ndim else float(out)

    @property
    def final_value(self) -> float:
        return float(self.values[-1]) if self.values.size else self.initial_value

    def to_csv(self, path) -> None:
        """Write `t,value` rows, one per jump."""
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "value"])
            for t, v in zip(self.jump_times, self.values):
                writer.writerow([repr(float(t)), repr(float(v))])


@dataclass(frozen=True)
class ProcessPath:
    """A scaled empirical process evaluated on a grid.

    kind is one of 'hazard' (sqrt(n)-scaled cumulative-hazard deviation),
    'pl' (distribution-function deviation) or 'quantile' (the normed
    quantile process).
    """

    grid: np.ndarray
    values: np.ndarray
    n: int
    kind: str

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if grid.shape != vals.shape or grid.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if grid.size > 1 and not (np.diff(grid) > 0).all():
            raise ValueError("grid must be strictly increasing")
        grid.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)

    def to_csv(self, path, sidecar: dict | None = None) -> None:
        """Write `grid,value` rows plus a JSON sidecar with metadata."""
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["grid", "value"])
            for g, v in zip(self.grid, self.values):
                writer.writerow([repr(float(g)), repr(float(v))])
        meta = {"n": int(self.n), "kind": self.kind}
        if sidecar:
            meta.update(sidecar)
        with open(str(path) + ".json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _event_table(sample: CensoredSample):
    """Unique observed times with event counts and at-risk counts."""
    if sample.n == 0:
        raise EmptySampleError("sample has no observations")
    order = np.argsort(sample.z, kind="stable")
    zs = sample.z[order]
    ds = sample.delta[order]
    uniq, first_idx, counts = np.unique(zs, return_index=True, return_counts=True)
    if uniq.size < zs.size:
        logger.warning(
            "tied observation times (%d duplicates); aggregating events at ties",
            zs.size - uniq.size,
        )
    events = np.add.reduceat(ds, first_idx)
    at_risk = sample.n - first_idx  # count of z >= each unique time
    return uniq, events, counts, at_risk


def counting(sample: CensoredSample) -> tuple[StepFunction, StepFunction]:
    """At-risk proportion Ybar(t) = #{z_i >= t}/n and event proportion
    Nbar(t) = #{z_i <= t, delta_i = 1}/n.

    Ybar is left-continuous (counts observations >= t); Nbar is
    right-continuous.
    """
    uniq, events, counts, at_risk = _event_table(sample)
    n = sample.n
    ybar = StepFunction(
        jump_times=uniq,
        values=(at_risk - counts) / n,
        initial_value=1.0,
        left_continuous=True,
    )
    ev_mask = events > 0
    nbar = StepFunction(
        jump_times=uniq[ev_mask],
        values=np.cumsum(events[ev_mask]) / n,
        initial_value=0.0,
    )
    return ybar, nbar


def km(sample: CensoredSample) -> StepFunction:
    """Product-limit estimate of the lifetime distribution function.

    Returns Fhat with jumps at uncensored times only; beyond the largest
    observation the estimate is held at its last value (if the largest
    observation is censored, Fhat stays below 1).
    """
    uniq, events, counts, at_risk = _event_table(sample)
    ev_mask = events > 0
    factors = 1.0 - events[ev_mask] / at_risk[ev_mask]
    surv = np.cumprod(factors)
    return StepFunction(jump_times=uniq[ev_mask], values=1.0 - surv, initial_value=0.0)


def nelson_aalen(sample: CensoredSample) -> StepFunction:
    """Cumulative-hazard estimate: cumulative sum of (events at t)/(at risk at t)."""
    uniq, events, counts, at_risk = _event_table(sample)
    ev_mask = events > 0
    jumps = events[ev_mask] / at_risk[ev_mask]
    return StepFunction(jump_times=uniq[ev_mask], values=np.cumsum(jumps), initial_value=0.0)


# Product accumulation in the estimator carries roundoff of this order, so
# quantile inversion treats levels within it as attained.
_INVERSION_ATOL = 1e-12


def pl_quantile(fhat: StepFunction, p: float) -> float:
    """Smallest time t with Fhat(t) >= p (up to product-rounding tolerance)."""
    if not 0 < p < 1:
        raise ValueError(f"p must be in (0,1), got {p}")
    idx = int(np.searchsorted(fhat.values, p - _INVERSION_ATOL, side="left"))
    if idx >= fhat.values.size:
        raise QuantileNotAttainedError(
            f"requested level p={p} exceeds the estimator's maximum {fhat.final_value:.6g}"
        )
    return float(fhat.jump_times[idx])


def pl_quantile_grid(fhat: StepFunction, p_grid: np.ndarray) -> np.ndarray:
    """Vectorized pl_quantile over a probability grid."""
    p_grid = np.asarray(p_grid, dtype=float)
    if p_grid.size and not ((p_grid > 0) & (p_grid < 1)).all():
        raise ValueError("all p must be in (0,1)")
    idx = np.searchsorted(fhat.values, p_grid - _INVERSION_ATOL, side="left")
    if (idx >= fhat.values.size).any():
        bad = float(p_grid[idx >= fhat.values.size][0])
        raise QuantileNotAttainedError(
            f"requested level p={bad} exceeds the estimator's maximum {fhat.final_value:.6g}"
        )
    return fhat.jump_times[idx]


def _check_grid(grid: np.ndarray, truth: TrueModel, epsilon: float) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    tau = truth.tau(epsilon)
    if grid.size and grid.max() > tau * (1.0 + 1e-12):
        raise RangeError(
            f"grid point {grid.max():.6g} beyond admissible range [0, {tau:.6g}] "
            f"(survival floor epsilon={epsilon})"
        )
    return grid


def hazard_process(
    lhat: StepFunction, truth: TrueModel, grid, n: int, epsilon: float = 0.05
) -> ProcessPath:
    """sqrt(n) * (cumulative-hazard estimate - true cumulative hazard) on the grid."""
    grid = _check_grid(grid, truth, epsilon)
    values = np.sqrt(n) * (lhat(grid) - truth.Lambda(grid))
    return ProcessPath(grid=grid, values=values, n=n, kind="hazard")


def pl_process(
    fhat: StepFunction, truth: TrueModel, grid, n: int, epsilon: float = 0.05
) -> ProcessPath:
    """sqrt(n) * (product-limit estimate - true distribution function) on the grid."""
    grid = _check_grid(grid, truth, epsilon)
    values = np.sqrt(n) * (fhat(grid) - truth.F(grid))
    return ProcessPath(grid=grid, values=values, n=n, kind="pl")


def rho_path(fhat: StepFunction, n: int, truth: TrueModel, p_grid) -> ProcessPath:
    """Normed quantile process sqrt(n) f(Q(p)) (Q(p) - Qn(p)) from a fitted Fhat."""
    p_grid = np.asarray(p_grid, dtype=float)
    q_true = np.asarray(truth.Q(p_grid), dtype=float)
    dens = np.asarray(truth.f(q_true), dtype=float)
    if (dens <= 0).any():
        raise ValueError("lifetime density must be positive on the quantile range")
    q_est = pl_quantile_grid(fhat, p_grid)
    values = np.sqrt(n) * dens * (q_true - q_est)
    return ProcessPath(grid=p_grid, values=values, n=n, kind="quantile")


def quantile_process(sample: CensoredSample, truth: TrueModel, p_grid) -> ProcessPath:
    """Normed quantile process of the sample on a probability grid."""
    return rho_path(km(sample), sample.n, truth, p_grid)


def sup_step_vs_fn(
    step: StepFunction,
    fn,
    hi: float,
    lo: float = 0.0,
    grid_size: int = 512,
) -> float:
    """Supremum of |step(t) - fn(t)| over [lo, hi] for continuous fn.

    Evaluates at every jump point in the window from both sides, at the
    window endpoints, and on a uniform grid, which is exact when fn is
    monotone between jumps.
    """
    if hi <= lo:
        raise ValueError("need hi > lo")
    jt = step.jump_times
    inside = jt[(jt > lo) & (jt <= hi)]
    uni = np.linspace(lo, hi, grid_size)
    pts = np.concatenate((inside, uni))
    dev = np.abs(step(pts) - fn(pts))
    best = float(dev.max()) if dev.size else 0.0
    if inside.size:
        left_dev = np.abs(step.left_limit(inside) - fn(inside))
        best = max(best, float(left_dev.max()))
    return best
