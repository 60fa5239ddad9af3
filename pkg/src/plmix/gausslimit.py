"""Limiting Gaussian machinery for the censored empirical processes.

The observed-minimum indicator process g_k(s) = I(Z_k <= s) - H(s) has a
long-run covariance kernel

    Gamma(s, s') = Cov(g_1(s), g_1(s'))
                   + sum_{k>=2} [Cov(g_1(s), g_k(s')) + Cov(g_1(s'), g_k(s))],

which under the Gaussian-copula AR(1) generator reduces to bivariate-normal
orthant probabilities at lag-dependent correlations.  A Kiefer-type field
K(s, t) with covariance Gamma(s, s') * min(t, t') is sampled on a grid by
factorizing the Gamma matrix, and the limit process

    B(t, n) = integral over [0, t] of [K(x, n)/sqrt(n)] / Hbar(x)^2 dFstar(x)

is obtained either by quadrature along a sampled K path ('integral' method)
or by factorizing its own covariance matrix directly ('direct' method).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .datagen import MixingModel, RandomStream, TrueModel, true_model
from .errors import FactorizationError, QuadratureError, RangeError

logger = logging.getLogger(__name__)

# Normal thresholds are clipped here; ndtr(-39) underflows to 0 exactly.
_THRESH_CLIP = 39.0
# Correlations this close to +-1 are treated as exactly comonotone; the
# resulting error is below 1e-7 absolute.
_R_ONE = 1.0 - 1e-13
# Split point for the quadrature segments when |r| is large.
_R_SPLIT = 0.925
_PSD_RIDGE = 1e-10

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)
_GL_U = 0.5 * (_GL_X + 1.0)
_GL_WU = 0.5 * _GL_W


def _bvn_integral(a, b, lo: float, hi: float, sgn: float):
    """Signed quadrature of the correlation-derivative representation
    over theta in [lo, hi]."""
    acc = 0.0
    aa = a * a + b * b
    ab2 = 2.0 * a * b * sgn
    for u, w in zip(_GL_U, _GL_WU):
        theta = lo + (hi - lo) * u
        c2 = math.cos(theta) ** 2
        acc = acc + w * np.exp(-(aa - ab2 * math.sin(theta)) / (2.0 * c2))
    return acc * (hi - lo)


def bvn_survival(a, b, r: float):
    """P(U > a, V > b) for standard bivariate normal (U, V) with correlation r.

    Vectorized over a and b (broadcast together); r is a scalar.  Absolute
    accuracy is better than 1e-7 over the whole correlation range.
    """
    if not abs(r) <= 1:
        raise ValueError(f"correlation must satisfy |r| <= 1, got {r}")
    a = np.clip(np.asarray(a, dtype=float), -_THRESH_CLIP, _THRESH_CLIP)
    b = np.clip(np.asarray(b, dtype=float), -_THRESH_CLIP, _THRESH_CLIP)
    scalar = a.ndim == 0 and b.ndim == 0
    if r >= _R_ONE:
        out = ndtr(-np.maximum(a, b))
    elif r <= -_R_ONE:
        out = np.maximum(ndtr(-a) - ndtr(b), 0.0)
    elif r == 0.0:
        out = ndtr(-a) * ndtr(-b)
    else:
        sgn = 1.0 if r > 0 else -1.0
        upper = math.asin(abs(r))
        if abs(r) <= _R_SPLIT:
            integral = _bvn_integral(a, b, 0.0, upper, sgn)
        else:
            split = math.asin(_R_SPLIT)
            integral = _bvn_integral(a, b, 0.0, split, sgn) + _bvn_integral(
                a, b, split, upper, sgn
            )
        out = ndtr(-a) * ndtr(-b) + sgn * integral / (2.0 * math.pi)
        out = np.clip(out, 0.0, 1.0)
    return float(out) if scalar else out


def _thresholds(points: np.ndarray, truth: TrueModel):
    """Gaussian-scale thresholds for the lifetime and censoring marginals."""
    pts = np.asarray(points, dtype=float)
    with np.errstate(divide="ignore"):
        ax = ndtri(np.clip(truth.F(pts), 0.0, 1.0))
        ay = ndtri(np.clip(truth.G(pts), 0.0, 1.0))
    return (
        np.clip(ax, -_THRESH_CLIP, _THRESH_CLIP),
        np.clip(ay, -_THRESH_CLIP, _THRESH_CLIP),
    )


def cov_g1gk(s, s2, k: int, model: MixingModel, truth: TrueModel | None = None):
    """Cov(g_1(s), g_k(s2)) for the indicator process of the observed minimum.

    Since the lifetime and censoring chains are independent, the joint
    survival of (Z_1, Z_k) factors into one bivariate-normal survival per
    chain, each at lag correlation rho**(k-1).  k = 1 gives the
    within-observation covariance H(min) - H(s)H(s2).
    """
    if k < 1:
        raise ValueError(f"lag index k must be >= 1, got {k}")
    if truth is None:
        truth = true_model(model)
    ax1, ay1 = _thresholds(np.asarray(s, dtype=float), truth)
    ax2, ay2 = _thresholds(np.asarray(s2, dtype=float), truth)
    rx = model.rho_x ** (k - 1)
    ry = model.rho_y ** (k - 1)
    sx = bvn_survival(ax1, ax2, rx)
    sy = bvn_survival(ay1, ay2, ry)
    return sx * sy - truth.Hbar(s) * truth.Hbar(s2)


@dataclass
class GammaKernel:
    """Truncated-series evaluator of the long-run covariance kernel.

    The lag series is cut at k_max, chosen so that a certified geometric
    tail bound falls below the tolerance; the bound is recorded so callers
    can audit the truncation.  Gamma grid matrices and their factors are
    cached per grid.
    """

    model: MixingModel
    truth: TrueModel
    k_max: int
    tail_bound: float
    calib_c: float
    tol: float
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(
        cls,
        model: MixingModel,
        tol: float = 1e-8,
        calibration_probs: np.ndarray | None = None,
    ) -> "GammaKernel":
        truth = true_model(model)
        r = max(abs(model.rho_x), abs(model.rho_y))
        if r == 0.0:
            return cls(model=model, truth=truth, k_max=1, tail_bound=0.0, calib_c=0.0, tol=tol)
        if calibration_probs is None:
            calibration_probs = np.linspace(0.05, 0.95, 13)
        pts = np.array([truth.quantile_H(p) for p in calibration_probs])
        lag2 = _gamma_lag_matrix(pts, pts, 2, model, truth)
        calib_c = float(np.abs(lag2).max())
        # Spec'd calibrated truncation plus a certified bound from the
        # Gaussian maximal-correlation inequality |Cov(g_1, g_k)| <= r^(k-1)/4.
        if calib_c > 0:
            k_spec = math.ceil(math.log(tol * (1.0 - r) / calib_c) / math.log(r))
        else:
            k_spec = 1
        k_cert = math.ceil(math.log(2.0 * tol * (1.0 - r)) / math.log(r))
        k_max = max(k_spec, k_cert, 2)
        tail_bound = r ** k_max / (2.0 * (1.0 - r))
        return cls(
            model=model, truth=truth, k_max=k_max, tail_bound=tail_bound,
            calib_c=calib_c, tol=tol,
        )

    def gamma_cross(self, points_a, points_b, k_max: int | None = None) -> np.ndarray:
        """Gamma(s, s') matrix for s in points_a, s' in points_b."""
        pa = np.asarray(points_a, dtype=float)
        pb = np.asarray(points_b, dtype=float)
        km = self.k_max if k_max is None else k_max
        total = _gamma_lag_matrix(pa, pb, 1, self.model, self.truth)
        for k in range(2, km + 1):
            lag = _gamma_lag_matrix(pa, pb, k, self.model, self.truth)
            # Under a stationary Gaussian copula the pair (Z_1, Z_k) is
            # exchangeable, so the two lag terms of the series coincide.
            total = total + 2.0 * lag
        return total

    def gamma_matrix(self, grid, k_max: int | None = None) -> np.ndarray:
        """Symmetric Gamma matrix on a grid, cached."""
        grid = np.asarray(grid, dtype=float)
        key = ("gamma", grid.tobytes(), self.k_max if k_max is None else k_max)
        if key not in self._cache:
            mat = self.gamma_cross(grid, grid, k_max=k_max)
            self._cache[key] = 0.5 * (mat + mat.T)
        return self._cache[key]

    def lag_cross(self, points_a, points_b) -> np.ndarray:
        """Lag-only part of Gamma (the k >= 2 series terms).

        Smooth in both arguments, unlike the within-observation term
        H(s and s') - H(s)H(s') which has a kink on the diagonal; the two
        parts are integrated separately.
        """
        pa = np.asarray(points_a, dtype=float)
        pb = np.asarray(points_b, dtype=float)
        total = np.zeros((pa.size, pb.size))
        for k in range(2, self.k_max + 1):
            total = total + 2.0 * _gamma_lag_matrix(pa, pb, k, self.model, self.truth)
        return total

    def kiefer_factor(self, grid) -> np.ndarray:
        """Cached PSD-repaired factor L with L L^T = Gamma(grid, grid)."""
        grid = np.asarray(grid, dtype=float)
        key = ("factor", grid.tobytes())
        if key not in self._cache:
            self._cache[key] = _psd_factor(self.gamma_matrix(grid))
        return self._cache[key]


def _gamma_lag_matrix(pa, pb, k, model, truth):
    ax_a, ay_a = _thresholds(pa, truth)
    ax_b, ay_b = _thresholds(pb, truth)
    rx = model.rho_x ** (k - 1)
    ry = model.rho_y ** (k - 1)
    sx = bvn_survival(ax_a[:, None], ax_b[None, :], rx)
    sy = bvn_survival(ay_a[:, None], ay_b[None, :], ry)
    hb_a = np.asarray(truth.Hbar(pa), dtype=float)
    hb_b = np.asarray(truth.Hbar(pb), dtype=float)
    return sx * sy - hb_a[:, None] * hb_b[None, :]


def gamma(s, s2, kernel: GammaKernel):
    """Long-run covariance Gamma(s, s2), symmetrized truncated series."""

    def one_sided(u, v):
        total = cov_g1gk(u, v, 1, kernel.model, kernel.truth)
        for k in range(2, kernel.k_max + 1):
            total = total + cov_g1gk(u, v, k, kernel.model, kernel.truth) \
                + cov_g1gk(v, u, k, kernel.model, kernel.truth)
        return total

    return 0.5 * (one_sided(s, s2) + one_sided(s2, s))


@dataclass(frozen=True)
class GaussianPath:
    """A sampled path of the Kiefer field or of the limit process B."""

    grid: np.ndarray
    values: np.ndarray
    n_level: float
    method: str

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if grid.shape != vals.shape or grid.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["grid", "value"])
            for g, v in zip(self.grid, self.values):
                writer.writerow([repr(float(g)), repr(float(v))])


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Symmetric factor of a covariance matrix after eigenvalue clipping.

    Negative eigenvalues (from series truncation or quadrature noise) are
    clipped at zero and a tiny ridge is added; the perturbation per
    eigenvalue is at most max(0, -lambda_min) + ridge.
    """
    sym = 0.5 * (cov + cov.T)
    try:
        eigvals, eigvecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"eigendecomposition failed: {exc}") from exc
    lam_min = float(eigvals.min())
    if lam_min < 0:
        logger.info("PSD repair: clipping smallest eigenvalue %.3e", lam_min)
    clipped = np.maximum(eigvals, 0.0) + _PSD_RIDGE
    if not np.isfinite(clipped).all():
        raise FactorizationError(
            f"covariance factorization failed after PSD repair; smallest eigenvalue {lam_min:.3e}"
        )
    return eigvecs * np.sqrt(clipped)


def _check_grid_range(grid: np.ndarray, truth: TrueModel, epsilon: float, max_size: int):
    grid = np.asarray(grid, dtype=float)
    if grid.size > max_size:
        raise RangeError(f"grid size {grid.size} exceeds the supported maximum {max_size}")
    tau = truth.tau(epsilon)
    if grid.size and grid.max() > tau * (1.0 + 1e-12):
        raise RangeError(
            f"grid point {grid.max():.6g} beyond admissible range [0, {tau:.6g}] "
            f"(survival floor epsilon={epsilon})"
        )
    return grid


def sample_kiefer_batch(
    grid,
    n_level: float,
    kernel: GammaKernel,
    stream: RandomStream,
    draws: int = 1,
    epsilon: float = 0.05,
) -> np.ndarray:
    """Draw `draws` Kiefer-field slices K(., n_level) on the grid.

    Returns an array of shape (draws, len(grid)); each row is mean-zero
    Gaussian with covariance Gamma(s_i, s_j) * n_level.
    """
    grid = _check_grid_range(grid, kernel.truth, epsilon, max_size=2048)
    if n_level < 0:
        raise ValueError(f"n_level must be >= 0, got {n_level}")
    if n_level == 0:
        return np.zeros((draws, grid.size))
    factor = kernel.kiefer_factor(grid) * math.sqrt(n_level)
    noise = stream.generator().standard_normal((draws, grid.size))
    return noise @ factor.T


def sample_kiefer(
    grid, n_level: float, kernel: GammaKernel, stream: RandomStream, epsilon: float = 0.05
) -> GaussianPath:
    """Single Kiefer-field slice at the given level."""
    values = sample_kiefer_batch(grid, n_level, kernel, stream, draws=1, epsilon=epsilon)[0]
    return GaussianPath(grid=np.asarray(grid, float), values=values, n_level=n_level,
                        method="kiefer")


def sample_kiefer_levels(
    grid, levels, kernel: GammaKernel, stream: RandomStream, epsilon: float = 0.05
) -> list[GaussianPath]:
    """Nested Kiefer slices at increasing levels.

    Built from independent increments, so K(., n) - K(., m) is independent
    of K(., m) for m < n, matching the min(t, t') covariance in the level
    axis.
    """
    levels = list(levels)
    if any(l < 0 for l in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be nonnegative and strictly increasing")
    grid = _check_grid_range(grid, kernel.truth, epsilon, max_size=2048)
    factor = kernel.kiefer_factor(grid)
    rng = stream.generator()
    paths = []
    current = np.zeros(grid.size)
    prev_level = 0.0
    for level in levels:
        incr = level - prev_level
        if incr > 0:
            current = current + math.sqrt(incr) * (factor @ rng.standard_normal(grid.size))
        paths.append(GaussianPath(grid=grid, values=current.copy(), n_level=level,
                                  method="kiefer"))
        prev_level = level
    return paths


def sample_b_integral_batch(
    grid, kvalues: np.ndarray, n: float, truth: TrueModel
) -> np.ndarray:
    """Limit-process paths from Kiefer slices via cumulative trapezoid.

    kvalues has shape (draws, len(grid)).  Deterministic given the input
    slices.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 256:
        raise ValueError(f"integral method needs >= 256 grid points, got {grid.size}")
    kvalues = np.atleast_2d(np.asarray(kvalues, dtype=float))
    if n == 0:
        return np.zeros_like(kvalues)
    psi = np.asarray(truth.fstar_density(grid), dtype=float) / truth.Hbar(grid) ** 2
    integrand = kvalues * psi[None, :] / math.sqrt(n)
    # K vanishes at the origin (Gamma(0, .) = 0), so prepend a zero node.
    xfull = np.concatenate(([0.0], grid))
    ffull = np.concatenate((np.zeros((integrand.shape[0], 1)), integrand), axis=1)
    dx = np.diff(xfull)
    return np.cumsum(0.5 * (ffull[:, :-1] + ffull[:, 1:]) * dx[None, :], axis=1)


def sample_b_integral(kpath: GaussianPath, n: float, truth: TrueModel) -> GaussianPath:
    """Limit process B(., n) computed from one sampled Kiefer slice."""
    values = sample_b_integral_batch(kpath.grid, kpath.values[None, :], n, truth)[0]
    return GaussianPath(grid=kpath.grid, values=values, n_level=n, method="integral")


def _kink_cov_grid(grid, truth: TrueModel, mesh: int = 100_000) -> np.ndarray:
    """Exact-in-form double integral of the within-observation kernel part.

    For K0(x, y) = H(x and y) - H(x)H(y), iterated integration gives

        C(s, t) = A(s) + W(t) V(s) - B(s) - V(s) V(t)   for s <= t,

    with W, V, A, B the cumulatives of psi, psi*H, psi*V and psi*H*W.
    The kink along the diagonal is thereby removed; only smooth 1-d
    cumulative integrals (dense trapezoid) remain.
    """
    grid = np.asarray(grid, dtype=float)
    gmax = float(grid.max())
    dense = np.union1d(np.linspace(0.0, gmax, mesh), grid)
    psi = np.asarray(truth.fstar_density(dense), dtype=float) / truth.Hbar(dense) ** 2
    hval = np.asarray(truth.H(dense), dtype=float)

    def cumtrapz(f):
        return np.concatenate(([0.0], np.cumsum(0.5 * (f[:-1] + f[1:]) * np.diff(dense))))

    w_tab = cumtrapz(psi)
    v_tab = cumtrapz(psi * hval)
    a_tab = cumtrapz(psi * v_tab)
    b_tab = cumtrapz(psi * hval * w_tab)
    idx = np.searchsorted(dense, grid)
    wg, vg, ag, bg = w_tab[idx], v_tab[idx], a_tab[idx], b_tab[idx]

    ii, jj = np.meshgrid(np.arange(grid.size), np.arange(grid.size), indexing="ij")
    lo = np.minimum(ii, jj)
    hi = np.maximum(ii, jj)
    return ag[lo] + wg[hi] * vg[lo] - bg[lo] - vg[lo] * vg[hi]


def _lag_tensor_quad(s: float, t: float, panels: int, kernel: GammaKernel) -> float:
    """Tensor Gauss-Legendre integral of the smooth lag-only kernel part."""
    gl_x, gl_w = np.polynomial.legendre.leggauss(8)

    def axis_nodes(upper):
        edges = np.linspace(0.0, upper, panels + 1)
        widths = np.diff(edges)
        mids = 0.5 * (edges[:-1] + edges[1:])
        nodes = (mids[:, None] + 0.5 * widths[:, None] * gl_x[None, :]).ravel()
        wts = (0.5 * widths[:, None] * gl_w[None, :]).ravel()
        return nodes, wts

    truth = kernel.truth
    xs, wx = axis_nodes(s)
    ys, wy = axis_nodes(t)
    ux = wx * np.asarray(truth.fstar_density(xs), dtype=float) / truth.Hbar(xs) ** 2
    uy = wy * np.asarray(truth.fstar_density(ys), dtype=float) / truth.Hbar(ys) ** 2
    lmat = kernel.lag_cross(xs, ys)
    return float(ux @ lmat @ uy)


def b_cov_matrix(
    grid, kernel: GammaKernel, mesh_panels: int = 48, panel_order: int = 6
) -> np.ndarray:
    """Same-level covariance matrix of B on the grid.

    The kinked within-observation kernel part is integrated via exact
    cumulative tables.  The lag part is a smooth cumulative surface, so it
    is computed once on a coarse panel mesh and interpolated with a bicubic
    spline; its quadrature cost is then independent of the grid size.
    """
    grid = np.asarray(grid, dtype=float)
    key = ("bcov", grid.tobytes(), mesh_panels, panel_order)
    if key in kernel._cache:
        return kernel._cache[key]
    cov = _kink_cov_grid(grid, kernel.truth)
    if kernel.k_max >= 2:
        from scipy.interpolate import RectBivariateSpline

        gmax = float(grid.max())
        edges = np.linspace(0.0, gmax, mesh_panels + 1)
        gl_x, gl_w = np.polynomial.legendre.leggauss(panel_order)
        widths = np.diff(edges)
        mids = 0.5 * (edges[:-1] + edges[1:])
        nodes = (mids[:, None] + 0.5 * widths[:, None] * gl_x[None, :]).ravel()
        wts = (0.5 * widths[:, None] * gl_w[None, :]).ravel()
        truth = kernel.truth
        psi = np.asarray(truth.fstar_density(nodes), dtype=float) / truth.Hbar(nodes) ** 2
        u = wts * psi
        lmat = kernel.lag_cross(nodes, nodes)
        weighted = u[:, None] * lmat * u[None, :]
        blocks = weighted.reshape(mesh_panels, panel_order, mesh_panels, panel_order).sum(
            axis=(1, 3)
        )
        surface = np.zeros((mesh_panels + 1, mesh_panels + 1))
        surface[1:, 1:] = np.cumsum(np.cumsum(blocks, axis=0), axis=1)
        spline = RectBivariateSpline(edges, edges, surface, kx=3, ky=3)
        cov = cov + spline(grid, grid)
    cov = 0.5 * (cov + cov.T)
    kernel._cache[key] = cov
    return cov


def b_cov(
    s: float,
    m: float,
    t: float,
    n: float,
    kernel: GammaKernel,
    rel_tol: float = 1e-6,
    max_panels: int = 64,
) -> float:
    """Cov[B(s, m), B(t, n)] by adaptive tensor-product quadrature.

    The level prefactor is min(m, n)/sqrt(m n), the symmetric reading of
    the nested-level covariance.  The smooth lag part is refined by panel
    doubling until successive estimates agree to rel_tol; the kinked part
    is integrated exactly via cumulative tables.
    """
    if s < 0 or t < 0 or m < 0 or n < 0:
        raise ValueError("times and levels must be nonnegative")
    if s == 0 or t == 0 or m == 0 or n == 0:
        return 0.0
    pref = min(m, n) / math.sqrt(m * n)
    pts = np.unique(np.array([s, t], dtype=float))
    kink = float(_kink_cov_grid(pts, kernel.truth)[0, -1])
    if kernel.k_max < 2:
        return pref * kink
    prev = None
    panels = 4
    val = None
    while panels <= max_panels:
        val = _lag_tensor_quad(s, t, panels, kernel)
        if prev is not None and abs(val - prev) <= rel_tol * max(abs(kink + val), 1e-12):
            return pref * (kink + val)
        prev = val
        panels *= 2
    raise QuadratureError(
        f"b_cov quadrature did not converge at ({s}, {t}) after {max_panels} panels; "
        f"last estimates {prev} vs {val}"
    )


def sample_b_direct_batch(
    grid,
    n: float,
    kernel: GammaKernel,
    stream: RandomStream,
    draws: int = 1,
    epsilon: float = 0.05,
) -> np.ndarray:
    """Draw B(., n) paths by factorizing the grid covariance matrix."""
    grid = _check_grid_range(grid, kernel.truth, epsilon, max_size=1024)
    if n < 0:
        raise ValueError(f"level must be >= 0, got {n}")
    if n == 0:
        return np.zeros((draws, grid.size))
    key = ("bfactor", grid.tobytes())
    if key not in kernel._cache:
        kernel._cache[key] = _psd_factor(b_cov_matrix(grid, kernel))
    factor = kernel._cache[key]
    noise = stream.generator().standard_normal((draws, grid.size))
    return noise @ factor.T


def sample_b_direct(
    grid,
    n: float,
    kernel: GammaKernel,
    stream: RandomStream,
    epsilon: float = 0.05,
) -> GaussianPath:
    values = sample_b_direct_batch(grid, n, kernel, stream, draws=1, epsilon=epsilon)[0]
    return GaussianPath(grid=np.asarray(grid, float), values=values, n_level=n, method="direct")


def iid_hazard_variance_anchor(truth: TrueModel, t: float) -> float:
    """Classical iid variance anchor for the scaled hazard deviation at t.

    Computes the integral of dFstar / Hbar^2 over [0, t].  Reported as a
    diagnostic next to the B-process variance; the two weightings disagree
    away from the right edge, see the README notes.
    """
    from scipy import integrate

    val, _ = integrate.quad(
        lambda x: float(truth.fstar_density(x) / truth.Hbar(x) ** 2), 0.0, t, limit=200
    )
    return val


def write_matrix_csv(path, grid, matrix) -> None:
    """Row-major CSV with a header row of grid points."""
    import csv

    grid = np.asarray(grid, dtype=float)
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([repr(float(g)) for g in grid])
        for row in matrix:
            writer.writerow([repr(float(v)) for v in row])
