"""Stationary strong-mixing censored-data generation with closed-form truth.

Lifetime and censoring sequences are built as Gaussian-copula AR(1) chains:
a stationary AR(1) series with standard-normal marginals is pushed through
the normal cdf and then through the target quantile function.  Gaussian
AR(1) chains mix geometrically fast, and the coordinatewise transform
leaves the generated sigma-fields (hence the mixing coefficients)
unchanged, so the observed pairs (z_i, delta_i) form a stationary
strong-mixing sequence whose marginal structure is known in closed form.

The AR(1)-copula generator is this package's own choice of concrete
mixing mechanism; see the README for the rationale.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate
from scipy.optimize import brentq
from scipy.signal import lfilter
from scipy.special import ndtr

from .errors import QuadratureError

logger = logging.getLogger(__name__)

# Copula uniforms are clipped away from {0, 1} so quantile functions with
# unbounded support cannot overflow on extreme normal draws.
_U_LO = 1e-300
_U_HI = 1.0 - 1e-16


@dataclass(frozen=True)
class Exponential:
    """Exponential marginal with the given rate."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"Exponential rate must be > 0, got {self.rate}")

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t > 0, -np.expm1(-self.rate * np.maximum(t, 0.0)), 0.0)

    def sf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t > 0, np.exp(-self.rate * np.maximum(t, 0.0)), 1.0)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, self.rate * np.exp(-self.rate * np.maximum(t, 0.0)), 0.0)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        return -np.log1p(-p) / self.rate


@dataclass(frozen=True)
class Weibull:
    """Weibull marginal with shape k and scale s."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError(
                f"Weibull shape and scale must be > 0, got {self.shape}, {self.scale}"
            )

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        u = (np.maximum(t, 0.0) / self.scale) ** self.shape
        return np.where(t > 0, -np.expm1(-u), 0.0)

    def sf(self, t):
        t = np.asarray(t, dtype=float)
        u = (np.maximum(t, 0.0) / self.scale) ** self.shape
        return np.where(t > 0, np.exp(-u), 1.0)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        tt = np.maximum(t, 1e-300)
        u = (tt / self.scale) ** self.shape
        dens = (self.shape / self.scale) * (tt / self.scale) ** (self.shape - 1.0) * np.exp(-u)
        return np.where(t > 0, dens, 0.0)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        return self.scale * (-np.log1p(-p)) ** (1.0 / self.shape)


@dataclass(frozen=True)
class Uniform:
    """Uniform marginal on (0, upper)."""

    upper: float

    def __post_init__(self):
        if not self.upper > 0:
            raise ValueError(f"Uniform upper bound must be > 0, got {self.upper}")

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.clip(t / self.upper, 0.0, 1.0)

    def sf(self, t):
        return 1.0 - self.cdf(t)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= 0) & (t <= self.upper), 1.0 / self.upper, 0.0)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        return p * self.upper


MarginalSpec = Union[Exponential, Weibull, Uniform]


@dataclass(frozen=True)
class MixingModel:
    """Lifetime/censoring model: marginals plus AR(1) copula correlations.

    rho_x and rho_y are the lag-1 correlations of the latent Gaussian
    chains driving lifetimes and censoring times.  rho = 0 recovers the
    iid special case.  The two chains are always mutually independent.
    """

    marginal_x: MarginalSpec
    marginal_y: MarginalSpec
    rho_x: float = 0.0
    rho_y: float = 0.0

    def __post_init__(self):
        for name, rho in (("rho_x", self.rho_x), ("rho_y", self.rho_y)):
            if not abs(rho) < 1:
                raise ValueError(f"{name} must satisfy |rho| < 1 for stationarity, got {rho}")


@dataclass(frozen=True)
class RandomStream:
    """Reproducible random source: a master seed plus a replication index.

    Identical (seed, stream_id) pairs reproduce identical draws bit for
    bit; distinct stream_ids give statistically independent streams.
    """

    seed: int
    stream_id: int = 0

    def generator(self, *path: int) -> np.random.Generator:
        """Child generator for a sub-task; distinct paths are independent."""
        key = (self.stream_id,) + tuple(path)
        return np.random.default_rng(np.random.SeedSequence(entropy=self.seed, spawn_key=key))


@dataclass(frozen=True)
class CensoredSample:
    """Observed censored data: times z and event indicators delta.

    delta_i = 1 means the lifetime was observed, 0 means it was censored.
    Latent lifetimes/censoring times may be retained for diagnostics.
    """

    z: np.ndarray
    delta: np.ndarray
    x: np.ndarray | None = None
    y: np.ndarray | None = None

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        delta = np.asarray(self.delta, dtype=np.int64)
        if z.shape != delta.shape or z.ndim != 1:
            raise ValueError("z and delta must be 1-d arrays of equal length")
        if z.size and z.min() < 0:
            raise ValueError("observed times must be nonnegative")
        if delta.size and not np.isin(delta, (0, 1)).all():
            raise ValueError("delta entries must be 0 or 1")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "delta", delta)
        if self.x is not None and self.y is not None:
            x = np.asarray(self.x, dtype=float)
            y = np.asarray(self.y, dtype=float)
            if not (np.array_equal(z, np.minimum(x, y))
                    and np.array_equal(delta, (x <= y).astype(np.int64))):
                raise ValueError("latent x, y inconsistent with z, delta")
            object.__setattr__(self, "x", x)
            object.__setattr__(self, "y", y)
        for arr in (self.z, self.delta, self.x, self.y):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.z.size

    def to_csv(self, path) -> None:
        """Write `z,delta` rows in generation order."""
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["z", "delta"])
            for zi, di in zip(self.z, self.delta):
                writer.writerow([repr(float(zi)), int(di)])

    @classmethod
    def from_csv(cls, path) -> "CensoredSample":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ValueError(f"{path}: empty file, expected header 'z,delta'")
            if [h.strip() for h in header] != ["z", "delta"]:
                raise ValueError(f"{path}: expected header 'z,delta', got {header}")
            zs, ds = [], []
            for i, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 2:
                    raise ValueError(f"{path}: row {i}: expected 2 fields, got {len(row)}")
                try:
                    z = float(row[0])
                except ValueError:
                    raise ValueError(f"{path}: row {i}: bad time value {row[0]!r}") from None
                if row[1].strip() not in ("0", "1"):
                    raise ValueError(f"{path}: row {i}: delta must be 0 or 1, got {row[1]!r}")
                zs.append(z)
                ds.append(int(row[1]))
        if not zs:
            raise ValueError(f"{path}: no observations")
        return cls(z=np.array(zs), delta=np.array(ds))


def ar1_gaussian(n: int, rho: float, stream: RandomStream) -> np.ndarray:
    """Stationary AR(1) series with standard-normal marginals.

    Initialized from the stationary law (no burn-in); Corr(e_i, e_{i+k})
    equals rho**k exactly in distribution.
    """
    rng = stream.generator()
    return _ar1_from_rng(n, rho, rng)


def _ar1_from_rng(n: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not abs(rho) < 1:
        raise ValueError(f"|rho| must be < 1 for stationarity, got {rho}")
    xi = rng.standard_normal(n)
    if rho == 0.0:
        return xi
    # e_t = rho * e_{t-1} + sqrt(1 - rho^2) * xi_t with e_0 = xi_0 ~ N(0,1)
    driven = xi * math.sqrt(1.0 - rho * rho)
    driven[0] = xi[0]
    return lfilter([1.0], [1.0, -rho], driven)


def to_marginal(gauss: np.ndarray, marginal: MarginalSpec) -> np.ndarray:
    """Map standard-normal values to the target marginal via Q(Phi(g)).

    The transform is coordinatewise and monotone, so the dependence
    structure of the input sequence carries over unchanged.
    """
    u = np.clip(ndtr(np.asarray(gauss, dtype=float)), _U_LO, _U_HI)
    return np.asarray(marginal.quantile(u), dtype=float)


def generate_sample(
    model: MixingModel,
    n: int,
    stream: RandomStream,
    keep_latents: bool = False,
) -> CensoredSample:
    """Draw a censored sample of size n from the model.

    The lifetime chain and the censoring chain use independent
    sub-generators of the stream, so the two sequences are mutually
    independent.  z_i = min(x_i, y_i), delta_i = 1 iff x_i <= y_i.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    x = to_marginal(_ar1_from_rng(n, model.rho_x, stream.generator(0)), model.marginal_x)
    y = to_marginal(_ar1_from_rng(n, model.rho_y, stream.generator(1)), model.marginal_y)
    z = np.minimum(x, y)
    delta = (x <= y).astype(np.int64)
    if keep_latents:
        return CensoredSample(z=z, delta=delta, x=x, y=y)
    return CensoredSample(z=z, delta=delta)


@dataclass(frozen=True)
class TrueModel:
    """Closed-form ground truth for a mixing model.

    Bundles the lifetime cdf F, censoring cdf G, lifetime density f, the
    joint survival Hbar = (1-F)(1-G) of the observed minimum, the
    uncensored sub-distribution Fstar(t) = integral of (1-G) dF over
    [0, t], the cumulative hazard Lambda = -log(1-F) and the quantile
    function Q of F.
    """

    lifetime: MarginalSpec
    censoring: MarginalSpec

    def F(self, t):
        return self.lifetime.cdf(t)

    def G(self, t):
        return self.censoring.cdf(t)

    def f(self, t):
        return self.lifetime.pdf(t)

    def Sf(self, t):
        """Lifetime survival 1 - F(t)."""
        return self.lifetime.sf(t)

    def Hbar(self, t):
        return self.lifetime.sf(t) * self.censoring.sf(t)

    def H(self, t):
        return 1.0 - self.Hbar(t)

    def Lambda(self, t):
        sf = np.asarray(self.lifetime.sf(t), dtype=float)
        with np.errstate(divide="ignore"):
            return -np.log(sf)

    def hazard(self, t):
        return self.lifetime.pdf(t) / self.lifetime.sf(t)

    def Q(self, p):
        return self.lifetime.quantile(p)

    def fstar_density(self, t):
        """Density of the uncensored sub-distribution: (1-G(t)) f(t)."""
        return self.censoring.sf(t) * self.lifetime.pdf(t)

    def Fstar(self, t):
        """P(Z <= t, uncensored).  Closed form for Exp/Exp, quadrature otherwise."""
        if isinstance(self.lifetime, Exponential) and isinstance(self.censoring, Exponential):
            lam, mu = self.lifetime.rate, self.censoring.rate
            t = np.asarray(t, dtype=float)
            return np.where(
                t > 0, -(lam / (lam + mu)) * np.expm1(-(lam + mu) * np.maximum(t, 0.0)), 0.0
            )
        return _quad_vec(self.fstar_density, t)

    def Gstar(self, t):
        """P(Z <= t, censored): integral of (1-F) dG over [0, t]."""
        if isinstance(self.lifetime, Exponential) and isinstance(self.censoring, Exponential):
            lam, mu = self.lifetime.rate, self.censoring.rate
            t = np.asarray(t, dtype=float)
            return np.where(
                t > 0, -(mu / (lam + mu)) * np.expm1(-(lam + mu) * np.maximum(t, 0.0)), 0.0
            )
        return _quad_vec(lambda u: self.lifetime.sf(u) * self.censoring.pdf(u), t)

    def tau(self, epsilon: float = 0.05) -> float:
        """Largest admissible time: first t with Hbar(t) <= epsilon."""
        if not 0 < epsilon < 1:
            raise ValueError(f"epsilon must be in (0,1), got {epsilon}")
        hi = 1.0
        for _ in range(200):
            if self.Hbar(hi) <= epsilon:
                break
            hi *= 2.0
        else:
            raise QuadratureError("could not bracket tau: Hbar stays above epsilon")
        return float(brentq(lambda t: float(self.Hbar(t)) - epsilon, 0.0, hi, xtol=1e-12))

    def quantile_H(self, p: float) -> float:
        """Quantile of the observed-minimum distribution H."""
        if not 0 < p < 1:
            raise ValueError(f"p must be in (0,1), got {p}")
        return self.tau(1.0 - p)


def _quad_vec(density, t):
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t_arr)
    for i, ti in enumerate(t_arr):
        if ti <= 0:
            continue
        val, abserr = integrate.quad(
            lambda u: float(density(u)), 0.0, float(ti), epsabs=1e-13, epsrel=1e-9, limit=200
        )
        if abserr > max(1e-9 * abs(val), 1e-10):
            raise QuadratureError(
                f"sub-distribution quadrature did not converge at t={ti}: "
                f"estimate {val}, error bound {abserr}"
            )
        out[i] = val
    return out if np.ndim(t) else float(out[0])


def true_model(model: MixingModel) -> TrueModel:
    """Ground-truth evaluators for the model's marginals."""
    return TrueModel(lifetime=model.marginal_x, censoring=model.marginal_y)
