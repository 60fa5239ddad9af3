"""Survival estimation under strong-mixing censored data.

Data generation (Gaussian-copula AR(1) chains), product-limit /
cumulative-hazard / quantile estimators, the limiting Gaussian process of
the scaled deviations, and a Monte Carlo harness that measures empirical
convergence rates.
"""

from .datagen import (
    CensoredSample,
    Exponential,
    MixingModel,
    RandomStream,
    TrueModel,
    Uniform,
    Weibull,
    ar1_gaussian,
    generate_sample,
    to_marginal,
    true_model,
)
from .errors import (
    ConfigError,
    EmptySampleError,
    FactorizationError,
    PlmixError,
    QuadratureError,
    QuantileNotAttainedError,
    RangeError,
)
from .estimators import (
    ProcessPath,
    StepFunction,
    counting,
    hazard_process,
    km,
    nelson_aalen,
    pl_process,
    pl_quantile,
    pl_quantile_grid,
    quantile_process,
    rho_path,
    sup_step_vs_fn,
)
from .experiments import (
    ExperimentConfig,
    RateSummary,
    a_n,
    b_n,
    bahadur_stat,
    coupling_stat,
    fit_rate,
    ks_distance,
    lambda_n,
    lil_stat,
    oscillation_stat,
    qdev_stat,
    rel38_stat,
    run_experiment,
    sup_norm,
)
from .gausslimit import (
    GammaKernel,
    GaussianPath,
    b_cov,
    b_cov_matrix,
    bvn_survival,
    cov_g1gk,
    gamma,
    sample_b_direct,
    sample_b_integral,
    sample_kiefer,
)

__version__ = "0.1.0"
