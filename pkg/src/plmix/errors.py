"""Exception types shared across the package."""


class PlmixError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PlmixError, ValueError):
    """Invalid or malformed configuration."""


class EmptySampleError(PlmixError, ValueError):
    """An estimator was given a sample with no observations."""


class QuantileNotAttainedError(PlmixError, ValueError):
    """The product-limit estimator never reaches the requested level.

    Happens under heavy censoring when the estimated distribution function
    is capped below the requested probability.  Raised explicitly so callers
    never receive a silent sentinel value.
    """


class RangeError(PlmixError, ValueError):
    """A grid or evaluation point lies outside the admissible range."""


class QuadratureError(PlmixError, RuntimeError):
    """Numerical integration failed to reach the requested tolerance."""


class FactorizationError(PlmixError, RuntimeError):
    """Covariance factorization failed even after PSD repair."""
