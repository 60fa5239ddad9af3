"""TOML configuration parsing with strict schema validation.

Unknown keys are errors: a typo in a config file must fail fast instead of
silently running a different experiment.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .datagen import Exponential, MixingModel, Uniform, Weibull
from .errors import ConfigError
from .experiments import ExperimentConfig

_MARGINAL_KEYS = {
    "exponential": {"rate"},
    "weibull": {"shape", "scale"},
    "uniform": {"upper"},
}

_MODEL_KEYS = {"rho_x", "rho_y", "lifetime", "censoring"}

_EXPERIMENT_KEYS = {
    "sizes", "reps", "seed", "statistics", "tau_epsilon", "p0", "p1",
    "grid_size", "p_grid_size", "gp_grid_size", "lambda_exponent", "osc_const",
}

_GP_KEYS = {"grid_size", "epsilon", "series_tol"}

_TOP_KEYS = {"model", "experiment", "gp"}


@dataclass(frozen=True)
class GpSettings:
    """Defaults for limit-process sampling from the optional [gp] section."""

    grid_size: int = 256
    epsilon: float = 0.05
    series_tol: float = 1e-8


@dataclass(frozen=True)
class FullConfig:
    model: MixingModel
    experiment: ExperimentConfig | None
    gp: GpSettings


def _check_keys(section: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(
            f"unknown key(s) {unknown} in [{where}]; valid keys: {sorted(allowed)}"
        )


def _parse_marginal(section: dict, where: str):
    if "family" not in section:
        raise ConfigError(f"[{where}] needs a 'family' key")
    family = section["family"]
    if family not in _MARGINAL_KEYS:
        raise ConfigError(
            f"[{where}] family must be one of {sorted(_MARGINAL_KEYS)}, got {family!r}"
        )
    _check_keys({k: v for k, v in section.items() if k != "family"},
                _MARGINAL_KEYS[family], where)
    missing = _MARGINAL_KEYS[family] - set(section)
    if missing:
        raise ConfigError(f"[{where}] missing key(s) {sorted(missing)} for family {family!r}")
    try:
        if family == "exponential":
            return Exponential(rate=float(section["rate"]))
        if family == "weibull":
            return Weibull(shape=float(section["shape"]), scale=float(section["scale"]))
        return Uniform(upper=float(section["upper"]))
    except ValueError as exc:
        raise ConfigError(f"[{where}]: {exc}") from exc


def parse_model(section: dict) -> MixingModel:
    _check_keys(section, _MODEL_KEYS, "model")
    for sub in ("lifetime", "censoring"):
        if sub not in section:
            raise ConfigError(f"[model] needs a [model.{sub}] section")
    try:
        return MixingModel(
            marginal_x=_parse_marginal(section["lifetime"], "model.lifetime"),
            marginal_y=_parse_marginal(section["censoring"], "model.censoring"),
            rho_x=float(section.get("rho_x", 0.0)),
            rho_y=float(section.get("rho_y", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"[model]: {exc}") from exc


def parse_experiment(section: dict, model: MixingModel,
                     seed_override: int | None = None) -> ExperimentConfig:
    _check_keys(section, _EXPERIMENT_KEYS, "experiment")
    for req in ("sizes", "reps", "seed", "statistics"):
        if req not in section:
            raise ConfigError(f"[experiment] missing required key {req!r}")
    kwargs = {k: section[k] for k in section if k not in ("sizes", "statistics", "seed")}
    try:
        return ExperimentConfig(
            model=model,
            sizes=tuple(int(v) for v in section["sizes"]),
            statistics=tuple(str(s) for s in section["statistics"]),
            seed=int(seed_override if seed_override is not None else section["seed"]),
            **kwargs,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[experiment]: {exc}") from exc


def load_config(path, seed_override: int | None = None,
                need_experiment: bool = False) -> FullConfig:
    """Read and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        # tomllib error messages carry line/column context.
        raise ConfigError(f"{path}: {exc}") from exc
    _check_keys(data, _TOP_KEYS, "top level")
    if "model" not in data:
        raise ConfigError(f"{path}: missing [model] section")
    model = parse_model(data["model"])
    experiment = None
    if "experiment" in data:
        experiment = parse_experiment(data["experiment"], model, seed_override)
    elif need_experiment:
        raise ConfigError(f"{path}: missing [experiment] section")
    gp_section = data.get("gp", {})
    _check_keys(gp_section, _GP_KEYS, "gp")
    try:
        gp = GpSettings(
            grid_size=int(gp_section.get("grid_size", 256)),
            epsilon=float(gp_section.get("epsilon", 0.05)),
            series_tol=float(gp_section.get("series_tol", 1e-8)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[gp]: {exc}") from exc
    return FullConfig(model=model, experiment=experiment, gp=gp)
