"""Experiment configuration: a JSON-friendly model shared by the CLI and
the service, plus the packaged default."""

from __future__ import annotations

import json
import warnings
from importlib import resources

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from .atom import AtomParams

DEFAULT_SEED = 101

NORM_REJECT = 1e-3
NORM_WARN = 1e-9


class ExperimentConfig(BaseModel):
    """All knobs of one experiment run.

    alpha and beta are (re, im) pairs.  Amplitudes off unit norm by more
    than 1e-3 are rejected; smaller deviations are renormalized with a
    warning.  seed may be null, in which case the caller-side fallback
    chain (flag, file, EVENTUM_SEED, built-in default) applies.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    nu: float = 1.0
    r: float = 5.0
    alpha: tuple[float, float] = (0.7071067811865476, 0.0)
    beta: tuple[float, float] = (0.7071067811865476, 0.0)
    epsilon: float = 0.0
    t_grid: tuple[float, ...] = (0.1, 0.5, 1.0, 2.0, 5.0)
    dt: float = 0.001
    n_max: int = 40
    samples: int = 100000
    seed: int | None = None
    streams: int = 1

    @field_validator("nu", "r", "dt")
    @classmethod
    def _positive(cls, v, info):
        if not v > 0:
            raise ValueError(f"{info.field_name} must be positive, got {v}")
        return v

    @field_validator("n_max")
    @classmethod
    def _n_max_range(cls, v):
        if v < 0:
            raise ValueError(f"n_max must be nonnegative, got {v}")
        return v

    @field_validator("samples", "streams")
    @classmethod
    def _at_least_one(cls, v, info):
        if v < 1:
            raise ValueError(f"{info.field_name} must be >= 1, got {v}")
        return v

    @field_validator("t_grid")
    @classmethod
    def _t_grid_nonempty(cls, v):
        if not v:
            raise ValueError("t_grid must contain at least one time")
        return v

    @model_validator(mode="after")
    def _check_grid_and_norm(self):
        bad = [t for t in self.t_grid if not 0 <= t <= self.r]
        if bad:
            raise ValueError(f"t_grid entries must lie in [0, r={self.r}], got {bad}")
        norm = self.alpha[0] ** 2 + self.alpha[1] ** 2 + self.beta[0] ** 2 + self.beta[1] ** 2
        dev = abs(norm - 1.0)
        if dev > NORM_REJECT:
            raise ValueError(f"alpha, beta must be normalized: |alpha|^2+|beta|^2 = {norm}")
        if dev > NORM_WARN:
            warnings.warn(f"renormalizing alpha, beta (norm deviation {dev:.3g})", stacklevel=2)
            s = norm ** -0.5
            object.__setattr__(self, "alpha", (self.alpha[0] * s, self.alpha[1] * s))
            object.__setattr__(self, "beta", (self.beta[0] * s, self.beta[1] * s))
        return self

    def atom_params(self) -> AtomParams:
        return AtomParams(
            nu=self.nu,
            alpha=complex(*self.alpha),
            beta=complex(*self.beta),
            epsilon=self.epsilon,
        )

    def effective_seed(self) -> int:
        return DEFAULT_SEED if self.seed is None else self.seed


def default_config() -> ExperimentConfig:
    """The configuration shipped with the package."""
    text = resources.files("eventum").joinpath("default_config.json").read_text()
    return ExperimentConfig(**json.loads(text))


def read_config_file(path: str) -> dict:
    """Raw mapping from a JSON config file, so callers can layer overrides
    on top before validating."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object, got {type(data).__name__}")
    return data


def load_config(path: str) -> ExperimentConfig:
    return ExperimentConfig(**read_config_file(path))
