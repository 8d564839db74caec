"""Request and response bodies of the service endpoints."""

from __future__ import annotations

from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..config import ExperimentConfig, default_config

X_NAMES = ("excited", "ground", "sigma_x")

ObservableName = Literal["N0", "N1", "Pi_empty", "Pi_0", "Pi_1"]
EngineName = Literal["analytic", "quadrature", "mc"]

XSpec = Union[str, tuple[float, float, float, float, float, float, float, float]]


def x_matrix(spec: XSpec) -> np.ndarray:
    """2x2 Hermitian atom observable from a name or a (4 re + 4 im) row-major tuple."""
    if isinstance(spec, str):
        if spec == "excited":
            return np.diag([0.0, 1.0]).astype(complex)
        if spec == "ground":
            return np.diag([1.0, 0.0]).astype(complex)
        if spec == "sigma_x":
            return np.array([[0, 1], [1, 0]], dtype=complex)
        raise ValueError(f"unknown atom observable {spec!r}; valid names: {X_NAMES}")
    vals = tuple(float(v) for v in spec)
    if len(vals) != 8:
        raise ValueError(f"matrix observable needs 4 real + 4 imaginary entries, got {len(vals)}")
    x = np.array(vals[:4], dtype=complex).reshape(2, 2) + 1j * np.array(vals[4:]).reshape(2, 2)
    if np.abs(x - x.conj().T).max() > 1e-12:
        raise ValueError("matrix observable must be Hermitian")
    return x


class DecayRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig = Field(default_factory=default_config)


class DecayRow(BaseModel):
    t: float
    analytic: list[float]
    rk4: list[float]
    max_abs_dev: float


class DecayResponse(BaseModel):
    tolerance: float
    max_abs_dev: float
    passed: bool
    rows: list[DecayRow]


class ExpectRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig = Field(default_factory=default_config)
    observable: ObservableName = "N1"
    engine: EngineName = "analytic"


class ExpectRow(BaseModel):
    t: float
    value: float
    stderr: float | None = None
    tail_bound: float | None = None


class ExpectResponse(BaseModel):
    observable: str
    engine: str
    flagged: bool
    rows: list[ExpectRow]


class TrajectoriesRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig = Field(default_factory=default_config)
    x: XSpec = "excited"

    @field_validator("x")
    @classmethod
    def _x_valid(cls, v):
        x_matrix(v)
        return v


class TrajectoryRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    times: list[float]
    outcomes: list[int]
    klass: str = Field(alias="class")
    eps_series: list[tuple[float, float]]
    counts: dict[str, int]


class TrajectorySummary(BaseModel):
    samples: int
    window: float
    frequencies: dict[str, float]
    expected: dict[str, float]
    within_3sigma: bool


class TrajectoriesResponse(BaseModel):
    summary: TrajectorySummary
    passed: bool
    records: list[TrajectoryRecord]


class BelavkinCheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig = Field(default_factory=default_config)
    perturb_s: float = 0.0


class CheckRow(BaseModel):
    name: str
    max_abs_dev: float
    passed: bool


class BelavkinCheckResponse(BaseModel):
    tolerance: float
    passed: bool
    checks: list[CheckRow]
