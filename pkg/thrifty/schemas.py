# thrifty/schemas.py
from __future__ import annotations

from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from thrifty import config


EnsembleKind = Literal["fourdesign", "clifford", "interleaved", "simplet"]


# -------------------------
# Ensembles
# -------------------------
class EnsembleSpec(BaseModel):
    """Tagged unitary ensemble: 4-design, Clifford, 𝕌_{k,l} (interleaved) or Ũ_k (simplet)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: EnsembleKind
    n: int = Field(ge=1)
    k: int = Field(default=0, ge=0)
    l: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_counts(self) -> "EnsembleSpec":
        if self.k > self.n:
            raise ValueError(f"T-gate count k={self.k} exceeds qubit count n={self.n}")
        if self.kind in ("fourdesign", "clifford") and (self.k or self.l):
            raise ValueError(f"{self.kind} ensemble takes no k/l parameters")
        if self.kind == "simplet" and self.l:
            raise ValueError("simplet ensemble takes no layer count l")
        return self

    @property
    def d(self) -> int:
        return 2**self.n

    @property
    def is_clifford(self) -> bool:
        """Interleaved(k,0), Interleaved(0,l) and SimpleT(0) all reduce to Cl_n."""
        if self.kind == "clifford":
            return True
        if self.kind == "interleaved":
            return self.k == 0 or self.l == 0
        if self.kind == "simplet":
            return self.k == 0
        return False

    def normalized(self) -> "EnsembleSpec":
        if self.kind != "clifford" and self.is_clifford:
            return EnsembleSpec(kind="clifford", n=self.n)
        return self

    def label(self) -> str:
        if self.kind == "interleaved":
            return f"U[{self.k},{self.l}]"
        if self.kind == "simplet":
            return f"tU[{self.k}]"
        return self.kind


# -------------------------
# States and observables
# -------------------------
class StateSpec(BaseModel):
    """Named pure state used as target / input of a run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    family: Literal["basis", "w", "w_theta", "phased_w", "snk", "haar"]
    n: int = Field(ge=1)
    index: int = 0
    theta: float = 0.0
    thetas: tuple[float, ...] | None = None
    k: int = 0
    seed: int | None = None

    @model_validator(mode="after")
    def _check_family(self) -> "StateSpec":
        if self.family == "phased_w" and (self.thetas is None or len(self.thetas) != self.n):
            raise ValueError("phased_w needs exactly n phases in 'thetas'")
        if self.family == "snk" and not 0 <= self.k <= self.n:
            raise ValueError(f"snk needs 0 <= k <= n (got k={self.k}, n={self.n})")
        if self.family == "haar" and self.seed is None:
            raise ValueError("haar state needs an explicit seed")
        if self.family == "basis" and not 0 <= self.index < 2**self.n:
            raise ValueError("basis index out of range")
        return self


class ComplexMatrix(BaseModel):
    """JSON-friendly complex matrix (real and imaginary parts)."""

    model_config = ConfigDict(extra="forbid")

    real: list[list[float]]
    imag: list[list[float]] | None = None

    def to_array(self) -> np.ndarray:
        re = np.asarray(self.real, dtype=float)
        im = np.zeros_like(re) if self.imag is None else np.asarray(self.imag, dtype=float)
        if re.shape != im.shape or re.ndim != 2 or re.shape[0] != re.shape[1]:
            raise ValueError("matrix parts must be square and of equal shape")
        return re + 1j * im

    @classmethod
    def from_array(cls, mat: np.ndarray) -> "ComplexMatrix":
        mat = np.asarray(mat, dtype=complex)
        return cls(real=mat.real.tolist(), imag=mat.imag.tolist())


class ObservableSpec(BaseModel):
    """Either the fidelity observable of the target or an explicit traceless matrix."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["fidelity", "dense"] = "fidelity"
    matrix: ComplexMatrix | None = None

    @model_validator(mode="after")
    def _check_matrix(self) -> "ObservableSpec":
        if self.kind == "dense" and self.matrix is None:
            raise ValueError("dense observable needs 'matrix'")
        return self


# -------------------------
# Monte Carlo runs
# -------------------------
class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = Field(ge=1, le=config.STATEVECTOR_MAX_QUBITS)
    ensemble: EnsembleSpec
    R: int = Field(ge=1)
    num_circuits: int = Field(ge=2)
    seed: int
    target: StateSpec
    observable: ObservableSpec = Field(default_factory=ObservableSpec)
    depolarizing_p: float = Field(default=0.0, ge=0.0, le=1.0)
    workers: int = Field(default=config.WORKERS, ge=1)

    @model_validator(mode="after")
    def _check_sizes(self) -> "RunConfig":
        if self.ensemble.n != self.n or self.target.n != self.n:
            raise ValueError("ensemble, target and run must share the same n")
        return self


# -------------------------
# Command requests
# -------------------------
class AnalyticParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ensemble: EnsembleKind = "clifford"
    n: int | None = Field(default=None, ge=1)
    d: int | None = Field(default=None, ge=2)
    k: int = Field(default=0, ge=0)
    l: int = Field(default=0, ge=0)
    m2: float | None = Field(default=None, ge=0.0)
    family: StateSpec | None = None
    f: float | None = Field(default=None, ge=0.0, le=1.0)
    p: float = Field(default=0.0, ge=0.0, le=1.0)
    fidelity_ideal: bool = False
    r: list[int] = Field(default_factory=lambda: [1])
    rho: ComplexMatrix | None = None
    observable: ComplexMatrix | None = None

    @field_validator("r")
    @classmethod
    def _positive_r(cls, value: list[int]) -> list[int]:
        if not value or any(r < 1 for r in value):
            raise ValueError("every R must be >= 1")
        return value

    @model_validator(mode="after")
    def _check_scenario(self) -> "AnalyticParams":
        if self.m2 is not None and self.family is not None:
            raise ValueError("give M2 directly or through a state family, never both")
        if (self.rho is None) != (self.observable is None):
            raise ValueError("a dense pair needs both 'rho' and 'observable'")
        if self.n is None and self.d is None and self.family is None and self.rho is None:
            raise ValueError("one of n, d, family or a dense pair must fix the dimension")
        if self.fidelity_ideal and (self.p or (self.f is not None and self.f != 1.0)):
            raise ValueError("fidelity_ideal means F=1 and p=0")
        return self


class SreParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["w", "w_theta", "phased_w", "snk"]
    n: int = Field(ge=1)
    k: int = 0
    theta: float = 0.0
    thetas: tuple[float, ...] | None = None
    direct: bool = False


class CrossMomentParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ensemble: EnsembleKind = "clifford"
    n: int = Field(default=1, ge=1, le=config.OMEGA_MAX_QUBITS)
    k: int = 0
    l: int = 0
    samples: int = Field(default=2000, ge=1)
    seed: int | None = None
    export: str | None = None


class SimulateParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    run: RunConfig


class FigureParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    which: Literal[
        "random_states",
        "var_types",
        "interleaved_compare",
        "depolarizing",
        "upper_bound_scatter",
        "ratio_scatter",
        "ensemble_compare",
    ]
    n: int | None = Field(default=None, ge=1)
    circuits: int = Field(default=2000, ge=2)
    r: int = Field(default=10, ge=1)
    seed: int | None = None
    samples: int = Field(default=200, ge=1)
    grid: list[float] | None = None


class VerifyParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    suite: Literal["charfuncs", "commutant", "omega", "variance-oracle", "bounds"]
    seed: int = 2024
    cases: int = Field(default=500, ge=1)


PARAMS_BY_SUBCOMMAND: dict[str, type[BaseModel]] = {
    "analytic": AnalyticParams,
    "sre": SreParams,
    "crossmoment": CrossMomentParams,
    "simulate": SimulateParams,
    "figure": FigureParams,
    "verify": VerifyParams,
}


class CommandRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    subcommand: Literal["analytic", "sre", "crossmoment", "simulate", "figure", "verify"]
    params: dict[str, Any] = Field(default_factory=dict)
    output: str | None = None
    format: Literal["json", "csv"] = "json"

    def typed_params(self) -> BaseModel:
        """Validate params against the subcommand model; unknown keys are rejected."""
        return PARAMS_BY_SUBCOMMAND[self.subcommand].model_validate(self.params)


class ReportDocument(BaseModel):
    """Every CLI/API output: resolved config, results and diagnostics."""

    version: str
    config: dict[str, Any]
    results: Any
    diagnostics: dict[str, Any] = Field(default_factory=dict)
