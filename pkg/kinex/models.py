from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ---- Fit results ----

class ExponentialFit(BaseModel):
    """Thermal (exponential) fit over a wealth/money window"""
    temperature: float
    temperature_corrected: Optional[float] = None  # MLE for the window-truncated law
    window_lo: float
    window_hi: float
    n_in_window: int
    r_squared_loglinear: float

    @property
    def reference_temperature(self) -> float:
        """Temperature used for the thermal reference curve."""
        return self.temperature_corrected if self.temperature_corrected is not None else self.temperature


class ParetoFit(BaseModel):
    """Hill estimate of the power-law tail above xmin"""
    alpha: float
    xmin: float
    n_tail: int
    ks_distance: Optional[float] = None


class DemandPoint(BaseModel):
    ratio: float
    mean_price: float
    std_price: float
    n: int


class ComparisonRow(BaseModel):
    model: str
    param: Optional[float] = None
    T: Optional[float] = None
    ks: Optional[float] = None
    alpha: Optional[float] = None
    thinning_index: Optional[float] = None


# ---- Experiment configuration ----

class ModelKind(str, Enum):
    BUYER = "buyer"
    DY = "dy"
    CC = "cc"


class ExperimentConfig(BaseModel):
    """Fully resolved experiment configuration. Unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)

    model: ModelKind = ModelKind.BUYER
    n_agents: int = Field(1000, ge=2)
    # 3 goods and 3 money per agent, prices of order 1
    total_goods: int = Field(3000, ge=0)
    total_money: float = Field(3000.0, ge=0)
    h_min: float = Field(0.5, gt=0)
    h_max: float = Field(1.5, gt=0)
    saving: float = Field(0.5, alias="lambda")
    n_sweeps: int = Field(2000, ge=0)
    burn_in_sweeps: int = Field(1000, ge=0)
    snapshot_sweeps: List[int] = Field(default_factory=list)
    seed: int = Field(42, ge=0, lt=2**64)
    output_dir: str = "results"
    ratios: List[float] = Field(default_factory=lambda: [0.1, 0.5, 1.0, 2.0, 10.0])

    # analysis settings
    hist_bins: int = Field(50, ge=1)
    fit_bins: int = Field(8, ge=3)
    window_quantiles: Tuple[float, float] = (0.70, 0.98)
    thermal_window: Optional[Tuple[float, float]] = None
    tail_probe: Optional[float] = None
    pareto_xmin: Optional[float] = Field(None, gt=0)
    xmin_search: bool = False
    wealth_sampling: Literal["final", "time_averaged"] = "final"
    time_average_points: int = Field(5, ge=1)

    workers: int = Field(1, ge=1)

    @field_validator("saving")
    @classmethod
    def _saving_range(cls, v: float) -> float:
        if not 0.0 <= v < 1.0:
            raise ValueError(f"lambda must lie in [0, 1), got {v}")
        return v

    @field_validator("ratios")
    @classmethod
    def _ratios_positive(cls, v: List[float]) -> List[float]:
        bad = [r for r in v if not r > 0]
        if bad:
            raise ValueError(f"ratios must be positive, got {bad}")
        return v

    @model_validator(mode="after")
    def _cross_field(self) -> "ExperimentConfig":
        if self.h_min > self.h_max:
            raise ValueError(f"h_min ({self.h_min}) must not exceed h_max ({self.h_max})")
        if self.burn_in_sweeps > self.n_sweeps:
            raise ValueError(
                f"burn_in_sweeps ({self.burn_in_sweeps}) must not exceed n_sweeps ({self.n_sweeps})"
            )
        snaps = self.snapshot_sweeps
        if any(s < 0 or s > self.n_sweeps for s in snaps):
            raise ValueError(f"snapshot_sweeps must lie within [0, {self.n_sweeps}], got {snaps}")
        if any(b <= a for a, b in zip(snaps, snaps[1:])):
            raise ValueError(f"snapshot_sweeps must be strictly increasing, got {snaps}")
        q_lo, q_hi = self.window_quantiles
        if not 0.0 <= q_lo < q_hi <= 1.0:
            raise ValueError(f"window_quantiles must satisfy 0 <= lo < hi <= 1, got {self.window_quantiles}")
        if self.thermal_window is not None and not self.thermal_window[0] < self.thermal_window[1]:
            raise ValueError(f"thermal_window must satisfy lo < hi, got {self.thermal_window}")
        return self

    @property
    def h_range(self) -> Tuple[float, float]:
        return (self.h_min, self.h_max)

    @property
    def mean_money(self) -> float:
        return self.total_money / self.n_agents

    @property
    def ratio(self) -> float:
        """Goods to money ratio."""
        return self.total_goods / self.total_money if self.total_money > 0 else float("inf")

    def with_ratio(self, ratio: float) -> "ExperimentConfig":
        """Same config with goods rescaled to ratio * money, money held fixed."""
        return self.model_copy(update={"total_goods": int(round(ratio * self.total_money))})

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


class RunManifest(BaseModel):
    experiment: str
    config: Dict[str, Any]
    code_version: str
    files: Dict[str, str]  # relative path -> sha256
    duration_seconds: float
