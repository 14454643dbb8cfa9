"""
Conservative money-exchange models used as thermal baselines: the pooled random
split (no saving) and its variant where each agent keeps a fixed fraction of its
money out of the pool. Both run behind the same stepping interface as the buyer
model, with the same RNG and sweep conventions.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, UsageError
from .kernels import advance_exchange
from .kinetic import IKineticSystem, Snapshot, SnapshotSeries, draw_pair, run
from .progress import IProgressReporter
from .rng import RngStream

logger = logging.getLogger(__name__)

ExchangeRule = Callable[[float, float, float], Tuple[float, float]]


def dy_exchange(d_i: float, d_j: float, epsilon: float) -> Tuple[float, float]:
    """Pool both holdings and split the pool at a random fraction epsilon."""
    if not 0.0 <= epsilon <= 1.0:
        raise UsageError(f"epsilon must lie in [0, 1], got {epsilon}")
    pool = d_i + d_j
    new_i = min(epsilon * pool, pool)
    return new_i, pool - new_i


def cc_exchange(d_i: float, d_j: float, saving: float, epsilon: float) -> Tuple[float, float]:
    """Each side keeps saving*d; the remainder is pooled and split at epsilon."""
    if not 0.0 <= saving < 1.0:
        raise UsageError(f"lambda must lie in [0, 1), got {saving}")
    if not 0.0 <= epsilon <= 1.0:
        raise UsageError(f"epsilon must lie in [0, 1], got {epsilon}")
    pool = d_i + d_j
    new_i = min(saving * d_i + epsilon * ((1.0 - saving) * pool), pool)
    return new_i, pool - new_i


@dataclass(frozen=True)
class SavingConfig:
    saving: float

    def __post_init__(self):
        if not 0.0 <= self.saving < 1.0:
            raise ConfigurationError(f"lambda must lie in [0, 1), got {self.saving}", ["lambda"])


@dataclass(frozen=True)
class ReferenceModel:
    """`dy` (pooled split) or `cc` (pooled split with saving propensity)."""
    kind: str = "dy"
    saving: Optional[SavingConfig] = None

    def __post_init__(self):
        if self.kind not in ("dy", "cc"):
            raise ConfigurationError(f"unknown reference model '{self.kind}'", ["model"])
        if self.kind == "cc" and self.saving is None:
            raise ConfigurationError("cc model needs a saving propensity", ["lambda"])

    @classmethod
    def dy(cls) -> "ReferenceModel":
        return cls("dy")

    @classmethod
    def cc(cls, saving: float) -> "ReferenceModel":
        return cls("cc", SavingConfig(saving))

    @property
    def label(self) -> str:
        return "dy" if self.kind == "dy" else f"cc(lambda={self.saving.saving})"

    def rule(self) -> ExchangeRule:
        if self.kind == "dy":
            return dy_exchange
        lam = self.saving.saving
        return lambda d_i, d_j, eps: cc_exchange(d_i, d_j, lam, eps)

    @property
    def saving_fraction(self) -> float:
        return 0.0 if self.saving is None else self.saving.saving


@dataclass(eq=False)
class MoneyPopulation(IKineticSystem):
    money: np.ndarray
    model: ReferenceModel = field(default_factory=ReferenceModel.dy)
    step_count: int = 0

    def __post_init__(self):
        self.money = np.array(self.money, dtype=np.float64)
        self._rule = self.model.rule()

    def __len__(self) -> int:
        return len(self.money)

    def step(self, rng: RngStream) -> Tuple[int, int]:
        """Uniform pair (two draws), then a fresh epsilon (third draw)."""
        money = self.money
        i, j = draw_pair(len(money), rng)
        money[i], money[j] = self._rule(float(money[i]), float(money[j]), rng.uniform())
        self.step_count += 1
        return i, j

    def advance(self, n_steps: int, rng: RngStream) -> None:
        if len(self) < 2:
            raise ConfigurationError(f"stepping needs at least 2 agents, got {len(self)}", ["n_agents"])
        if n_steps <= 0:
            return
        advance_exchange(self.money, self.model.saving_fraction, rng, n_steps)
        self.step_count += n_steps

    def snapshot(self, index: int) -> Snapshot:
        return Snapshot(step=index, money=self.money.copy())

    @property
    def total_money(self) -> float:
        return math.fsum(self.money.tolist())


def run_reference(
    model: ReferenceModel,
    n: int,
    mean_money: float,
    n_sweeps: int,
    rng: RngStream,
    snapshot_sweeps: Sequence[int] = (),
    progress: Optional[IProgressReporter] = None,
) -> Tuple[np.ndarray, SnapshotSeries]:
    """Start every agent at mean_money and run n_sweeps * n encounters."""
    if n < 2:
        raise ConfigurationError(f"n_agents must be at least 2, got {n}", ["n_agents"])
    if not mean_money > 0:
        raise ConfigurationError(f"mean money must be positive, got {mean_money}", ["total_money"])
    if n_sweeps < 0:
        raise ConfigurationError("n_sweeps must be nonnegative", ["n_sweeps"])

    population = MoneyPopulation(money=np.full(n, float(mean_money)), model=model)
    series = run(population, n_sweeps * n, [s * n for s in snapshot_sweeps], rng, progress)
    final = population.money.copy()
    drift = abs(population.total_money - n * mean_money) / (n * mean_money)
    logger.debug("%s: %d sweeps, relative money drift %.3e", model.label, n_sweeps, drift)
    return final, series
