"""
Buyer-model kinetic economy.

Agents hold goods b, money d and a private price perception h. Pairs meet at random;
the buyer takes one unit at the seller's price h when that price is not above its own
perception, or at any price when it holds no goods, provided it can pay. The buyer
then adopts the transaction price. Money and goods are conserved, h is not.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import ConfigurationError, UsageError
from .kernels import advance_buyer
from .progress import IProgressReporter
from .rng import RngStream

logger = logging.getLogger(__name__)

DEFAULT_H_RANGE: Tuple[float, float] = (0.5, 1.5)

# progress granularity of run(); each chunk is one compiled call
SWEEPS_PER_CHUNK = 10


# ======================================================================================
# DOMAIN TYPES
# ======================================================================================

@dataclass(slots=True)
class Agent:
    b: int
    d: float
    h: float

    @property
    def wealth(self) -> float:
        return agent_wealth(self)


@dataclass(frozen=True)
class EncounterOutcome:
    """Result of one buyer/seller meeting."""
    buyer_index: int
    seller_index: int
    traded: bool
    forced: bool = False  # bought above own h because it held no goods
    price: Optional[float] = None
    quantity: int = 0


@dataclass(frozen=True)
class Totals:
    goods: int
    money: float
    wealth: float


@dataclass(frozen=True)
class Snapshot:
    """Copy of per-agent state taken after `step` encounters of a run."""
    step: int
    money: np.ndarray
    goods: Optional[np.ndarray] = None
    price: Optional[np.ndarray] = None

    @property
    def wealth(self) -> np.ndarray:
        if self.goods is None or self.price is None:
            return self.money.copy()
        return self.money + self.price * self.goods

    def price_support(self) -> Set[float]:
        """Distinct price perceptions present in the snapshot."""
        if self.price is None:
            raise UsageError("snapshot carries no prices")
        return set(self.price.tolist())

    def zero_goods_fraction(self) -> float:
        if self.goods is None:
            raise UsageError("snapshot carries no goods")
        return float(np.count_nonzero(self.goods == 0)) / len(self.goods)

    def to_bytes(self) -> bytes:
        parts = [int(self.step).to_bytes(8, "little"), self.money.tobytes()]
        if self.goods is not None:
            parts.append(self.goods.tobytes())
        if self.price is not None:
            parts.append(self.price.tobytes())
        return b"".join(parts)


@dataclass
class SnapshotSeries:
    snapshots: List[Snapshot] = field(default_factory=list)

    def append(self, snapshot: Snapshot) -> None:
        self.snapshots.append(snapshot)

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self) -> Iterator[Snapshot]:
        return iter(self.snapshots)

    def __getitem__(self, index: int) -> Snapshot:
        return self.snapshots[index]

    def to_bytes(self) -> bytes:
        return b"".join(s.to_bytes() for s in self.snapshots)


class IKineticSystem(ABC):
    """Stepping interface shared by the buyer model and the money-exchange models."""

    step_count: int

    @abstractmethod
    def __len__(self) -> int:
        pass

    @abstractmethod
    def step(self, rng: RngStream) -> object:
        pass

    @abstractmethod
    def advance(self, n_steps: int, rng: RngStream) -> None:
        """Perform n_steps encounters; same end state and RNG position as n_steps calls to step."""

    @abstractmethod
    def snapshot(self, index: int) -> Snapshot:
        pass


@dataclass(eq=False)
class Population(IKineticSystem):
    """Agent state held column-wise: goods b, money d and price perception h."""
    goods: np.ndarray
    money: np.ndarray
    price: np.ndarray
    total_goods: int
    total_money: float
    step_count: int = 0
    trade_count: int = 0
    forced_count: int = 0

    @classmethod
    def from_agents(cls, agents: Sequence[Agent]) -> "Population":
        goods = np.array([a.b for a in agents], dtype=np.int64)
        money = np.array([a.d for a in agents], dtype=np.float64)
        return cls(
            goods=goods,
            money=money,
            price=np.array([a.h for a in agents], dtype=np.float64),
            total_goods=int(goods.sum()),
            total_money=math.fsum(money),
        )

    def __len__(self) -> int:
        return len(self.goods)

    def agent(self, index: int) -> Agent:
        return Agent(b=int(self.goods[index]), d=float(self.money[index]), h=float(self.price[index]))

    @property
    def agents(self) -> List[Agent]:
        """Copies of the current agent states."""
        return [Agent(b=b, d=d, h=h) for b, d, h in zip(self.goods.tolist(), self.money.tolist(), self.price.tolist())]

    def step(self, rng: RngStream) -> EncounterOutcome:
        return step(self, rng)

    def advance(self, n_steps: int, rng: RngStream) -> None:
        if len(self) < 2:
            raise ConfigurationError(f"stepping needs at least 2 agents, got {len(self)}", ["n_agents"])
        if n_steps <= 0:
            return
        trades, forced = advance_buyer(self.goods, self.money, self.price, rng, n_steps)
        self.step_count += n_steps
        self.trade_count += trades
        self.forced_count += forced

    def snapshot(self, index: int) -> Snapshot:
        return Snapshot(step=index, money=self.money.copy(), goods=self.goods.copy(), price=self.price.copy())


# ======================================================================================
# OPERATIONS
# ======================================================================================

def init_population(
    n: int,
    total_goods: int,
    total_money: float,
    rng: RngStream,
    h_range: Tuple[float, float] = DEFAULT_H_RANGE,
) -> Population:
    """
    Equal endowments: goods split as evenly as possible (remainder to the lowest
    indices), money split exactly equally, h drawn uniformly from h_range in agent order.
    """
    h_min, h_max = h_range
    if n < 2:
        raise ConfigurationError(f"n_agents must be at least 2, got {n}", ["n_agents"])
    if total_goods < 0:
        raise ConfigurationError("total_goods must be nonnegative", ["total_goods"])
    if total_money < 0:
        raise ConfigurationError("total_money must be nonnegative", ["total_money"])
    if not 0 < h_min <= h_max:
        raise ConfigurationError(
            f"h range must satisfy 0 < h_min <= h_max, got [{h_min}, {h_max}]", ["h_min", "h_max"]
        )

    base, remainder = divmod(int(total_goods), n)
    goods = np.full(n, base, dtype=np.int64)
    goods[:remainder] += 1
    span = h_max - h_min
    price = np.array([h_min + span * rng.uniform() for _ in range(n)], dtype=np.float64)
    logger.debug("Initialized %d agents: goods=%d money=%s", n, total_goods, total_money)
    return Population(
        goods=goods,
        money=np.full(n, total_money / n, dtype=np.float64),
        price=price,
        total_goods=int(total_goods),
        total_money=float(total_money),
    )


def _trade(population: Population, buyer: int, seller: int) -> EncounterOutcome:
    goods, money, price = population.goods, population.money, population.price
    p = float(price[seller])
    own = float(price[buyer])
    if goods[seller] >= 1 and money[buyer] >= p and (p <= own or goods[buyer] == 0):
        money[buyer] -= p
        money[seller] += p
        goods[buyer] += 1
        goods[seller] -= 1
        price[buyer] = p
        return EncounterOutcome(buyer, seller, True, p > own, p, 1)
    return EncounterOutcome(buyer, seller, False)


def attempt_trade(population: Population, buyer: int, seller: int) -> EncounterOutcome:
    """Apply the buyer rule to one ordered pair. Consumes no randomness."""
    n = len(population)
    if not (0 <= buyer < n and 0 <= seller < n):
        raise UsageError(f"agent indices out of range: buyer={buyer}, seller={seller}, n={n}")
    if buyer == seller:
        raise UsageError(f"buyer and seller must differ, got {buyer} twice")
    return _trade(population, buyer, seller)


def draw_pair(n: int, rng: RngStream) -> Tuple[int, int]:
    """Uniform ordered pair of distinct indices; exactly two draws, buyer first."""
    first = rng.below(n)
    second = rng.below(n - 1)
    if second >= first:
        second += 1
    return first, second


def step(population: Population, rng: RngStream) -> EncounterOutcome:
    n = len(population)
    if n < 2:
        raise ConfigurationError(f"stepping needs at least 2 agents, got {n}", ["n_agents"])
    buyer, seller = draw_pair(n, rng)
    outcome = _trade(population, buyer, seller)
    population.step_count += 1
    if outcome.traded:
        population.trade_count += 1
        if outcome.forced:
            population.forced_count += 1
    return outcome


def validate_snapshot_steps(snapshot_at: Sequence[int], n_steps: int) -> List[int]:
    targets = [int(s) for s in snapshot_at]
    if n_steps < 0:
        raise ConfigurationError("n_steps must be nonnegative", ["n_steps"])
    for prev, cur in zip(targets, targets[1:]):
        if cur <= prev:
            raise ConfigurationError(
                f"snapshot indices must be strictly increasing, got {prev} then {cur}", ["snapshot_at"]
            )
    if targets and (targets[0] < 0 or targets[-1] > n_steps):
        raise ConfigurationError(f"snapshot indices must lie in [0, {n_steps}]", ["snapshot_at"])
    return targets


def run(
    system: IKineticSystem,
    n_steps: int,
    snapshot_at: Sequence[int],
    rng: RngStream,
    progress: Optional[IProgressReporter] = None,
) -> SnapshotSeries:
    """
    Perform n_steps encounters. Index 0 captures the state before the first step,
    index k the state right after the k-th step.
    """
    targets = validate_snapshot_steps(snapshot_at, n_steps)
    series = SnapshotSeries()
    pending = iter(targets)
    next_target = next(pending, None)
    if next_target == 0:
        series.append(system.snapshot(0))
        next_target = next(pending, None)

    chunk = max(len(system), 1) * SWEEPS_PER_CHUNK
    done = 0
    while done < n_steps:
        stop = min(n_steps, done + chunk)
        if next_target is not None and next_target < stop:
            stop = next_target
        system.advance(stop - done, rng)
        if progress is not None:
            progress.update(stop - done)
        done = stop
        if next_target == done:
            series.append(system.snapshot(done))
            next_target = next(pending, None)
    return series


def agent_wealth(agent: Agent) -> float:
    """Money plus goods valued at the agent's own price perception."""
    return agent.d + agent.h * agent.b


def population_totals(population: Population) -> Totals:
    money = population.money.tolist()
    return Totals(
        goods=int(population.goods.sum()),
        money=math.fsum(money),
        wealth=math.fsum(d + h * b for b, d, h in zip(population.goods.tolist(), money, population.price.tolist())),
    )
