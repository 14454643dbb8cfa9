"""kinex: deterministic kinetic-economy simulator with reference exchange models and distribution fits."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigParseError,
    ConfigurationError,
    DegenerateFitError,
    InsufficientDataError,
    KinexError,
    OutputError,
    UsageError,
)
from .kinetic import (  # noqa: E402
    Agent,
    EncounterOutcome,
    Population,
    SnapshotSeries,
    agent_wealth,
    attempt_trade,
    init_population,
    population_totals,
    run,
    step,
)
from .models import ExperimentConfig, ModelKind, RunManifest  # noqa: E402
from .rng import RngStream  # noqa: E402

__all__ = [
    "__version__",
    "Agent",
    "ConfigParseError",
    "ConfigurationError",
    "DegenerateFitError",
    "EncounterOutcome",
    "ExperimentConfig",
    "InsufficientDataError",
    "KinexError",
    "ModelKind",
    "OutputError",
    "Population",
    "RngStream",
    "RunManifest",
    "SnapshotSeries",
    "UsageError",
    "agent_wealth",
    "attempt_trade",
    "init_population",
    "population_totals",
    "run",
    "step",
]
