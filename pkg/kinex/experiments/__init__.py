from .runners import (
    PRICE_PRESETS,
    ExperimentRunner,
    analyze_wealth_samples,
    preset_config,
    run_comparison,
    run_demand_sweep,
    run_price_evolution,
    run_wealth_experiment,
    run_wealth_family,
)
from .sinks import DirectorySink, IResultSink, read_csv

__all__ = [
    "PRICE_PRESETS",
    "DirectorySink",
    "ExperimentRunner",
    "IResultSink",
    "analyze_wealth_samples",
    "preset_config",
    "read_csv",
    "run_comparison",
    "run_demand_sweep",
    "run_price_evolution",
    "run_wealth_experiment",
    "run_wealth_family",
]
