"""
Figure-family runners. Each runner simulates, analyses and writes its outputs through
an IResultSink, then finishes with manifest.json. Independent runs draw from distinct
streams of the master seed (stream id = position in the ratio or model list), so
parallel and sequential execution give identical files.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..analysis import (
    Histogram,
    exponential_cdf,
    fit_exponential,
    fit_pareto_hill,
    ks_distance,
    make_ccdf,
    make_histogram,
    resolve_window,
    select_xmin,
    summarize_demand,
    tail_thinning_index,
)
from ..errors import ConfigurationError, KinexError, UsageError
from ..kinetic import Population, Snapshot, SnapshotSeries, Totals, init_population, population_totals, run
from ..models import ComparisonRow, ExperimentConfig, ModelKind, RunManifest
from ..progress import IProgressReporter, SilentProgress
from ..reference import ReferenceModel, run_reference
from ..rng import RngStream
from .sinks import DirectorySink, IResultSink, read_csv

logger = logging.getLogger(__name__)

# money:goods label -> goods/money ratio
PRICE_PRESETS: Dict[str, float] = {"1:1": 1.0, "100:1": 0.01}

WEALTH_COLUMNS = ["agent_id", "b", "d", "h", "wealth"]
HIST_COLUMNS = ["bin_left", "bin_right", "count", "density"]
DEMAND_COLUMNS = ["ratio", "mean_price", "std_price", "n_agents", "n_sweeps", "seed"]


# ======================================================================================
# SIMULATION HELPERS
# ======================================================================================

@dataclass
class BuyerRun:
    population: Population
    series: SnapshotSeries
    initial_totals: Totals


def simulate_buyer(
    config: ExperimentConfig,
    stream_id: int = 0,
    snapshot_sweeps: Sequence[int] = (),
    progress: Optional[IProgressReporter] = None,
) -> BuyerRun:
    rng = RngStream(config.seed, stream_id)
    population = init_population(config.n_agents, config.total_goods, config.total_money, rng, config.h_range)
    initial = population_totals(population)
    n = config.n_agents
    total = config.n_sweeps * n
    if progress is not None:
        progress.start(total, f"buyer ratio={config.ratio:g}")
    try:
        series = run(population, total, [s * n for s in snapshot_sweeps], rng, progress)
    finally:
        if progress is not None:
            progress.close()
    return BuyerRun(population, series, initial)


def reference_model(config: ExperimentConfig) -> ReferenceModel:
    if config.model == ModelKind.CC:
        return ReferenceModel.cc(config.saving)
    return ReferenceModel.dy()


def simulate_reference(
    config: ExperimentConfig,
    stream_id: int = 0,
    snapshot_sweeps: Sequence[int] = (),
    progress: Optional[IProgressReporter] = None,
) -> SnapshotSeries:
    model = reference_model(config)
    if progress is not None:
        progress.start(config.n_sweeps * config.n_agents, model.label)
    try:
        _, series = run_reference(
            model, config.n_agents, config.mean_money, config.n_sweeps,
            RngStream(config.seed, stream_id), snapshot_sweeps, progress,
        )
    finally:
        if progress is not None:
            progress.close()
    return series


def stationary_sweeps(config: ExperimentConfig) -> List[int]:
    """Evenly spaced sweeps from the end of burn-in to the final sweep, inclusive."""
    points = np.linspace(config.burn_in_sweeps, config.n_sweeps, config.time_average_points)
    return sorted({int(round(p)) for p in points})


def sample_sweeps(config: ExperimentConfig) -> List[int]:
    if config.wealth_sampling == "time_averaged":
        return stationary_sweeps(config)
    return [config.n_sweeps]


def snapshot_frame(snapshot: Snapshot) -> pd.DataFrame:
    n = len(snapshot.money)
    goods = snapshot.goods if snapshot.goods is not None else np.zeros(n, dtype=np.int64)
    price = snapshot.price if snapshot.price is not None else np.full(n, np.nan)
    return pd.DataFrame({
        "agent_id": np.arange(n, dtype=np.int64),
        "b": goods,
        "d": snapshot.money,
        "h": price,
        "wealth": snapshot.wealth,
    }, columns=WEALTH_COLUMNS)


def collect_wealth(
    config: ExperimentConfig,
    stream_id: int = 0,
    progress: Optional[IProgressReporter] = None,
) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    """Per-agent samples at the sampling sweeps, plus run bookkeeping."""
    sweeps = sample_sweeps(config)
    extras: Dict[str, Any] = {"model": config.model.value}
    if config.model == ModelKind.BUYER:
        result = simulate_buyer(config, stream_id, sweeps, progress)
        series = result.series
        pop = result.population
        final = population_totals(pop)
        extras.update(
            encounters=pop.step_count,
            trades=pop.trade_count,
            forced_trades=pop.forced_count,
            forced_fraction=pop.forced_count / pop.trade_count if pop.trade_count else 0.0,
            initial_goods=result.initial_totals.goods,
            final_goods=final.goods,
            initial_money=result.initial_totals.money,
            final_money=final.money,
            initial_wealth=result.initial_totals.wealth,
            final_wealth=final.wealth,
        )
    else:
        series = simulate_reference(config, stream_id, sweeps, progress)
        extras.update(encounters=config.n_sweeps * config.n_agents, saving=(
            config.saving if config.model == ModelKind.CC else None))
    frame = pd.concat([snapshot_frame(s) for s in series], ignore_index=True)
    return frame, extras


def _map_jobs(fn: Callable, jobs: List[Any], workers: int) -> List[Any]:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))


def _stationary_prices_job(job: Tuple[ExperimentConfig, int]) -> np.ndarray:
    config, stream_id = job
    result = simulate_buyer(config, stream_id, stationary_sweeps(config))
    return np.concatenate([s.price for s in result.series])


def _final_values_job(job: Tuple[ExperimentConfig, int]) -> np.ndarray:
    config, stream_id = job
    frame, _ = collect_wealth(config.model_copy(update={"wealth_sampling": "final"}), stream_id)
    return frame["wealth"].to_numpy()


# ======================================================================================
# DISTRIBUTION OUTPUTS
# ======================================================================================

def _linear_range(values: np.ndarray) -> Tuple[float, float]:
    lo = min(0.0, float(values.min())) if values.size else 0.0
    hi = float(np.nextafter(values.max(), np.inf)) if values.size else 1.0
    return (lo, hi if hi > lo else lo + 1.0)


def _log_range(values: np.ndarray) -> Optional[Tuple[float, float]]:
    positive = values[values > 0]
    if positive.size == 0:
        return None
    lo = float(positive.min())
    hi = float(np.nextafter(positive.max(), np.inf))
    return (lo, hi if hi > lo else lo * 10.0)


def hist_frame(hist: Histogram) -> pd.DataFrame:
    return pd.DataFrame({
        "bin_left": hist.bin_edges[:-1],
        "bin_right": hist.bin_edges[1:],
        "count": hist.counts,
        "density": hist.density,
    }, columns=HIST_COLUMNS)


def compute_fits(values: np.ndarray, config: ExperimentConfig) -> Dict[str, Any]:
    """Thermal fit, Hill tail and thinning index. Fit failures are recorded, not raised."""
    fits: Dict[str, Any] = {"n_samples": int(values.size), "wealth_mean": float(np.mean(values))}
    window = resolve_window(values, config.thermal_window, config.window_quantiles)

    exp_fit = None
    try:
        exp_fit = fit_exponential(values, window, n_bins=config.fit_bins)
        fits.update(exp_fit.model_dump())
    except KinexError as e:
        fits.update(window_lo=window[0], window_hi=window[1], exponential_error=str(e))
        logger.warning("Exponential fit failed: %s", e)

    positive = values[values > 0]
    try:
        if config.xmin_search:
            candidates = np.unique(np.quantile(positive, np.linspace(0.5, 0.99, 50)))
            pareto = select_xmin(positive, candidates)
        else:
            pareto = fit_pareto_hill(positive, config.pareto_xmin or window[1])
        fits.update(alpha=pareto.alpha, xmin=pareto.xmin, n_tail=pareto.n_tail, pareto_ks=pareto.ks_distance)
    except KinexError as e:
        fits["pareto_error"] = str(e)
        logger.warning("Pareto fit failed: %s", e)

    probe = config.tail_probe if config.tail_probe is not None else window[1] + 0.5 * (window[1] - window[0])
    fits["probe"] = probe
    fits["tail_thinning_index"] = None
    if exp_fit is not None:
        try:
            fits["tail_thinning_index"] = tail_thinning_index(values, exp_fit, probe)
        except KinexError as e:
            fits["thinning_error"] = str(e)
    return fits


def write_distribution_outputs(
    sink: IResultSink, values: np.ndarray, config: ExperimentConfig, prefix: str = ""
) -> Dict[str, Any]:
    ccdf = make_ccdf(values)
    sink.write_csv(prefix + "wealth_ccdf.csv", pd.DataFrame({"x": ccdf.x, "ccdf": ccdf.y}))
    linear = make_histogram(values, "linear", config.hist_bins, _linear_range(values))
    sink.write_csv(prefix + "wealth_hist_linear.csv", hist_frame(linear))
    log_range = _log_range(values)
    if log_range is not None:
        log_frame = hist_frame(make_histogram(values, "log", config.hist_bins, log_range))
    else:
        log_frame = pd.DataFrame(columns=HIST_COLUMNS)
    sink.write_csv(prefix + "wealth_hist_log.csv", log_frame)
    return compute_fits(values, config)


# ======================================================================================
# RUNNERS
# ======================================================================================

class ExperimentRunner:
    """
    Orchestrates one experiment: simulation, analysis, file output and the closing
    manifest. A manifest is only written once every other output succeeded.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        sink: Optional[IResultSink] = None,
        ui: Optional[IProgressReporter] = None,
    ):
        self.config = config
        self.sink = sink if sink is not None else DirectorySink(config.output_dir)
        self.ui = ui if ui is not None else SilentProgress()

    def _execute(self, experiment: str, body: Callable[[], None]) -> RunManifest:
        started = time.perf_counter()
        self.ui.log_info(f"Running {experiment} (seed={self.config.seed}, n={self.config.n_agents})")
        body()
        manifest = self.sink.finalize(experiment, self.config, time.perf_counter() - started)
        self.ui.log_info(f"{experiment} done: {len(manifest.files)} files in {manifest.duration_seconds:.1f}s")
        return manifest

    @property
    def _progress(self) -> Optional[IProgressReporter]:
        return self.ui if self.config.workers <= 1 else None

    # ---- wealth distribution ----
    def wealth(self) -> RunManifest:
        def body():
            frame, extras = collect_wealth(self.config, 0, self.ui)
            self.sink.write_csv("wealth_samples.csv", frame)
            fits = write_distribution_outputs(self.sink, frame["wealth"].to_numpy(), self.config)
            fits.update(extras)
            self.sink.write_json("fits.json", fits)
        return self._execute("wealth", body)

    def wealth_family(self) -> RunManifest:
        def body():
            family = []
            for stream_id, ratio in enumerate(self.config.ratios):
                cfg = self.config.with_ratio(ratio)
                prefix = f"ratio_{ratio:g}/"
                frame, extras = collect_wealth(cfg, stream_id, self.ui)
                self.sink.write_csv(prefix + "wealth_samples.csv", frame)
                values = frame["wealth"].to_numpy()
                fits = write_distribution_outputs(self.sink, values, cfg, prefix)
                fits.update(extras, ratio=ratio)
                self.sink.write_json(prefix + "fits.json", fits)
                ccdf = make_ccdf(values)
                family.append(pd.DataFrame({"ratio": ratio, "x": ccdf.x, "ccdf": ccdf.y}))
            self.sink.write_csv("wealth_ccdf_family.csv", pd.concat(family, ignore_index=True))
        return self._execute("wealth_family", body)

    # ---- price evolution ----
    def price_evolution(self) -> RunManifest:
        config = self.config
        if config.model != ModelKind.BUYER:
            raise ConfigurationError("price evolution needs the buyer model", ["model"])
        if not config.snapshot_sweeps:
            raise ConfigurationError("price evolution needs at least one snapshot sweep", ["snapshot_sweeps"])

        def body():
            result = simulate_buyer(config, 0, config.snapshot_sweeps, self.ui)
            value_range = (config.h_min, float(np.nextafter(config.h_max, np.inf)))
            summary = []
            for snap in result.series:
                sweep = snap.step // config.n_agents
                hist = make_histogram(snap.price, "linear", config.hist_bins, value_range)
                self.sink.write_csv(f"price_hist_t{sweep}.csv", hist_frame(hist))
                summary.append({
                    "sweep": sweep,
                    "mean_h": float(np.mean(snap.price)),
                    "std_h": float(np.std(snap.price)),
                    "n_distinct_h": len(snap.price_support()),
                    "zero_goods_fraction": snap.zero_goods_fraction(),
                })
            self.sink.write_csv("price_summary.csv", pd.DataFrame(summary))
        return self._execute("price_evolution", body)

    # ---- demand curve ----
    def demand_sweep(self) -> RunManifest:
        config = self.config
        if len(config.ratios) < 2:
            raise ConfigurationError("a demand sweep needs at least 2 ratios", ["ratios"])
        if config.model != ModelKind.BUYER:
            raise ConfigurationError("a demand sweep needs the buyer model", ["model"])

        def body():
            jobs = [(config.with_ratio(r), i) for i, r in enumerate(config.ratios)]
            prices = _map_jobs(_stationary_prices_job, jobs, config.workers)
            points = summarize_demand(list(zip(config.ratios, prices)))
            frame = pd.DataFrame([{
                "ratio": p.ratio,
                "mean_price": p.mean_price,
                "std_price": p.std_price,
                "n_agents": config.n_agents,
                "n_sweeps": config.n_sweeps,
                "seed": config.seed,
            } for p in points], columns=DEMAND_COLUMNS)
            self.sink.write_csv("demand_curve.csv", frame)
        return self._execute("demand_sweep", body)

    # ---- model comparison ----
    def comparison(self) -> RunManifest:
        config = self.config

        def body():
            variants = [
                config.model_copy(update={"model": ModelKind.BUYER}),
                config.model_copy(update={"model": ModelKind.DY}),
                config.model_copy(update={"model": ModelKind.CC}),
            ]
            jobs = [(cfg, i) for i, cfg in enumerate(variants)]
            samples = _map_jobs(_final_values_job, jobs, config.workers)
            rows = [comparison_row(cfg, values).model_dump() for cfg, values in zip(variants, samples)]
            self.sink.write_csv("comparison.csv", pd.DataFrame(rows, columns=list(ComparisonRow.model_fields)))
        return self._execute("comparison", body)

    # ---- re-analysis of an earlier run ----
    def analyze(self, samples_path: str) -> RunManifest:
        def body():
            frame = read_csv(samples_path)
            if "wealth" not in frame.columns:
                raise UsageError(f"{samples_path} has no 'wealth' column")
            values = frame["wealth"].to_numpy(dtype=np.float64)
            if values.size == 0:
                raise UsageError(f"{samples_path} has no samples")
            fits = write_distribution_outputs(self.sink, values, self.config)
            fits["source"] = samples_path
            self.sink.write_json("fits.json", fits)
        return self._execute("analyze", body)


def comparison_row(config: ExperimentConfig, values: np.ndarray) -> ComparisonRow:
    """Full-range thermal fit, KS to it, Hill tail (buyer only) and thinning index."""
    kind = config.model
    param = {ModelKind.BUYER: config.ratio, ModelKind.DY: None, ModelKind.CC: config.saving}[kind]
    row = ComparisonRow(model=kind.value, param=param)
    try:
        full = fit_exponential(values, (0.0, float("inf")), n_bins=config.fit_bins)
        row.T = full.temperature
        row.ks = ks_distance(values, exponential_cdf(full.temperature))
    except KinexError as e:
        logger.warning("%s: thermal fit failed: %s", kind.value, e)

    window = resolve_window(values, config.thermal_window if kind == ModelKind.BUYER else None,
                            config.window_quantiles)
    try:
        windowed = fit_exponential(values, window, n_bins=config.fit_bins)
        probe = config.tail_probe if config.tail_probe is not None else window[1] + 0.5 * (window[1] - window[0])
        row.thinning_index = tail_thinning_index(values, windowed, probe)
    except KinexError as e:
        logger.warning("%s: thinning index unavailable: %s", kind.value, e)

    if kind == ModelKind.BUYER:
        try:
            row.alpha = fit_pareto_hill(values[values > 0], config.pareto_xmin or window[1]).alpha
        except KinexError as e:
            logger.warning("buyer: Hill fit failed: %s", e)
    return row


def run_wealth_experiment(config: ExperimentConfig, sink: Optional[IResultSink] = None,
                          ui: Optional[IProgressReporter] = None) -> RunManifest:
    return ExperimentRunner(config, sink, ui).wealth()


def run_wealth_family(config: ExperimentConfig, sink: Optional[IResultSink] = None,
                      ui: Optional[IProgressReporter] = None) -> RunManifest:
    return ExperimentRunner(config, sink, ui).wealth_family()


def run_price_evolution(config: ExperimentConfig, sink: Optional[IResultSink] = None,
                        ui: Optional[IProgressReporter] = None) -> RunManifest:
    return ExperimentRunner(config, sink, ui).price_evolution()


def run_demand_sweep(config: ExperimentConfig, sink: Optional[IResultSink] = None,
                     ui: Optional[IProgressReporter] = None) -> RunManifest:
    return ExperimentRunner(config, sink, ui).demand_sweep()


def run_comparison(config: ExperimentConfig, sink: Optional[IResultSink] = None,
                   ui: Optional[IProgressReporter] = None) -> RunManifest:
    return ExperimentRunner(config, sink, ui).comparison()


def analyze_wealth_samples(samples_path: str, config: ExperimentConfig, sink: Optional[IResultSink] = None,
                           ui: Optional[IProgressReporter] = None) -> RunManifest:
    return ExperimentRunner(config, sink, ui).analyze(samples_path)


def preset_config(config: ExperimentConfig, preset: str) -> ExperimentConfig:
    if preset not in PRICE_PRESETS:
        raise ConfigurationError(f"unknown preset '{preset}', choose from {sorted(PRICE_PRESETS)}", ["preset"])
    return config.with_ratio(PRICE_PRESETS[preset])
