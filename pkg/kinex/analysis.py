"""
Empirical distributions and fits for price, money and wealth samples.

All functions are pure and work on anything numpy can turn into a float array.
CCDF convention is inclusive: C(x) = P(X >= x).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, stats

from .errors import DegenerateFitError, InsufficientDataError, UsageError
from .models import DemandPoint, ExponentialFit, ParetoFit

logger = logging.getLogger(__name__)

Binning = Literal["linear", "log"]


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    binning: str
    underflow: int = 0
    overflow: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    @property
    def centers(self) -> np.ndarray:
        if self.binning == "log":
            return np.sqrt(self.bin_edges[:-1] * self.bin_edges[1:])
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def density(self) -> np.ndarray:
        """Counts per unit width, normalized by the full sample size."""
        total = self.total
        widths = np.diff(self.bin_edges)
        if total == 0:
            return np.zeros_like(widths)
        return self.counts / (total * widths)


@dataclass(frozen=True)
class Ccdf:
    """Inclusive complementary CDF over the sorted sample."""
    sorted_values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.sorted_values)

    @property
    def x(self) -> np.ndarray:
        return np.unique(self.sorted_values)

    @property
    def y(self) -> np.ndarray:
        return self(self.x)

    def __call__(self, x):
        at_or_above = self.n - np.searchsorted(self.sorted_values, x, side="left")
        return at_or_above / self.n


def _as_array(values: Sequence[float]) -> np.ndarray:
    return np.asarray(values, dtype=np.float64)


def make_histogram(
    values: Sequence[float],
    binning: Binning,
    n_bins: int,
    value_range: Tuple[float, float],
) -> Histogram:
    """Half-open bins [e_k, e_k+1); values below lo underflow, values >= hi overflow."""
    lo, hi = value_range
    if n_bins < 1:
        raise UsageError(f"n_bins must be at least 1, got {n_bins}")
    if not lo < hi:
        raise UsageError(f"histogram range needs lo < hi, got [{lo}, {hi})")
    if binning == "linear":
        edges = np.linspace(lo, hi, n_bins + 1)
    elif binning == "log":
        if lo <= 0:
            raise UsageError(f"log binning needs a positive lower edge, got {lo}")
        edges = np.geomspace(lo, hi, n_bins + 1)
    else:
        raise UsageError(f"unknown binning '{binning}'")

    data = _as_array(values)
    underflow = int(np.count_nonzero(data < lo))
    overflow = int(np.count_nonzero(data >= hi))
    inside = data[(data >= lo) & (data < hi)]
    idx = np.searchsorted(edges, inside, side="right") - 1
    idx = np.clip(idx, 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins).astype(np.int64)
    return Histogram(bin_edges=edges, counts=counts, binning=binning, underflow=underflow, overflow=overflow)


def make_ccdf(values: Sequence[float]) -> Ccdf:
    data = _as_array(values)
    if data.size == 0:
        raise UsageError("cannot build a CCDF from an empty sample")
    return Ccdf(np.sort(data))


def ks_distance(values: Sequence[float], model_cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """
    Kolmogorov-Smirnov distance sup|F_n - F|, checked on both sides of every
    empirical step. The model's left limit at a step is taken one ulp below it,
    so step-shaped model CDFs are compared correctly.
    """
    data = _as_array(values)
    if data.size == 0:
        raise UsageError("KS distance needs at least one sample")
    n = data.size
    sorted_values = np.sort(data)
    points = np.unique(sorted_values)
    below = np.searchsorted(sorted_values, points, side="left") / n
    at_or_below = np.searchsorted(sorted_values, points, side="right") / n
    model_at = np.asarray(model_cdf(points), dtype=np.float64)
    model_left = np.asarray(model_cdf(np.nextafter(points, -np.inf)), dtype=np.float64)
    return float(max(np.max(np.abs(at_or_below - model_at)), np.max(np.abs(below - model_left))))


def exponential_cdf(temperature: float, offset: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
    def cdf(x):
        excess = np.maximum(np.asarray(x, dtype=np.float64) - offset, 0.0)
        return -np.expm1(-excess / temperature)
    return cdf


def pareto_cdf(alpha: float, xmin: float) -> Callable[[np.ndarray], np.ndarray]:
    def cdf(x):
        x = np.asarray(x, dtype=np.float64)
        ratio = np.where(x < xmin, 1.0, x / xmin)
        return np.where(x < xmin, 0.0, 1.0 - ratio ** (1.0 - alpha))
    return cdf


def _truncated_temperature(mean_excess: float, width: float) -> Optional[float]:
    """
    Solve m = T - L / (exp(L/T) - 1) for T: the MLE temperature of an exponential
    truncated to [0, L]. No finite solution exists once m >= L/2 (flat or rising density).
    """
    if not math.isfinite(width) or mean_excess <= 0 or mean_excess >= width / 2:
        return None

    def gap(t: float) -> float:
        return t - width / math.expm1(width / t) - mean_excess

    lo, hi = mean_excess, 2.0 * mean_excess
    for _ in range(200):
        if gap(hi) > 0:
            break
        hi *= 2.0
    else:
        return None
    return float(optimize.brentq(gap, lo, hi, xtol=1e-12, rtol=1e-12))


def _loglinear_r_squared(window_values: np.ndarray, lo: float, hi: float, n_bins: int) -> float:
    if not hi > lo:
        return 0.0
    hist = make_histogram(window_values, "linear", n_bins, (lo, np.nextafter(hi, np.inf)))
    mask = hist.counts > 0
    if np.count_nonzero(mask) < 3:
        return 0.0
    widths = np.diff(hist.bin_edges)[mask]
    log_density = np.log(hist.counts[mask] / widths)
    fit = stats.linregress(hist.centers[mask], log_density)
    return float(fit.rvalue ** 2)


def fit_exponential(
    values: Sequence[float],
    window: Tuple[float, float],
    n_bins: int = 20,
    min_samples: int = 10,
) -> ExponentialFit:
    """
    Mean-excess temperature over samples inside [w_lo, w_hi]. The window's upper edge
    may be infinite. r^2 comes from a line through (bin center, ln density) of a linear
    histogram restricted to the window, empty bins excluded.
    """
    w_lo, w_hi = window
    if not w_lo < w_hi:
        raise UsageError(f"fit window needs lo < hi, got [{w_lo}, {w_hi}]")
    data = _as_array(values)
    inside = data[(data >= w_lo) & (data <= w_hi)]
    if inside.size < min_samples:
        raise InsufficientDataError("too few samples inside the thermal window", min_samples, int(inside.size))
    temperature = float(np.mean(inside - w_lo))
    if not temperature > 0:
        raise DegenerateFitError(f"zero temperature: every in-window sample sits at {w_lo}")

    hist_hi = w_hi if math.isfinite(w_hi) else float(inside.max())
    corrected = _truncated_temperature(temperature, w_hi - w_lo) if math.isfinite(w_hi) else temperature
    return ExponentialFit(
        temperature=temperature,
        temperature_corrected=corrected,
        window_lo=float(w_lo),
        window_hi=float(w_hi),
        n_in_window=int(inside.size),
        r_squared_loglinear=_loglinear_r_squared(inside, w_lo, hist_hi, n_bins),
    )


def fit_pareto_hill(values: Sequence[float], xmin: float, min_tail: int = 10) -> ParetoFit:
    """alpha = 1 + n_tail / sum(ln(v / xmin)) over v > xmin."""
    if not xmin > 0:
        raise UsageError(f"xmin must be positive, got {xmin}")
    data = _as_array(values)
    if np.any(data <= 0):
        raise UsageError("Hill estimator needs strictly positive samples")
    tail = data[data > xmin]
    if tail.size < min_tail:
        raise InsufficientDataError(f"too few samples above xmin={xmin}", min_tail, int(tail.size))
    log_sum = math.fsum(np.log(tail / xmin))
    alpha = 1.0 + tail.size / log_sum
    return ParetoFit(alpha=alpha, xmin=float(xmin), n_tail=int(tail.size))


def select_xmin(values: Sequence[float], candidates: Sequence[float], min_tail: int = 10) -> ParetoFit:
    """Pick the threshold whose Hill fit has the smallest KS distance to its own tail."""
    data = _as_array(values)
    best: Optional[ParetoFit] = None
    for xmin in candidates:
        try:
            fit = fit_pareto_hill(data, xmin, min_tail=min_tail)
        except InsufficientDataError:
            continue
        tail = data[data > xmin]
        ks = ks_distance(tail, pareto_cdf(fit.alpha, xmin))
        if best is None or ks < best.ks_distance:
            best = fit.model_copy(update={"ks_distance": ks})
    if best is None:
        raise InsufficientDataError("no xmin candidate leaves enough tail samples", min_tail, 0)
    return best


def tail_thinning_index(values: Sequence[float], exp_fit: ExponentialFit, probe: float) -> float:
    """
    C_emp(probe) / C_thermal(probe), with the thermal CCDF anchored to the empirical
    one at the window's upper edge and decaying at exp_fit.reference_temperature: the
    truncation-corrected temperature when it exists, the raw mean excess otherwise.
    Below 1 the tail is thinner than thermal.
    """
    if probe <= exp_fit.window_hi:
        raise UsageError(f"probe {probe} must lie beyond the fit window's upper edge {exp_fit.window_hi}")
    ccdf = make_ccdf(values)
    anchor = float(ccdf(exp_fit.window_hi))
    observed = float(ccdf(probe))
    if observed == 0.0:
        return 0.0
    thermal = anchor * math.exp(-(probe - exp_fit.window_hi) / exp_fit.reference_temperature)
    return observed / thermal


def summarize_demand(runs: Sequence[Tuple[float, Sequence[float]]]) -> List[DemandPoint]:
    """Mean and spread of stationary prices per goods:money ratio, ordered by ratio."""
    if not runs:
        raise UsageError("demand summary needs at least one run")
    points = []
    for ratio, prices in runs:
        sample = _as_array(prices)
        if sample.size == 0:
            raise UsageError(f"run at ratio {ratio} has no price samples")
        points.append(DemandPoint(
            ratio=float(ratio),
            mean_price=float(np.mean(sample)),
            std_price=float(np.std(sample)),
            n=int(sample.size),
        ))
    return sorted(points, key=lambda p: p.ratio)


def resolve_window(
    values: Sequence[float],
    window: Optional[Tuple[float, float]],
    quantiles: Tuple[float, float] = (0.70, 0.98),
) -> Tuple[float, float]:
    """Explicit window if given, otherwise the sample quantiles."""
    if window is not None:
        return float(window[0]), float(window[1])
    lo, hi = np.quantile(_as_array(values), quantiles)
    return float(lo), float(hi)
