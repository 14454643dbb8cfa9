import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from kinex.analysis import (
    exponential_cdf,
    fit_exponential,
    fit_pareto_hill,
    ks_distance,
    make_ccdf,
    make_histogram,
    pareto_cdf,
    resolve_window,
    select_xmin,
    summarize_demand,
    tail_thinning_index,
)
from kinex.errors import DegenerateFitError, InsufficientDataError, UsageError
from kinex.models import ExponentialFit


def pareto_sample(alpha, xmin, n, seed):
    u = 1.0 - np.random.default_rng(seed).random(n)
    return xmin * u ** (-1.0 / (alpha - 1.0))


# ---- histograms ----

def test_linear_histogram():
    hist = make_histogram([0.5, 1.5, 2.5], "linear", 3, (0.0, 3.0))
    assert hist.counts.tolist() == [1, 1, 1]
    np.testing.assert_allclose(hist.bin_edges, [0.0, 1.0, 2.0, 3.0])


def test_empty_histogram():
    hist = make_histogram([], "linear", 4, (0.0, 1.0))
    assert hist.counts.tolist() == [0, 0, 0, 0]
    assert hist.total == 0
    assert hist.density.tolist() == [0.0] * 4


def test_log_histogram_decades():
    hist = make_histogram([1.0, 10.0, 100.0], "log", 3, (1.0, 1000.0))
    np.testing.assert_allclose(hist.bin_edges, [1.0, 10.0, 100.0, 1000.0])
    assert hist.counts.tolist() == [1, 1, 1]


def test_half_open_bins_and_overflow():
    hist = make_histogram([-1.0, 0.0, 1.0, 2.0, 2.0], "linear", 2, (0.0, 2.0))
    assert hist.counts.tolist() == [1, 1]
    assert (hist.underflow, hist.overflow) == (1, 2)


@pytest.mark.parametrize("binning,n_bins,value_range", [
    ("linear", 0, (0.0, 1.0)),
    ("linear", 3, (1.0, 1.0)),
    ("log", 3, (0.0, 10.0)),
    ("cubic", 3, (0.0, 1.0)),
])
def test_histogram_rejects_bad_specs(binning, n_bins, value_range):
    with pytest.raises(UsageError):
        make_histogram([1.0], binning, n_bins, value_range)


@given(
    st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)),
    st.integers(min_value=1, max_value=30),
)
def test_histogram_keeps_every_sample(values, n_bins):
    hist = make_histogram(values, "linear", n_bins, (-10.0, 10.0))
    assert hist.total == len(values)
    assert np.all(np.diff(hist.bin_edges) > 0)


def test_density_integrates_to_in_range_fraction():
    values = np.random.default_rng(1).exponential(1.0, 1000)
    hist = make_histogram(values, "linear", 10, (0.0, 2.0))
    inside = np.count_nonzero(values < 2.0) / values.size
    assert np.sum(hist.density * np.diff(hist.bin_edges)) == pytest.approx(inside)


# ---- CCDF ----

def test_ccdf_examples():
    ccdf = make_ccdf([1.0, 2.0, 3.0])
    assert ccdf(1.0) == 1.0
    assert ccdf(2.0) == pytest.approx(2 / 3)
    assert ccdf(3.0) == pytest.approx(1 / 3)
    assert ccdf(3.5) == 0.0
    assert ccdf.x.tolist() == [1.0, 2.0, 3.0]


def test_ccdf_of_constant_sample():
    ccdf = make_ccdf([5.0, 5.0, 5.0])
    assert ccdf(5.0) == 1.0
    assert ccdf.x.tolist() == [5.0]


def test_ccdf_requires_samples():
    with pytest.raises(UsageError):
        make_ccdf([])


@given(st.lists(st.floats(min_value=-100, max_value=100, allow_nan=False), min_size=1))
def test_ccdf_is_monotone_and_normalized(values):
    ccdf = make_ccdf(values)
    y = ccdf.y
    assert y[0] == 1.0
    assert np.all(np.diff(y) < 0)
    assert ccdf(max(values) + 1.0) == 0.0


def test_ccdf_of_exponential_sample():
    values = np.random.default_rng(7).exponential(1.0, 10_000)
    ccdf = make_ccdf(values)
    assert np.max(np.abs(ccdf.y - np.exp(-ccdf.x))) < 0.03


# ---- KS distance ----

def test_ks_at_quantiles_of_uniform():
    n = 50
    values = np.arange(1, n + 1) / (n + 1)
    distance = ks_distance(values, lambda x: np.clip(x, 0.0, 1.0))
    assert distance <= 1 / (n + 1) + 1e-12


def test_ks_step_model_matches_point_mass():
    assert ks_distance([0.0], lambda x: np.where(np.asarray(x) >= 0.0, 1.0, 0.0)) == 0.0


def test_ks_agrees_with_scipy():
    values = np.random.default_rng(3).exponential(2.0, 500)
    expected = stats.kstest(values, lambda x: -np.expm1(-x / 2.0)).statistic
    assert ks_distance(values, exponential_cdf(2.0)) == pytest.approx(expected, abs=1e-9)


def test_ks_requires_samples():
    with pytest.raises(UsageError):
        ks_distance([], exponential_cdf(1.0))


def test_ks_kolmogorov_bound_over_seeds():
    n = 10_000
    below = sum(
        ks_distance(np.random.default_rng(seed).exponential(1.0, n), exponential_cdf(1.0)) < 1.63 / math.sqrt(n)
        for seed in range(20)
    )
    assert below >= 18


def test_pareto_cdf_shape():
    cdf = pareto_cdf(2.5, 1.0)
    assert cdf(np.array([0.5, 1.0]))[0] == 0.0
    assert cdf(np.array([1.0]))[0] == 0.0
    assert cdf(np.array([4.0]))[0] == pytest.approx(1 - 4.0 ** -1.5)


# ---- exponential fit ----

def test_mean_excess_temperature():
    fit = fit_exponential([1.0, 2.0, 3.0], (0.0, 4.0), min_samples=3)
    assert fit.temperature == 2.0
    assert fit.n_in_window == 3
    assert 0.0 <= fit.r_squared_loglinear <= 1.0


def test_zero_temperature_is_degenerate():
    with pytest.raises(DegenerateFitError):
        fit_exponential([5.0] * 20, (5.0, 10.0))


def test_too_few_samples_in_window():
    with pytest.raises(InsufficientDataError) as info:
        fit_exponential([1.0, 2.0, 3.0, 50.0], (0.0, 10.0))
    assert info.value.required == 10
    assert info.value.available == 3


def test_window_must_be_ordered():
    with pytest.raises(UsageError):
        fit_exponential([1.0] * 20, (2.0, 1.0))


def test_truncated_window_bias_and_correction():
    values = np.random.default_rng(11).exponential(2.0, 100_000)
    fit = fit_exponential(values, (0.0, 8.0))
    truncated_mean = 2.0 - 8.0 / math.expm1(4.0)
    assert fit.temperature == pytest.approx(truncated_mean, abs=0.03)
    assert 1.9 <= fit.temperature_corrected <= 2.1
    assert fit.reference_temperature == fit.temperature_corrected
    assert fit.r_squared_loglinear >= 0.98


def test_open_window_uses_plain_mean():
    values = np.random.default_rng(12).exponential(1.5, 5000)
    fit = fit_exponential(values, (0.0, float("inf")))
    assert fit.temperature == pytest.approx(float(np.mean(values)))
    assert fit.temperature_corrected == fit.temperature


def test_rising_density_has_no_corrected_temperature():
    values = 5.0 + 5.0 * np.sqrt(np.linspace(0.0, 1.0, 101))
    fit = fit_exponential(values, (5.0, 10.0))
    assert fit.temperature_corrected is None
    assert fit.reference_temperature == fit.temperature


# ---- Pareto fit ----

def test_hill_on_exponential_grid():
    fit = fit_pareto_hill([math.e, math.e ** 2, math.e ** 3], 1.0, min_tail=3)
    assert fit.alpha == pytest.approx(1.5, abs=1e-12)
    assert fit.n_tail == 3


def test_hill_on_constant_tail():
    fit = fit_pareto_hill([2.0] * 10, 1.0)
    assert fit.alpha == pytest.approx(1.0 + 1.0 / math.log(2.0), abs=1e-12)


def test_hill_recovers_exponent():
    fit = fit_pareto_hill(pareto_sample(2.5, 1.0, 100_000, 5), 1.0)
    assert 2.45 <= fit.alpha <= 2.55


def test_hill_errors():
    with pytest.raises(UsageError):
        fit_pareto_hill([0.0] + [2.0] * 20, 1.0)
    with pytest.raises(UsageError):
        fit_pareto_hill([2.0] * 20, 0.0)
    with pytest.raises(InsufficientDataError):
        fit_pareto_hill([2.0] * 5 + [0.5] * 20, 1.0)


def test_select_xmin_prefers_a_good_threshold():
    values = pareto_sample(2.5, 1.0, 5000, 8)
    fit = select_xmin(values, np.quantile(values, [0.0, 0.25, 0.5, 0.75]))
    assert fit.ks_distance is not None
    assert 2.2 <= fit.alpha <= 2.8


def test_select_xmin_without_any_tail():
    with pytest.raises(InsufficientDataError):
        select_xmin([1.0, 2.0, 3.0], [5.0, 10.0])


@pytest.mark.parametrize("c", [0.25, 4.0, 1024.0])
def test_scale_covariance(c):
    values = pareto_sample(2.5, 1.0, 2000, 21)
    fit = fit_exponential(values, (1.0, 3.0))
    scaled = fit_exponential(values * c, (c * 1.0, c * 3.0))
    assert scaled.temperature == pytest.approx(c * fit.temperature, rel=1e-12)
    hill = fit_pareto_hill(values, 3.0)
    scaled_hill = fit_pareto_hill(values * c, 3.0 * c)
    assert scaled_hill.alpha == pytest.approx(hill.alpha, rel=1e-9)


# ---- tail thinning ----

def test_thinning_index_of_thermal_sample_is_one():
    values = np.random.default_rng(13).exponential(1.0, 100_000)
    fit = fit_exponential(values, (0.0, 2.0))
    assert tail_thinning_index(values, fit, 3.0) == pytest.approx(1.0, abs=0.1)


def test_thinning_index_is_zero_without_samples_beyond_probe():
    values = np.random.default_rng(14).uniform(0.0, 5.0, 1000)
    fit = fit_exponential(values, (0.0, 4.0))
    assert tail_thinning_index(values, fit, 6.0) == 0.0


def test_probe_inside_window_is_rejected():
    values = np.random.default_rng(15).exponential(1.0, 1000)
    fit = fit_exponential(values, (0.0, 2.0))
    with pytest.raises(UsageError):
        tail_thinning_index(values, fit, 1.5)


def test_thinning_index_decays_at_corrected_temperature():
    fit = ExponentialFit(temperature=0.5, temperature_corrected=1.0, window_lo=0.0, window_hi=1.0,
                         n_in_window=3, r_squared_loglinear=1.0)
    values = [0.5, 1.0, 2.0, 3.0]
    # C(1) = 3/4 anchors the reference, C(2) = 1/2 is observed
    assert tail_thinning_index(values, fit, 2.0) == pytest.approx((2.0 / 3.0) * math.e, rel=1e-12)
    raw = fit.model_copy(update={"temperature_corrected": None})
    assert tail_thinning_index(values, raw, 2.0) == pytest.approx((2.0 / 3.0) * math.e ** 2, rel=1e-12)


def test_resolve_window():
    values = np.arange(101, dtype=float)
    assert resolve_window(values, None, (0.1, 0.9)) == pytest.approx((10.0, 90.0))
    assert resolve_window(values, (3, 7)) == (3.0, 7.0)


# ---- demand ----

def test_demand_constant_prices():
    (point,) = summarize_demand([(1.0, [2.0, 2.0, 2.0])])
    assert (point.ratio, point.mean_price, point.std_price, point.n) == (1.0, 2.0, 0.0, 3)


def test_demand_symmetry_and_order():
    points = summarize_demand([(2.0, [1.0, 3.0]), (0.5, [1.0, 3.0])])
    assert [p.ratio for p in points] == [0.5, 2.0]
    assert points[0].mean_price == points[1].mean_price
    assert points[0].std_price == points[1].std_price == 1.0


def test_demand_errors():
    with pytest.raises(UsageError):
        summarize_demand([])
    with pytest.raises(UsageError):
        summarize_demand([(1.0, [])])
