from __future__ import annotations

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from dynamic_horizon.config import RegimeSegment, SyntheticConfig
from dynamic_horizon.data import (
    calibrate_beta,
    compute_returns,
    daily_stats,
    generate_synthetic,
    label_return,
    label_series,
    make_windows,
    normalize,
    profile_config,
    read_prices,
    standardized_returns,
    write_prices,
)
from dynamic_horizon.data.labeling import UNLABELED, boundaries, class_masses, label_values
from dynamic_horizon.data.synthetic import generate_returns
from dynamic_horizon.exceptions import CalibrationError, ConfigError, DataError, DataFileMissing, LabelingError


def test_returns_from_prices():
    np.testing.assert_allclose(compute_returns(np.array([100.0, 101.0, 99.99])), [0.01, -0.01])


def test_returns_need_two_positive_prices():
    with pytest.raises(DataError):
        compute_returns(np.array([100.0]))
    with pytest.raises(DataError):
        compute_returns(np.array([100.0, 0.0, 1.0]))


@pytest.mark.parametrize(
    ("x", "expected"),
    [(-2.0, 0), (-0.6, 1), (0.0, 2), (0.6, 3), (2.0, 4), (-0.5, 2), (-1.0, 1), (1.0, 4), (0.5, 3)],
)
def test_label_examples_with_boundary_ties(x, expected):
    assert label_return(x, 0.0, 1.0, 0.5) == expected


def test_degenerate_day_cannot_be_labeled():
    with pytest.raises(LabelingError):
        label_return(0.1, 0.0, 0.0, 0.5)


@given(
    x=st.floats(-10, 10),
    mu=st.floats(-1, 1),
    sigma=st.floats(1e-3, 5),
    beta=st.floats(0.01, 0.99),
)
@settings(max_examples=300)
def test_labels_partition_the_real_line(x, mu, sigma, beta):
    label = label_return(x, mu, sigma, beta)
    assert 0 <= label <= 4
    bounds = np.append(np.insert(boundaries(mu, sigma, beta), 0, -np.inf), np.inf)
    assert bounds[label] <= x < bounds[label + 1]


@given(
    xs=st.lists(st.floats(-10, 10), min_size=2, max_size=20),
    sigma=st.floats(1e-3, 5),
    beta=st.floats(0.01, 0.99),
)
@settings(max_examples=200)
def test_labels_are_monotone_in_the_return(xs, sigma, beta):
    ordered = sorted(xs)
    labels = [label_return(x, 0.0, sigma, beta) for x in ordered]
    assert labels == sorted(labels)


def test_day_zero_is_unlabeled_and_later_days_use_previous_stats():
    returns = np.array([0.01, -0.01, 0.03, 0.0, 0.005, -0.02])[:, None]
    labels = label_series(returns, ticks_per_day=2, beta=0.5)
    assert list(labels[:2, 0]) == [UNLABELED, UNLABELED]
    # day 0: mean 0, std 0.01
    assert labels[2, 0] == 4
    assert labels[3, 0] == 2
    stats = daily_stats(returns, 2)
    np.testing.assert_allclose(stats.std[:, 0], [0.01, 0.015, 0.0125])


def test_flat_day_raises_when_its_successor_is_labeled():
    returns = np.array([0.01, 0.01, 0.02, -0.01])[:, None]
    with pytest.raises(LabelingError):
        label_series(returns, ticks_per_day=2, beta=0.5)


def test_calibrated_beta_matches_normal_quantile(rng):
    z = rng.standard_normal(200_000)
    beta = calibrate_beta(z, 0.5, tolerance=1e-4)
    assert beta == pytest.approx(norm.ppf(0.75), abs=0.01)


def test_calibration_rejects_degenerate_targets(rng):
    z = rng.standard_normal(1000)
    for target in (0.0, 1.0):
        with pytest.raises(CalibrationError):
            calibrate_beta(z, target)
    with pytest.raises(CalibrationError):
        calibrate_beta(z, 0.99)
    with pytest.raises(CalibrationError):
        calibrate_beta(np.array([]))


def test_standardized_returns_skip_day_zero():
    returns = np.random.default_rng(0).normal(size=(30, 2))
    assert standardized_returns(returns, 10).shape == (40,)


def _synthetic(**overrides) -> SyntheticConfig:
    base = {"series_count": 2, "ticks_per_day": 50, "day_count": 4}
    base.update(overrides)
    return SyntheticConfig(**base)


def test_generator_is_deterministic_per_seed():
    config = _synthetic()
    first = generate_synthetic(config, 11)
    assert first.shape == (201, 2)
    assert list(first.columns) == ["series_0", "series_1"]
    assert first.iloc[0].tolist() == [100.0, 100.0]
    pd.testing.assert_frame_equal(first, generate_synthetic(config, 11))
    assert not first.equals(generate_synthetic(config, 12))


def test_parallel_generation_equals_sequential():
    config = _synthetic(series_count=5)
    np.testing.assert_array_equal(generate_returns(config, 3), generate_returns(config, 3, workers=4))


def test_regime_multiplier_scales_volatility():
    config = _synthetic(
        ticks_per_day=100,
        day_count=600,
        base_volatility=[0.001, 0.001],
        regimes=[RegimeSegment(start_day=0, multipliers=[1.0, 5.0])],
        degrees_of_freedom=6.0,
        factor_loading=0.0,
    )
    returns = generate_returns(config, 21)
    ratio = returns[:, 1].std() / returns[:, 0].std()
    assert ratio == pytest.approx(5.0, rel=0.2)
    assert abs(np.corrcoef(returns.T)[0, 1]) <= 0.05


def test_factor_loading_induces_correlation():
    config = _synthetic(day_count=100, factor_loading=0.8, degrees_of_freedom=6.0)
    returns = generate_returns(config, 4)
    assert np.corrcoef(returns.T)[0, 1] == pytest.approx(0.64, abs=0.05)


def test_excessive_volatility_is_a_config_error():
    with pytest.raises(ConfigError):
        generate_returns(_synthetic(day_count=20, default_volatility=5.0), 1)


def test_profiles_cover_etf_and_commodity():
    etf, _ = profile_config("etf")
    commodity, labeling = profile_config("commodity")
    assert etf.series_count == 6
    assert commodity.series_count == 3
    assert labeling.beta == pytest.approx(0.1)
    with pytest.raises(ConfigError):
        profile_config("bonds")


def test_window_count_and_alignment():
    features = np.arange(20, dtype=float).reshape(10, 2)
    labels = np.arange(20).reshape(10, 2) % 5
    windows = make_windows(features, labels, input_length=3, horizon=2, offset=7)
    assert len(windows) == 10 - 3 - 2 + 1
    first = windows[0]
    np.testing.assert_array_equal(first.inputs, features[:3])
    np.testing.assert_array_equal(first.targets, labels[3:5])
    np.testing.assert_array_equal(first.first_labels, labels[2])
    assert first.start == 7
    np.testing.assert_array_equal(windows.inputs[1][:-1], windows.inputs[0][1:])


def test_window_span_too_short_is_a_data_error():
    with pytest.raises(DataError):
        make_windows(np.zeros((4, 1)), np.zeros((4, 1)), 3, 2)


def test_labeled_drops_windows_touching_day_zero():
    labels = np.array([[-1], [-1], [2], [3], [1], [0]])
    windows = make_windows(np.zeros((6, 1)), labels, 2, 1).labeled()
    np.testing.assert_array_equal(windows.starts, [1, 2, 3])


def test_split_tail_and_batches():
    windows = make_windows(np.zeros((30, 1)), np.zeros((30, 1), dtype=int), 3, 2)
    head, tail = windows.split_tail(0.1)
    assert (len(head), len(tail)) == (23, 3)
    assert tail.starts[0] == head.starts[-1] + 1
    sizes = [len(batch) for batch in windows.batches(10, np.random.default_rng(0))]
    assert sizes == [10, 10, 6]


def test_normalization_uses_training_statistics_only():
    train = np.array([[1.0, 10.0], [3.0, 30.0]])
    evaluation = np.array([[5.0, 50.0]])
    normed, evaluated, stats = normalize(train, evaluation)
    np.testing.assert_allclose(normed, [[-1.0, -1.0], [1.0, 1.0]])
    np.testing.assert_allclose(evaluated, [[3.0, 3.0]])
    np.testing.assert_allclose(stats.mean, [2.0, 20.0])
    with pytest.raises(DataError):
        normalize(np.ones((3, 1)))


def test_class_masses_ignore_unlabeled():
    assert class_masses(np.array([-1, 0, 0, 4])) == [2 / 3, 0.0, 0.0, 0.0, 1 / 3]


def test_price_csv_round_trip(tmp_path):
    prices = generate_synthetic(_synthetic(), 2)
    path = write_prices(prices, tmp_path / "nested" / "prices.csv")
    assert path.read_text().splitlines()[0] == "tick,series_0,series_1"
    restored = read_prices(path)
    np.testing.assert_allclose(restored.to_numpy(), prices.to_numpy(), atol=1e-9)


def test_reading_missing_or_malformed_prices(tmp_path):
    with pytest.raises(DataFileMissing):
        read_prices(tmp_path / "absent.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("time,a\n0,100\n")
    with pytest.raises(DataError):
        read_prices(bad)


def test_vectorized_labels_partition_ten_thousand_draws(rng):
    n = 10_000
    x = rng.normal(scale=3.0, size=n)
    mu = rng.uniform(-1, 1, size=n)
    sigma = rng.uniform(1e-3, 5, size=n)
    beta = 0.37
    labels = label_values(x, mu, sigma, beta)
    assert set(np.unique(labels)) <= {0, 1, 2, 3, 4}
    expected = [label_return(*args, beta) for args in zip(x[:500], mu[:500], sigma[:500])]
    np.testing.assert_array_equal(labels[:500], expected)
    order = np.argsort(x)
    same_day = label_values(x[order], 0.2, 1.5, beta)
    assert np.all(np.diff(same_day) >= 0)


@pytest.mark.parametrize("df", [3.0, 4.0])
def test_calibrated_labels_hold_half_the_mass_on_heavy_tails(df):
    config = _synthetic(series_count=3, ticks_per_day=78, day_count=40, degrees_of_freedom=df)
    returns = generate_returns(config, 17)
    beta = calibrate_beta(standardized_returns(returns, config.ticks_per_day), 0.5)
    assert 0.0 < beta < 1.0
    middle = class_masses(label_series(returns, config.ticks_per_day, beta))[2]
    assert middle == pytest.approx(0.5, abs=0.005 + 1e-9)
