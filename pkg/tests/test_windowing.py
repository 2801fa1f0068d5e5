import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgafkit.errors import ValidationError
from qgafkit.marketdata import ReturnSeries, interval_return
from qgafkit.windowing import (
    LabeledWindow,
    WindowConfig,
    label_windows,
    make_windows,
    segment,
    windows_digest,
)


def brute_force_starts(n, w, s):
    starts, k = [], 0
    while k + w <= n:
        starts.append(k)
        k += s
    return starts


def test_segment_counts():
    wins = segment(np.zeros(100), WindowConfig(30, 10))
    assert [w.start_index for w in wins] == list(range(0, 71, 10))
    assert len(segment(np.zeros(30), WindowConfig(30, 10))) == 1
    with pytest.raises(ValidationError):
        segment(np.zeros(29), WindowConfig(30, 10))


def test_defaults_and_overlap():
    cfg = WindowConfig()
    assert (cfg.window_size, cfg.stride, cfg.overlap) == (30, 10, 20)


@pytest.mark.parametrize("kwargs", [{"window_size": 1}, {"stride": 0}, {"stride": 31},
                                    {"horizon": 0}, {"label_mode": "future"}])
def test_bad_config(kwargs):
    with pytest.raises(ValidationError):
        WindowConfig(**kwargs)


def test_accepts_return_series():
    rs = ReturnSeries(tuple(f"d{k:03d}" for k in range(40)), np.linspace(-0.01, 0.01, 40))
    assert len(segment(rs)) == 2


def test_same_window_label():
    lw = make_windows(np.zeros(30))
    assert lw[0].label == 1.0


def test_next_horizon_label():
    series = np.concatenate([np.zeros(30), np.full(30, 0.01)])
    cfg = WindowConfig(30, 10, "next_horizon", 30)
    lw = make_windows(series, cfg)
    assert len(lw) == 1
    assert lw[0].label == pytest.approx(1.01 ** 30, rel=1e-14)
    assert lw[0].label == pytest.approx(1.34785, abs=1e-5)


def test_next_horizon_drops_short_tail():
    cfg = WindowConfig(30, 10, "next_horizon", 30)
    lw = make_windows(np.zeros(100), cfg)
    assert [w.start_index for w in lw] == [0, 10, 20, 30, 40]


def test_nonfinite_label_rejected():
    with pytest.raises(ValidationError):
        LabeledWindow(0, np.zeros(3), float("nan"))


def test_digest_sensitive_to_values_and_order():
    series = np.random.default_rng(0).normal(0, 0.01, 100)
    a = make_windows(series)
    assert windows_digest(a) == windows_digest(make_windows(series.copy()))
    assert windows_digest(a) != windows_digest(a[::-1])
    series[5] += 1e-12
    assert windows_digest(a) != windows_digest(make_windows(series))


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 300), st.integers(2, 40), st.integers(1, 40))
def test_count_formula_matches_enumeration(n, w, s):
    s = min(s, w)
    cfg = WindowConfig(w, s)
    if n < w:
        with pytest.raises(ValidationError):
            segment(np.zeros(n), cfg)
        return
    wins = segment(np.arange(n, dtype=float), cfg)
    assert [x.start_index for x in wins] == brute_force_starts(n, w, s)
    assert len(wins) == (n - w) // s + 1
    for x in wins:
        assert x.values.tolist() == list(range(x.start_index, x.start_index + w))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-0.2, 0.2), min_size=30, max_size=120))
def test_adjacent_windows_share_overlap(values):
    wins = make_windows(values)
    for a, b in zip(wins, wins[1:]):
        np.testing.assert_array_equal(a.values[10:], b.values[:20])
    for lw in wins:
        assert lw.label == interval_return(lw.values)


def test_label_windows_reuses_segments():
    series = np.full(50, 0.001)
    wins = segment(series)
    labeled = label_windows(series, wins)
    assert [w.start_index for w in labeled] == [w.start_index for w in wins]
