from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwjoin import CycleStats, JoinGraph, SmoothingParams, SmoothState, StatHistory, forecast_all
from mwjoin.forecast import (GAMMA_SMOOTHING, damped_forecast, damped_update, holt_forecast,
                             holt_update, last_observed, smooth)


def run_holt(series, p):
    st_ = SmoothState()
    for y in series:
        holt_update(st_, p, y)
    return holt_forecast(st_, p)


def run_damped(series, p):
    st_ = SmoothState()
    for y in series:
        damped_update(st_, p, y)
    return damped_forecast(st_, p)


def test_constant_series():
    for a, b in [(0.1, 0.9), (0.5, 0.3), (1.0, 1.0)]:
        assert run_holt([5, 5, 5], SmoothingParams(a, b)) == 5
    assert run_damped([0.5, 0.5, 0.5], GAMMA_SMOOTHING) == 0.5


def test_linear_series_is_exact():
    for a, b in [(0.1, 0.9), (0.5, 0.3), (0.77, 0.01)]:
        assert run_holt([1, 2, 3], SmoothingParams(a, b)) == pytest.approx(4, abs=1e-12)


def test_single_observation():
    assert run_holt([9], SmoothingParams()) == 9
    assert run_damped([9], SmoothingParams(phi=0.5)) == 9
    assert holt_forecast(SmoothState(), SmoothingParams()) is None


def test_damped_known_value():
    # defaults for match rates: alpha .5, beta .3, phi .9; hand-computed recurrence
    assert run_damped([0.5, 0.4, 0.3], GAMMA_SMOOTHING) == pytest.approx(0.22265, abs=1e-12)


def test_damping_slows_a_rising_trend():
    p = SmoothingParams(0.5, 0.3, 0.5)
    assert run_damped([0.2, 0.4, 0.6], p) < run_holt([0.2, 0.4, 0.6], p)


def test_clamp():
    p = SmoothingParams(0.5, 0.3, 1.0, (0.0, 1.0))
    assert run_damped([0.2, 0.0, -0.2], SmoothingParams(1.0, 1.0, 1.0, (0.0, 1.0))) == 0.0
    assert run_holt([0.8, 1.0], p) == 1.0


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        holt_update(SmoothState(), SmoothingParams(), math.nan)
    with pytest.raises(ValueError):
        damped_update(SmoothState(), SmoothingParams(), math.inf)


def test_params_validated():
    for bad in [dict(alpha=0), dict(beta=1.5), dict(phi=0), dict(clamp=(1, 0))]:
        with pytest.raises(ValueError):
            SmoothingParams(**bad)


def test_holt_exact_on_affine_series_random_draws():
    rng = random.Random(7)
    for _ in range(50):
        p = SmoothingParams(rng.uniform(1e-3, 1.0), rng.uniform(1e-3, 1.0))
        a, b = rng.uniform(-100, 100), rng.uniform(-10, 10)
        n = rng.randint(3, 40)
        series = [a + b * t for t in range(n)]
        assert abs(run_holt(series, p) - (a + b * n)) < 1e-9


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30),
       st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_damped_with_unit_phi_is_holt(series, a, b):
    p = SmoothingParams(a, b, 1.0)
    hs, ds = SmoothState(), SmoothState()
    for y in series:
        holt_update(hs, p, y)
        damped_update(ds, p, y)
        assert abs(hs.level - ds.level) <= 1e-12 * max(1.0, abs(hs.level))
        assert abs(hs.trend - ds.trend) <= 1e-12 * max(1.0, abs(hs.trend))
    assert abs(holt_forecast(hs, p) - damped_forecast(ds, p)) <= 1e-12 * max(1.0, abs(holt_forecast(hs, p)))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.one_of(st.none(), st.floats(0, 1)), max_size=25),
       st.lists(st.one_of(st.none(), st.floats(1, 50)), max_size=25),
       st.lists(st.floats(0, 1e4), max_size=25))
def test_forecasts_respect_clamps(gs, us, ks):
    g = JoinGraph.from_pairs(2, [(0, 1)])
    h = StatHistory(30)
    n = max(len(gs), len(us), len(ks))
    for i in range(n):
        gv = gs[i] if i < len(gs) else None
        uv = us[i] if i < len(us) else None
        kv = ks[i] if i < len(ks) else 0.0
        h.append(CycleStats(i, {(0, 1): gv, (1, 0): gv}, {(0, 1): uv, (1, 0): uv}, (kv, kv)))
    pred = forecast_all(h, g)
    assert 0.0 <= pred.g(0, 1) <= 1.0
    assert pred.u(0, 1) >= 1.0
    assert pred.k(0) >= 0.0


def test_gaps_are_skipped():
    p = SmoothingParams()
    assert smooth([None, 1.0, None, 2.0, 3.0, None], p, damped=False) == pytest.approx(4.0)


def _history(gammas, mu=2.0, kappa=10):
    h = StatHistory(20)
    for i, gv in enumerate(gammas):
        h.append(CycleStats(i, {(0, 1): gv, (1, 0): 0.7}, {(0, 1): mu, (1, 0): mu}, (kappa, kappa)))
    return h


def test_forecast_all_priors_on_empty_history():
    g = JoinGraph.from_pairs(2, [(0, 1)])
    pred = forecast_all(StatHistory(5), g)
    assert (pred.g(0, 1), pred.u(0, 1), pred.k(0)) == (0.5, 1.0, 0.0)


def test_forecast_all_constant_history():
    g = JoinGraph.from_pairs(2, [(0, 1)])
    pred = forecast_all(_history([0.3, 0.3, 0.3]), g)
    assert pred.g(0, 1) == pytest.approx(0.3)
    assert pred.u(0, 1) == pytest.approx(2.0)
    assert pred.k(1) == pytest.approx(10)


def test_forecast_all_falling_match_rate():
    g = JoinGraph.from_pairs(2, [(0, 1)])
    pred = forecast_all(_history([0.5, 0.4, 0.3]), g)
    assert 0.0 <= pred.g(0, 1) < 0.3
    assert pred.g(0, 1) == pytest.approx(0.22265, abs=1e-12)


def test_last_observed_skips_gaps():
    g = JoinGraph.from_pairs(2, [(0, 1)])
    pred = last_observed(_history([0.2, 0.6, None]), g)
    assert pred.g(0, 1) == 0.6
    assert last_observed(StatHistory(3), g).g(0, 1) == 0.5
