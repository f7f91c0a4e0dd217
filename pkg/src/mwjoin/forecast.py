"""Double exponential smoothing of per-cycle statistics.

Match rates use a damped trend; multiplicities and key counts use Holt's
linear trend. The level starts at the first observation and the trend at
the difference of the first two, which makes Holt exact on affine series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .cost import GAMMA_PRIOR, KAPPA_PRIOR, MU_PRIOR, PredictedStats
from .model import ConfigError, JoinGraph
from .stats import StatHistory


@dataclass(frozen=True)
class SmoothingParams:
    alpha: float = 0.5
    beta: float = 0.3
    phi: float = 1.0
    clamp: Optional[tuple[float, float]] = None

    def __post_init__(self):
        for name in ("alpha", "beta", "phi"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must be in (0, 1], got {v}")
        if self.clamp is not None:
            lo, hi = self.clamp
            if lo > hi:
                raise ConfigError(f"empty clamp range {self.clamp}")
            object.__setattr__(self, "clamp", (float(lo), float(hi)))


GAMMA_SMOOTHING = SmoothingParams(0.5, 0.3, 0.9, (0.0, 1.0))
MU_SMOOTHING = SmoothingParams(0.5, 0.3, 1.0, (1.0, math.inf))
KAPPA_SMOOTHING = SmoothingParams(0.5, 0.3, 1.0, (0.0, math.inf))


@dataclass(frozen=True)
class SmoothingSet:
    gamma: SmoothingParams = GAMMA_SMOOTHING
    mu: SmoothingParams = MU_SMOOTHING
    kappa: SmoothingParams = KAPPA_SMOOTHING


@dataclass
class SmoothState:
    level: float = 0.0
    trend: float = 0.0
    count: int = 0

    @property
    def initialized(self) -> bool:
        return self.count > 0


def _clamp(x: float, p: SmoothingParams) -> float:
    if p.clamp is None:
        return x
    lo, hi = p.clamp
    return min(max(x, lo), hi)


def damped_update(st: SmoothState, p: SmoothingParams, y: float) -> None:
    if not math.isfinite(y):
        raise ValueError(f"non-finite observation {y!r}")
    if st.count == 0:
        st.level, st.trend = y, 0.0
    elif st.count == 1:
        st.level, st.trend = y, y - st.level
    else:
        prev = st.level
        damped = p.phi * st.trend
        st.level = p.alpha * y + (1.0 - p.alpha) * (prev + damped)
        st.trend = p.beta * (st.level - prev) + (1.0 - p.beta) * damped
    st.count += 1


def damped_forecast(st: SmoothState, p: SmoothingParams) -> Optional[float]:
    """One-step forecast, or None before the first observation."""
    if not st.initialized:
        return None
    return _clamp(st.level + p.phi * st.trend, p)


def holt_update(st: SmoothState, p: SmoothingParams, y: float) -> None:
    # Holt is the undamped special case
    if not math.isfinite(y):
        raise ValueError(f"non-finite observation {y!r}")
    if st.count < 2:
        damped_update(st, p, y)
        return
    prev = st.level
    st.level = p.alpha * y + (1.0 - p.alpha) * (prev + st.trend)
    st.trend = p.beta * (st.level - prev) + (1.0 - p.beta) * st.trend
    st.count += 1


def holt_forecast(st: SmoothState, p: SmoothingParams) -> Optional[float]:
    if not st.initialized:
        return None
    return _clamp(st.level + st.trend, p)


def smooth(series: Iterable[Optional[float]], p: SmoothingParams, damped: bool) -> Optional[float]:
    """Forecast the next value of ``series``, skipping ``None`` gaps."""
    st = SmoothState()
    update = damped_update if damped else holt_update
    for y in series:
        if y is not None:
            update(st, p, y)
    return damped_forecast(st, p) if damped else holt_forecast(st, p)


def forecast_all(h: StatHistory, graph: JoinGraph, params: SmoothingSet | None = None) -> PredictedStats:
    params = params or SmoothingSet()
    gamma, mu = {}, {}
    for pair in graph.pairs:
        k = pair.key()
        g = smooth(h.gamma_series(k), params.gamma, damped=True)
        u = smooth(h.mu_series(k), params.mu, damped=False)
        gamma[k] = GAMMA_PRIOR if g is None else g
        mu[k] = MU_PRIOR if u is None else u
    kappa = []
    for i in range(graph.n):
        v = smooth(h.kappa_series(i), params.kappa, damped=False)
        kappa.append(KAPPA_PRIOR if v is None else v)
    return PredictedStats(gamma, mu, kappa)


def last_observed(h: StatHistory, graph: JoinGraph) -> PredictedStats:
    """Unsmoothed stats: the most recent observed value of each quantity."""
    def last(series, prior):
        for y in reversed(series):
            if y is not None:
                return y
        return prior

    gamma = {p.key(): last(h.gamma_series(p.key()), GAMMA_PRIOR) for p in graph.pairs}
    mu = {p.key(): last(h.mu_series(p.key()), MU_PRIOR) for p in graph.pairs}
    kappa = [last(h.kappa_series(i), KAPPA_PRIOR) for i in range(graph.n)]
    return PredictedStats(gamma, mu, kappa)
