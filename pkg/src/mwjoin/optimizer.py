"""Probe-order selection: exhaustive memoized search plus baseline strategies."""

from __future__ import annotations

import dataclasses
import math
from enum import Enum
from typing import Callable, Optional

from .cost import CostParams, PredictedStats, query_cost, match_cost, sequence_cost
from .forecast import SmoothingSet, forecast_all, last_observed
from .model import ConfigError, JoinGraph, ProbeOrderTable, ProbePair, ProbeSequence
from .stats import StatHistory

MAX_STREAMS = 8


class Strategy(str, Enum):
    DP_PICK = "dpPick"
    FIXED_ORDER = "fixedOrder"
    SELECTIVITY_FIRST = "selectivityFirst"
    GREEDY_MSJ = "greedy_MSJ"
    DP_PICK_QUERY_COST = "dpPick_queryCost"
    DP_PICK_MATCH_COST = "dpPick_matchCost"
    DP_PICK_NO_SMOOTH = "dpPick_noSmooth"

    @classmethod
    def parse(cls, name: "str | Strategy") -> "Strategy":
        try:
            return cls(name)
        except ValueError:
            known = ", ".join(s.value for s in cls)
            raise ConfigError(f"unknown strategy {name!r} (known: {known})") from None


def get_sequences(g: JoinGraph) -> list[ProbeSequence]:
    """Every legal probe sequence from every start stream.

    Depth-first over directed pairs from the visited set to an unvisited
    stream; output is lexicographic by ``(start, pairs)``.
    """
    if g.n > MAX_STREAMS:
        raise ConfigError(f"exhaustive enumeration is limited to {MAX_STREAMS} streams, got {g.n}")
    pairs = g.pairs
    out: list[ProbeSequence] = []
    current: list[ProbePair] = []

    def dfs(start: int, visited: set[int]) -> None:
        if len(visited) == g.n:
            out.append(ProbeSequence(start, tuple(current)))
            return
        for p in pairs:
            if p.l in visited and p.r not in visited:
                visited.add(p.r)
                current.append(p)
                dfs(start, visited)
                current.pop()
                visited.remove(p.r)

    for start in range(g.n):
        dfs(start, {start})
    return out


CostDict = dict[int, tuple[ProbeSequence, float]]


def dp_pick(g: JoinGraph, stats: PredictedStats, cp: CostParams) -> CostDict:
    """Minimum expected-cost sequence per start stream.

    One suffix memo is shared by all candidates; on equal cost the first
    candidate in enumeration order is kept.
    """
    best: CostDict = {}
    memo: dict = {(): 0.0}
    for seq in get_sequences(g):
        cost = sequence_cost(seq.pairs, stats, cp, memo)
        if cost < best.get(seq.start, (None, math.inf))[1]:
            best[seq.start] = (seq, cost)
    if len(best) != g.n:
        raise ConfigError("join graph is disconnected; some stream has no complete probe sequence")
    return best


def _frontier_build(g: JoinGraph, start: int, score: Callable[[ProbePair], float]) -> ProbeSequence:
    visited = {start}
    chosen: list[ProbePair] = []
    while len(visited) < g.n:
        frontier = [p for p in g.pairs if p.l in visited and p.r not in visited]
        if not frontier:
            raise ConfigError("join graph is disconnected")
        # min() keeps the first (lowest (l, r)) pair on ties
        p = min(frontier, key=score)
        chosen.append(p)
        visited.add(p.r)
    return ProbeSequence(start, tuple(chosen))


def greedy_orders(g: JoinGraph, stats: PredictedStats, cp: CostParams) -> ProbeOrderTable:
    """Append the frontier pair with the cheapest single step, ignoring what follows."""
    def score(p: ProbePair) -> float:
        return query_cost(p.r, stats, cp) + stats.g(p.l, p.r) * match_cost(p.l, p.r, stats, cp)

    return ProbeOrderTable(_frontier_build(g, i, score) for i in range(g.n))


def selectivity_orders(g: JoinGraph, stats: PredictedStats, selectivity: str = "gamma") -> ProbeOrderTable:
    """Append the frontier pair with the lowest predicted selectivity.

    ``selectivity`` is ``"gamma"`` (match rate) or ``"gamma_mu"`` (expected
    records per probe).
    """
    if selectivity == "gamma":
        def score(p: ProbePair) -> float:
            return stats.g(p.l, p.r)
    elif selectivity == "gamma_mu":
        def score(p: ProbePair) -> float:
            return stats.g(p.l, p.r) * stats.u(p.l, p.r)
    else:
        raise ConfigError(f"unknown selectivity measure {selectivity!r}")
    return ProbeOrderTable(_frontier_build(g, i, score) for i in range(g.n))


def dp_orders(g: JoinGraph, stats: PredictedStats, cp: CostParams) -> ProbeOrderTable:
    best = dp_pick(g, stats, cp)
    return ProbeOrderTable(best[i][0] for i in range(g.n))


def select_order(strategy: Strategy | str, g: JoinGraph, history: StatHistory,
                 current: ProbeOrderTable, cp: CostParams,
                 smoothing: Optional[SmoothingSet] = None,
                 selectivity: str = "gamma") -> ProbeOrderTable:
    strategy = Strategy.parse(strategy)
    if strategy is Strategy.FIXED_ORDER:
        return current
    if strategy is Strategy.DP_PICK_NO_SMOOTH:
        return dp_orders(g, last_observed(history, g), cp)
    stats = forecast_all(history, g, smoothing)
    if strategy is Strategy.DP_PICK:
        return dp_orders(g, stats, cp)
    if strategy is Strategy.DP_PICK_QUERY_COST:
        return dp_orders(g, stats, dataclasses.replace(cp, alpha_m=0.0))
    if strategy is Strategy.DP_PICK_MATCH_COST:
        return dp_orders(g, stats, dataclasses.replace(cp, alpha_q=0.0))
    if strategy is Strategy.GREEDY_MSJ:
        return greedy_orders(g, stats, cp)
    if strategy is Strategy.SELECTIVITY_FIRST:
        return selectivity_orders(g, stats, selectivity)
    raise ConfigError(f"unhandled strategy {strategy}")  # pragma: no cover
