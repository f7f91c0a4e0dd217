"""Expected probe-sequence cost: query cost, match cost and the recursive total."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, MutableMapping, Optional, Sequence

from .backend import BackendConfig, Structure
from .model import ConfigError, JoinGraph, ProbePair

PairKey = tuple[int, int]

GAMMA_PRIOR = 0.5
MU_PRIOR = 1.0
KAPPA_PRIOR = 0.0


@dataclass(frozen=True)
class CostParams:
    alpha_q: float = 1.0
    alpha_m: float = 1.0
    # per-stream backend configs; streams past the end use ``default_backend``
    backends: tuple[BackendConfig, ...] = ()
    default_backend: BackendConfig = field(default_factory=BackendConfig)

    def __post_init__(self):
        if self.alpha_q < 0 or self.alpha_m < 0:
            raise ConfigError("cost coefficients must be >= 0")
        if self.alpha_q == 0 and self.alpha_m == 0:
            raise ConfigError("alpha_q and alpha_m cannot both be zero")
        object.__setattr__(self, "backends", tuple(self.backends))

    def backend(self, stream: int) -> BackendConfig:
        if stream < len(self.backends):
            return self.backends[stream]
        return self.default_backend


@dataclass(frozen=True)
class PredictedStats:
    """Per-pair match rate and multiplicity, per-stream key count.

    Missing entries read as the priors.
    """

    gamma: Mapping[PairKey, float]
    mu: Mapping[PairKey, float]
    kappa: Sequence[float]

    def g(self, l: int, r: int) -> float:
        return self.gamma.get((l, r), GAMMA_PRIOR)

    def u(self, l: int, r: int) -> float:
        return self.mu.get((l, r), MU_PRIOR)

    def k(self, i: int) -> float:
        return self.kappa[i] if i < len(self.kappa) else KAPPA_PRIOR

    @classmethod
    def uniform(cls, graph: JoinGraph, gamma: float = GAMMA_PRIOR, mu: float = MU_PRIOR,
                kappa: float = KAPPA_PRIOR) -> "PredictedStats":
        keys = [p.key() for p in graph.pairs]
        return cls({k: gamma for k in keys}, {k: mu for k in keys}, [kappa] * graph.n)


def f_keys(structure: Structure | str, kappa: float, config: BackendConfig | None = None) -> float:
    """Per-query lookup cost as a function of the backend's key count."""
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    structure = Structure(structure)
    if structure is Structure.HASH:
        cfg = config or BackendConfig()
        return cfg.base_query_cost + kappa / (2.0 * cfg.slot_count)
    # binary search; no cost below one key
    return math.log2(kappa) if kappa > 1 else 0.0


def query_cost(r: int, stats: PredictedStats, cp: CostParams) -> float:
    cfg = cp.backend(r)
    return cp.alpha_q * f_keys(cfg.structure, stats.k(r), cfg)


def match_cost(l: int, r: int, stats: PredictedStats, cp: CostParams) -> float:
    return cp.alpha_m * stats.u(l, r)


def step_cost(l: int, r: int, stats: PredictedStats, cp: CostParams, tail: float) -> float:
    return query_cost(r, stats, cp) + stats.g(l, r) * (match_cost(l, r, stats, cp) + tail)


def sequence_cost(pairs: Sequence[ProbePair] | Sequence[PairKey], stats: PredictedStats,
                  cp: CostParams,
                  memo: Optional[MutableMapping[tuple[PairKey, ...], float]] = None) -> float:
    """Expected cost of probing ``pairs`` in order; the empty suffix costs 0.

    ``memo`` maps an exact remaining suffix (as ``(l, r)`` tuples) to its
    cost. Suffix costs do not depend on the prefix, so one memo may be
    shared across every sequence costed under the same stats.
    """
    keys = tuple(p if isinstance(p, tuple) else p.key() for p in pairs)
    if memo is None:
        memo = {}
    return _suffix_cost(keys, stats, cp, memo)


def _suffix_cost(keys: tuple[PairKey, ...], stats: PredictedStats, cp: CostParams,
                 memo: MutableMapping[tuple[PairKey, ...], float]) -> float:
    if not keys:
        return 0.0
    rest = keys[1:]
    sub = memo.get(rest)
    if sub is None:
        sub = _suffix_cost(rest, stats, cp, memo)
        memo[rest] = sub
    l, r = keys[0]
    return step_cost(l, r, stats, cp, sub)
