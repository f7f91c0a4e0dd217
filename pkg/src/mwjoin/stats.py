"""Per-cycle probe counters, match-rate/multiplicity snapshots and bounded history."""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .backend import StateBackend

PairKey = tuple[int, int]


@dataclass
class PairCounters:
    q: int = 0  # queries issued
    m: int = 0  # queries that returned at least one record
    s: int = 0  # records returned by successful queries

    def reset(self) -> None:
        self.q = self.m = self.s = 0


def record_probe(c: PairCounters, returned: int) -> None:
    if returned < 0:
        raise ValueError("returned must be >= 0")
    c.q += 1
    if returned > 0:
        c.m += 1
        c.s += returned


@dataclass(frozen=True)
class CycleStats:
    """Closed-cycle snapshot; ``None`` marks an absent (unobserved) value."""

    cycle_index: int
    gamma: Mapping[PairKey, Optional[float]]
    mu: Mapping[PairKey, Optional[float]]
    kappa: tuple[int, ...]
    counts: Mapping[PairKey, tuple[int, int, int]] = field(default_factory=dict)


def close_cycle(counters: Mapping[PairKey, PairCounters], backends: Sequence[StateBackend],
                cycle_index: int = 0) -> CycleStats:
    """Derive gamma = m/q and mu = s/m per pair, snapshot key counts, reset counters."""
    gamma: dict[PairKey, Optional[float]] = {}
    mu: dict[PairKey, Optional[float]] = {}
    counts: dict[PairKey, tuple[int, int, int]] = {}
    for k, c in counters.items():
        gamma[k] = c.m / c.q if c.q > 0 else None
        mu[k] = c.s / c.m if c.m > 0 else None
        counts[k] = (c.q, c.m, c.s)
        c.reset()
    kappa = tuple(b.key_count() for b in backends)
    for b in backends:
        b.reset_cycle_counters()
    return CycleStats(cycle_index, gamma, mu, kappa, counts)


class StatHistory:
    """The last ``max_len`` cycle snapshots, oldest first."""

    def __init__(self, max_len: int):
        if max_len < 1:
            raise ValueError("history length must be >= 1")
        self.max_len = max_len
        self._snaps: deque[CycleStats] = deque(maxlen=max_len)

    def append(self, snap: CycleStats) -> None:
        self._snaps.append(snap)

    def __len__(self) -> int:
        return len(self._snaps)

    def __iter__(self):
        return iter(self._snaps)

    @property
    def latest(self) -> Optional[CycleStats]:
        return self._snaps[-1] if self._snaps else None

    def gamma_series(self, pair: PairKey) -> list[Optional[float]]:
        return [s.gamma.get(pair) for s in self._snaps]

    def mu_series(self, pair: PairKey) -> list[Optional[float]]:
        return [s.mu.get(pair) for s in self._snaps]

    def kappa_series(self, stream: int) -> list[float]:
        return [float(s.kappa[stream]) for s in self._snaps]


def append_history(h: StatHistory, snap: CycleStats) -> None:
    h.append(snap)


STATS_COLUMNS = ("cycle_index", "l", "r", "q", "m", "s", "gamma", "mu", "kappa_l", "kappa_r")


def write_stats_csv(snaps: Iterable[CycleStats], path, names: Sequence[str] | None = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(STATS_COLUMNS)
        for snap in snaps:
            for (l, r) in sorted(snap.counts):
                q, m, s = snap.counts[(l, r)]
                g, u = snap.gamma.get((l, r)), snap.mu.get((l, r))
                w.writerow([
                    snap.cycle_index,
                    names[l] if names else l,
                    names[r] if names else r,
                    q, m, s,
                    "" if g is None else repr(g),
                    "" if u is None else repr(u),
                    snap.kappa[l], snap.kappa[r],
                ])
