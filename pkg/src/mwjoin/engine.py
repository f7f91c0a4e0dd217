"""Multi-way stream join operator with periodic probe-order re-optimization."""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional

from . import _kernels
from .backend import BackendConfig, StateBackend
from .cost import CostParams
from .forecast import SmoothingSet
from .model import ConfigError, JoinGraph, MalformedTupleError, ProbeOrderTable, ProbeSequence, Tuple
from .optimizer import Strategy, get_sequences, select_order
from .stats import CycleStats, PairCounters, StatHistory, close_cycle


class ClockMode(str, Enum):
    LOGICAL = "logical"  # period counts tuples, event_time drives TTL
    WALL = "wall"  # period and TTL in wall-clock milliseconds


@dataclass(frozen=True)
class EngineConfig:
    period: int = 1000
    history_length: int = 20
    strategy: Strategy = Strategy.DP_PICK
    cost: CostParams = field(default_factory=CostParams)
    smoothing: SmoothingSet = field(default_factory=SmoothingSet)
    backend: BackendConfig = field(default_factory=BackendConfig)
    # per-stream overrides of ``backend``
    backends: tuple[BackendConfig, ...] = ()
    clock: ClockMode = ClockMode.LOGICAL
    selectivity: str = "gamma"

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))
        object.__setattr__(self, "clock", ClockMode(self.clock))
        object.__setattr__(self, "backends", tuple(self.backends))
        if self.period <= 0:
            raise ConfigError("optimization period must be > 0")
        if self.history_length < 1:
            raise ConfigError("history length must be >= 1")

    def backend_config(self, stream: int) -> BackendConfig:
        return self.backends[stream] if stream < len(self.backends) else self.backend


@dataclass(frozen=True)
class JoinResult:
    components: tuple[Tuple, ...]  # one per stream, indexed by stream id
    emission_time: int


@dataclass
class RunReport:
    tuples: int = 0
    results: int = 0
    cycles: int = 0
    queries: int = 0
    successful_queries: int = 0
    matches: int = 0  # records returned by queries
    expired: int = 0
    order_changes: int = 0
    wall_ms: float = 0.0
    kernel: str = ""
    stats: list[CycleStats] = field(default_factory=list)

    @property
    def probe_work(self) -> int:
        return self.queries + self.matches


class SinkError(RuntimeError):
    """The result sink raised; ``report`` holds the counters up to the failure."""

    def __init__(self, report: RunReport, cause: BaseException):
        super().__init__(f"sink failed after {report.tuples} tuples: {cause!r}")
        self.report = report


Sink = Optional[Callable[[JoinResult], None]]


class ListSink(list):
    """In-memory collector sink."""

    def __call__(self, result: JoinResult) -> None:
        self.append(result)


def default_orders(g: JoinGraph) -> ProbeOrderTable:
    """First enumerated sequence for every start stream."""
    first: dict[int, ProbeSequence] = {}
    for seq in get_sequences(g):
        first.setdefault(seq.start, seq)
    if len(first) != g.n:
        raise ConfigError("join graph is disconnected")
    return ProbeOrderTable(first[i] for i in range(g.n))


class MultiJoinEngine:
    """Single-operator n-way equi-join over keyed per-stream state.

    Every arriving tuple is inserted into its stream's backend and then
    probes the other backends along its stream's current probe sequence.
    Every ``config.period`` the cycle's statistics are closed and the
    configured strategy picks the probe order table for the next cycle.
    ``sink=None`` discards results and only counts them.
    """

    def __init__(self, graph: JoinGraph, config: EngineConfig | None = None,
                 orders: ProbeOrderTable | None = None, sink: Sink = None,
                 keep_stats: bool = False, kernel: Callable | None = None):
        if not graph.is_connected():
            raise ConfigError("join graph must be connected")
        self.graph = graph
        self.config = config or EngineConfig()
        cost = self.config.cost
        if not cost.backends:
            cost = dataclasses.replace(
                cost, backends=tuple(self.config.backend_config(i) for i in range(graph.n)))
        self.cost = cost
        self.sink = sink
        self.keep_stats = keep_stats
        self._kernel = kernel or _kernels.probe_chain
        self.backends = [
            StateBackend(i, self.config.backend_config(i), graph.join_attrs(i))
            for i in range(graph.n)
        ]
        self.counters = {p.key(): PairCounters() for p in graph.pairs}
        self.history = StatHistory(self.config.history_length)
        self.report = RunReport(kernel=_kernels.IMPLEMENTATION if kernel is None else "custom")
        self._cycle = 0
        self._next_call: Optional[float] = None
        self.orders: ProbeOrderTable = ProbeOrderTable(())
        self._plans: list = []
        self.install_orders(orders if orders is not None else default_orders(graph))

    # -- probe order handling -------------------------------------------------

    def _compile(self, seq: ProbeSequence):
        steps, counters = [], []
        visited = {seq.start}
        for p in seq.pairs:
            checks = []
            for o in sorted(visited):
                e = self.graph.edge_between(o, p.r)
                if o != p.l and e is not None:
                    checks.append((o, e.attr_of(o), e.attr_of(p.r)))
            visited.add(p.r)
            steps.append((p.l, p.r, p.attr_l, self.backends[p.r].lookup(p.attr_r), tuple(checks)))
            counters.append(self.counters[p.key()])
        return steps, counters

    def install_orders(self, table: ProbeOrderTable) -> None:
        """Switch to ``table``; takes effect from the next arriving tuple."""
        if not isinstance(table, ProbeOrderTable):
            table = ProbeOrderTable(table)
        table.validate(self.graph)
        plans = [self._compile(seq) for seq in table]
        if self.orders and table != self.orders:
            self.report.order_changes += 1
        self.orders = table
        self._plans = plans

    # -- per-tuple path ---------------------------------------------------------

    def probe_by_order(self, t: Tuple, order: ProbeSequence | None = None) -> int:
        """Probe from the already-inserted tuple ``t``; returns results emitted."""
        if order is None:
            steps, counters = self._plans[t.stream]
        else:
            if order.start != t.stream:
                raise ConfigError("probe sequence does not start at the tuple's stream")
            steps, counters = self._compile(order)
        done, q, m, s = self._kernel(t, steps, self.graph.n)
        rep = self.report
        for k in range(len(steps)):
            if q[k]:
                c = counters[k]
                c.q += q[k]
                c.m += m[k]
                c.s += s[k]
                rep.queries += q[k]
                rep.successful_queries += m[k]
                rep.matches += s[k]
        emitted = len(done)
        rep.results += emitted
        if self.sink is not None and emitted:
            now = t.event_time
            try:
                for bindings in done:
                    self.sink(JoinResult(tuple(bindings), now))
            except Exception as exc:
                raise SinkError(self.report, exc) from exc
        return emitted

    def _now(self, t: Tuple) -> int:
        if self.config.clock is ClockMode.LOGICAL:
            return t.event_time
        return int(time.monotonic() * 1000)

    def _clock(self) -> float:
        if self.config.clock is ClockMode.LOGICAL:
            return self.report.tuples
        return time.monotonic() * 1000.0

    def process(self, t: Tuple) -> int:
        if not 0 <= t.stream < self.graph.n:
            raise MalformedTupleError(f"tuple for unknown stream {t.stream}")
        now = self._now(t)
        for b in self.backends:
            self.report.expired += b.remove_expired(now)
        current = self._clock()
        if self._next_call is None:
            self._next_call = current + self.config.period
        elif current >= self._next_call:
            self.optimize()
            self._next_call = current + self.config.period
        self.backends[t.stream].insert(t, now)
        self.report.tuples += 1
        return self.probe_by_order(t)

    # -- cycle boundary ---------------------------------------------------------

    def close_cycle(self) -> CycleStats:
        snap = close_cycle(self.counters, self.backends, self._cycle)
        self._cycle += 1
        self.history.append(snap)
        if self.keep_stats:
            self.report.stats.append(snap)
        return snap

    def optimize(self) -> ProbeOrderTable:
        """Close the current cycle and install the strategy's next order table."""
        self.close_cycle()
        self.report.cycles += 1
        cfg = self.config
        table = select_order(cfg.strategy, self.graph, self.history, self.orders, self.cost,
                             cfg.smoothing, cfg.selectivity)
        if table is not self.orders:
            self.install_orders(table)
        return self.orders

    def run(self, source: Iterable[Tuple]) -> RunReport:
        started = time.perf_counter()
        try:
            for t in source:
                self.process(t)
        finally:
            self.report.wall_ms += (time.perf_counter() - started) * 1000.0
        if self.keep_stats and any(c.q for c in self.counters.values()):
            self.close_cycle()
        return self.report


def run(graph: JoinGraph, config: EngineConfig, source: Iterable[Tuple], sink: Sink = None,
        orders: ProbeOrderTable | None = None, keep_stats: bool = False) -> RunReport:
    return MultiJoinEngine(graph, config, orders, sink, keep_stats).run(source)
