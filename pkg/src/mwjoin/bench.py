"""Experiment grids: strategies x initial orders x (T, L) sweeps x seeds."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import itertools
import json
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

from .backend import BackendConfig
from .cost import CostParams
from .engine import EngineConfig, MultiJoinEngine
from .forecast import SmoothingParams, SmoothingSet, GAMMA_SMOOTHING, KAPPA_SMOOTHING, MU_SMOOTHING
from .model import ConfigError, JoinEdge, JoinGraph, ProbeOrderTable, ProbePair, ProbeSequence, Tuple
from .optimizer import Strategy
from .stats import write_stats_csv
from . import workload as wl

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "strategy", "initial_order", "T", "L", "seed", "tuples", "results", "queries", "matches",
    "probe_work", "cycles", "config_hash", "status", "wall_ms",
)
# columns that must reproduce exactly for a fixed seed
LOGICAL_COLUMNS = RESULT_COLUMNS[:-1]


def derive_initial_orders(permutation: Sequence[int], g: JoinGraph) -> ProbeOrderTable:
    """Order table that follows a stream priority permutation.

    From each start stream, the next probed stream is the highest-priority
    unvisited stream joined to the visited set; it is probed from the
    earliest-visited stream it joins.
    """
    if sorted(permutation) != list(range(g.n)):
        raise ConfigError(f"initial order {list(permutation)} is not a permutation of the streams")
    table = []
    for start in range(g.n):
        visited = [start]
        pairs: list[ProbePair] = []
        while len(visited) < g.n:
            for r in permutation:
                if r in visited:
                    continue
                l = next((v for v in visited if g.has_edge(v, r)), None)
                if l is not None:
                    pairs.append(g.pair(l, r))
                    visited.append(r)
                    break
            else:
                raise ConfigError("join graph is disconnected")
        table.append(ProbeSequence(start, tuple(pairs)))
    return ProbeOrderTable(table)


def parse_order(spec: str | Sequence[str], names: Sequence[str]) -> list[int]:
    """``"CuCrWrSr"`` or ``["Cu", "Cr", ...]`` to stream indices."""
    if isinstance(spec, str):
        out, rest = [], spec
        by_len = sorted(names, key=len, reverse=True)
        while rest:
            for nm in by_len:
                if rest.startswith(nm):
                    out.append(names.index(nm))
                    rest = rest[len(nm):]
                    break
            else:
                raise ConfigError(f"cannot split initial order {spec!r} into stream names {list(names)}")
    else:
        out = [names.index(nm) if nm in names else -1 for nm in spec]
    if sorted(out) != list(range(len(names))):
        raise ConfigError(f"initial order {spec!r} is not a permutation of {list(names)}")
    return out


def order_name(perm: Sequence[int], names: Sequence[str]) -> str:
    return "".join(names[i] for i in perm)


# -- configuration --------------------------------------------------------------


@dataclass
class ExperimentConfig:
    graph: JoinGraph
    workload: dict
    strategies: list[Strategy]
    initial_orders: list[list[int]]
    engine: EngineConfig
    seeds: list[int] = field(default_factory=lambda: [0])
    T_values: list[int] = field(default_factory=list)
    L_values: list[int] = field(default_factory=list)
    output_dir: Optional[Path] = None
    stats: bool = False
    base_dir: Path = Path(".")
    raw: dict = field(default_factory=dict)


def _smoothing(d: Mapping[str, Any] | None) -> SmoothingSet:
    d = d or {}

    def one(key, default: SmoothingParams):
        if key not in d:
            return default
        v = dict(d[key])
        if "clamp" in v and v["clamp"] is not None:
            v["clamp"] = tuple(float(x) for x in v["clamp"])
        return dataclasses.replace(default, **v)

    return SmoothingSet(one("gamma", GAMMA_SMOOTHING), one("mu", MU_SMOOTHING),
                        one("kappa", KAPPA_SMOOTHING))


def _graph(d: Mapping[str, Any]) -> JoinGraph:
    names = list(d["streams"])
    edges = []
    for e in d["edges"]:
        if isinstance(e, Mapping):
            a, b = names.index(e["a"]), names.index(e["b"])
            attr = e.get("attr", "key")
            edges.append(JoinEdge(a, b, e.get("attr_a", attr), e.get("attr_b", attr)))
        else:
            a, b = e[0], e[1]
            edges.append(JoinEdge(names.index(a), names.index(b), "key", "key"))
    g = JoinGraph(len(names), edges, names)
    if d.get("transitive_closure"):
        g = g.closure()
    if not g.is_connected():
        raise ConfigError("join graph must be connected")
    return g


def engine_config(d: Mapping[str, Any], names: Sequence[str]) -> EngineConfig:
    backend = BackendConfig(**d.get("backend", {}))
    per_stream = d.get("backends", {})
    backends = tuple(
        dataclasses.replace(backend, **per_stream[nm]) if nm in per_stream else backend
        for nm in names
    ) if per_stream else ()
    cost = CostParams(**d.get("cost", {}))
    return EngineConfig(
        period=int(d.get("T", 1000)),
        history_length=int(d.get("L", 20)),
        strategy=d.get("strategy", "dpPick"),
        cost=cost,
        smoothing=_smoothing(d.get("smoothing")),
        backend=backend,
        backends=backends,
        clock=d.get("clock", "logical"),
        selectivity=d.get("selectivity", "gamma"),
    )


def parse_config(d: Mapping[str, Any], base_dir: Path | str = ".") -> ExperimentConfig:
    try:
        g = _graph(d)
        names = g.names
        strategies = [Strategy.parse(s) for s in d.get("strategies", ["dpPick", "fixedOrder"])]
        raw_orders = d.get("initial_orders", [list(names)])
        if raw_orders == "all":
            orders = [list(p) for p in itertools.permutations(range(g.n))]
        else:
            orders = [parse_order(o, names) for o in raw_orders]
        sweeps = d.get("sweeps", {}) or {}
        out = d.get("output", {}) or {}
        return ExperimentConfig(
            graph=g,
            workload=dict(d["workload"]),
            strategies=strategies,
            initial_orders=orders,
            engine=engine_config(d.get("engine", {}), names),
            seeds=[int(s) for s in d.get("seeds", [d.get("seed", 0)])],
            T_values=[int(v) for v in sweeps.get("T", [])],
            L_values=[int(v) for v in sweeps.get("L", [])],
            output_dir=Path(base_dir, out["dir"]) if out.get("dir") else None,
            stats=bool(out.get("stats", False)),
            base_dir=Path(base_dir),
            raw=json.loads(json.dumps(d)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad experiment config: {exc!r}") from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    with path.open() as fh:
        return parse_config(json.load(fh), path.parent)


# -- workloads ------------------------------------------------------------------


def build_workload(w: Mapping[str, Any], g: JoinGraph, seed: int, base_dir: Path) -> list[Tuple]:
    kind = w.get("kind", "synthetic")
    names = list(g.names)
    if kind == "synthetic":
        streams = w["streams"]
        specs = []
        for nm in names:
            s = dict(streams.get(nm, {}))
            if "key_domain" in s:
                s["key_domain"] = tuple(s["key_domain"])
            specs.append(wl.StreamSpec(stream=names.index(nm), **s))
        drift = [
            wl.Drift(int(x["at_cycle"]), names.index(x["stream"]),
                     {k: tuple(v) if k == "key_domain" else v for k, v in x["changes"].items()})
            for x in w.get("drift", [])
        ]
        return wl.generate(specs, int(w["total"]), seed, int(w.get("cycle_tuples", 1000)), drift)
    if kind == "csv":
        tables = []
        for nm in names:
            t = w["tables"][nm]
            cols = t.get("key_columns") or {t.get("attr", "key"): t["key_column"]}
            tables.append(wl.load_csv(Path(base_dir, t["path"]), cols, names.index(nm),
                                      t.get("key_type", "int"), keep_payload=False))
        return wl.shuffle_interleave(tables, seed)
    if kind == "ndjson":
        return wl.load_source(Path(base_dir, w["path"]))
    raise ConfigError(f"unknown workload kind {kind!r}")


@lru_cache(maxsize=4)
def _cached_workload(wjson: str, gjson: str, seed: int, base_dir: str) -> tuple:
    w = json.loads(wjson)
    g = _graph(json.loads(gjson))
    return tuple(build_workload(w, g, seed, Path(base_dir)))


def _graph_dict(g: JoinGraph) -> dict:
    return {
        "streams": list(g.names),
        "edges": [{"a": g.names[e.a], "b": g.names[e.b], "attr_a": e.attr_a, "attr_b": e.attr_b}
                  for e in g.edges],
    }


# -- grid -----------------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    strategy: Strategy
    order: tuple[int, ...]
    T: int
    L: int
    seed: int


def grid(cfg: ExperimentConfig) -> list[Cell]:
    Ts = cfg.T_values or [cfg.engine.period]
    Ls = cfg.L_values or [cfg.engine.history_length]
    return [
        Cell(s, tuple(o), T, L, seed)
        for T in Ts for L in Ls for o in cfg.initial_orders for s in cfg.strategies for seed in cfg.seeds
    ]


def _config_hash(cfg: ExperimentConfig, cell: Cell) -> str:
    blob = json.dumps({
        "graph": _graph_dict(cfg.graph),
        "workload": cfg.workload,
        "engine": {k: v for k, v in cfg.raw.get("engine", {}).items() if k not in ("T", "L", "strategy")},
        "strategy": cell.strategy.value,
        "order": list(cell.order),
        "T": cell.T, "L": cell.L, "seed": cell.seed,
    }, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def run_cell(cfg: ExperimentConfig, cell: Cell) -> dict:
    g = cfg.graph
    row: dict[str, Any] = {
        "strategy": cell.strategy.value,
        "initial_order": order_name(cell.order, g.names),
        "T": cell.T, "L": cell.L, "seed": cell.seed,
        "config_hash": _config_hash(cfg, cell),
    }
    try:
        source = _cached_workload(json.dumps(cfg.workload, sort_keys=True),
                                  json.dumps(_graph_dict(g), sort_keys=True),
                                  cell.seed, str(cfg.base_dir))
        ecfg = dataclasses.replace(cfg.engine, strategy=cell.strategy, period=cell.T,
                                   history_length=cell.L)
        orders = derive_initial_orders(cell.order, g)
        engine = MultiJoinEngine(g, ecfg, orders, sink=None, keep_stats=cfg.stats)
        rep = engine.run(source)
        row.update(tuples=rep.tuples, results=rep.results, queries=rep.queries, matches=rep.matches,
                   probe_work=rep.probe_work, cycles=rep.cycles, status="ok",
                   wall_ms=f"{rep.wall_ms:.3f}")
        if cfg.stats and cfg.output_dir is not None:
            sdir = cfg.output_dir / "stats"
            sdir.mkdir(parents=True, exist_ok=True)
            write_stats_csv(rep.stats, sdir / f"{row['config_hash']}.csv", g.names)
    except Exception as exc:  # one failed cell must not abort the grid
        log.exception("cell %s failed", cell)
        row.update(tuples="", results="", queries="", matches="", probe_work="", cycles="",
                   status=f"error: {exc}", wall_ms="")
    return row


def _run_cell_args(args):
    return run_cell(*args)


def run_matrix(cfg: ExperimentConfig, jobs: int = 1) -> list[dict]:
    """Run every grid cell; rows come back in grid order."""
    cells = grid(cfg)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_run_cell_args, [(cfg, c) for c in cells]))
    else:
        rows = [run_cell(cfg, c) for c in cells]
    return rows


def write_results(rows: Iterable[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in RESULT_COLUMNS})


def summarize(rows: Sequence[dict], baseline: str = Strategy.FIXED_ORDER.value) -> dict:
    """Per-strategy probe-work statistics and reductions relative to ``baseline``.

    A reduction of 0.3 means 30% less probe work (or wall time) than the
    baseline cell with the same initial order, T, L and seed.
    """
    ok = [r for r in rows if r.get("status") == "ok"]
    base = {(r["initial_order"], r["T"], r["L"], r["seed"]): r for r in ok if r["strategy"] == baseline}
    out: dict[str, Any] = {"baseline": baseline, "strategies": {}}
    for strat in sorted({r["strategy"] for r in rows}):
        mine = [r for r in ok if r["strategy"] == strat]
        entry: dict[str, Any] = {
            "cells": sum(1 for r in rows if r["strategy"] == strat),
            "failed": sum(1 for r in rows if r["strategy"] == strat and r.get("status") != "ok"),
        }
        if mine:
            work = [int(r["probe_work"]) for r in mine]
            entry["probe_work_mean"] = statistics.fmean(work)
            entry["probe_work_median"] = statistics.median(work)
        red, wred = [], []
        for r in mine:
            b = base.get((r["initial_order"], r["T"], r["L"], r["seed"]))
            if b is None:
                continue
            if int(b["probe_work"]) > 0:
                red.append(1.0 - int(r["probe_work"]) / int(b["probe_work"]))
            if float(b["wall_ms"]) > 0:
                wred.append(1.0 - float(r["wall_ms"]) / float(b["wall_ms"]))
        if red:
            entry["probe_work_reduction"] = {
                "mean": statistics.fmean(red), "median": statistics.median(red),
                "min": min(red), "max": max(red), "n": len(red)}
        if wred:
            entry["wall_reduction"] = {"mean": statistics.fmean(wred), "median": statistics.median(wred)}
        out["strategies"][strat] = entry
    return out


def write_outputs(rows: Sequence[dict], out_dir) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    res = out_dir / "results.csv"
    summ = out_dir / "summary.json"
    write_results(rows, res)
    with summ.open("w") as fh:
        json.dump(summarize(rows), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return res, summ
