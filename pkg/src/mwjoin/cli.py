"""``bench`` command line: run grids, sweep T or L, generate sources."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import _kernels
from . import bench
from . import workload as wl
from .model import ConfigError


def _positive_int(value: str) -> int:
    try:
        v = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value} is not an integer") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"{value} is an invalid positive int value")
    return v


def _apply_overrides(cfg: bench.ExperimentConfig, args) -> None:
    if getattr(args, "seeds", None):
        cfg.seeds = list(args.seeds)
    if getattr(args, "strategies", None):
        cfg.strategies = [bench.Strategy.parse(s) for s in args.strategies]
    if getattr(args, "stats", False):
        cfg.stats = True
    if getattr(args, "out", None):
        cfg.output_dir = Path(args.out)
    if cfg.output_dir is None:
        cfg.output_dir = Path("results")


def _finish(rows, out_dir: Path) -> int:
    res, summ = bench.write_outputs(rows, out_dir)
    failed = [r for r in rows if r.get("status") != "ok"]
    print(f"{len(rows)} runs, {len(failed)} failed -> {res}, {summ}")
    summary = bench.summarize(rows)
    for name, entry in summary["strategies"].items():
        red = entry.get("probe_work_reduction")
        extra = f"  median reduction vs {summary['baseline']}: {red['median']:+.1%}" if red else ""
        if "probe_work_median" in entry:
            print(f"  {name:18s} median probe work {entry['probe_work_median']:>14,.0f}{extra}")
    return 1 if failed else 0


def cmd_run(args) -> int:
    cfg = bench.load_config(args.config)
    _apply_overrides(cfg, args)
    # sweep lists in the config only apply to ``bench sweep``
    cfg.T_values, cfg.L_values = [], []
    rows = bench.run_matrix(cfg, jobs=args.jobs)
    return _finish(rows, cfg.output_dir)


def cmd_sweep(args) -> int:
    cfg = bench.load_config(args.config)
    _apply_overrides(cfg, args)
    values = args.values or (cfg.T_values if args.param == "T" else cfg.L_values)
    if not values:
        raise ConfigError(f"no {args.param} values: pass --values or set sweeps.{args.param} in the config")
    values = sorted(set(values))
    if args.param == "T":
        cfg.T_values, cfg.L_values = values, []
    else:
        cfg.L_values, cfg.T_values = values, []
    rows = bench.run_matrix(cfg, jobs=args.jobs)
    rows.sort(key=lambda r: (int(r[args.param]), r["initial_order"], r["strategy"], r["seed"]))
    return _finish(rows, cfg.output_dir)


def cmd_gen(args) -> int:
    with open(args.spec) as fh:
        d = json.load(fh)
    if "workload" not in d:
        raise ConfigError("spec file needs a 'workload' section and 'streams'/'edges'")
    cfg = bench.parse_config(d, Path(args.spec).parent)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    source = bench.build_workload(cfg.workload, cfg.graph, seed, cfg.base_dir)
    wl.dump_source(source, args.out)
    print(f"wrote {len(source)} tuples to {args.out}")
    return 0


def cmd_tpcds(args) -> int:
    paths = wl.write_tpcds_sample(args.out, customers=args.customers, seed=args.seed)
    for table, p in paths.items():
        print(f"{table}: {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description="Adaptive multi-way stream join benchmarks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="experiment config (JSON)")
        sp.add_argument("--out", help="output directory (default: config output.dir or ./results)")
        sp.add_argument("--jobs", type=_positive_int, default=1, help="parallel grid cells")
        sp.add_argument("--seeds", type=int, nargs="+", help="override seeds")
        sp.add_argument("--strategies", nargs="+", help="override strategies")
        sp.add_argument("--stats", action="store_true", help="dump per-cycle stats CSV per run")

    r = sub.add_parser("run", help="run the strategy x initial-order grid")
    common(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="sweep the optimization period T or history length L")
    common(s)
    s.add_argument("--param", choices=["T", "L"], required=True)
    s.add_argument("--values", type=_positive_int, nargs="+",
                   help="values to sweep (default: the config's sweeps section)")
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("gen", help="generate a workload and dump it as NDJSON")
    g.add_argument("--spec", required=True, help="experiment config with a workload section")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("tpcds", help="write desk-scale TPC-DS-shaped CSV extracts")
    t.add_argument("--out", required=True)
    t.add_argument("--customers", type=_positive_int, default=2000)
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_tpcds)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(__name__).info("probe kernel: %s", _kernels.IMPLEMENTATION)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
