"""Compare the compiled and pure-Python probe kernels on one workload.

    python benchmarks/bench_kernels.py --tuples 50000 --repeat 3

Both kernels run the same source under fixedOrder so they do identical
work; the script checks the counters match and reports tuples per second.
"""

from __future__ import annotations

import argparse
import statistics
import time

from mwjoin import BackendConfig, EngineConfig, JoinGraph, MultiJoinEngine, Strategy
from mwjoin._kernels import available
from mwjoin.workload import StreamSpec, generate


def make_source(n_streams: int, tuples: int, domain: int, seed: int):
    specs = [StreamSpec(i, key_domain=(0, domain)) for i in range(n_streams)]
    return generate(specs, tuples, seed)


def time_kernel(kernel, graph, source, ttl: int) -> tuple[float, tuple]:
    cfg = EngineConfig(period=1000, strategy=Strategy.FIXED_ORDER, backend=BackendConfig(ttl=ttl))
    eng = MultiJoinEngine(graph, cfg, kernel=kernel)
    t0 = time.perf_counter()
    rep = eng.run(source)
    elapsed = time.perf_counter() - t0
    return elapsed, (rep.results, rep.queries, rep.matches)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--streams", type=int, default=4)
    ap.add_argument("--tuples", type=int, default=50_000)
    ap.add_argument("--domain", type=int, default=500, help="key domain size")
    ap.add_argument("--ttl", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    graph = JoinGraph.star(args.streams)
    source = make_source(args.streams, args.tuples, args.domain, args.seed)
    kernels = available()
    if "cython" not in kernels:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` first")
    timings: dict[str, float] = {}
    counters = {}
    for name, kernel in kernels.items():
        runs = []
        for _ in range(args.repeat):
            elapsed, counters[name] = time_kernel(kernel, graph, source, args.ttl)
            runs.append(elapsed)
        timings[name] = statistics.median(runs)
        print(f"{name:7s} median {timings[name]:7.3f}s  {args.tuples / timings[name]:>10,.0f} tuples/s  "
              f"results={counters[name][0]} queries={counters[name][1]} matches={counters[name][2]}")
    if len(set(counters.values())) > 1:
        print("kernels disagree on counters")
        return 1
    if "cython" in timings:
        print(f"speedup: {timings['python'] / timings['cython']:.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
