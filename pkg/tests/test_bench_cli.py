from __future__ import annotations

import csv
import itertools
import json
from pathlib import Path

import pytest

from mwjoin import ConfigError, JoinGraph
from mwjoin.bench import (LOGICAL_COLUMNS, RESULT_COLUMNS, derive_initial_orders, load_config,
                          order_name, parse_order, run_matrix, summarize)
from mwjoin.cli import main
from mwjoin.workload import load_source

NAMES = ["Cu", "Cr", "Wr", "Sr"]


def small_config(tmp_path: Path, **over) -> Path:
    cfg = {
        "streams": NAMES,
        "edges": [["Cu", "Cr"], ["Cu", "Wr"], ["Cu", "Sr"]],
        "workload": {"kind": "synthetic", "total": 2000,
                     "streams": {nm: {"key_domain": [0, 60]} for nm in NAMES}},
        "strategies": ["fixedOrder", "dpPick", "greedy_MSJ"],
        "initial_orders": ["CuCrWrSr", "CuSrWrCr"],
        "seeds": [0, 1],
        "engine": {"T": 200, "L": 5, "backend": {"ttl": 300}},
        "sweeps": {"T": [100, 150, 200, 250, 300, 400, 500, 700],
                   "L": [1, 2, 3, 4, 5, 6, 8, 10]},
    }
    cfg.update(over)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return p


def read_rows(path: Path) -> list[dict]:
    with path.open() as fh:
        return list(csv.DictReader(fh))


def test_two_stream_initial_orders():
    g = JoinGraph.from_pairs(2, [(0, 1)], names=["A", "B"])
    t = derive_initial_orders([0, 1], g)
    assert t[0].keys() == ((0, 1),) and t[1].keys() == ((1, 0),)


def test_connectivity_forces_center_first():
    g = JoinGraph.star(4, names=NAMES)
    t = derive_initial_orders(parse_order("CuCrWrSr", NAMES), g)
    # from Sr: the center first, then Cr before Wr by priority
    assert t[3].keys() == ((3, 0), (0, 1), (0, 2))


def test_all_permutations_give_distinct_tables_on_closed_graph():
    g = JoinGraph.star(4, names=NAMES).closure()
    tables = [derive_initial_orders(p, g) for p in itertools.permutations(range(4))]
    for t in tables:
        t.validate(g)
    assert len(set(tables)) == 24


def test_plain_star_collapses_permutations():
    g = JoinGraph.star(4, names=NAMES)
    tables = {derive_initial_orders(p, g) for p in itertools.permutations(range(4))}
    assert len(tables) == 6


def test_parse_order():
    assert parse_order("CuCrWrSr", NAMES) == [0, 1, 2, 3]
    assert parse_order(["Sr", "Wr", "Cr", "Cu"], NAMES) == [3, 2, 1, 0]
    assert order_name([3, 2, 1, 0], NAMES) == "SrWrCrCu"
    for bad in ["CuCrWr", "CuCuWrSr", "CuXxWrSr"]:
        with pytest.raises(ConfigError):
            parse_order(bad, NAMES)


def test_run_writes_outputs(tmp_path, capsys):
    cfg = small_config(tmp_path)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--stats"]) == 0
    rows = read_rows(out / "results.csv")
    assert tuple(rows[0].keys()) == RESULT_COLUMNS
    assert len(rows) == 3 * 2 * 2
    assert {r["status"] for r in rows} == {"ok"}
    assert len({r["config_hash"] for r in rows}) == len(rows)
    # strategies never change results within one (order, seed) cell
    for key, grp in itertools.groupby(sorted(rows, key=lambda r: (r["initial_order"], r["seed"])),
                                      key=lambda r: (r["initial_order"], r["seed"])):
        assert len({r["results"] for r in grp}) == 1
    summary = json.loads((out / "summary.json").read_text())
    assert summary["baseline"] == "fixedOrder"
    red = summary["strategies"]["dpPick"]["probe_work_reduction"]
    assert set(red) >= {"mean", "median"}
    assert len(list((out / "stats").glob("*.csv"))) == len(rows)
    assert "failed" in capsys.readouterr().out


def test_rerun_is_byte_identical_in_logical_columns(tmp_path):
    cfg = small_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    main(["run", "--config", str(cfg), "--out", str(a)])
    main(["run", "--config", str(cfg), "--out", str(b)])
    strip = lambda p: [[r[c] for c in LOGICAL_COLUMNS] for r in read_rows(p / "results.csv")]
    assert strip(a) == strip(b)


def test_row_reproduces_from_its_config(tmp_path):
    cfg = load_config(small_config(tmp_path, strategies=["dpPick"], seeds=[1],
                                   initial_orders=["CuSrWrCr"]))
    cfg.T_values, cfg.L_values = [], []
    first = run_matrix(cfg)[0]
    again = run_matrix(cfg)[0]
    assert {k: first[k] for k in LOGICAL_COLUMNS} == {k: again[k] for k in LOGICAL_COLUMNS}


@pytest.mark.parametrize("param", ["T", "L"])
def test_sweep_is_monotone_and_complete(tmp_path, param):
    cfg = small_config(tmp_path, strategies=["dpPick"], seeds=[0], initial_orders=["CuCrWrSr"])
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(cfg), "--param", param, "--out", str(out)]) == 0
    rows = read_rows(out / "results.csv")
    vals = [int(r[param]) for r in rows]
    assert vals == sorted(vals) and len(set(vals)) == 8


def test_sweep_explicit_values(tmp_path):
    cfg = small_config(tmp_path, strategies=["dpPick"], seeds=[0], initial_orders=["CuCrWrSr"])
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(cfg), "--param", "T", "--values", "300", "100", "200",
                 "--out", str(out)]) == 0
    assert [int(r["T"]) for r in read_rows(out / "results.csv")] == [100, 200, 300]


def test_gen_writes_ndjson(tmp_path):
    cfg = small_config(tmp_path)
    out = tmp_path / "src.ndjson"
    assert main(["gen", "--spec", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    src = load_source(out)
    assert len(src) == 2000
    main(["gen", "--spec", str(cfg), "--out", str(tmp_path / "again.ndjson"), "--seed", "3"])
    assert out.read_bytes() == (tmp_path / "again.ndjson").read_bytes()


def test_ndjson_workload_and_failed_cell_exit_code(tmp_path):
    good = tmp_path / "good.ndjson"
    good.write_text("".join(
        json.dumps({"stream": i % 4, "event_time": i, "key_values": {"key": i % 5}, "payload": ""}) + "\n"
        for i in range(100)))
    cfg = small_config(tmp_path, workload={"kind": "ndjson", "path": "good.ndjson"},
                       strategies=["dpPick"], seeds=[0], initial_orders=["CuCrWrSr"])
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "ok")]) == 0
    bad = tmp_path / "bad.ndjson"
    bad.write_text(good.read_text() + json.dumps({"stream": 9, "event_time": 200,
                                                  "key_values": {"key": 1}}) + "\n")
    cfg = small_config(tmp_path, workload={"kind": "ndjson", "path": "bad.ndjson"},
                       strategies=["dpPick"], seeds=[0], initial_orders=["CuCrWrSr"])
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "bad")]) == 1
    row = read_rows(tmp_path / "bad" / "results.csv")[0]
    assert row["status"].startswith("error")


def test_config_errors_exit_2(tmp_path, capsys):
    cfg = small_config(tmp_path, strategies=["fastest"])
    assert main(["run", "--config", str(cfg)]) == 2
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2
    cfg = small_config(tmp_path, edges=[["Cu", "Cr"]])
    assert main(["run", "--config", str(cfg)]) == 2
    assert "error" in capsys.readouterr().err


def test_summary_reduction_sign():
    rows = [
        {"strategy": "fixedOrder", "initial_order": "A", "T": 1, "L": 1, "seed": 0, "probe_work": 100,
         "wall_ms": "2.0", "status": "ok"},
        {"strategy": "dpPick", "initial_order": "A", "T": 1, "L": 1, "seed": 0, "probe_work": 70,
         "wall_ms": "1.0", "status": "ok"},
        {"strategy": "dpPick", "initial_order": "B", "T": 1, "L": 1, "seed": 0, "probe_work": "",
         "wall_ms": "", "status": "error: x"},
    ]
    s = summarize(rows)
    assert s["strategies"]["dpPick"]["probe_work_reduction"]["median"] == pytest.approx(0.3)
    assert s["strategies"]["dpPick"]["failed"] == 1


def test_bundled_configs_parse():
    root = Path(__file__).resolve().parent.parent / "configs"
    for p in sorted(root.glob("*.json")):
        cfg = load_config(p)
        assert cfg.initial_orders
    tpcds = load_config(root / "tpcds_desk.json")
    assert len(tpcds.initial_orders) == 24
    assert len({derive_initial_orders(o, tpcds.graph) for o in tpcds.initial_orders}) == 24
