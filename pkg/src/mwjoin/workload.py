"""Input streams: CSV tables, synthetic generators and interleaving."""

from __future__ import annotations

import csv
import json
import logging
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import ConfigError, Tuple

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StreamSpec:
    """Synthetic stream parameters.

    ``weight`` is the stream's relative emission rate; keys are drawn from
    ``key_domain`` = ``[lo, hi)`` either uniformly or Zipf-skewed over the
    domain (``key_dist="zipf"`` with exponent ``zipf_s``), which sets how
    many records share a key.
    """

    stream: int
    key_attr: str = "key"
    weight: float = 1.0
    key_domain: tuple[int, int] = (0, 1000)
    key_dist: str = "uniform"
    zipf_s: float = 1.2
    payload_bytes: int = 0

    def __post_init__(self):
        lo, hi = self.key_domain
        object.__setattr__(self, "key_domain", (int(lo), int(hi)))
        if hi <= lo:
            raise ConfigError(f"stream {self.stream}: empty key domain {self.key_domain}")
        if self.weight <= 0:
            raise ConfigError(f"stream {self.stream}: weight must be positive")
        if self.key_dist not in ("uniform", "zipf"):
            raise ConfigError(f"stream {self.stream}: unknown key_dist {self.key_dist!r}")


@dataclass(frozen=True)
class Drift:
    """From cycle ``at_cycle`` on, replace fields of stream ``stream``'s spec."""

    at_cycle: int
    stream: int
    changes: Mapping[str, object] = field(default_factory=dict)


def _draw_keys(rng: np.random.Generator, spec: StreamSpec, count: int) -> np.ndarray:
    lo, hi = spec.key_domain
    if spec.key_dist == "uniform":
        return rng.integers(lo, hi, size=count)
    ranks = np.arange(1, hi - lo + 1, dtype=float)
    p = ranks ** -spec.zipf_s
    p /= p.sum()
    return lo + rng.choice(hi - lo, size=count, p=p)


def generate(specs: Sequence[StreamSpec], total: int, seed: int, cycle_tuples: int = 1000,
             drift: Iterable[Drift] = ()) -> list[Tuple]:
    """Interleaved synthetic source with event_time = position.

    Each emission picks a stream with probability proportional to the
    weights in force for the current cycle (``position // cycle_tuples``).
    """
    if total <= 0:
        raise ConfigError("total must be > 0")
    if cycle_tuples <= 0:
        raise ConfigError("cycle_tuples must be > 0")
    by_stream = {s.stream: s for s in specs}
    if len(by_stream) != len(specs):
        raise ConfigError("duplicate stream in specs")
    schedule = sorted(drift, key=lambda d: d.at_cycle)
    for d in schedule:
        if d.stream not in by_stream:
            raise ConfigError(f"drift for unknown stream {d.stream}")
    rng = np.random.default_rng(seed)
    order = sorted(by_stream)
    out: list[Tuple] = []
    pos = 0
    cycle = 0
    di = 0
    while pos < total:
        while di < len(schedule) and schedule[di].at_cycle <= cycle:
            d = schedule[di]
            by_stream[d.stream] = replace(by_stream[d.stream], **d.changes)
            di += 1
        # run until the next drift point (or the end)
        if di < len(schedule):
            end = min(total, max(schedule[di].at_cycle, cycle + 1) * cycle_tuples)
        else:
            end = total
        count = end - pos
        cur = [by_stream[i] for i in order]
        w = np.array([s.weight for s in cur], dtype=float)
        picks = rng.choice(len(cur), size=count, p=w / w.sum())
        keys = np.empty(count, dtype=np.int64)
        for j, s in enumerate(cur):
            sel = picks == j
            keys[sel] = _draw_keys(rng, s, int(sel.sum()))
        for k in range(count):
            s = cur[picks[k]]
            payload = rng.bytes(s.payload_bytes) if s.payload_bytes else b""
            out.append(Tuple(s.stream, {s.key_attr: int(keys[k])}, payload, pos + k))
        pos = end
        cycle = pos // cycle_tuples
    return out


def shuffle_interleave(tables: Sequence[Sequence[Tuple]], seed: int,
                       preserve_order: bool = True) -> list[Tuple]:
    """Uniformly random merge of ``tables``; event_time is rewritten to position.

    With ``preserve_order`` each table's rows keep their relative order,
    otherwise all rows are shuffled together.
    """
    rnd = random.Random(seed)
    if preserve_order:
        labels = [i for i, tab in enumerate(tables) for _ in range(len(tab))]
        rnd.shuffle(labels)
        cursors = [0] * len(tables)
        merged = []
        for i in labels:
            merged.append(tables[i][cursors[i]])
            cursors[i] += 1
    else:
        merged = [t for tab in tables for t in tab]
        rnd.shuffle(merged)
    return [Tuple(t.stream, t.key_values, t.payload, pos) for pos, t in enumerate(merged)]


class LoadedTable(list):
    """Tuples read from a CSV file; ``skipped`` counts rows with unusable keys."""

    skipped: int = 0


def _parse_key(raw: str, key_type: str):
    raw = raw.strip()
    if not raw:
        return None
    if key_type == "str":
        return raw
    try:
        return int(raw)
    except ValueError:
        return None


def load_csv(path, key_columns: Mapping[str, str] | str, stream: int, key_type: str = "int",
             keep_payload: bool = True) -> LoadedTable:
    """One tuple per CSV row (header required).

    ``key_columns`` maps tuple attribute names to CSV columns; a bare string
    names the column and uses it as the ``"key"`` attribute.
    """
    if isinstance(key_columns, str):
        key_columns = {"key": key_columns}
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    out = LoadedTable()
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file, header row required") from None
        idx = {}
        for attr, col in key_columns.items():
            if col not in header:
                raise ConfigError(f"{path}: missing key column {col!r}")
            idx[attr] = header.index(col)
        for lineno, row in enumerate(reader, start=2):
            kv = {}
            for attr, i in idx.items():
                v = _parse_key(row[i], key_type) if i < len(row) else None
                if v is None:
                    break
                kv[attr] = v
            else:
                payload = ",".join(row).encode() if keep_payload else b""
                out.append(Tuple(stream, kv, payload, 0))
                continue
            out.skipped += 1
            log.debug("%s:%d: unparseable key, row skipped", path, lineno)
    if out.skipped:
        log.warning("%s: skipped %d rows with empty or unparseable keys", path, out.skipped)
    return out


def dump_source(tuples: Iterable[Tuple], path) -> None:
    """Newline-delimited JSON records, one tuple per line."""
    with open(path, "w") as fh:
        for t in tuples:
            fh.write(json.dumps({"stream": t.stream, "event_time": t.event_time,
                                 "key_values": t.key_values, "payload": t.payload.hex()},
                                sort_keys=True))
            fh.write("\n")


def load_source(path) -> list[Tuple]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                d = json.loads(line)
                out.append(Tuple(int(d["stream"]), d["key_values"], bytes.fromhex(d.get("payload", "")),
                                 int(d["event_time"])))
    return out


# Row counts of the four joined tables at scale factor 10.
TPCDS_SF10_ROWS = {
    "customer": 986546,
    "catalog_returns": 2879498,
    "store_returns": 5750864,
    "web_returns": 1438434,
}

TPCDS_COLUMNS = {
    "customer": ["c_customer_sk", "c_customer_id", "c_current_addr_sk", "c_first_name", "c_last_name"],
    "catalog_returns": ["cr_returned_date_sk", "cr_item_sk", "cr_refunded_customer_sk",
                        "cr_refunded_addr_sk", "cr_return_amount"],
    "store_returns": ["sr_returned_date_sk", "sr_item_sk", "sr_customer_sk", "sr_addr_sk",
                      "sr_return_amt"],
    "web_returns": ["wr_returned_date_sk", "wr_item_sk", "wr_refunded_customer_sk",
                    "wr_refunded_addr_sk", "wr_return_amt"],
}

TPCDS_ADDR_COLUMN = {
    "customer": "c_current_addr_sk",
    "catalog_returns": "cr_refunded_addr_sk",
    "store_returns": "sr_addr_sk",
    "web_returns": "wr_refunded_addr_sk",
}


def write_tpcds_sample(out_dir, customers: int = 2000, seed: int = 0,
                       null_rate: float = 0.02) -> dict[str, Path]:
    """Write schema-compatible desk-scale extracts of the four joined tables.

    Table sizes keep the scale-factor-10 proportions; address keys are drawn
    from a domain half the customer count, and ``null_rate`` of the address
    fields are left empty as in generated TPC-DS data.
    """
    rng = np.random.default_rng(seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scale = customers / TPCDS_SF10_ROWS["customer"]
    addr_domain = max(1, customers // 2)
    paths = {}
    for table, cols in TPCDS_COLUMNS.items():
        rows = max(1, round(TPCDS_SF10_ROWS[table] * scale))
        addr = rng.integers(1, addr_domain + 1, size=rows)
        nulls = rng.random(rows) < null_rate
        path = out_dir / f"{table}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for i in range(rows):
                a = "" if nulls[i] else int(addr[i])
                if table == "customer":
                    w.writerow([i + 1, f"AAAAAAAA{i + 1:08d}", a, f"first{i}", f"last{i}"])
                else:
                    w.writerow([2450815 + int(rng.integers(0, 2000)), int(rng.integers(1, 20000)),
                                int(rng.integers(1, customers + 1)), a,
                                f"{rng.random() * 500:.2f}"])
        paths[table] = path
    return paths
