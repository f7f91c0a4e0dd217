"""Keyed per-stream state with TTL expiry and key-cardinality bookkeeping."""

from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .model import ConfigError, MalformedTupleError, Scalar, Tuple


class Structure(str, Enum):
    HASH = "hash"
    SORTED = "sorted"


@dataclass(frozen=True)
class BackendConfig:
    structure: Structure = Structure.HASH
    slot_count: int = 4096
    base_query_cost: float = 1.0
    ttl: int = 60_000

    def __post_init__(self):
        object.__setattr__(self, "structure", Structure(self.structure))
        if self.slot_count < 1:
            raise ConfigError("slot_count must be >= 1")
        if self.base_query_cost < 0:
            raise ConfigError("base_query_cost must be >= 0")
        if self.ttl <= 0:
            raise ConfigError("ttl must be > 0")


class HashIndex:
    __slots__ = ("buckets",)

    def __init__(self):
        self.buckets: dict[Scalar, deque] = {}

    def get(self, key):
        return self.buckets.get(key)

    def add(self, key, t) -> bool:
        bucket = self.buckets.get(key)
        if bucket is None:
            self.buckets[key] = deque((t,))
            return True
        bucket.append(t)
        return False

    def pop_front(self, key, t) -> bool:
        bucket = self.buckets[key]
        head = bucket.popleft()
        assert head is t, "expiry order violated"
        if not bucket:
            del self.buckets[key]
            return True
        return False

    def lookup(self):
        # the kernel takes the plain dict fast path
        return self.buckets

    def __len__(self):
        return len(self.buckets)

    def keys(self):
        return self.buckets.keys()


class SortedIndex:
    """Sorted key array with parallel buckets; lookups by binary search."""

    __slots__ = ("_keys", "_buckets")

    def __init__(self):
        self._keys: list = []
        self._buckets: list[deque] = []

    def _find(self, key) -> int:
        i = bisect.bisect_left(self._keys, key)
        if i < len(self._keys) and self._keys[i] == key:
            return i
        return -1

    def get(self, key):
        i = self._find(key)
        return self._buckets[i] if i >= 0 else None

    def add(self, key, t) -> bool:
        i = bisect.bisect_left(self._keys, key)
        if i < len(self._keys) and self._keys[i] == key:
            self._buckets[i].append(t)
            return False
        self._keys.insert(i, key)
        self._buckets.insert(i, deque((t,)))
        return True

    def pop_front(self, key, t) -> bool:
        i = self._find(key)
        bucket = self._buckets[i]
        head = bucket.popleft()
        assert head is t, "expiry order violated"
        if not bucket:
            del self._keys[i]
            del self._buckets[i]
            return True
        return False

    def lookup(self):
        return self

    def __len__(self):
        return len(self._keys)

    def keys(self):
        return list(self._keys)


def _make_index(structure: Structure):
    return HashIndex() if structure is Structure.HASH else SortedIndex()


class StateBackend:
    """Live tuples of one stream, indexed by each of its join attributes.

    ``key_count`` (kappa) refers to the first (primary) attribute. Tuples
    must be inserted with non-decreasing ``now`` so that expiry can pop the
    oldest entries from the front.
    """

    def __init__(self, stream: int, config: BackendConfig | None = None,
                 key_attrs: Sequence[str] = ("key",)):
        if not key_attrs:
            raise ConfigError(f"stream {stream} has no join attribute")
        self.stream = stream
        self.config = config or BackendConfig()
        self.key_attrs = tuple(key_attrs)
        self.primary = self.key_attrs[0]
        self.indexes = {a: _make_index(self.config.structure) for a in self.key_attrs}
        self._fifo: deque = deque()
        self._last_now: int | None = None
        self.kappa_in = 0
        self.kappa_exp = 0

    def insert(self, t: Tuple, now: int) -> None:
        if t.stream != self.stream:
            raise MalformedTupleError(f"tuple for stream {t.stream} sent to backend {self.stream}")
        kv = t.key_values
        for a in self.key_attrs:
            v = kv.get(a)
            if v is None or isinstance(v, bool) or not isinstance(v, (int, str)):
                raise MalformedTupleError(f"stream {self.stream}: bad or missing key {a!r} in {kv!r}")
        if self._last_now is not None and now < self._last_now:
            raise ValueError(f"insertion time went backwards ({now} < {self._last_now})")
        self._last_now = now
        for a in self.key_attrs:
            fresh = self.indexes[a].add(kv[a], t)
            if fresh and a == self.primary:
                self.kappa_in += 1
        self._fifo.append((now, t))

    def query(self, key: Scalar, attr: str | None = None) -> list[Tuple]:
        bucket = self.indexes[attr or self.primary].get(key)
        return list(bucket) if bucket else []

    def remove_expired(self, now: int) -> int:
        cutoff = now - self.config.ttl
        fifo = self._fifo
        removed = 0
        while fifo and fifo[0][0] < cutoff:
            _, t = fifo.popleft()
            for a in self.key_attrs:
                emptied = self.indexes[a].pop_front(t.key_values[a], t)
                if emptied and a == self.primary:
                    self.kappa_exp += 1
            removed += 1
        return removed

    def key_count(self, attr: str | None = None) -> int:
        return len(self.indexes[attr or self.primary])

    def lookup(self, attr: str):
        """Read-only mapping ``key -> bucket`` used by the probe kernel."""
        return self.indexes[attr].lookup()

    def reset_cycle_counters(self) -> None:
        self.kappa_in = 0
        self.kappa_exp = 0

    def __len__(self):
        return len(self._fifo)
