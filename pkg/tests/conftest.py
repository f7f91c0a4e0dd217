from __future__ import annotations

import random

import pytest

from mwjoin import JoinGraph


def random_connected_graph(rng: random.Random, n: int, extra: float = 0.3) -> JoinGraph:
    """Random spanning tree plus a few extra edges, all on attribute ``key``."""
    edges = set()
    nodes = list(range(n))
    rng.shuffle(nodes)
    for i in range(1, n):
        a, b = nodes[i], nodes[rng.randrange(i)]
        edges.add((min(a, b), max(a, b)))
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < extra:
                edges.add((a, b))
    return JoinGraph.from_pairs(n, sorted(edges))


@pytest.fixture
def star4() -> JoinGraph:
    return JoinGraph.star(4, names=["Cu", "Cr", "Wr", "Sr"])


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
