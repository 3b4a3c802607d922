import random
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from pollgame.graph import Graph  # noqa: E402


def random_graph(rng: random.Random, n_min=1, n_max=16, min_degree=0, p=None) -> Graph:
    n = rng.randint(max(n_min, 2 if min_degree else 1), n_max)
    names = [f"v{i}" for i in range(n)]
    p = rng.uniform(0.1, 0.7) if p is None else p
    edges = [(names[i], names[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    if min_degree and n > 1:
        deg = {v: 0 for v in names}
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        for v in names:
            while deg[v] < min_degree:
                u = rng.choice([x for x in names if x != v])
                if (u, v) in edges or (v, u) in edges:
                    if deg[v] >= n - 1:
                        break
                    continue
                edges.append((u, v))
                deg[u] += 1
                deg[v] += 1
    return Graph(names, edges)


def random_subset(rng: random.Random, items, p=None):
    p = rng.random() if p is None else p
    return frozenset(v for v in sorted(items) if rng.random() < p)


@st.composite
def graphs(draw, max_vertices=10, min_vertices=1, no_isolated=False):
    n = draw(st.integers(min_vertices, max_vertices))
    names = [f"v{i}" for i in range(n)]
    pairs = [(names[i], names[j]) for i in range(n) for j in range(i + 1, n)]
    chosen = [e for e in pairs if draw(st.booleans())]
    if no_isolated and n > 1:
        touched = {v for e in chosen for v in e}
        for i, v in enumerate(names):
            if v not in touched:
                chosen.append((v, names[(i + 1) % n]))
    return Graph(names, chosen)


@pytest.fixture
def rng():
    return random.Random(20261014)


def path3():
    return Graph(["a", "b", "c"], [("a", "b"), ("b", "c")])


def cycle4():
    return Graph(["v0", "v1", "v2", "v3"], [("v0", "v1"), ("v1", "v2"), ("v2", "v3"), ("v3", "v0")])


def k3():
    return Graph(["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
