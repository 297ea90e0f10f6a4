from __future__ import annotations

import itertools
from collections import deque

import numpy as np
import pytest

from clique_explain.graph import Graph, erdos_renyi


def random_graph(n: int, p: float, seed: int) -> Graph:
    return erdos_renyi(n, p, seed)


def random_graphs(count: int, n_range: tuple[int, int], seed: int, p_range=(0.1, 0.9)):
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        p = float(rng.uniform(*p_range))
        yield random_graph(n, p, seed * 100_003 + i)


def dense_adj(g: Graph) -> np.ndarray:
    A = np.zeros((g.node_count, g.node_count))
    for u, v in g.edges():
        A[u, v] = A[v, u] = 1.0
    return A


def floyd_warshall(g: Graph) -> np.ndarray:
    n = g.node_count
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, v in g.edges():
        d[u, v] = d[v, u] = 1
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def exhaustive_max_clique_size(g: Graph) -> int:
    best = 0
    nodes = range(g.node_count)
    for r in range(g.node_count, 0, -1):
        for combo in itertools.combinations(nodes, r):
            if all(g.has_edge(u, v) for u, v in itertools.combinations(combo, 2)):
                return r
    return best


def naive_betweenness(g: Graph) -> np.ndarray:
    """Enumerate every shortest path explicitly and count interior visits."""
    n = g.node_count
    out = np.zeros(n)
    if n < 3:
        return out
    for s in range(n):
        dist = [-1] * n
        dist[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in g.neighbors(u).tolist():
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    q.append(v)
        for t in range(s + 1, n):
            if dist[t] < 0:
                continue
            paths = []

            def walk(path):
                u = path[-1]
                if u == t:
                    paths.append(list(path))
                    return
                for v in g.neighbors(u).tolist():
                    if dist[v] == dist[u] + 1:
                        path.append(v)
                        walk(path)
                        path.pop()

            walk([s])
            for path in paths:
                for v in path[1:-1]:
                    out[v] += 1.0 / len(paths)
    return out * 2.0 / ((n - 1) * (n - 2))


@pytest.fixture
def triangle() -> Graph:
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path3() -> Graph:
    return Graph.from_edges(3, [(0, 1), (1, 2)])


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
