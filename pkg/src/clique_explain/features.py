"""Per-node structural features and per-graph quintile binning."""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .graph import Graph


class FeatureName(str, Enum):
    LogDegree = "LogDegree"
    LogTriangles = "LogTriangles"
    ClusteringCoeff = "ClusteringCoeff"
    Eccentricity = "Eccentricity"
    BetweennessCentrality = "BetweennessCentrality"
    ClosenessCentrality = "ClosenessCentrality"
    DegreeCentrality = "DegreeCentrality"
    EigenvectorCentrality = "EigenvectorCentrality"
    LogMedianNeighborDegree = "LogMedianNeighborDegree"
    LogStdNeighborDegree = "LogStdNeighborDegree"

    @property
    def label(self) -> str:
        """Human-readable name used inside rule items."""
        return FEATURE_LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "FeatureName":
        key = text.strip()
        if key in cls.__members__:
            return cls[key]
        for name, label in FEATURE_LABELS.items():
            if label == key:
                return name
        raise ValueError(f"unknown feature name {text!r}")


FEATURE_LABELS = {
    FeatureName.LogDegree: "Log Degree",
    FeatureName.LogTriangles: "Log Number of Triangles",
    FeatureName.ClusteringCoeff: "Clustering Coefficient",
    FeatureName.Eccentricity: "Eccentricity",
    FeatureName.BetweennessCentrality: "Betweenness Centrality",
    FeatureName.ClosenessCentrality: "Closeness Centrality",
    FeatureName.DegreeCentrality: "Degree Centrality",
    FeatureName.EigenvectorCentrality: "Eigenvector Centrality",
    FeatureName.LogMedianNeighborDegree: "Log Median Neighbor Degree",
    FeatureName.LogStdNeighborDegree: "Log Std Neighbor Degree",
}

ALL_FEATURES = list(FeatureName)
FEATURE_SETS: dict[str, list[FeatureName]] = {
    "three": [FeatureName.Eccentricity, FeatureName.ClusteringCoeff, FeatureName.LogDegree],
    "two": [FeatureName.ClusteringCoeff, FeatureName.LogDegree],
    "ten": ALL_FEATURES,
    "nine": [f for f in ALL_FEATURES if f is not FeatureName.Eccentricity],
}

BIN_LABELS = ("[0%, 20%]", "[20%, 40%]", "[40%, 60%]", "[60%, 80%]", "[80%, 100%]")
BIN_BOUNDS = ((0.0, 20.0), (20.0, 40.0), (40.0, 60.0), (60.0, 80.0), (80.0, 100.0))
TOP_BIN = 4
BOTTOM_BIN = 0


@dataclass(frozen=True)
class FeatureMatrix:
    names: tuple[str, ...]
    values: np.ndarray  # shape (node_count, len(names))

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise ValueError("values must be (node_count, len(names))")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate feature names")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")

    @property
    def node_count(self) -> int:
        return self.values.shape[0]

    def column(self, name) -> np.ndarray:
        key = name.value if isinstance(name, FeatureName) else name
        return self.values[:, self.names.index(key)]

    def to_csv(self, node_ids: Sequence | None = None) -> str:
        ids = list(node_ids) if node_ids is not None else list(range(self.node_count))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node_id", *self.names])
        for i, row in enumerate(self.values):
            w.writerow([ids[i], *(f"{x:.17g}" for x in row)])
        return buf.getvalue()


# -- individual features ------------------------------------------------------


def log_degree(g: Graph) -> np.ndarray:
    return np.log1p(g.degrees.astype(np.float64))


def triangle_counts(g: Graph) -> np.ndarray:
    """Triangles through each node, by edge iteration with neighbor-set intersection."""
    nbrs = g.neighbor_sets
    t = np.zeros(g.node_count, dtype=np.int64)
    for u, v in g.edges():
        a, b = nbrs[u], nbrs[v]
        if len(a) > len(b):
            a, b = b, a
        for w in a:
            # count each triangle once, at its lowest-indexed edge (u, v) with w > v
            if w > v and w in b:
                t[u] += 1
                t[v] += 1
                t[w] += 1
    return t


def log_triangles(g: Graph) -> np.ndarray:
    return np.log1p(triangle_counts(g).astype(np.float64))


def clustering_coefficient(g: Graph, triangles: np.ndarray | None = None) -> np.ndarray:
    t = triangle_counts(g) if triangles is None else triangles
    d = g.degrees.astype(np.float64)
    out = np.zeros(g.node_count)
    ok = d >= 2
    out[ok] = 2.0 * t[ok] / (d[ok] * (d[ok] - 1.0))
    return out


def bfs_distances(g: Graph, source: int) -> list[int]:
    """Hop distances from ``source``; -1 marks unreachable nodes."""
    adj = g.adj_lists
    dist = [-1] * g.node_count
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        du = dist[u] + 1
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = du
                q.append(v)
    return dist


def eccentricity(g: Graph) -> np.ndarray:
    # Per-component: unreachable nodes are ignored.
    out = np.zeros(g.node_count)
    for s in range(g.node_count):
        out[s] = max(bfs_distances(g, s))
    return out


def closeness_centrality(g: Graph) -> np.ndarray:
    n = g.node_count
    out = np.zeros(n)
    if n < 2:
        return out
    for s in range(n):
        reached = [d for d in bfs_distances(g, s) if d > 0]
        r = len(reached)
        if r:
            out[s] = (r / (n - 1)) * (r / sum(reached))
    return out


def betweenness_centrality(g: Graph) -> np.ndarray:
    """Brandes accumulation, normalized by 2/((n-1)(n-2)) over unordered pairs."""
    n = g.node_count
    cb = np.zeros(n)
    if n < 3:
        return cb
    adj = g.adj_lists
    for s in range(n):
        stack = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        sigma[s] = 1
        dist = [-1] * n
        dist[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            stack.append(v)
            dv = dist[v] + 1
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    q.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                cb[w] += delta[w]
    # each unordered pair was counted from both endpoints
    return cb / ((n - 1) * (n - 2))


def degree_centrality(g: Graph) -> np.ndarray:
    n = g.node_count
    if n < 2:
        return np.zeros(n)
    return g.degrees / (n - 1.0)


def eigenvector_centrality(
    g: Graph, max_iter: int = 1000, tol: float = 1e-10
) -> tuple[np.ndarray, dict]:
    """Leading adjacency eigenvector by power iteration from the uniform vector.

    Iterates with (W + I), which has the same eigenvectors as W but cannot
    oscillate on bipartite graphs. Returns ``(vector, info)``.
    """
    if max_iter < 1 or tol <= 0:
        raise ValueError("max_iter must be >= 1 and tol > 0")
    n = g.node_count
    if n == 0:
        return np.zeros(0), {"iterations": 0, "converged": True, "degenerate": False}
    uniform = np.full(n, 1.0 / math.sqrt(n))
    if g.edge_count == 0:
        return uniform, {"iterations": 0, "converged": False, "degenerate": True}
    W = g.adjacency
    x = uniform
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        y = W @ x + x
        y /= np.linalg.norm(y)
        change = np.linalg.norm(y - x)
        x = y
        if change < tol:
            converged = True
            break
    x = np.abs(x)
    return x / np.linalg.norm(x), {"iterations": it, "converged": converged, "degenerate": False}


def neighbor_degree_stats(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """``(ln(lower_median + 1), ln(population_std + 1))`` of neighbor degrees."""
    n = g.node_count
    med = np.zeros(n)
    std = np.zeros(n)
    deg = g.degrees
    for u in range(n):
        nd = np.sort(deg[g.neighbors(u)])
        if len(nd) == 0:
            continue
        med[u] = math.log1p(nd[(len(nd) - 1) // 2])
        std[u] = math.log1p(float(np.std(nd)))
    return med, std


# -- assembly -----------------------------------------------------------------


def compute_features(g: Graph, names: Sequence[FeatureName | str]) -> FeatureMatrix:
    feats = [n if isinstance(n, FeatureName) else FeatureName.parse(n) for n in names]
    if not feats:
        raise ValueError("at least one feature name required")
    if len(set(feats)) != len(feats):
        raise ValueError("duplicate feature names")

    cache: dict = {}

    def tri():
        if "tri" not in cache:
            cache["tri"] = triangle_counts(g)
        return cache["tri"]

    def nbr():
        if "nbr" not in cache:
            cache["nbr"] = neighbor_degree_stats(g)
        return cache["nbr"]

    builders = {
        FeatureName.LogDegree: lambda: log_degree(g),
        FeatureName.LogTriangles: lambda: np.log1p(tri().astype(np.float64)),
        FeatureName.ClusteringCoeff: lambda: clustering_coefficient(g, tri()),
        FeatureName.Eccentricity: lambda: eccentricity(g),
        FeatureName.BetweennessCentrality: lambda: betweenness_centrality(g),
        FeatureName.ClosenessCentrality: lambda: closeness_centrality(g),
        FeatureName.DegreeCentrality: lambda: degree_centrality(g),
        FeatureName.EigenvectorCentrality: lambda: eigenvector_centrality(g)[0],
        FeatureName.LogMedianNeighborDegree: lambda: nbr()[0],
        FeatureName.LogStdNeighborDegree: lambda: nbr()[1],
    }
    cols = [np.asarray(builders[f](), dtype=np.float64) for f in feats]
    values = np.column_stack(cols) if g.node_count else np.zeros((0, len(feats)))
    return FeatureMatrix(tuple(f.value for f in feats), values)


def percentile_ranks(values) -> np.ndarray:
    """Mean-rank percentile: 100 * (#less + 0.5 * #equal) / n, ties included in #equal."""
    v = np.asarray(values, dtype=np.float64)
    n = len(v)
    s = np.sort(v)
    less = np.searchsorted(s, v, side="left")
    leq = np.searchsorted(s, v, side="right")
    return 100.0 * (less + 0.5 * (leq - less)) / n


def percentile_bin(values) -> np.ndarray:
    """Quintile bin index 0..4 per value; rank 100 falls in the top bin."""
    if len(values) < 1:
        raise ValueError("percentile_bin needs at least one value")
    ranks = percentile_ranks(values)
    return np.minimum((ranks // 20.0).astype(np.int64), 4)


def bin_features(fm: FeatureMatrix) -> np.ndarray:
    """Per-graph bin indices, shape (node_count, n_features)."""
    if fm.node_count == 0:
        return np.zeros((0, len(fm.names)), dtype=np.int64)
    return np.column_stack([percentile_bin(fm.values[:, j]) for j in range(len(fm.names))])
