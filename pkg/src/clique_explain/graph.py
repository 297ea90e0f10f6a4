"""Undirected simple graphs in compressed adjacency form, loaders and clique utilities."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class GraphParseError(ValueError):
    """Malformed graph text. Carries the 1-based line number of the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class MissingProblemLine(GraphParseError):
    pass


class NodeIndexOutOfRange(GraphParseError):
    pass


class SelfLoopError(GraphParseError):
    pass


class BadToken(GraphParseError):
    pass


class GraphTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph.

    ``indptr``/``indices`` hold sorted neighbor lists in CSR layout. ``node_ids``
    maps compact indices back to the ids used in the source file.
    """

    indptr: np.ndarray
    indices: np.ndarray
    node_ids: tuple = ()
    name: str = ""
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        if not self.node_ids:
            object.__setattr__(self, "node_ids", tuple(range(self.node_count)))

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        node_ids: Sequence | None = None,
        name: str = "",
        diagnostics: dict | None = None,
    ) -> "Graph":
        pairs = {(min(u, v), max(u, v)) for u, v in edges}
        for u, v in pairs:
            if u == v:
                raise SelfLoopError(f"self-loop on node {u}")
            if u < 0 or v >= n:
                raise NodeIndexOutOfRange(f"edge ({u}, {v}) outside 0..{n - 1}")
        if pairs:
            arr = np.array(sorted(pairs), dtype=np.int64)
            rows = np.concatenate([arr[:, 0], arr[:, 1]])
            cols = np.concatenate([arr[:, 1], arr[:, 0]])
        else:
            rows = cols = np.empty(0, dtype=np.int64)
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        return cls(
            indptr=indptr,
            indices=cols.astype(np.int64),
            node_ids=tuple(node_ids) if node_ids is not None else (),
            name=name,
            diagnostics=dict(diagnostics or {}),
        )

    @property
    def node_count(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.indptr)
        d.setflags(write=False)
        return d

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    @cached_property
    def adj_lists(self) -> tuple[list[int], ...]:
        return tuple(self.neighbors(u).tolist() for u in range(self.node_count))

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(a) for a in self.adj_lists)

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        """Neighborhoods as Python-int bitsets, used by the exact solver."""
        masks = []
        for u in range(self.node_count):
            m = 0
            for v in self.neighbors(u).tolist():
                m |= 1 << v
            masks.append(m)
        return tuple(masks)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Sparse 0/1 adjacency W (never densified)."""
        n = self.node_count
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(n, n))

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u in range(self.node_count):
            for v in self.neighbors(u).tolist():
                if u < v:
                    out.append((u, v))
        return out

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    def dense_adjacency(self) -> np.ndarray:
        return self.adjacency.toarray()

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with node ``u`` renamed to ``perm[u]``."""
        return Graph.from_edges(self.node_count, [(perm[u], perm[v]) for u, v in self.edges()])

    def __repr__(self) -> str:
        label = f"{self.name!r}, " if self.name else ""
        return f"Graph({label}n={self.node_count}, m={self.edge_count})"


@dataclass(frozen=True)
class CliqueResult:
    nodes: frozenset
    size: int

    @classmethod
    def of(cls, nodes: Iterable[int]) -> "CliqueResult":
        s = frozenset(int(v) for v in nodes)
        return cls(nodes=s, size=len(s))

    def to_json(self, g: Graph | None = None) -> dict:
        ordered = sorted(self.nodes)
        if g is not None:
            ordered = [g.node_ids[v] for v in ordered]
        return {"size": self.size, "nodes": ordered}


@dataclass(frozen=True)
class GraphStats:
    node_count: int
    edge_count: int
    density: float


# -- loaders -----------------------------------------------------------------


def _int_token(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise BadToken(f"non-integer token {tok!r}", lineno) from None


def load_dimacs_clq(text: str | Iterable[str], name: str = "") -> Graph:
    """Parse DIMACS clique format (``p edge n m`` header, 1-based ``e u v`` lines).

    The header edge count is advisory; the deduplicated count is authoritative
    and any mismatch is recorded in ``Graph.diagnostics``.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    n = None
    declared_m = None
    edges: set[tuple[int, int]] = set()
    raw_edge_lines = 0
    for lineno, raw in enumerate(lines, start=1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        tag = parts[0]
        if tag == "p":
            if len(parts) < 4:
                raise GraphParseError("problem line needs 'p edge <n> <m>'", lineno)
            if n is not None:
                raise GraphParseError("duplicate problem line", lineno)
            n = _int_token(parts[2], lineno)
            declared_m = _int_token(parts[3], lineno)
            if n < 0 or declared_m < 0:
                raise GraphParseError("negative size in problem line", lineno)
        elif tag == "e":
            if n is None:
                raise MissingProblemLine("edge line before problem line", lineno)
            if len(parts) != 3:
                raise GraphParseError("edge line needs exactly two endpoints", lineno)
            u = _int_token(parts[1], lineno)
            v = _int_token(parts[2], lineno)
            for x in (u, v):
                if not 1 <= x <= n:
                    raise NodeIndexOutOfRange(f"node index {x} outside [1, {n}]", lineno)
            if u == v:
                raise SelfLoopError(f"self-loop on node {u}", lineno)
            raw_edge_lines += 1
            edges.add((min(u, v) - 1, max(u, v) - 1))
        else:
            raise GraphParseError(f"unknown line type {tag!r}", lineno)
    if n is None:
        raise MissingProblemLine("no 'p edge <n> <m>' line found")
    diag = {
        "declared_edges": declared_m,
        "edge_lines": raw_edge_lines,
        "duplicate_edges": raw_edge_lines - len(edges),
    }
    return Graph.from_edges(n, edges, node_ids=range(1, n + 1), name=name, diagnostics=diag)


def load_edge_list(text: str | Iterable[str], name: str = "") -> Graph:
    """Parse whitespace-separated integer pairs; ids are compacted in first-appearance order."""
    lines = text.splitlines() if isinstance(text, str) else text
    index: dict[int, int] = {}
    edges: set[tuple[int, int]] = set()
    raw_edge_lines = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0]
        parts = line.split()
        if not parts:
            continue
        if len(parts) % 2:
            raise BadToken(f"odd number of tokens ({len(parts)})", lineno)
        ids = [_int_token(t, lineno) for t in parts]
        for a, b in zip(ids[::2], ids[1::2]):
            if a < 0 or b < 0:
                raise NodeIndexOutOfRange(f"negative node id in pair ({a}, {b})", lineno)
            if a == b:
                raise SelfLoopError(f"self-loop on node {a}", lineno)
            u = index.setdefault(a, len(index))
            v = index.setdefault(b, len(index))
            raw_edge_lines += 1
            edges.add((min(u, v), max(u, v)))
    diag = {"edge_lines": raw_edge_lines, "duplicate_edges": raw_edge_lines - len(edges)}
    return Graph.from_edges(len(index), edges, node_ids=list(index), name=name, diagnostics=diag)


def load_graph(path) -> Graph:
    """Load by extension: ``.clq``/``.col``/``.dimacs`` as DIMACS, anything else as an edge list."""
    from pathlib import Path

    p = Path(path)
    text = p.read_text()
    if p.suffix.lower() in {".clq", ".col", ".dimacs"}:
        return load_dimacs_clq(text, name=p.stem)
    return load_edge_list(text, name=p.stem)


def to_dimacs(g: Graph, comment: str | None = None) -> str:
    out = []
    if comment:
        out.extend(f"c {line}" for line in comment.splitlines())
    out.append(f"p edge {g.node_count} {g.edge_count}")
    out.extend(f"e {u + 1} {v + 1}" for u, v in g.edges())
    return "\n".join(out) + "\n"


def to_edge_list(g: Graph) -> str:
    ids = g.node_ids
    return "".join(f"{ids[u]} {ids[v]}\n" for u, v in g.edges())


# -- statistics and clique checks -------------------------------------------


def stats(g: Graph) -> GraphStats:
    n, m = g.node_count, g.edge_count
    density = 2.0 * m / (n * (n - 1)) if n >= 2 else 0.0
    return GraphStats(n, m, density)


def _check_nodes(g: Graph, nodes: Iterable[int]) -> list[int]:
    out = []
    for v in nodes:
        v = int(v)
        if not 0 <= v < g.node_count:
            raise IndexError(f"node {v} outside 0..{g.node_count - 1}")
        out.append(v)
    return out


def is_clique(g: Graph, nodes: Iterable[int]) -> bool:
    vs = sorted(set(_check_nodes(g, nodes)))
    nbrs = g.neighbor_sets
    for i, u in enumerate(vs):
        nu = nbrs[u]
        for v in vs[i + 1 :]:
            if v not in nu:
                return False
    return True


def brute_force_max_clique(g: Graph, node_limit: int = 60) -> CliqueResult:
    """Exact maximum clique by branch and bound over bitsets.

    Vertices are added in increasing index order and the incumbent is replaced
    only on strict improvement, so the first maximum clique found is the
    lexicographically smallest one.
    """
    n = g.node_count
    if n > node_limit:
        raise GraphTooLarge(f"graph has {n} nodes; exact oracle limited to {node_limit}")
    if n == 0:
        return CliqueResult.of(())
    masks = g.neighbor_masks
    best: list[int] = []

    def expand(current: list[int], cand: int) -> None:
        nonlocal best
        if not cand:
            if len(current) > len(best):
                best = list(current)
            return
        while cand:
            if len(current) + cand.bit_count() <= len(best):
                return
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            current.append(v)
            expand(current, cand & masks[v])
            current.pop()
        if len(current) > len(best):
            best = list(current)

    expand([], (1 << n) - 1)
    return CliqueResult.of(best)


# -- generators --------------------------------------------------------------


def planted_clique(
    n: int, edge_prob: float, k: int, seed: int
) -> tuple[Graph, frozenset]:
    """Erdos-Renyi G(n, edge_prob) with a clique forced on ``k`` random nodes."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    if not 0 <= k <= n:
        raise ValueError("k must satisfy 0 <= k <= n")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < edge_prob
    planted = np.sort(rng.choice(n, size=k, replace=False)) if k else np.empty(0, int)
    in_clique = np.zeros(n, dtype=bool)
    in_clique[planted] = True
    keep |= in_clique[iu] & in_clique[ju]
    g = Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()),
                         name=f"planted_n{n}_p{edge_prob}_k{k}_s{seed}")
    return g, frozenset(planted.tolist())


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)], name=f"K{n}")


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], name=f"C{n}")


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], name=f"P{n}")


def star_graph(n: int) -> Graph:
    """Star on ``n`` nodes with center 0."""
    return Graph.from_edges(n, [(0, i) for i in range(1, n)], name=f"S{n}")


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner, name="petersen")


def erdos_renyi(n: int, edge_prob: float, seed: int) -> Graph:
    g, _ = planted_clique(n, edge_prob, 0, seed)
    return Graph.from_edges(n, g.edges(), name=f"gnp_n{n}_p{edge_prob}_s{seed}")
