from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CliqueResult, Graph


@dataclass(frozen=True)
class DecoderConfig:
    num_starts: int = 20

    def __post_init__(self):
        if self.num_starts < 1:
            raise ValueError("num_starts must be >= 1")


def probability_order(p) -> np.ndarray:
    """Node indices by descending probability, ties by ascending index."""
    p = np.asarray(p, dtype=np.float64)
    return np.lexsort((np.arange(len(p)), -p))


def decode_clique(g: Graph, p, cfg: DecoderConfig | None = None) -> CliqueResult:
    """Greedy clique construction over the probability-sorted node order.

    Start ``s`` seeds the clique with the s-th ranked node and sweeps the rest of
    the global order once, admitting nodes adjacent to every member. The largest
    clique over all starts wins; ties keep the earliest start.
    """
    cfg = cfg or DecoderConfig()
    n = g.node_count
    if n == 0:
        raise ValueError("cannot decode on an empty graph")
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (n,):
        raise ValueError(f"p must have length {n}, got shape {p.shape}")
    order = probability_order(p).tolist()
    masks = g.neighbor_masks
    best: list[int] = []
    for s in range(min(cfg.num_starts, n)):
        seed = order[s]
        clique = [seed]
        common = masks[seed]
        for v in order:
            if (common >> v) & 1:
                clique.append(v)
                common &= masks[v]
        if len(clique) > len(best):
            best = clique
    return CliqueResult.of(best)
