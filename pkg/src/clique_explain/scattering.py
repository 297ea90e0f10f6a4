"""Matrix-free diffusion operators: lazy random walk, dyadic wavelets and GCN-style low-pass."""

from __future__ import annotations

import numpy as np

from .features import FeatureMatrix
from .graph import Graph

DENSE_LIMIT = 2000


def _as_matrix(g: Graph, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    vec = x.ndim == 1
    if vec:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] != g.node_count:
        raise ValueError(f"expected {g.node_count} rows, got shape {x.shape}")
    return x, vec


def _inv_degrees(g: Graph) -> np.ndarray:
    d = g.degrees.astype(np.float64)
    inv = np.zeros_like(d)
    np.divide(1.0, d, out=inv, where=d > 0)  # isolated nodes: D^{-1} entry is 0
    return inv


def _lazy_step(g: Graph, x: np.ndarray, inv_d: np.ndarray) -> np.ndarray:
    return 0.5 * (x + g.adjacency @ (inv_d[:, None] * x))


def lazy_walk_apply(g: Graph, x) -> np.ndarray:
    """P x with P = (I + W D^{-1}) / 2."""
    x, vec = _as_matrix(g, x)
    out = _lazy_step(g, x, _inv_degrees(g))
    return out[:, 0] if vec else out


def wavelet_apply(g: Graph, k: int, x) -> np.ndarray:
    """Psi_k x: (I - P) x for k = 0, else (P^(2^(k-1)) - P^(2^k)) x.

    Uses exactly 2^k lazy-walk applications.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    x, vec = _as_matrix(g, x)
    if k == 0:
        out = x - lazy_walk_apply(g, x)
    else:
        y = x
        for _ in range(2 ** (k - 1)):
            y = lazy_walk_apply(g, y)
        z = y
        for _ in range(2 ** (k - 1)):
            z = lazy_walk_apply(g, z)
        out = y - z
    return out[:, 0] if vec else out


def lowpass_apply(g: Graph, r: int, x) -> np.ndarray:
    """A^r x with A = (D + I)^{-1/2} (W + I) (D + I)^{-1/2}."""
    if r < 1:
        raise ValueError("r must be >= 1")
    x, vec = _as_matrix(g, x)
    s = 1.0 / np.sqrt(g.degrees.astype(np.float64) + 1.0)
    W = g.adjacency
    for _ in range(r):
        y = s[:, None] * x
        x = s[:, None] * (W @ y + y)
    return x[:, 0] if vec else x


def dense_lazy_walk(g: Graph) -> np.ndarray:
    """Materialized P, for cross-checks on small graphs only."""
    if g.node_count > DENSE_LIMIT:
        raise ValueError(f"refusing to densify a graph with more than {DENSE_LIMIT} nodes")
    W = g.dense_adjacency()
    return 0.5 * (np.eye(g.node_count) + W * _inv_degrees(g)[None, :])


def dense_lowpass(g: Graph) -> np.ndarray:
    if g.node_count > DENSE_LIMIT:
        raise ValueError(f"refusing to densify a graph with more than {DENSE_LIMIT} nodes")
    W = g.dense_adjacency() + np.eye(g.node_count)
    s = 1.0 / np.sqrt(g.degrees + 1.0)
    return s[:, None] * W * s[None, :]


def scattering_augment(g: Graph, f: FeatureMatrix, k_max: int, r_max: int) -> FeatureMatrix:
    """Append |Psi_k col| (k = 0..k_max) and A^r col (r = 1..r_max) channels per column."""
    if k_max < 0 or r_max < 1:
        raise ValueError("need k_max >= 0 and r_max >= 1")
    names = list(f.names)
    cols = [f.values]
    for j, name in enumerate(f.names):
        x = f.values[:, j]
        for k in range(k_max + 1):
            names.append(f"{name}@Psi{k}")
            cols.append(np.abs(wavelet_apply(g, k, x))[:, None])
        for r in range(1, r_max + 1):
            names.append(f"{name}@A{r}")
            cols.append(lowpass_apply(g, r, x)[:, None])
    if len(set(names)) != len(names):
        raise ValueError("augmented column name collides with an existing column")
    return FeatureMatrix(tuple(names), np.hstack(cols))
