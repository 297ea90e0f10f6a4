"""Clique-membership scores from projected gradient descent on the quadratic MCP loss.

    L(p) = -p'Wp + beta * p'W̄p

W̄ is the complement adjacency, never materialized: W̄p = (sum p) 1 - p - Wp.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .features import FeatureMatrix
from .graph import Graph

InitKind = Literal["degree-proportional", "uniform", "feature-linear"]
INIT_KINDS = ("degree-proportional", "uniform", "feature-linear")


@dataclass(frozen=True)
class ScorerConfig:
    beta: float = 0.06
    step_size: float | None = None  # None: 1 / (2 (d_max + beta n))
    iterations: int = 200
    seed: int = 0
    init: InitKind = "degree-proportional"

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step_size must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.init not in INIT_KINDS:
            raise ValueError(f"init must be one of {INIT_KINDS}")

    @classmethod
    def from_text(cls, text: str) -> "ScorerConfig":
        """Parse a flat ``key = value`` (or ``key: value``) file; ``#`` starts a comment."""
        kw: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":"
            if sep not in line:
                raise ValueError(f"line {lineno}: expected key=value")
            key, value = (s.strip() for s in line.split(sep, 1))
            if key == "beta":
                kw[key] = float(value)
            elif key == "step_size":
                kw[key] = None if value.lower() in {"auto", "none", ""} else float(value)
            elif key in ("iterations", "seed"):
                kw[key] = int(value)
            elif key == "init":
                kw[key] = value
            else:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
        return cls(**kw)

    def to_text(self) -> str:
        step = "auto" if self.step_size is None else repr(self.step_size)
        return (
            f"beta = {self.beta!r}\nstep_size = {step}\niterations = {self.iterations}\n"
            f"seed = {self.seed}\ninit = {self.init}\n"
        )


@dataclass
class ProbabilityVector:
    p: np.ndarray
    h: np.ndarray | None = None
    degenerate: bool = False
    loss_history: list = field(default_factory=list)

    def __len__(self):
        return len(self.p)

    def to_csv(self, node_ids=None) -> str:
        ids = list(node_ids) if node_ids is not None else list(range(len(self.p)))
        lines = ["node_id,probability"]
        lines += [f"{ids[i]},{x:.17g}" for i, x in enumerate(self.p)]
        return "\n".join(lines) + "\n"


def _check_p(g: Graph, p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (g.node_count,):
        raise ValueError(f"p must have length {g.node_count}, got shape {p.shape}")
    if np.any(p < 0.0) or np.any(p > 1.0) or not np.all(np.isfinite(p)):
        raise ValueError("p entries must lie in [0, 1]")
    return p


def mcp_loss(g: Graph, p, beta: float) -> tuple[float, float, float]:
    """Return ``(L, L1, L2)``."""
    p = _check_p(g, p)
    wp = g.adjacency @ p
    pwp = float(p @ wp)
    s = float(p.sum())
    l1 = -pwp
    l2 = s * s - float(p @ p) - pwp
    return l1 + beta * l2, l1, l2


def mcp_loss_gradient(g: Graph, p, beta: float) -> np.ndarray:
    p = _check_p(g, p)
    return _gradient(g, p, beta)


def _gradient(g: Graph, p: np.ndarray, beta: float) -> np.ndarray:
    wp = g.adjacency @ p
    wbar_p = p.sum() - p - wp
    return -2.0 * wp + 2.0 * beta * wbar_p


def default_step_size(g: Graph, beta: float) -> float:
    dmax = int(g.degrees.max(initial=0))
    return 1.0 / (2.0 * (dmax + beta * g.node_count))


def minmax_scale(h) -> tuple[np.ndarray, bool]:
    """Scale to [0, 1]; a constant input maps to all 0.5 and reports ``degenerate=True``."""
    h = np.asarray(h, dtype=np.float64)
    if len(h) < 1:
        raise ValueError("minmax_scale needs at least one value")
    lo, hi = h.min(), h.max()
    if hi == lo:
        return np.full(len(h), 0.5), True
    return (h - lo) / (hi - lo), False


def _initial(g: Graph, f: FeatureMatrix | None, cfg: ScorerConfig) -> np.ndarray:
    n = g.node_count
    if cfg.init == "degree-proportional":
        d = g.degrees.astype(np.float64)
        dmax = d.max()
        return d / dmax if dmax > 0 else np.full(n, 0.5)
    if cfg.init == "uniform":
        return np.random.default_rng(cfg.seed).random(n)
    # feature-linear: mean of per-column min-max scaled features
    if f is None or f.values.shape[1] == 0:
        raise ValueError("feature-linear init needs a non-empty FeatureMatrix")
    if f.node_count != n:
        raise ValueError("feature matrix rows do not match graph size")
    cols = [minmax_scale(f.values[:, j])[0] for j in range(f.values.shape[1])]
    return np.mean(cols, axis=0)


def optimize_probabilities(
    g: Graph, f: FeatureMatrix | None = None, cfg: ScorerConfig | None = None
) -> ProbabilityVector:
    """Projected gradient descent on the box [0, 1]^n, then min-max scaling.

    The scaled scores come from the final unprojected gradient step ``h``; the
    projected iterate ``clip(h)`` tends to saturate at 1 for small beta, while
    ``h`` keeps the ordering induced by the gradient.
    """
    cfg = cfg or ScorerConfig()
    if g.node_count == 0:
        raise ValueError("cannot score an empty graph")
    eta = cfg.step_size if cfg.step_size is not None else default_step_size(g, cfg.beta)
    p = np.clip(_initial(g, f, cfg), 0.0, 1.0)
    history = [mcp_loss(g, p, cfg.beta)[0]]
    h = p
    for _ in range(cfg.iterations):
        h = p - eta * _gradient(g, p, cfg.beta)
        p = np.clip(h, 0.0, 1.0)
        history.append(mcp_loss(g, p, cfg.beta)[0])
    scaled, degenerate = minmax_scale(h)
    return ProbabilityVector(p=scaled, h=h, degenerate=degenerate, loss_history=history)


def with_overrides(cfg: ScorerConfig, **kw) -> ScorerConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
