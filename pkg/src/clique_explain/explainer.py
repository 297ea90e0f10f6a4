"""Rule-based explanations of clique-membership scores.

Nodes in the top and bottom probability quintiles of each graph become
transactions of feature-quintile items; FP-Growth mines them and a greedy pass
keeps rules whose feature intervals do not overlap.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .features import (
    BIN_BOUNDS,
    BIN_LABELS,
    BOTTOM_BIN,
    TOP_BIN,
    FeatureName,
    bin_features,
    compute_features,
    percentile_bin,
)
from .fpgrowth import (
    ITEM_SEPARATOR,
    AssociationRule,
    TransactionDB,
    build_fptree,
    generate_rules,
    intern_item,
    mine_frequent_itemsets,
)
from .graph import Graph
from .scorer import ScorerConfig, optimize_probabilities

TOP_ITEM = "MC_Prob_Top_20P"
BOTTOM_ITEM = "MC_Prob_Bottom_20P"
METRICS = ("support", "confidence", "lift")
REPORT_CSV_HEADER = ("Dataset", "Features", "Antecedents", "Consequents", "Support", "Confidence", "Lift")


class AntecedentParseError(ValueError):
    pass


@dataclass(frozen=True)
class ExplainerConfig:
    min_support: float = 0.05
    min_confidence: float = 0.1
    epsilon: float = 0.01
    sort_metric: str = "support"
    targets: tuple[str, ...] = (TOP_ITEM, BOTTOM_ITEM)
    per_graph: bool = False

    def __post_init__(self):
        if not 0 < self.min_support <= 1:
            raise ValueError("min_support must lie in (0, 1]")
        if not 0 < self.min_confidence <= 1:
            raise ValueError("min_confidence must lie in (0, 1]")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.sort_metric not in METRICS:
            raise ValueError(f"sort_metric must be one of {METRICS}")
        if not self.targets:
            raise ValueError("at least one target consequent required")


def feature_item(feature: FeatureName | str, bin_index: int) -> str:
    label = feature.label if isinstance(feature, FeatureName) else FeatureName.parse(feature).label
    return intern_item(f"{label} in {BIN_LABELS[bin_index]}")


# -- transactions --------------------------------------------------------------


def build_transactions(
    bins: np.ndarray, prob_bins: Sequence[int], features: Sequence[FeatureName | str]
) -> list[frozenset]:
    """One transaction per node in the top or bottom probability quintile."""
    bins = np.asarray(bins)
    prob_bins = np.asarray(prob_bins)
    if bins.ndim != 2 or bins.shape[0] != len(prob_bins):
        raise ValueError(
            f"node-count mismatch: {bins.shape[0] if bins.ndim == 2 else '?'} feature rows "
            f"vs {len(prob_bins)} probability bins"
        )
    if bins.shape[1] != len(features):
        raise ValueError("bins columns do not match feature list")
    out = []
    for i, pb in enumerate(prob_bins.tolist()):
        if pb == TOP_BIN:
            tag = TOP_ITEM
        elif pb == BOTTOM_BIN:
            tag = BOTTOM_ITEM
        else:
            continue
        items = [feature_item(f, int(b)) for f, b in zip(features, bins[i])]
        out.append(frozenset(items + [tag]))
    return out


# -- non-overlapping rule selection -----------------------------------------

_ITEM_RE = re.compile(
    r"^\s*(?P<name>.+?)\s+in\s+\[\s*(?P<lo>[-+]?\d+(?:\.\d*)?)\s*%\s*,\s*(?P<hi>[-+]?\d+(?:\.\d*)?)\s*%\s*\]\s*$"
)


@dataclass(frozen=True)
class Interval:
    feature: str
    lo: float
    hi: float


def _canonical_feature(name: str) -> str:
    try:
        return FeatureName.parse(name).value
    except ValueError:
        return name.strip()


def parse_antecedents(text: str) -> list[Interval]:
    """Split ``"<feature> in [lo%, hi%] AND ..."`` into interval tuples."""
    if not text.strip():
        return []
    out = []
    for fragment in text.split(ITEM_SEPARATOR):
        m = _ITEM_RE.match(fragment)
        if not m:
            raise AntecedentParseError(f"malformed antecedent item {fragment!r}")
        lo, hi = float(m["lo"]), float(m["hi"])
        if not 0 <= lo < hi <= 100:
            raise AntecedentParseError(f"bad percent bounds in {fragment!r}")
        out.append(Interval(_canonical_feature(m["name"]), lo, hi))
    return out


def is_disjoint(a: Sequence[Interval], b: Sequence[Interval], epsilon: float = 0.01) -> bool:
    """True when every feature shared by ``a`` and ``b`` overlaps by at most ``epsilon``."""
    for x in a:
        for y in b:
            if x.feature == y.feature and min(x.hi, y.hi) - max(x.lo, y.lo) > epsilon:
                return False
    return True


def greedy_select(
    rules: Sequence[AssociationRule], cfg: ExplainerConfig, target: str | None = None
) -> dict[str, list[AssociationRule]]:
    """Greedy non-overlapping selection per target consequent.

    Returns ``{target: kept rules in selection order}``.
    """
    targets = (target,) if target is not None else cfg.targets
    out = {}
    for c in targets:
        pool = [r for r in rules if r.consequent_text == c]
        order = sorted(
            range(len(pool)),
            key=lambda i: (-pool[i].metric(cfg.sort_metric), pool[i].antecedent_text, i),
        )
        kept: list[AssociationRule] = []
        parsed: list[list[Interval]] = []
        for i in order:
            intervals = parse_antecedents(pool[i].antecedent_text)
            if not intervals:
                continue
            if all(is_disjoint(intervals, other, cfg.epsilon) for other in parsed):
                kept.append(pool[i])
                parsed.append(intervals)
        out[c] = kept
    return out


# -- pipeline -------------------------------------------------------------------


class GraphPipelineError(RuntimeError):
    def __init__(self, graph_name: str, cause: Exception):
        self.graph_name = graph_name
        super().__init__(f"graph {graph_name!r}: {cause}")


def graph_transactions(
    g: Graph, feature_set: Sequence[FeatureName], scorer_cfg: ScorerConfig
) -> list[frozenset]:
    try:
        fm = compute_features(g, feature_set)
        probs = optimize_probabilities(g, fm, scorer_cfg)
        return build_transactions(bin_features(fm), percentile_bin(probs.p), feature_set)
    except Exception as exc:
        raise GraphPipelineError(g.name or repr(g), exc) from exc


@dataclass
class ExplanationReport:
    dataset: str
    features: list[str]
    selected: dict[str, list[dict]]
    mined_rule_count: int
    transaction_count: int
    graph_count: int
    config: dict = field(default_factory=dict)
    # supports are fractions of the pooled top/bottom transactions, not of all nodes
    support_denominator: str = "filtered-transactions"

    @property
    def selected_rule_count(self) -> int:
        return sum(len(rs) for rs in self.selected.values())

    def selected_rules(self) -> list[tuple[str, dict]]:
        return [(t, r) for t, rs in self.selected.items() for r in rs]

    def to_json(self) -> str:
        out = asdict(self)
        out["selected_rule_count"] = self.selected_rule_count
        return json.dumps(out, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_CSV_HEADER)
        for _, r in self.selected_rules():
            w.writerow([self.dataset, len(self.features), r["antecedents"], r["consequents"],
                        f"{r['support']:.3f}", f"{r['confidence']:.3f}", f"{r['lift']:.3f}"])
        return buf.getvalue()


def mine_rules(transactions: Sequence[frozenset], cfg: ExplainerConfig) -> list[AssociationRule]:
    db = TransactionDB(tuple(transactions))
    if not len(db):
        return []
    itemsets = mine_frequent_itemsets(build_fptree(db, cfg.min_support), cfg.min_support)
    return generate_rules(itemsets, len(db), cfg.min_confidence, cfg.targets)


def explain(
    graphs: Sequence[Graph],
    feature_set: Sequence[FeatureName | str],
    scorer_cfg: ScorerConfig | None = None,
    cfg: ExplainerConfig | None = None,
    dataset: str = "dataset",
    transactions_per_graph: Sequence[list[frozenset]] | None = None,
) -> ExplanationReport:
    """Run the full pipeline over ``graphs`` and pool transactions in input order.

    ``transactions_per_graph`` lets callers supply precomputed (e.g. parallel)
    per-graph transactions; they must follow ``graphs`` order.
    """
    if not graphs:
        raise ValueError("explain needs at least one graph")
    scorer_cfg = scorer_cfg or ScorerConfig()
    cfg = cfg or ExplainerConfig()
    feats = [f if isinstance(f, FeatureName) else FeatureName.parse(f) for f in feature_set]
    if transactions_per_graph is None:
        transactions_per_graph = [graph_transactions(g, feats, scorer_cfg) for g in graphs]

    if cfg.per_graph:
        rules = [r for ts in transactions_per_graph for r in mine_rules(ts, cfg)]
    else:
        rules = mine_rules([t for ts in transactions_per_graph for t in ts], cfg)
    selected = greedy_select(rules, cfg)
    return ExplanationReport(
        dataset=dataset,
        features=[f.value for f in feats],
        selected={t: [r.to_dict() for r in rs] for t, rs in selected.items()},
        mined_rule_count=len(rules),
        transaction_count=sum(len(ts) for ts in transactions_per_graph),
        graph_count=len(graphs),
        config={"explainer": {**asdict(cfg), "targets": list(cfg.targets)},
                "scorer": asdict(scorer_cfg)},
    )
