"""FP-Growth frequent itemset mining and single-consequent association rules."""

from __future__ import annotations

import csv
import io
import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

RULE_CSV_HEADER = ("antecedents", "consequents", "support", "confidence", "lift")
ITEM_SEPARATOR = " AND "


def intern_item(item: str) -> str:
    return sys.intern(str(item))


@dataclass(frozen=True)
class TransactionDB:
    transactions: tuple[frozenset, ...]

    @classmethod
    def from_iterable(cls, transactions: Iterable[Iterable[str]]) -> "TransactionDB":
        return cls(tuple(frozenset(intern_item(i) for i in t) for t in transactions))

    def __len__(self) -> int:
        return len(self.transactions)

    @property
    def item_counts(self) -> Counter:
        c: Counter = Counter()
        for t in self.transactions:
            c.update(t)
        return c


class FPNode:
    __slots__ = ("item", "count", "parent", "children", "link")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict = {}
        self.link: FPNode | None = None

    def __repr__(self):
        return f"FPNode({self.item!r}, {self.count})"


class FPTree:
    """Prefix tree with header chains in insertion order.

    ``order`` lists retained items in the global descending-frequency order
    (ties lexicographic); every root-to-node path respects it.
    """

    def __init__(self, order: Sequence[str], db_size: int, min_count: float):
        self.root = FPNode(None, None)
        self.order = list(order)
        self.rank = {item: i for i, item in enumerate(self.order)}
        self.heads: dict[str, FPNode] = {}
        self._tails: dict[str, FPNode] = {}
        self.db_size = db_size
        self.min_count = min_count

    def insert(self, items: Sequence[str], count: int = 1) -> None:
        node = self.root
        for item in items:
            child = node.children.get(item)
            if child is None:
                child = FPNode(item, node)
                node.children[item] = child
                if item in self._tails:
                    self._tails[item].link = child
                else:
                    self.heads[item] = child
                self._tails[item] = child
            child.count += count
            node = child

    def chain(self, item: str):
        node = self.heads.get(item)
        while node is not None:
            yield node
            node = node.link

    def item_support(self, item: str) -> int:
        return sum(n.count for n in self.chain(item))

    def is_empty(self) -> bool:
        return not self.root.children

    def paths(self) -> list[tuple[tuple[str, int], ...]]:
        """Every root-to-leaf path as ((item, count), ...); handy for inspection."""
        out = []

        def walk(node, acc):
            if not node.children:
                if acc:
                    out.append(tuple(acc))
                return
            for child in node.children.values():
                walk(child, acc + [(child.item, child.count)])

        walk(self.root, [])
        return out


def _is_frequent(count: int, db_size: int, min_support: float) -> bool:
    return db_size > 0 and count / db_size >= min_support


def _global_order(counts: dict, keep) -> list[str]:
    items = [i for i in counts if keep(counts[i])]
    return sorted(items, key=lambda i: (-counts[i], i))


def build_fptree(db: TransactionDB, min_support: float) -> FPTree:
    if not 0 < min_support <= 1:
        raise ValueError("min_support must lie in (0, 1]")
    n = len(db)
    counts = db.item_counts
    order = _global_order(counts, lambda c: _is_frequent(c, n, min_support))
    tree = FPTree(order, n, min_support * n)
    for t in db.transactions:
        kept = sorted((i for i in t if i in tree.rank), key=tree.rank.__getitem__)
        if kept:
            tree.insert(kept)
    return tree


@dataclass(frozen=True)
class FrequentItemset:
    items: frozenset
    support_count: int
    support: float

    def sort_key(self):
        return (len(self.items), tuple(sorted(self.items)))


def mine_frequent_itemsets(tree: FPTree, min_support: float) -> list[FrequentItemset]:
    n = tree.db_size
    found: dict[frozenset, int] = {}

    def grow(t: FPTree, suffix: tuple) -> None:
        # least frequent first, as in the classic formulation
        for item in reversed(t.order):
            support = t.item_support(item)
            if not _is_frequent(support, n, min_support):
                continue
            itemset = (item,) + suffix
            found[frozenset(itemset)] = support
            base = []
            for node in t.chain(item):
                path = []
                parent = node.parent
                while parent.item is not None:
                    path.append(parent.item)
                    parent = parent.parent
                if path:
                    base.append((path[::-1], node.count))
            if not base:
                continue
            cond_counts: Counter = Counter()
            for path, c in base:
                for i in path:
                    cond_counts[i] += c
            cond_order = _global_order(cond_counts, lambda c: _is_frequent(c, n, min_support))
            if not cond_order:
                continue
            cond = FPTree(cond_order, n, t.min_count)
            for path, c in base:
                kept = sorted((i for i in path if i in cond.rank), key=cond.rank.__getitem__)
                if kept:
                    cond.insert(kept, c)
            grow(cond, itemset)

    grow(tree, ())
    out = [FrequentItemset(items, c, c / n) for items, c in found.items()]
    out.sort(key=FrequentItemset.sort_key)
    return out


def fpgrowth(db: TransactionDB, min_support: float) -> list[FrequentItemset]:
    return mine_frequent_itemsets(build_fptree(db, min_support), min_support)


@dataclass(frozen=True)
class AssociationRule:
    antecedent: frozenset
    consequent: frozenset
    support: float
    confidence: float
    lift: float
    counts: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def antecedent_text(self) -> str:
        return ITEM_SEPARATOR.join(sorted(self.antecedent))

    @property
    def consequent_text(self) -> str:
        return ITEM_SEPARATOR.join(sorted(self.consequent))

    def metric(self, name: str) -> float:
        if name not in ("support", "confidence", "lift"):
            raise ValueError(f"unknown metric {name!r}")
        return getattr(self, name)

    def to_dict(self) -> dict:
        return {
            "antecedents": self.antecedent_text,
            "consequents": self.consequent_text,
            "support": self.support,
            "confidence": self.confidence,
            "lift": self.lift,
        }


def generate_rules(
    itemsets: Sequence[FrequentItemset],
    db_size: int,
    min_confidence: float,
    consequent_filter: Iterable[str],
) -> list[AssociationRule]:
    """Rules ``Z \\ {y} -> {y}`` for filter items ``y`` in frequent ``Z``.

    Antecedents never contain filter items.
    """
    targets = frozenset(consequent_filter)
    counts = {fi.items: fi.support_count for fi in itemsets}
    rules = []
    for fi in itemsets:
        hits = fi.items & targets
        if len(hits) != 1 or len(fi.items) < 2:
            continue
        (y,) = hits
        x = fi.items - {y}
        cx = counts[x]
        cy = counts[frozenset((y,))]
        if cy == 0:
            raise ZeroDivisionError(f"consequent {y!r} has zero support")
        confidence = fi.support_count / cx
        if confidence < min_confidence:
            continue
        support = fi.support_count / db_size
        lift = confidence / (cy / db_size)
        rules.append(
            AssociationRule(x, frozenset((y,)), support, confidence, lift,
                            counts={"xy": fi.support_count, "x": cx, "y": cy, "n": db_size})
        )
    return rules


def rules_to_csv(rules: Sequence[AssociationRule]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RULE_CSV_HEADER)
    for r in rules:
        w.writerow([r.antecedent_text, r.consequent_text,
                    f"{r.support:.17g}", f"{r.confidence:.17g}", f"{r.lift:.17g}"])
    return buf.getvalue()
