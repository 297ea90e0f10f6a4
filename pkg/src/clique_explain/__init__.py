"""Maximum-clique scoring, greedy decoding and association-rule explanations."""

from .decoder import DecoderConfig, decode_clique
from .explainer import (
    BOTTOM_ITEM,
    TOP_ITEM,
    ExplainerConfig,
    ExplanationReport,
    explain,
    greedy_select,
    is_disjoint,
    parse_antecedents,
)
from .features import FEATURE_SETS, FeatureMatrix, FeatureName, compute_features, percentile_bin
from .fpgrowth import AssociationRule, TransactionDB, build_fptree, generate_rules, mine_frequent_itemsets
from .graph import (
    CliqueResult,
    Graph,
    GraphStats,
    brute_force_max_clique,
    is_clique,
    load_dimacs_clq,
    load_edge_list,
    planted_clique,
    stats,
)
from .scorer import ScorerConfig, mcp_loss, mcp_loss_gradient, minmax_scale, optimize_probabilities

__version__ = "0.1.0"
