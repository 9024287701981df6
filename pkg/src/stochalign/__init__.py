"""stochalign: align an observed trace to a stochastic labeled Petri net.

The alignment minimizes a user-weighted loss over (edit distance, model-path
probability): ``alpha = 1`` recovers classic minimal-cost alignments,
``alpha = 0`` the most probable model path, anything between trades the two.
"""

from .formats import (
    AlignmentReport,
    SlpnParseError,
    parse_log,
    parse_slpn,
    parse_trace,
    render,
    serialize_slpn,
)
from .heuristics import (
    HeuristicEngine,
    HeuristicResult,
    build_gain_bounds,
    default_cap,
    edit_distance_heuristic,
    probability_gain_heuristic,
)
from .loss import LossParams, f_score, loss
from .nets import (
    Matrices,
    ModelPath,
    Multiset,
    NetError,
    StochasticNet,
    build_trace_net,
    enabled_transitions,
    fire,
    is_deadlock,
    matrices,
    path_probability,
    replay,
    transition_probability,
)
from .oracle import (
    EnumerationBudget,
    enumerate_paths,
    lcs_edit_distance,
    oracle_best,
    pareto_front,
)
from .search import (
    BudgetExceededError,
    NoDeadlockError,
    SearchConfig,
    stochastic_alignment,
)
from .sync import (
    Alignment,
    AlignmentMove,
    MoveKind,
    SyncProduct,
    alignment_from_product_path,
    build_sync_product,
    classify,
    move_cost,
    probability_gain,
    r_m,
)

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "AlignmentMove",
    "AlignmentReport",
    "BudgetExceededError",
    "EnumerationBudget",
    "HeuristicEngine",
    "HeuristicResult",
    "LossParams",
    "Matrices",
    "ModelPath",
    "MoveKind",
    "Multiset",
    "NetError",
    "NoDeadlockError",
    "SearchConfig",
    "SlpnParseError",
    "StochasticNet",
    "SyncProduct",
    "alignment_from_product_path",
    "build_gain_bounds",
    "build_sync_product",
    "build_trace_net",
    "classify",
    "default_cap",
    "edit_distance_heuristic",
    "enabled_transitions",
    "enumerate_paths",
    "f_score",
    "fire",
    "is_deadlock",
    "lcs_edit_distance",
    "loss",
    "matrices",
    "move_cost",
    "oracle_best",
    "pareto_front",
    "parse_log",
    "parse_slpn",
    "parse_trace",
    "path_probability",
    "probability_gain",
    "probability_gain_heuristic",
    "r_m",
    "render",
    "replay",
    "serialize_slpn",
    "stochastic_alignment",
    "transition_probability",
]
