"""Best-first search for the loss-minimizing alignment.

A modified A* over product markings: two accumulators (move cost and log
probability gain), a non-additive score combining them with the MILP bounds,
dominance-based re-expansion instead of a closed list, and termination on the
first deadlock marking dequeued.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass
from fractions import Fraction

from .heuristics import HeuristicEngine, marking_vector
from .loss import LossParams, f_score
from .nets import StochasticNet, log10_fraction
from .sync import Alignment, SyncProduct, alignment_from_product_path, build_sync_product

__all__ = [
    "SearchConfig",
    "SearchNode",
    "DominanceStore",
    "ExpansionRecord",
    "SearchError",
    "NoDeadlockError",
    "BudgetExceededError",
    "stochastic_alignment",
    "expand",
]


class SearchError(Exception):
    pass


class NoDeadlockError(SearchError):
    """No deadlock marking is reachable from the initial product marking."""


class BudgetExceededError(SearchError):
    """Node budget exhausted; carries the best deadlock seen so far, if any."""

    def __init__(self, message: str, best: Alignment | None = None) -> None:
        super().__init__(message)
        self.best = best


@dataclass
class SearchConfig:
    node_budget: int = 5_000_000
    cap: int | None = None
    rational: bool = False
    lp_relaxation: bool = False
    heuristic_cache_size: int = 100_000
    #: test mode: append one ExpansionRecord per dequeued node
    expansion_sink: list | None = None


@dataclass(frozen=True)
class ExpansionRecord:
    marking: tuple[int, ...]
    g_d: int
    log_g_p: float
    g_p: Fraction | None
    h_d: float
    log_h_p: float
    f: float
    is_goal: bool


@dataclass
class SearchNode:
    """A visited product marking with its two accumulators and score."""

    marking: tuple[int, ...]
    g_d: int
    log_g_p: float
    g_p: Fraction | None
    h_d: float
    log_h_p: float
    f: float
    parent: "SearchNode | None"
    move: int | None
    seq: int
    is_goal: bool

    def path_moves(self) -> tuple[int, ...]:
        moves = []
        node = self
        while node.parent is not None:
            moves.append(node.move)
            node = node.parent
        return tuple(reversed(moves))


class DominanceStore:
    """Per-marking Pareto sets of already-expanded (cost, probability) pairs.

    An arrival is pruned when some expanded pair at the same marking is at
    least as good on both axes; incomparable pairs coexist and the marking is
    expanded again.  Probability keys compare with "larger is better": exact
    fractions in rational mode, log floats otherwise.
    """

    def __init__(self) -> None:
        self._pairs: dict[tuple[int, ...], list[tuple[int, object]]] = {}

    def dominated(self, marking: tuple[int, ...], g_d: int, p_key) -> bool:
        pairs = self._pairs.get(marking)
        if not pairs:
            return False
        return any(d <= g_d and p >= p_key for d, p in pairs)

    def add(self, marking: tuple[int, ...], g_d: int, p_key) -> None:
        pairs = self._pairs.setdefault(marking, [])
        pairs[:] = [(d, p) for d, p in pairs if not (g_d <= d and p_key >= p)]
        pairs.append((g_d, p_key))

    def __len__(self) -> int:
        return len(self._pairs)


def _p_key(node: SearchNode, rational: bool):
    return node.g_p if rational else node.log_g_p


def expand(
    node: SearchNode,
    sp: SyncProduct,
    engine: HeuristicEngine,
    store: DominanceStore,
    alpha: float,
    *,
    rational: bool = False,
    seq: "itertools.count | None" = None,
) -> list[SearchNode]:
    """One child per enabled product transition, minus dominated arrivals."""
    if node.is_goal:
        raise SearchError("cannot expand a deadlock marking")
    seq = seq if seq is not None else itertools.count(node.seq + 1)
    net = sp.net
    model = sp.model
    m = node.marking
    need_d = alpha > 0.0
    need_p = alpha < 1.0

    enabled = [
        t
        for t in range(net.num_transitions)
        if all(m[p] >= w for p, w in net.pre[t])
    ]
    total_weight = sum(
        (
            model.weights[u]
            for u in range(model.num_transitions)
            if all(m[p] >= w for p, w in model.pre[u])
        ),
        Fraction(0),
    )

    children: list[SearchNode] = []
    for t in enabled:
        marking = list(m)
        for p, w in net.pre[t]:
            marking[p] -= w
        for p, w in net.post[t]:
            marking[p] += w
        marking = tuple(marking)

        g_d = node.g_d + sp.costs[t]
        model_t = sp.to_model[t]
        if model_t is None:
            gain = Fraction(1)
        else:
            gain = model.weights[model_t] / total_weight
        if rational:
            g_p = node.g_p * gain
            log_g_p = log10_fraction(g_p)
        else:
            g_p = None
            log_g_p = node.log_g_p + (log10_fraction(gain) if gain != 1 else 0.0)

        p_key = g_p if rational else log_g_p
        if store.dominated(marking, g_d, p_key):
            continue

        is_goal = not any(
            all(marking[p] >= w for p, w in net.pre[u]) for u in range(net.num_transitions)
        )
        if is_goal:
            h_d_val, log_h_p_val = 0.0, 0.0
        else:
            h_d, h_p = engine.evaluate(marking, need_d=need_d, need_p=need_p)
            h_d_val = h_d.value if h_d is not None else 0.0
            log_h_p_val = h_p.value if h_p is not None else 0.0
        f = f_score(g_d, h_d_val, log_g_p, log_h_p_val, alpha)
        children.append(
            SearchNode(
                marking=marking,
                g_d=g_d,
                log_g_p=log_g_p,
                g_p=g_p,
                h_d=h_d_val,
                log_h_p=log_h_p_val,
                f=f,
                parent=node,
                move=t,
                seq=next(seq),
                is_goal=is_goal,
            )
        )
    return children


def stochastic_alignment(
    net: StochasticNet,
    trace,
    alpha: float,
    config: SearchConfig | None = None,
) -> Alignment:
    """Optimal alignment of ``trace`` against ``net`` under balance factor ``alpha``.

    Raises NoDeadlockError when the product admits no deadlock, and
    BudgetExceededError (best incumbent attached) when the node budget runs
    out first.
    """
    started = time.perf_counter()
    config = config or SearchConfig()
    LossParams(alpha)  # validate range
    trace = tuple(trace)

    sp = build_sync_product(trace, net)
    engine = HeuristicEngine(
        sp,
        cap=config.cap,
        relax=config.lp_relaxation,
        cache_size=config.heuristic_cache_size,
    )
    root_marking = marking_vector(sp, sp.net.initial_marking)
    need_p = alpha < 1.0
    # h_d is always computed at the root: its infeasibility is the signal that
    # no deadlock satisfies even the state-equation relaxation.
    root_h_d, root_h_p = engine.evaluate(root_marking, need_d=True, need_p=need_p)
    root_infeasible = root_h_d.status == "infeasible"

    root_is_goal = root_h_d.status == "deadlock"
    root = SearchNode(
        marking=root_marking,
        g_d=0,
        log_g_p=0.0,
        g_p=Fraction(1) if config.rational else None,
        h_d=root_h_d.value,
        log_h_p=root_h_p.value if root_h_p is not None else 0.0,
        f=f_score(0, root_h_d.value, 0.0, root_h_p.value if root_h_p is not None else 0.0, alpha),
        parent=None,
        move=None,
        seq=0,
        is_goal=root_is_goal,
    )

    seq = itertools.count(1)
    store = DominanceStore()
    # Ties on f prefer cheaper nodes, then FIFO.  With probability-flat
    # regions (alpha = 0) a depth-first tie-break would happily return a
    # wasteful embedding of the optimal path; cheap-first keeps the witness
    # minimal and costs nothing measurably elsewhere.
    heap: list[tuple[float, int, int, SearchNode]] = []
    heapq.heappush(heap, (root.f, root.g_d, root.seq, root))
    expanded = 0
    best_goal: SearchNode | None = None
    sink = config.expansion_sink

    def record(node: SearchNode) -> None:
        if sink is not None:
            sink.append(
                ExpansionRecord(
                    node.marking,
                    node.g_d,
                    node.log_g_p,
                    node.g_p,
                    node.h_d,
                    node.log_h_p,
                    node.f,
                    node.is_goal,
                )
            )

    while heap:
        _, _, _, node = heapq.heappop(heap)
        p_key = _p_key(node, config.rational)
        if store.dominated(node.marking, node.g_d, p_key):
            continue
        record(node)
        if node.is_goal:
            runtime_ms = (time.perf_counter() - started) * 1e3
            alignment = alignment_from_product_path(
                sp,
                node.path_moves(),
                alpha,
                expanded_nodes=expanded,
                runtime_ms=runtime_ms,
            )
            assert alignment.cost == node.g_d
            return alignment
        if expanded >= config.node_budget:
            best = None
            if best_goal is not None:
                best = alignment_from_product_path(
                    sp,
                    best_goal.path_moves(),
                    alpha,
                    expanded_nodes=expanded,
                    runtime_ms=(time.perf_counter() - started) * 1e3,
                )
            if root_infeasible:
                raise NoDeadlockError(
                    "deadlock MILP infeasible at the initial marking and node "
                    f"budget {config.node_budget} exhausted"
                )
            raise BudgetExceededError(f"node budget {config.node_budget} exhausted", best)
        expanded += 1
        store.add(node.marking, node.g_d, p_key)

        for child in expand(node, sp, engine, store, alpha, rational=config.rational, seq=seq):
            if child.is_goal and (best_goal is None or child.f < best_goal.f):
                best_goal = child
            heapq.heappush(heap, (child.f, child.g_d, child.seq, child))

    raise NoDeadlockError("search space exhausted without reaching a deadlock marking")
