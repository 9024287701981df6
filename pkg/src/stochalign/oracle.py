"""Brute-force ground truth: exhaustive path enumeration, LCS distance, exact argmin.

Everything here is deliberately independent of the search machinery so it can
serve as the oracle in tests: depth-first enumeration with exact rational
probabilities, dynamic-programming edit distance, and loss minimization by
exhaustion.
"""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .loss import loss as loss_fn
from .nets import (
    ModelPath,
    Multiset,
    StochasticNet,
    log10_fraction,
)
from .sync import SyncProduct, probability_gain

__all__ = [
    "EnumerationBudget",
    "PathEnumeration",
    "OracleBest",
    "ParetoFront",
    "ProductOracle",
    "TruncatedEnumerationWarning",
    "enumerate_paths",
    "lcs_edit_distance",
    "oracle_best",
    "pareto_front",
    "enumerate_product_completions",
    "strip_silent",
]


class TruncatedEnumerationWarning(UserWarning):
    """Enumeration hit a budget limit; results may be incomplete."""


@dataclass(frozen=True)
class EnumerationBudget:
    max_path_len: int = 64
    min_log_prob: float = -200.0
    max_paths: int = 200_000

    def __post_init__(self) -> None:
        if self.max_path_len <= 0 or self.max_paths <= 0:
            raise ValueError("enumeration budget limits must be positive")


@dataclass
class PathEnumeration:
    paths: list[tuple[ModelPath, Fraction]]
    truncated: bool


@dataclass
class OracleBest:
    path: ModelPath
    distance: int
    probability: Fraction
    loss: float
    truncated: bool


@dataclass
class ParetoFront:
    entries: list[tuple[ModelPath, int, Fraction]]
    truncated: bool


def enumerate_paths(net: StochasticNet, budget: EnumerationBudget | None = None) -> PathEnumeration:
    """All deadlock-terminated firing sequences within budget, with exact probabilities."""
    budget = budget or EnumerationBudget()
    out: list[tuple[ModelPath, Fraction]] = []
    truncated = False
    prefix: list[int] = []
    markings: list[Multiset] = [net.initial_marking]

    def enabled(m: Multiset) -> list[int]:
        return [
            t
            for t in range(net.num_transitions)
            if all(m.count(p) >= w for p, w in net.pre[t])
        ]

    def walk(m: Multiset, prob: Fraction) -> None:
        nonlocal truncated
        if len(out) >= budget.max_paths:
            truncated = True
            return
        moves = enabled(m)
        if not moves:
            out.append((ModelPath(tuple(prefix), tuple(markings)), prob))
            return
        if len(prefix) >= budget.max_path_len:
            truncated = True
            return
        total = sum((net.weights[t] for t in moves), Fraction(0))
        for t in moves:
            p_step = net.weights[t] / total
            child = prob * p_step
            if log10_fraction(child) < budget.min_log_prob:
                truncated = True
                continue
            m2 = m.difference(net.preset(t)).union(net.postset(t))
            prefix.append(t)
            markings.append(m2)
            walk(m2, child)
            prefix.pop()
            markings.pop()

    walk(net.initial_marking, Fraction(1))
    return PathEnumeration(out, truncated)


def lcs_edit_distance(a: Sequence, b: Sequence) -> int:
    """Insert/delete-only edit distance: |a| + |b| - 2 * LCS(a, b)."""
    n, m = len(a), len(b)
    prev = [0] * (m + 1)
    for i in range(1, n + 1):
        cur = [0] * (m + 1)
        ai = a[i - 1]
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return n + m - 2 * prev[m]


def strip_silent(net: StochasticNet, transitions: Sequence[int]) -> tuple[str, ...]:
    """Label projection of a transition sequence with silent steps removed."""
    return tuple(net.labels[t] for t in transitions if net.labels[t] is not None)


def _warn_if(truncated: bool, what: str) -> None:
    if truncated:
        warnings.warn(f"{what}: enumeration budget was hit", TruncatedEnumerationWarning)


def oracle_best(
    net: StochasticNet,
    trace: Sequence[str],
    alpha: float,
    budget: EnumerationBudget | None = None,
) -> OracleBest:
    """The loss-minimizing model path, found by exhaustion."""
    enum = enumerate_paths(net, budget)
    _warn_if(enum.truncated, "oracle_best")
    if not enum.paths:
        raise ValueError("net admits no model path within the enumeration budget")
    trace = tuple(trace)
    best: tuple | None = None
    for path, prob in enum.paths:
        d = lcs_edit_distance(trace, strip_silent(net, path.transitions))
        value = loss_fn(d, log10_fraction(prob), alpha)
        key = (value, d, -prob, path.transitions)
        if best is None or key < best[0]:
            best = (key, path, d, prob, value)
    _, path, d, prob, value = best
    return OracleBest(path, d, prob, value, enum.truncated)


def pareto_front(
    net: StochasticNet,
    trace: Sequence[str],
    budget: EnumerationBudget | None = None,
) -> ParetoFront:
    """Model paths not dominated under (minimize distance, maximize probability)."""
    enum = enumerate_paths(net, budget)
    _warn_if(enum.truncated, "pareto_front")
    trace = tuple(trace)
    scored = [
        (lcs_edit_distance(trace, strip_silent(net, path.transitions)), prob, path)
        for path, prob in enum.paths
    ]
    scored.sort(key=lambda e: (e[0], -e[1], e[2].transitions))
    entries: list[tuple[ModelPath, int, Fraction]] = []
    best_prob: Fraction | None = None
    for d, prob, path in scored:
        if best_prob is None or prob > best_prob:
            entries.append((path, d, prob))
            best_prob = prob
        elif prob == best_prob and entries and entries[-1][1] == d:
            entries.append((path, d, prob))  # exact tie on both axes
    return ParetoFront(entries, enum.truncated)


class ProductOracle:
    """Exact remaining-cost and remaining-gain values over a product state space.

    Explores every marking reachable from the product's initial marking once,
    then runs Dijkstra backwards from the deadlock markings: move costs are
    non-negative and probability gains never exceed one, so best-first
    settling is exact for both.  Intended for bounded desk-scale products.
    """

    def __init__(self, sp: SyncProduct, max_states: int = 200_000) -> None:
        self.sp = sp
        net = sp.net
        start = tuple(
            net.initial_marking.count(p) for p in range(net.num_places)
        )
        pre = [tuple(arcs) for arcs in net.pre]
        post = [tuple(arcs) for arcs in net.post]
        n_t = net.num_transitions
        model = sp.model

        # Forward exploration of the reachable state space.
        edges: dict[tuple[int, ...], list[tuple[int, tuple[int, ...], Fraction]]] = {}
        deadlocks: list[tuple[int, ...]] = []
        stack = [start]
        seen = {start}
        while stack:
            m = stack.pop()
            enabled = [t for t in range(n_t) if all(m[p] >= w for p, w in pre[t])]
            if not enabled:
                deadlocks.append(m)
                edges[m] = []
                continue
            total = sum(
                (
                    model.weights[u]
                    for u in range(model.num_transitions)
                    if all(m[p] >= w for p, w in model.pre[u])
                ),
                Fraction(0),
            )
            outs = []
            for t in enabled:
                child = list(m)
                for p, w in pre[t]:
                    child[p] -= w
                for p, w in post[t]:
                    child[p] += w
                child = tuple(child)
                model_t = sp.to_model[t]
                gain = Fraction(1) if model_t is None else model.weights[model_t] / total
                outs.append((t, child, gain))
                if child not in seen:
                    seen.add(child)
                    if len(seen) > max_states:
                        raise RuntimeError(f"product state space exceeds {max_states} markings")
                    stack.append(child)
            edges[m] = outs

        reverse: dict[tuple[int, ...], list[tuple[tuple[int, ...], int, Fraction]]] = {
            m: [] for m in edges
        }
        for m, outs in edges.items():
            for t, child, gain in outs:
                reverse[child].append((m, self.sp.costs[t], gain))

        # Backward Dijkstra for minimal remaining cost.
        cost: dict[tuple[int, ...], int] = {}
        heap: list[tuple[int, int, tuple[int, ...]]] = []
        tie = 0
        for m in deadlocks:
            heapq.heappush(heap, (0, tie, m))
            tie += 1
        while heap:
            c, _, m = heapq.heappop(heap)
            if m in cost:
                continue
            cost[m] = c
            for prev, move_cost, _ in reverse[m]:
                if prev not in cost:
                    tie += 1
                    heapq.heappush(heap, (c + move_cost, tie, prev))

        # Backward best-first for maximal remaining gain (factors <= 1).
        gain_map: dict[tuple[int, ...], Fraction] = {}
        gheap: list[tuple[Fraction, int, tuple[int, ...]]] = []
        tie = 0
        for m in deadlocks:
            heapq.heappush(gheap, (Fraction(-1), tie, m))
            tie += 1
        while gheap:
            neg, _, m = heapq.heappop(gheap)
            if m in gain_map:
                continue
            gain_map[m] = -neg
            for prev, _, g in reverse[m]:
                if prev not in gain_map:
                    tie += 1
                    heapq.heappush(gheap, (neg * g, tie, prev))

        self._cost = cost
        self._gain = gain_map
        self.num_states = len(edges)
        self.num_deadlocks = len(deadlocks)

    def min_remaining_cost(self, marking: tuple[int, ...]) -> int | None:
        """Least move cost of any completion from ``marking``; None if no deadlock."""
        return self._cost.get(tuple(marking))

    def max_remaining_gain(self, marking: tuple[int, ...]) -> Fraction | None:
        """Largest probability gain of any completion from ``marking``."""
        return self._gain.get(tuple(marking))


def enumerate_product_completions(
    sp: SyncProduct,
    m: Multiset,
    budget: EnumerationBudget | None = None,
) -> tuple[list[tuple[tuple[int, ...], int, Fraction]], bool]:
    """All move sequences from ``m`` to a product deadlock: (moves, cost, gain)."""
    budget = budget or EnumerationBudget()
    net = sp.net
    out: list[tuple[tuple[int, ...], int, Fraction]] = []
    truncated = False
    prefix: list[int] = []

    def walk(m: Multiset, cost: int, gain: Fraction) -> None:
        nonlocal truncated
        if len(out) >= budget.max_paths:
            truncated = True
            return
        moves = [
            t
            for t in range(net.num_transitions)
            if all(m.count(p) >= w for p, w in net.pre[t])
        ]
        if not moves:
            out.append((tuple(prefix), cost, gain))
            return
        if len(prefix) >= budget.max_path_len:
            truncated = True
            return
        for t in moves:
            g = probability_gain(sp, m, t)
            m2 = m.difference(net.preset(t)).union(net.postset(t))
            prefix.append(t)
            walk(m2, cost + sp.costs[t], gain * g)
            prefix.pop()

    walk(m, 0, Fraction(1))
    return out, truncated
