"""Admissible MILP bounds on remaining edit distance and remaining probability gain.

Both heuristics minimize/maximize a linear objective over Parikh vectors x
subject to the state equation ``M_d = M + I.x`` and a big-M encoding of
"``M_d`` is a deadlock marking": for every transition, some preset place must
hold fewer tokens than that transition needs.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import milp
from .nets import Multiset, log10_fraction, matrices
from .sync import MoveKind, SyncProduct

__all__ = [
    "HeuristicResult",
    "DeadlockEncoding",
    "HeuristicEngine",
    "build_gain_bounds",
    "default_cap",
    "edit_distance_heuristic",
    "probability_gain_heuristic",
    "marking_vector",
]

# Upward slack applied to the probability bound: float round-off in the LP
# must never push the reported upper bound below the true optimum.
_LOG_SLACK = 1e-9


@dataclass(frozen=True)
class HeuristicResult:
    """One heuristic evaluation: the bound, its Parikh vector, and quality hints.

    ``value`` is the edit-distance lower bound or the log10 of the
    probability-gain upper bound.  ``exact_hint`` says whether the Parikh
    vector might correspond to a real firing sequence; fallbacks and capped
    or infeasible solves report False.
    """

    value: float
    parikh: tuple[int, ...]
    exact_hint: bool
    status: str


@dataclass(frozen=True)
class DeadlockEncoding:
    """Big-M bookkeeping: indicator variables y(t, p) and per-place token bounds."""

    y_vars: dict[tuple[int, int], int]
    big_m: dict[int, int]
    forced_ub: dict[int, int]
    implied: tuple[int, ...]
    dead: tuple[int, ...]


def marking_vector(sp: SyncProduct, m: Multiset) -> tuple[int, ...]:
    vec = [0] * sp.net.num_places
    for p, n in m.items():
        vec[p] = n
    return tuple(vec)


def default_cap(sp: SyncProduct) -> int:
    """Per-transition firing cap: trace length + model places + initial tokens
    + a loop allowance of two firings per model transition."""
    model = sp.model
    return (
        sp.trace_len
        + model.num_places
        + model.initial_marking.total()
        + 2 * model.num_transitions
    )


def build_gain_bounds(sp: SyncProduct) -> tuple[Fraction, ...]:
    """Static per-transition upper bounds on the probability gain.

    A trace move always gains 1.  A move backed by model transition t is
    bounded by w(t) over the summed weights of all model transitions whose
    preset is included in t's preset: wherever t is enabled, those are
    co-enabled, so the true denominator is at least that sum.
    """
    model = sp.model
    presets = [dict(model.pre[t]) for t in range(model.num_transitions)]

    def dominates(a: dict, b: dict) -> bool:
        return all(b.get(p, 0) >= w for p, w in a.items())

    model_bound: list[Fraction] = []
    for t in range(model.num_transitions):
        denom = sum(
            (model.weights[u] for u in range(model.num_transitions) if dominates(presets[u], presets[t])),
            Fraction(0),
        )
        model_bound.append(model.weights[t] / denom)

    out = []
    for t in range(sp.net.num_transitions):
        if sp.kinds[t] is MoveKind.TRACE:
            out.append(Fraction(1))
        else:
            out.append(model_bound[sp.to_model[t]])
    return tuple(out)


class HeuristicEngine:
    """Shared state for heuristic evaluation over one synchronous product.

    Assembles the deadlock MILP once per distinct marking (LRU-memoized) and
    solves it for whichever of the two objectives the caller needs.  All
    failure modes (infeasible, capped, solver breakdown) collapse to the
    conservative values h_d = 0 and h_p = 1, which keeps the search admissible.
    """

    def __init__(
        self,
        sp: SyncProduct,
        *,
        cap: int | None = None,
        relax: bool = False,
        cache_size: int = 100_000,
    ) -> None:
        self.sp = sp
        self.cap = default_cap(sp) if cap is None else int(cap)
        if self.cap < 1:
            raise ValueError("cap must be at least 1")
        self.relax = relax
        self.cache_size = cache_size
        self._cache: OrderedDict[tuple[int, ...], list[HeuristicResult | None]] = OrderedDict()

        net = sp.net
        self.n_places = net.num_places
        self.n_trans = net.num_transitions
        self.incidence = matrices(net).incidence.astype(np.float64)
        self.pre = net.pre
        self.post = net.post
        self.cost = np.array(sp.costs, dtype=np.float64)
        self.log_gain = np.array(
            [float(log10_fraction(g)) if g < 1 else 0.0 for g in build_gain_bounds(sp)]
        )
        self._zeros = tuple([0] * self.n_trans)

    # -- reachability-free structural analysis ------------------------------

    def _alive(self, m_vec: tuple[int, ...]) -> list[bool]:
        """Transitions not provably dead: every preset place is markable, where
        markable means currently marked or fed by some alive transition."""
        markable = [n > 0 for n in m_vec]
        alive = [False] * self.n_trans
        changed = True
        while changed:
            changed = False
            for t in range(self.n_trans):
                if alive[t]:
                    continue
                if all(markable[p] for p, _ in self.pre[t]):
                    alive[t] = True
                    changed = True
                    for p, _ in self.post[t]:
                        markable[p] = True
        return alive

    def _enabled_any(self, m_vec: tuple[int, ...]) -> bool:
        for t in range(self.n_trans):
            if all(m_vec[p] >= w for p, w in self.pre[t]):
                return True
        return False

    # -- problem assembly ----------------------------------------------------

    def assemble(self, m_vec: tuple[int, ...]):
        """Build the shared constraint system for marking ``m_vec``.

        Returns ``(alive_idx, rows, lower, upper, integer, cap_vars, encoding)``
        or None when some alive transition has an empty preset (no deadlock
        can exist).  Constraints implied by stronger single-preset rows are
        dropped; structurally dead transitions need no constraint at all
        since their preset places provably stay empty.
        """
        alive = self._alive(m_vec)
        alive_idx = [t for t in range(self.n_trans) if alive[t]]
        dead = tuple(t for t in range(self.n_trans) if not alive[t])
        for t in alive_idx:
            if not self.pre[t]:
                return None

        n_x = len(alive_idx)
        I_a = self.incidence[:, alive_idx]
        m_arr = np.array(m_vec, dtype=np.float64)

        forced_ub: dict[int, int] = {}
        for t in alive_idx:
            if len(self.pre[t]) == 1:
                p, w = self.pre[t][0]
                forced_ub[p] = min(forced_ub.get(p, w - 1), w - 1)

        multi: list[int] = []
        implied: list[int] = []
        for t in alive_idx:
            if len(self.pre[t]) <= 1:
                continue
            if any(forced_ub.get(p, math.inf) <= w - 1 for p, w in self.pre[t]):
                implied.append(t)
            else:
                multi.append(t)

        y_vars: dict[tuple[int, int], int] = {}
        for t in multi:
            for p, _ in self.pre[t]:
                y_vars[(t, p)] = n_x + len(y_vars)
        n_vars = n_x + len(y_vars)

        pos_sum = np.maximum(I_a, 0.0).sum(axis=1)
        big_m = {p: int(m_vec[p] + self.cap * pos_sum[p]) for p in range(self.n_places)}

        rows: list[tuple[np.ndarray, str, float]] = []

        # M_d >= 0 wherever some alive transition can drain the place.
        for p in range(self.n_places):
            if (I_a[p] < 0).any():
                coef = np.zeros(n_vars)
                coef[:n_x] = I_a[p]
                rows.append((coef, ">=", -m_vec[p]))

        # Single-preset moves force a hard per-place token cap.
        for p, ub in sorted(forced_ub.items()):
            coef = np.zeros(n_vars)
            coef[:n_x] = I_a[p]
            rows.append((coef, "<=", ub - m_vec[p]))

        # Multi-preset moves: pick at least one starved preset place.
        for t in multi:
            pick = np.zeros(n_vars)
            for p, w in self.pre[t]:
                col = y_vars[(t, p)]
                pick[col] = 1.0
                coef = np.zeros(n_vars)
                coef[:n_x] = I_a[p]
                coef[col] = big_m[p]
                rows.append((coef, "<=", w - 1 - m_vec[p] + big_m[p]))
            rows.append((pick, ">=", 1.0))

        lower = np.zeros(n_vars)
        upper = np.empty(n_vars)
        upper[:n_x] = float(self.cap)
        upper[n_x:] = 1.0
        integer = np.ones(n_vars, dtype=bool)
        cap_vars = tuple(range(n_x))
        encoding = DeadlockEncoding(y_vars, big_m, forced_ub, tuple(implied), dead)
        return alive_idx, rows, lower, upper, integer, cap_vars, encoding

    # -- solving -------------------------------------------------------------

    def _solve(self, m_vec: tuple[int, ...], want: str) -> HeuristicResult:
        if not self._enabled_any(m_vec):
            return HeuristicResult(0.0, self._zeros, True, "deadlock")
        assembly = self.assemble(m_vec)
        if assembly is None:
            return HeuristicResult(0.0, self._zeros, False, "infeasible")
        alive_idx, rows, lower, upper, integer, cap_vars, _ = assembly
        n_x = len(alive_idx)
        objective = np.zeros(lower.size)
        if want == "d":
            objective[:n_x] = self.cost[alive_idx]
            sense = "min"
        else:
            objective[:n_x] = self.log_gain[alive_idx]
            sense = "max"
        problem = milp.MilpProblem(objective, sense, rows, lower, upper, integer, cap_vars)
        try:
            sol = milp.solve(problem, relax_integrality=self.relax)
        except milp.MilpError:
            return HeuristicResult(0.0, self._zeros, False, "solver-error")
        if sol.status is milp.SolveStatus.INFEASIBLE:
            return HeuristicResult(0.0, self._zeros, False, "infeasible")
        if sol.status is milp.SolveStatus.CAP_REACHED:
            return HeuristicResult(0.0, self._zeros, False, "cap-reached")

        x = sol.values[:n_x]
        integral = bool(np.all(np.abs(x - np.round(x)) <= 1e-6))
        parikh = [0] * self.n_trans
        for k, t in enumerate(alive_idx):
            parikh[t] = int(round(x[k]))
        if want == "d":
            if self.relax and not integral:
                value = max(0.0, sol.objective_value - _LOG_SLACK)
            else:
                value = float(sum(sp_cost * n for sp_cost, n in zip(self.cost[alive_idx], np.round(x))))
                value = max(0.0, value)
        else:
            # The slack is applied uniformly and NOT clamped at zero: a bound a
            # hair above zero keeps exact f-ties exact across siblings, and a
            # larger upper bound is still admissible.  The spec-facing wrapper
            # clamps; f_score absorbs the residue.
            value = sol.objective_value + _LOG_SLACK
        return HeuristicResult(value, tuple(parikh), integral, "optimal")

    def evaluate(
        self,
        m_vec: tuple[int, ...],
        *,
        need_d: bool = True,
        need_p: bool = True,
    ) -> tuple[HeuristicResult | None, HeuristicResult | None]:
        """Memoized (h_d, h_p) for a marking; entries are computed on demand."""
        slot = self._cache.get(m_vec)
        if slot is None:
            slot = [None, None]
            self._cache[m_vec] = slot
            if len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        else:
            self._cache.move_to_end(m_vec)
        if need_d and slot[0] is None:
            slot[0] = self._solve(m_vec, "d")
        if need_p and slot[1] is None:
            slot[1] = self._solve(m_vec, "p")
        return slot[0], slot[1]


def edit_distance_heuristic(
    sp: SyncProduct,
    m: Multiset,
    cap: int | None = None,
    *,
    relax: bool = False,
) -> HeuristicResult:
    """Lower bound on the move cost still needed to reach a deadlock marking."""
    engine = HeuristicEngine(sp, cap=cap, relax=relax)
    h_d, _ = engine.evaluate(marking_vector(sp, m), need_d=True, need_p=False)
    return h_d


def probability_gain_heuristic(
    sp: SyncProduct,
    m: Multiset,
    cap: int | None = None,
    *,
    relax: bool = False,
) -> HeuristicResult:
    """Upper bound (as log10 <= 0) on the probability gain still collectable."""
    engine = HeuristicEngine(sp, cap=cap, relax=relax)
    _, h_p = engine.evaluate(marking_vector(sp, m), need_d=False, need_p=True)
    if h_p.value > 0.0:
        h_p = replace(h_p, value=0.0)
    return h_p
