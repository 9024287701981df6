"""Synchronous product of a trace net and a stochastic net: moves, costs, gains."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .loss import loss as loss_fn
from .nets import (
    InvalidPathError,
    Multiset,
    NotEnabledError,
    StochasticNet,
    log10_fraction,
)

__all__ = [
    "MoveKind",
    "SyncProduct",
    "AlignmentMove",
    "Alignment",
    "build_sync_product",
    "probability_gain",
    "r_m",
    "classify",
    "move_cost",
    "alignment_from_product_path",
]


class MoveKind(Enum):
    SYNC = "sync"
    MODEL = "model"
    SILENT_MODEL = "silent-model"
    TRACE = "trace"


# Moves that represent an insertion or deletion cost one; the rest are free.
_COST = {MoveKind.SYNC: 0, MoveKind.SILENT_MODEL: 0, MoveKind.MODEL: 1, MoveKind.TRACE: 1}


@dataclass(frozen=True)
class SyncProduct:
    """The product net plus per-transition move bookkeeping.

    Product places are the model places (indices ``0..num_model_places-1``)
    followed by the trace-net places.  ``to_model`` maps model and
    synchronous moves back to the transition of the original net;
    ``trace_pos`` maps trace and synchronous moves to the trace position.
    Product transitions carry no weights of their own: all stochastic
    information is read from ``model`` through ``to_model``.
    """

    net: StochasticNet
    model: StochasticNet
    kinds: tuple[MoveKind, ...]
    costs: tuple[int, ...]
    to_model: tuple[int | None, ...]
    trace_pos: tuple[int | None, ...]
    num_model_places: int
    trace_len: int

    @property
    def model_places(self) -> range:
        return range(self.num_model_places)


def build_sync_product(trace: Sequence[str], model: StochasticNet) -> SyncProduct:
    """Combine the trace net of ``trace`` with ``model``.

    The product holds every trace move, every model move, and one
    synchronous transition per (trace position, model transition) pair with
    matching non-silent labels -- duplicate labels yield duplicate
    synchronous transitions.  Activities absent from the model alphabet
    simply produce no synchronous moves.
    """
    trace = tuple(trace)
    offset = model.num_places

    places = list(model.place_names) + [f"q{i}" for i in range(len(trace) + 1)]
    names: list[str] = []
    labels: list[str | None] = []
    pre: list = []
    post: list = []
    kinds: list[MoveKind] = []
    to_model: list[int | None] = []
    trace_pos: list[int | None] = []

    for t in range(model.num_transitions):
        silent = model.is_silent(t)
        names.append(f"(>>,{model.transition_names[t]})")
        labels.append(model.labels[t])
        pre.append(dict(model.pre[t]))
        post.append(dict(model.post[t]))
        kinds.append(MoveKind.SILENT_MODEL if silent else MoveKind.MODEL)
        to_model.append(t)
        trace_pos.append(None)

    for i, activity in enumerate(trace):
        names.append(f"({activity}[{i}],>>)")
        labels.append(activity)
        pre.append({offset + i: 1})
        post.append({offset + i + 1: 1})
        kinds.append(MoveKind.TRACE)
        to_model.append(None)
        trace_pos.append(i)

    for i, activity in enumerate(trace):
        for t in range(model.num_transitions):
            if model.labels[t] == activity:
                names.append(f"({activity}[{i}],{model.transition_names[t]})")
                labels.append(activity)
                pre.append({**dict(model.pre[t]), offset + i: 1})
                post.append({**dict(model.post[t]), offset + i + 1: 1})
                kinds.append(MoveKind.SYNC)
                to_model.append(t)
                trace_pos.append(i)

    initial = {p: n for p, n in model.initial_marking.items()}
    initial[offset] = initial.get(offset, 0) + 1
    product = StochasticNet.build(
        places,
        [(names[t], labels[t], 1, pre[t], post[t]) for t in range(len(names))],
        initial,
    )
    return SyncProduct(
        net=product,
        model=model,
        kinds=tuple(kinds),
        costs=tuple(_COST[k] for k in kinds),
        to_model=tuple(to_model),
        trace_pos=tuple(trace_pos),
        num_model_places=model.num_places,
        trace_len=len(trace),
    )


def r_m(sp: SyncProduct, m: Multiset) -> Multiset:
    """Restrict a product marking to the model places."""
    return Multiset({p: n for p, n in m.items() if p < sp.num_model_places})


def classify(sp: SyncProduct, t: int) -> MoveKind:
    return sp.kinds[t]


def move_cost(sp: SyncProduct, t: int) -> int:
    return sp.costs[t]


def probability_gain(sp: SyncProduct, m: Multiset, t: int) -> Fraction:
    """Per-move probability factor: 1 for trace moves, else the firing
    probability of the underlying model transition at the restricted marking."""
    if not all(m.count(p) >= mult for p, mult in sp.net.pre[t]):
        raise NotEnabledError(f"product transition {t} not enabled")
    if sp.kinds[t] is MoveKind.TRACE:
        return Fraction(1)
    model = sp.model
    model_t = sp.to_model[t]
    assert model_t is not None
    total = Fraction(0)
    for u in range(model.num_transitions):
        if all(m.count(p) >= mult for p, mult in model.pre[u]):
            total += model.weights[u]
    return model.weights[model_t] / total


@dataclass(frozen=True)
class AlignmentMove:
    kind: MoveKind
    trace_pos: int | None
    model_transition: int | None
    gain: Fraction

    @property
    def is_silent(self) -> bool:
        return self.kind is MoveKind.SILENT_MODEL


@dataclass(frozen=True)
class Alignment:
    """A move sequence from the initial product marking to a deadlock, with totals."""

    moves: tuple[AlignmentMove, ...]
    alpha: float
    cost: int
    probability: Fraction
    log10_probability: float
    loss: float
    expanded_nodes: int | None = None
    runtime_ms: float | None = None

    def trace_projection(self, trace: Sequence[str]) -> tuple[str, ...]:
        """The trace-side labels of the alignment (drops model-only moves)."""
        return tuple(
            trace[mv.trace_pos]
            for mv in self.moves
            if mv.trace_pos is not None
        )

    def model_projection(self) -> tuple[int, ...]:
        """The model transitions fired by the alignment, silent ones included."""
        return tuple(
            mv.model_transition for mv in self.moves if mv.model_transition is not None
        )


def alignment_from_product_path(
    sp: SyncProduct,
    transitions: Sequence[int],
    alpha: float,
    *,
    expanded_nodes: int | None = None,
    runtime_ms: float | None = None,
) -> Alignment:
    """Replay product transitions from the initial marking and tally the totals.

    The sequence must be firable and end in a deadlock marking of the product.
    """
    m = sp.net.initial_marking
    moves = []
    cost = 0
    prob = Fraction(1)
    for t in transitions:
        if not all(m.count(p) >= mult for p, mult in sp.net.pre[t]):
            raise InvalidPathError(f"product transition {t} not enabled during replay")
        gain = probability_gain(sp, m, t)
        moves.append(AlignmentMove(sp.kinds[t], sp.trace_pos[t], sp.to_model[t], gain))
        cost += sp.costs[t]
        prob *= gain
        m = m.difference(sp.net.preset(t)).union(sp.net.postset(t))
    for t in range(sp.net.num_transitions):
        if all(m.count(p) >= mult for p, mult in sp.net.pre[t]):
            raise InvalidPathError("alignment does not end in a deadlock marking")
    log_p = log10_fraction(prob)
    return Alignment(
        moves=tuple(moves),
        alpha=float(alpha),
        cost=cost,
        probability=prob,
        log10_probability=log_p,
        loss=loss_fn(cost, log_p, alpha),
        expanded_nodes=expanded_nodes,
        runtime_ms=runtime_ms,
    )
