"""Stochastic labeled Petri nets: markings, firing semantics, trace nets, matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Multiset",
    "StochasticNet",
    "ModelPath",
    "Matrices",
    "PathProbability",
    "NetError",
    "NotEnabledError",
    "InvalidPathError",
    "enabled_transitions",
    "is_deadlock",
    "fire",
    "transition_probability",
    "path_probability",
    "replay",
    "build_trace_net",
    "matrices",
    "log10_fraction",
]


class NetError(ValueError):
    """Structural problem with a net, marking, or path."""


class NotEnabledError(NetError):
    """A transition was fired or scored while not enabled."""


class InvalidPathError(NetError):
    """A transition sequence cannot be replayed to a deadlock marking."""


class Multiset:
    """Immutable multiset over hashable elements.

    Union is pointwise addition, so ``(a + b) - b == a`` whenever the
    difference is defined; ``difference`` requires the subtrahend to be
    included in the minuend.  Entries with count zero are never stored.
    """

    __slots__ = ("_counts", "_hash")

    def __init__(self, counts: Mapping | Iterable = ()) -> None:
        acc: dict = {}
        if isinstance(counts, Mapping):
            for elem, n in counts.items():
                if not isinstance(n, int):
                    raise NetError(f"multiset count for {elem!r} must be an int, got {n!r}")
                if n < 0:
                    raise NetError(f"negative multiset count for {elem!r}: {n}")
                if n:
                    acc[elem] = acc.get(elem, 0) + n
        else:
            for elem in counts:
                acc[elem] = acc.get(elem, 0) + 1
        self._counts = acc
        self._hash: int | None = None

    def count(self, elem) -> int:
        return self._counts.get(elem, 0)

    __getitem__ = count

    def __contains__(self, elem) -> bool:
        return elem in self._counts

    def __iter__(self):
        return iter(self._counts)

    def items(self):
        return self._counts.items()

    def counts(self) -> dict:
        return dict(self._counts)

    def total(self) -> int:
        return sum(self._counts.values())

    def is_empty(self) -> bool:
        return not self._counts

    def __bool__(self) -> bool:
        return bool(self._counts)

    def union(self, other: "Multiset") -> "Multiset":
        acc = dict(self._counts)
        for elem, n in other.items():
            acc[elem] = acc.get(elem, 0) + n
        return Multiset(acc)

    __add__ = union

    def difference(self, other: "Multiset") -> "Multiset":
        if not other.issubset(self):
            raise NetError(f"cannot subtract {other!r}: not included in {self!r}")
        acc = dict(self._counts)
        for elem, n in other.items():
            rest = acc[elem] - n
            if rest:
                acc[elem] = rest
            else:
                del acc[elem]
        out = Multiset.__new__(Multiset)
        out._counts = acc
        out._hash = None
        return out

    __sub__ = difference

    def issubset(self, other: "Multiset") -> bool:
        return all(other.count(elem) >= n for elem, n in self._counts.items())

    def __le__(self, other: "Multiset") -> bool:
        return self.issubset(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multiset):
            return NotImplemented
        return self._counts == other._counts

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._counts.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{e!r}: {n}" for e, n in sorted(self._counts.items(), key=repr))
        return f"Multiset({{{inner}}})"


#: A marking is a multiset over the place indices of one specific net.
Marking = Multiset


def _as_weight(w) -> Fraction:
    if isinstance(w, Fraction):
        value = w
    elif isinstance(w, int):
        value = Fraction(w)
    elif isinstance(w, str):
        value = Fraction(w)
    elif isinstance(w, float):
        value = Fraction(str(w))
    else:
        raise NetError(f"unsupported weight type: {w!r}")
    if value <= 0:
        raise NetError(f"transition weight must be strictly positive, got {value}")
    return value


def _as_arcs(entries, num_places: int, what: str) -> tuple[tuple[int, int], ...]:
    """Normalize an arc spec (iterable of place indices, repeats add multiplicity,
    or a mapping place -> multiplicity) into a sorted ((place, mult), ...) tuple."""
    acc: dict[int, int] = {}
    if isinstance(entries, Mapping):
        for p, n in entries.items():
            acc[p] = acc.get(p, 0) + int(n)
    else:
        for p in entries:
            acc[p] = acc.get(p, 0) + 1
    for p, n in acc.items():
        if not 0 <= p < num_places:
            raise NetError(f"{what} refers to unknown place index {p}")
        if n <= 0:
            raise NetError(f"{what} has non-positive arc weight {n} on place {p}")
    return tuple(sorted(acc.items()))


@dataclass(frozen=True)
class StochasticNet:
    """A stochastic labeled Petri net with integer arc weights.

    ``labels[t]`` is the activity of transition ``t`` or None for a silent
    transition; ``weights[t]`` is its strictly positive firing weight.
    ``pre[t]`` / ``post[t]`` hold ``(place, multiplicity)`` pairs.  Instances
    are immutable and safe to share across concurrent searches.
    """

    place_names: tuple[str, ...]
    transition_names: tuple[str, ...]
    labels: tuple[str | None, ...]
    weights: tuple[Fraction, ...]
    pre: tuple[tuple[tuple[int, int], ...], ...]
    post: tuple[tuple[tuple[int, int], ...], ...]
    initial_marking: Multiset

    def __post_init__(self) -> None:
        n_t = len(self.transition_names)
        if not (len(self.labels) == len(self.weights) == len(self.pre) == len(self.post) == n_t):
            raise NetError("transition attribute lengths disagree")
        if not self.place_names:
            raise NetError("a net needs at least one place")
        for w in self.weights:
            if w <= 0:
                raise NetError("transition weights must be strictly positive")
        for arcs in self.pre + self.post:
            for p, mult in arcs:
                if not 0 <= p < len(self.place_names):
                    raise NetError(f"arc endpoint {p} out of range")
                if mult <= 0:
                    raise NetError("arc multiplicities must be positive")
        if self.initial_marking.is_empty():
            raise NetError("initial marking must be non-empty")
        for p in self.initial_marking:
            if not 0 <= p < len(self.place_names):
                raise NetError(f"initial marking refers to unknown place {p}")

    @property
    def num_places(self) -> int:
        return len(self.place_names)

    @property
    def num_transitions(self) -> int:
        return len(self.transition_names)

    def is_silent(self, t: int) -> bool:
        return self.labels[t] is None

    def preset(self, t: int) -> Multiset:
        return Multiset(dict(self.pre[t]))

    def postset(self, t: int) -> Multiset:
        return Multiset(dict(self.post[t]))

    def flow(self) -> Multiset:
        """The flow relation as a multiset over (("p", i), ("t", j)) style pairs."""
        acc: dict = {}
        for t in range(self.num_transitions):
            for p, mult in self.pre[t]:
                acc[(("p", p), ("t", t))] = mult
            for p, mult in self.post[t]:
                acc[(("t", t), ("p", p))] = mult
        return Multiset(acc)

    @classmethod
    def build(
        cls,
        places: Sequence[str],
        transitions: Sequence[tuple],
        initial_marking: Mapping[int, int] | Iterable[int],
    ) -> "StochasticNet":
        """Assemble a net from ``(name, label_or_None, weight, inputs, outputs)`` tuples."""
        names, labels, weights, pre, post = [], [], [], [], []
        for spec in transitions:
            name, label, weight, inputs, outputs = spec
            names.append(str(name))
            labels.append(None if label is None else str(label))
            weights.append(_as_weight(weight))
            pre.append(_as_arcs(inputs, len(places), f"transition {name!r} inputs"))
            post.append(_as_arcs(outputs, len(places), f"transition {name!r} outputs"))
        return cls(
            place_names=tuple(str(p) for p in places),
            transition_names=tuple(names),
            labels=tuple(labels),
            weights=tuple(weights),
            pre=tuple(pre),
            post=tuple(post),
            initial_marking=Multiset(initial_marking),
        )


@dataclass(frozen=True)
class ModelPath:
    """A firing sequence from the initial marking to a deadlock marking."""

    transitions: tuple[int, ...]
    markings: tuple[Multiset, ...]

    def __post_init__(self) -> None:
        if len(self.markings) != len(self.transitions) + 1:
            raise InvalidPathError("a path over n transitions carries n+1 markings")


class Matrices(NamedTuple):
    """Consumption and incidence matrices, |P| x |T|, integer entries."""

    consumption: np.ndarray
    incidence: np.ndarray


class PathProbability(NamedTuple):
    value: Fraction
    log10: float


def log10_fraction(p: Fraction) -> float:
    """log10 of a positive rational, safe against float under/overflow."""
    if p <= 0:
        raise NetError(f"log10 of non-positive value {p}")
    try:
        f = float(p)
    except OverflowError:
        f = 0.0
    if f > 0.0 and not math.isinf(f):
        return math.log10(f)
    return math.log10(p.numerator) - math.log10(p.denominator)


def _check_marking(net: StochasticNet, m: Multiset) -> None:
    for p in m:
        if not 0 <= p < net.num_places:
            raise NetError(f"marking refers to unknown place {p}")


def enabled_transitions(net: StochasticNet, m: Multiset) -> set[int]:
    """All transitions whose preset multiset is included in ``m``."""
    _check_marking(net, m)
    out = set()
    for t in range(net.num_transitions):
        if all(m.count(p) >= mult for p, mult in net.pre[t]):
            out.add(t)
    return out


def is_deadlock(net: StochasticNet, m: Multiset) -> bool:
    _check_marking(net, m)
    for t in range(net.num_transitions):
        if all(m.count(p) >= mult for p, mult in net.pre[t]):
            return False
    return True


def fire(net: StochasticNet, m: Multiset, t: int) -> Multiset:
    """Fire ``t`` at ``m``: remove the preset, add the post-set, multiset-exact."""
    if not 0 <= t < net.num_transitions:
        raise NetError(f"unknown transition {t}")
    if not all(m.count(p) >= mult for p, mult in net.pre[t]):
        raise NotEnabledError(f"transition {net.transition_names[t]} not enabled")
    return m.difference(net.preset(t)).union(net.postset(t))


def transition_probability(net: StochasticNet, m: Multiset, t: int) -> Fraction:
    """w(t) normalized over the weights of all transitions enabled at ``m``."""
    enabled = enabled_transitions(net, m)
    if t not in enabled:
        raise NotEnabledError(f"transition {t} not enabled")
    return net.weights[t] / sum(net.weights[u] for u in enabled)


def replay(net: StochasticNet, transitions: Sequence[int]) -> ModelPath:
    """Replay a transition sequence from the initial marking; it must end in a deadlock."""
    markings = [net.initial_marking]
    m = net.initial_marking
    for t in transitions:
        try:
            m = fire(net, m, t)
        except NetError as exc:
            raise InvalidPathError(f"cannot replay step {t}: {exc}") from exc
        markings.append(m)
    if not is_deadlock(net, m):
        raise InvalidPathError("path does not end in a deadlock marking")
    return ModelPath(tuple(transitions), tuple(markings))


def path_probability(net: StochasticNet, path: ModelPath | Sequence[int]) -> PathProbability:
    """Product of stepwise firing probabilities, as an exact rational and its log10."""
    if not isinstance(path, ModelPath):
        path = replay(net, path)
    if path.markings[0] != net.initial_marking:
        raise InvalidPathError("path does not start at the initial marking")
    prob = Fraction(1)
    for i, t in enumerate(path.transitions):
        prob *= transition_probability(net, path.markings[i], t)
    return PathProbability(prob, log10_fraction(prob))


def build_trace_net(trace: Sequence[str]) -> StochasticNet:
    """The chain-shaped net of a trace: one transition per activity, all weights 1."""
    n = len(trace)
    places = [f"q{i}" for i in range(n + 1)]
    transitions = [(f"e{i}", trace[i], 1, [i], [i + 1]) for i in range(n)]
    return StochasticNet.build(places, transitions, {0: 1})


def matrices(net: StochasticNet) -> Matrices:
    """Consumption (needed tokens, self-loop arcs cancelled) and incidence (net flow)."""
    c = np.zeros((net.num_places, net.num_transitions), dtype=np.int64)
    inc = np.zeros((net.num_places, net.num_transitions), dtype=np.int64)
    for t in range(net.num_transitions):
        pre = dict(net.pre[t])
        post = dict(net.post[t])
        for p, mult in pre.items():
            if p not in post:
                c[p, t] = -mult
        for p in set(pre) | set(post):
            inc[p, t] = post.get(p, 0) - pre.get(p, 0)
    return Matrices(c, inc)
