"""Core net semantics: multisets, enabling, firing, probabilities, matrices."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stochalign.nets import (
    InvalidPathError,
    Multiset,
    NetError,
    NotEnabledError,
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


def ms(*elems) -> Multiset:
    return Multiset(list(elems))


# -- multiset laws ------------------------------------------------------------

counts = st.dictionaries(st.integers(0, 5), st.integers(1, 4), max_size=5)


@given(counts, counts)
def test_union_then_difference_restores(a, b):
    A, B = Multiset(a), Multiset(b)
    assert A.union(B).difference(B) == A


@given(counts, counts)
def test_union_is_pointwise_sum(a, b):
    u = Multiset(a) + Multiset(b)
    for e in set(a) | set(b):
        assert u.count(e) == a.get(e, 0) + b.get(e, 0)


@given(counts, counts)
def test_subset_is_pointwise(a, b):
    assert Multiset(a).issubset(Multiset(b)) == all(b.get(e, 0) >= n for e, n in a.items())


def test_multiset_drops_zero_entries():
    m = Multiset({1: 2, 2: 0})
    assert 2 not in m
    assert m.counts() == {1: 2}


def test_multiset_rejects_negative_counts():
    with pytest.raises(NetError):
        Multiset({1: -1})


def test_difference_requires_inclusion():
    with pytest.raises(NetError):
        ms(1).difference(ms(1, 1))


# -- enabling and firing ------------------------------------------------------


def test_enabled_at_initial_marking(demo_net):
    assert enabled_transitions(demo_net, ms(0)) == {0, 1}


def test_empty_marking_enables_nothing(demo_net):
    assert enabled_transitions(demo_net, Multiset()) == set()


def test_final_place_is_deadlock(demo_net):
    assert enabled_transitions(demo_net, ms(3)) == set()
    assert is_deadlock(demo_net, ms(3))


def test_fire_branching_transition(demo_net):
    after = fire(demo_net, ms(0), 1)
    assert after == ms(1, 2)  # one token in each pre-place of t3 and t4


def test_fire_self_loop_preserves_token():
    net = StochasticNet.build(["p"], [("t", "a", 1, [0], [0])], {0: 1})
    assert fire(net, ms(0), 0) == ms(0)


def test_fire_sequence_reaches_deadlock(demo_net):
    after_t1 = fire(demo_net, ms(0), 0)
    assert fire(demo_net, after_t1, 2) == ms(3)


def test_fire_not_enabled_raises(demo_net):
    with pytest.raises(NotEnabledError):
        fire(demo_net, ms(0), 2)


def test_arc_multiplicities_respected():
    net = StochasticNet.build(["p", "q"], [("t", "a", 1, {0: 2}, [1])], {0: 1})
    assert enabled_transitions(net, ms(0)) == set()
    assert fire(net, ms(0, 0), 0) == ms(1)


# -- probabilities ------------------------------------------------------------


def test_transition_probability_weighted_choice(demo_net):
    assert transition_probability(demo_net, ms(0), 1) == Fraction(99, 100)


def test_transition_probability_sole_enabled(demo_net):
    after_t1 = fire(demo_net, ms(0), 0)
    assert transition_probability(demo_net, after_t1, 2) == 1


def test_transition_probability_from_weights(demo_net):
    # oracle: weights 3 and 2 over the concurrent branch
    assert transition_probability(demo_net, ms(1, 2), 2) == Fraction(3, 3 + 2)


def test_transition_probability_not_enabled(demo_net):
    with pytest.raises(NotEnabledError):
        transition_probability(demo_net, ms(0), 3)


def test_path_probabilities(demo_net):
    assert path_probability(demo_net, [0, 2]).value == Fraction(5, 500)
    assert path_probability(demo_net, [1, 2, 3]).value == Fraction(297, 500)
    assert path_probability(demo_net, [1, 3, 2]).value == Fraction(198, 500)


def test_path_probability_log_consistency(demo_net):
    res = path_probability(demo_net, [1, 2, 3])
    assert abs(float(res.value) - 10**res.log10) < 1e-9


def test_empty_path_on_deadlocked_net():
    net = StochasticNet.build(["p"], [], {0: 1})
    assert path_probability(net, []).value == 1


def test_invalid_path_rejected(demo_net):
    with pytest.raises(InvalidPathError):
        path_probability(demo_net, [0])  # ends before the deadlock
    with pytest.raises(InvalidPathError):
        path_probability(demo_net, [2])  # not enabled at the start


def test_probability_normalizes_over_enabled(demo_net):
    for m in (ms(0), ms(1, 2), ms(0, 0)):
        enabled = enabled_transitions(demo_net, m)
        if enabled:
            assert sum(transition_probability(demo_net, m, t) for t in enabled) == 1


# -- trace nets ---------------------------------------------------------------


def test_trace_net_shape():
    net = build_trace_net(("a", "d", "c"))
    assert net.num_places == 4
    assert net.num_transitions == 3
    assert net.labels == ("a", "d", "c")
    assert all(net.weights[t] == 1 for t in range(3))
    assert net.pre == (((0, 1),), ((1, 1),), ((2, 1),))
    assert net.post == (((1, 1),), ((2, 1),), ((3, 1),))
    assert net.initial_marking == ms(0)


def test_trace_net_empty_trace():
    net = build_trace_net(())
    assert net.num_places == 1
    assert net.num_transitions == 0
    assert is_deadlock(net, net.initial_marking)


def test_trace_net_repeated_labels():
    net = build_trace_net(("a", "a"))
    assert net.labels == ("a", "a")


def test_trace_net_single_path_projects_to_trace():
    trace = ("x", "y", "x")
    net = build_trace_net(trace)
    path = replay(net, [0, 1, 2])
    assert tuple(net.labels[t] for t in path.transitions) == trace
    # no other order is firable
    with pytest.raises(InvalidPathError):
        replay(net, [1, 0, 2])


# -- matrices -----------------------------------------------------------------


def test_matrix_entries(demo_net):
    mats = matrices(demo_net)
    assert mats.consumption[0, 0] == -1
    assert mats.incidence[0, 0] == -1
    assert mats.incidence[3, 2] == 1
    assert mats.consumption[3, 2] == 0


def test_isolated_place_rows_are_zero():
    net = StochasticNet.build(["p", "iso"], [("t", "a", 1, [0], [])], {0: 1})
    mats = matrices(net)
    assert not mats.consumption[1].any()
    assert not mats.incidence[1].any()


def test_self_loop_consumption_is_zero():
    net = StochasticNet.build(["p"], [("t", "a", 1, [0], [0])], {0: 1})
    mats = matrices(net)
    assert mats.consumption[0, 0] == 0
    assert mats.incidence[0, 0] == 0


def test_fire_changes_totals_by_incidence_column(demo_net):
    inc = matrices(demo_net).incidence
    for m in (ms(0), ms(1, 2)):
        for t in enabled_transitions(demo_net, m):
            assert fire(demo_net, m, t).total() - m.total() == int(inc[:, t].sum())


def test_state_equation(demo_net):
    inc = matrices(demo_net).incidence
    path = replay(demo_net, [1, 3, 2])
    parikh = np.zeros(demo_net.num_transitions, dtype=np.int64)
    for t in path.transitions:
        parikh[t] += 1
    m0 = np.array([demo_net.initial_marking.count(p) for p in range(4)])
    final = np.array([path.markings[-1].count(p) for p in range(4)])
    assert np.array_equal(m0 + inc @ parikh, final)


# -- construction guards ------------------------------------------------------


def test_zero_weight_rejected():
    with pytest.raises(NetError):
        StochasticNet.build(["p"], [("t", "a", 0, [0], [])], {0: 1})


def test_empty_initial_marking_rejected():
    with pytest.raises(NetError):
        StochasticNet.build(["p"], [], {})


def test_dangling_arc_rejected():
    with pytest.raises(NetError):
        StochasticNet.build(["p"], [("t", "a", 1, [3], [])], {0: 1})
