"""Synchronous product construction, move classification, gains, alignments."""

from fractions import Fraction

import pytest

from stochalign.nets import Multiset, NotEnabledError, StochasticNet, path_probability, replay
from stochalign.oracle import enumerate_product_completions, lcs_edit_distance, strip_silent
from stochalign.sync import (
    MoveKind,
    alignment_from_product_path,
    build_sync_product,
    classify,
    move_cost,
    probability_gain,
    r_m,
)

# product transition indices for the demo product of ("a", "d", "c"):
# 0..3 model moves (t1..t4), 4..6 trace moves, 7..9 sync moves
M_T1, M_T2, M_T3, M_T4 = 0, 1, 2, 3
TR_A, TR_D, TR_C = 4, 5, 6
SYNC_A, SYNC_D, SYNC_C = 7, 8, 9


def test_product_structure(demo_product):
    sp = demo_product
    assert sp.net.num_places == 8
    assert sp.net.num_transitions == 10
    sync = [(sp.trace_pos[t], sp.to_model[t]) for t in range(10) if sp.kinds[t] is MoveKind.SYNC]
    assert sync == [(0, 0), (1, 3), (2, 2)]  # a~t1, d~t4, c~t3
    assert sp.net.initial_marking == Multiset({0: 1, 4: 1})


def test_product_of_empty_trace(demo_net):
    sp = build_sync_product((), demo_net)
    assert sp.net.num_transitions == demo_net.num_transitions
    assert all(k in (MoveKind.MODEL, MoveKind.SILENT_MODEL) for k in sp.kinds)


def test_unmatched_activity_yields_no_sync(demo_net):
    sp = build_sync_product(("x",), demo_net)
    kinds = [sp.kinds[t] for t in range(sp.net.num_transitions)]
    assert kinds.count(MoveKind.TRACE) == 1
    assert kinds.count(MoveKind.MODEL) == 4
    assert kinds.count(MoveKind.SYNC) == 0


def test_silent_transitions_get_no_sync_moves():
    net = StochasticNet.build(
        ["p", "q"], [("t", None, 1, [0], [1])], {0: 1}
    )
    sp = build_sync_product(("t",), net)  # activity named like the transition
    assert all(k is not MoveKind.SYNC for k in sp.kinds)
    assert sp.kinds[0] is MoveKind.SILENT_MODEL


def test_duplicate_labels_yield_duplicate_syncs(demo_net):
    net = StochasticNet.build(
        ["p", "q"],
        [("t1", "a", 1, [0], [1]), ("t2", "a", 5, [0], [1])],
        {0: 1},
    )
    sp = build_sync_product(("a", "a"), net)
    syncs = [t for t in range(sp.net.num_transitions) if sp.kinds[t] is MoveKind.SYNC]
    assert len(syncs) == 4  # two positions x two matching transitions


def test_probability_gains_at_initial_marking(demo_product):
    sp = demo_product
    m0 = sp.net.initial_marking
    assert probability_gain(sp, m0, TR_A) == 1
    assert probability_gain(sp, m0, M_T2) == Fraction(99, 100)
    assert probability_gain(sp, m0, M_T1) == Fraction(1, 100)
    assert probability_gain(sp, m0, SYNC_A) == Fraction(1, 100)


def test_probability_gain_requires_enabledness(demo_product):
    with pytest.raises(NotEnabledError):
        probability_gain(demo_product, demo_product.net.initial_marking, SYNC_C)


def test_marking_restriction(demo_product):
    sp = demo_product
    assert r_m(sp, Multiset({0: 1, 4: 1})) == Multiset({0: 1})
    assert r_m(sp, Multiset({5: 1, 7: 1})) == Multiset()
    assert r_m(sp, Multiset({3: 2, 7: 1})) == Multiset({3: 2})


def test_classification_and_costs(demo_product):
    sp = demo_product
    assert classify(sp, SYNC_D) is MoveKind.SYNC and move_cost(sp, SYNC_D) == 0
    assert classify(sp, M_T2) is MoveKind.MODEL and move_cost(sp, M_T2) == 1
    assert classify(sp, TR_A) is MoveKind.TRACE and move_cost(sp, TR_A) == 1


def test_silent_move_costs_zero():
    net = StochasticNet.build(["p", "q"], [("tau", None, 1, [0], [1])], {0: 1})
    sp = build_sync_product(("a",), net)
    assert sp.kinds[0] is MoveKind.SILENT_MODEL
    assert sp.costs[0] == 0


def test_reference_alignment_costs(demo_product):
    """The three hand-written alignments cost 4, 2, and 1."""
    gamma1 = alignment_from_product_path(demo_product, [TR_A, M_T2, TR_D, SYNC_C, M_T4], 0.5)
    gamma2 = alignment_from_product_path(demo_product, [M_T2, TR_A, SYNC_D, SYNC_C], 0.5)
    gamma3 = alignment_from_product_path(demo_product, [SYNC_A, TR_D, SYNC_C], 0.5)
    assert (gamma1.cost, gamma2.cost, gamma3.cost) == (4, 2, 1)


def test_alignment_projections(demo_product, demo_net, demo_trace):
    al = alignment_from_product_path(demo_product, [M_T2, TR_A, SYNC_D, SYNC_C], 0.5)
    assert al.trace_projection(demo_trace) == demo_trace
    path = al.model_projection()
    assert path == (1, 3, 2)
    replay(demo_net, path)  # must reach a model deadlock


def test_alignment_probability_equals_model_path_probability(demo_product, demo_net):
    for moves in ([M_T2, TR_A, SYNC_D, SYNC_C], [SYNC_A, TR_D, SYNC_C]):
        al = alignment_from_product_path(demo_product, moves, 0.5)
        assert al.probability == path_probability(demo_net, al.model_projection()).value


def test_incomplete_sequence_rejected(demo_product):
    from stochalign.nets import InvalidPathError

    with pytest.raises(InvalidPathError):
        alignment_from_product_path(demo_product, [M_T2], 0.5)


def test_enabled_model_component_is_enabled_after_restriction(demo_product):
    sp = demo_product
    net = sp.net
    model = sp.model
    stack = [net.initial_marking]
    seen = {net.initial_marking}
    while stack:
        m = stack.pop()
        for t in range(net.num_transitions):
            if not all(m.count(p) >= w for p, w in net.pre[t]):
                continue
            model_t = sp.to_model[t]
            if model_t is not None:
                restricted = r_m(sp, m)
                assert all(restricted.count(p) >= w for p, w in model.pre[model_t])
            child = m.difference(net.preset(t)).union(net.postset(t))
            if child not in seen:
                seen.add(child)
                stack.append(child)


def test_min_embedding_cost_equals_lcs_distance(demo_product, demo_net, demo_trace):
    """Grouping completions by model path, the cheapest embedding has cost
    |trace| + |labels| - 2 LCS."""
    completions, truncated = enumerate_product_completions(
        demo_product, demo_product.net.initial_marking
    )
    assert not truncated
    best: dict[tuple, int] = {}
    for moves, cost, _ in completions:
        path = tuple(
            demo_product.to_model[t] for t in moves if demo_product.to_model[t] is not None
        )
        best[path] = min(best.get(path, 10**9), cost)
    assert len(best) == 3
    for path, cost in best.items():
        labels = strip_silent(demo_net, path)
        assert cost == lcs_edit_distance(demo_trace, labels)
