"""Brute-force oracle: enumeration, LCS distance, exact argmin, Pareto front."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from stochalign.nets import StochasticNet
from stochalign.oracle import (
    EnumerationBudget,
    ProductOracle,
    TruncatedEnumerationWarning,
    enumerate_paths,
    lcs_edit_distance,
    oracle_best,
    pareto_front,
)


def test_demo_paths_and_probabilities(demo_net):
    enum = enumerate_paths(demo_net)
    assert not enum.truncated
    got = {p.transitions: prob for p, prob in enum.paths}
    assert got == {
        (0, 2): Fraction(5, 500),
        (1, 2, 3): Fraction(297, 500),
        (1, 3, 2): Fraction(198, 500),
    }
    assert sum(got.values()) == 1


def test_complete_enumerations_sum_to_one():
    import random

    from netgen import random_bounded_net

    rng = random.Random(140)
    for _ in range(20):
        net = random_bounded_net(rng)
        enum = enumerate_paths(net)
        assert not enum.truncated
        assert sum(prob for _, prob in enum.paths) == 1


def test_deadlocked_net_has_one_empty_path():
    net = StochasticNet.build(["p"], [], {0: 1})
    enum = enumerate_paths(net)
    assert len(enum.paths) == 1
    assert enum.paths[0][0].transitions == ()
    assert enum.paths[0][1] == 1


def test_loop_net_sets_truncation_flag():
    net = StochasticNet.build(
        ["p", "q"],
        [("go", "a", 1, [0], [1]), ("back", "b", 1, [1], [0])],
        {0: 1},
    )
    enum = enumerate_paths(net, EnumerationBudget(max_path_len=10, max_paths=100))
    assert enum.truncated
    assert not enum.paths  # the loop never deadlocks


def test_min_log_prob_cutoff_truncates(demo_net):
    enum = enumerate_paths(demo_net, EnumerationBudget(min_log_prob=-1.0))
    assert enum.truncated  # the 1/100 branch falls below the cutoff
    assert len(enum.paths) == 2


def test_lcs_distance_reference_values():
    assert lcs_edit_distance(("a", "c"), ("a", "d", "c")) == 1
    assert lcs_edit_distance(("b", "c", "d"), ("a", "d", "c")) == 4
    assert lcs_edit_distance(("b", "d", "c"), ("a", "d", "c")) == 2
    assert lcs_edit_distance((), ("x",)) == 1


seqs = st.lists(st.sampled_from("abc"), max_size=7).map(tuple)


@given(seqs)
def test_lcs_identity(a):
    assert lcs_edit_distance(a, a) == 0


@given(seqs, seqs)
def test_lcs_symmetry(a, b):
    assert lcs_edit_distance(a, b) == lcs_edit_distance(b, a)


@given(seqs, seqs)
def test_lcs_positivity(a, b):
    d = lcs_edit_distance(a, b)
    assert d >= 0
    assert (d == 0) == (a == b)


@given(seqs, seqs, seqs)
def test_lcs_triangle_inequality(a, b, c):
    assert lcs_edit_distance(a, c) <= lcs_edit_distance(a, b) + lcs_edit_distance(b, c)


def test_oracle_best_reference_rows(demo_net, demo_trace):
    best = oracle_best(demo_net, demo_trace, 0.75)
    assert best.path.transitions == (0, 2)
    assert best.loss == pytest.approx(0.535, abs=5e-4)
    best = oracle_best(demo_net, demo_trace, 0.25)
    assert best.path.transitions == (1, 2, 3)
    assert best.loss == pytest.approx(1.065, abs=5e-4)


def test_oracle_best_single_path_any_alpha():
    net = StochasticNet.build(["p", "q"], [("t", "a", 1, [0], [1])], {0: 1})
    for alpha in (0.0, 0.5, 1.0):
        assert oracle_best(net, ("b",), alpha).path.transitions == (0,)


def test_oracle_best_is_minimal(demo_net, demo_trace):
    from stochalign.loss import loss as loss_fn
    from stochalign.nets import log10_fraction
    from stochalign.oracle import strip_silent

    best = oracle_best(demo_net, demo_trace, 0.5)
    for path, prob in enumerate_paths(demo_net).paths:
        d = lcs_edit_distance(demo_trace, strip_silent(demo_net, path.transitions))
        assert best.loss <= loss_fn(d, log10_fraction(prob), 0.5)


def test_oracle_best_strips_silent_labels():
    net = StochasticNet.build(
        ["p1", "p2", "p3"],
        [("t1", "a", 1, [0], [1]), ("tau", None, 1, [1], [2])],
        {0: 1},
    )
    best = oracle_best(net, ("a",), 1.0)
    assert best.distance == 0  # the silent step does not count


def test_oracle_best_warns_on_truncation(demo_net, demo_trace):
    with pytest.warns(TruncatedEnumerationWarning):
        best = oracle_best(demo_net, demo_trace, 0.5, EnumerationBudget(min_log_prob=-1.0))
    assert best.truncated


def test_pareto_front_demo(demo_net, demo_trace):
    front = pareto_front(demo_net, demo_trace)
    assert [(p.transitions, d, prob) for p, d, prob in front.entries] == [
        ((0, 2), 1, Fraction(5, 500)),
        ((1, 3, 2), 2, Fraction(198, 500)),
        ((1, 2, 3), 4, Fraction(297, 500)),
    ]


def test_pareto_front_single_path():
    net = StochasticNet.build(["p", "q"], [("t", "a", 1, [0], [1])], {0: 1})
    front = pareto_front(net, ("a",))
    assert len(front.entries) == 1


def test_pareto_front_drops_unlikelier_twin():
    # two same-label choices: equal distance, different probability
    net = StochasticNet.build(
        ["p", "q"],
        [("t1", "a", 1, [0], [1]), ("t2", "a", 9, [0], [1])],
        {0: 1},
    )
    front = pareto_front(net, ("a",))
    assert len(front.entries) == 1
    assert front.entries[0][0].transitions == (1,)
    assert front.entries[0][2] == Fraction(9, 10)


def test_product_oracle_reference_values(demo_product):
    oracle = ProductOracle(demo_product)
    root = tuple(
        demo_product.net.initial_marking.count(p) for p in range(demo_product.net.num_places)
    )
    assert oracle.min_remaining_cost(root) == 1
    assert oracle.max_remaining_gain(root) == Fraction(297, 500)
    assert oracle.num_deadlocks >= 1
