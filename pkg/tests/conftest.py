"""Shared fixtures: the two-branch demo net and its synchronous product."""

from __future__ import annotations

import pytest

from stochalign.nets import StochasticNet
from stochalign.sync import build_sync_product

# A four-place net with a rare direct branch (a, c) and a likely two-step
# branch (b, then c and d concurrently).  Weights 1/99/3/2 give path
# probabilities 1/100, 297/500, and 99/250.
DEMO_TEXT = """\
stochastic labeled petri net
# rare branch: a then c; likely branch: b then {c, d}
places 4
initial marking
1 0 0 0
transitions 4
label a
weight 1
inputs 0
outputs 1
label b
weight 99
inputs 0
outputs 1 2
label c
weight 3
inputs 1
outputs 3
label d
weight 2
inputs 2
outputs 3
"""

DEMO_TRACE = ("a", "d", "c")


def build_demo_net() -> StochasticNet:
    return StochasticNet.build(
        ["p1", "p2", "p3", "p4"],
        [
            ("t1", "a", 1, [0], [1]),
            ("t2", "b", 99, [0], [1, 2]),
            ("t3", "c", 3, [1], [3]),
            ("t4", "d", 2, [2], [3]),
        ],
        {0: 1},
    )


@pytest.fixture(scope="session")
def demo_net() -> StochasticNet:
    return build_demo_net()


@pytest.fixture(scope="session")
def demo_trace() -> tuple[str, ...]:
    return DEMO_TRACE


@pytest.fixture(scope="session")
def demo_product(demo_net):
    return build_sync_product(DEMO_TRACE, demo_net)


@pytest.fixture(scope="session")
def demo_text() -> str:
    return DEMO_TEXT
