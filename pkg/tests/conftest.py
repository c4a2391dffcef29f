"""Shared strategies and helpers for the test suite."""
from __future__ import annotations

from hypothesis import strategies as st

from dynring import Orientation, RingConfiguration, RobotState


@st.composite
def ring_configs(draw, min_n: int = 2, max_n: int = 8, allow_edge: bool = True):
    """A labeled configuration: n robots dropped on n nodes, maybe one
    removed edge."""
    n = draw(st.integers(min_n, max_n))
    nodes = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    slots = [[] for _ in range(n)]
    for label, node in enumerate(nodes, start=1):
        slots[node].append(label)
    edge = None
    if allow_edge and draw(st.booleans()):
        edge = draw(st.integers(0, n - 1))
    return RingConfiguration(n, tuple(tuple(s) for s in slots), edge)


@st.composite
def placed_robots(draw, cfg: RingConfiguration, memory=None):
    """Robot states consistent with ``cfg``, orientations drawn freely."""
    robots = []
    for label, node in sorted(cfg.positions().items()):
        orientation = draw(st.sampled_from((Orientation.ALIGNED, Orientation.REVERSED)))
        robots.append(RobotState(label, node, orientation, memory))
    return tuple(robots)


@st.composite
def configured_scenarios(draw, min_n: int = 2, max_n: int = 8,
                         allow_edge: bool = True, memory=None):
    cfg = draw(ring_configs(min_n, max_n, allow_edge))
    robots = draw(placed_robots(cfg, memory=memory))
    return cfg, robots
