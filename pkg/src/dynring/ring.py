"""Core model of a dynamic ring occupied by labelled robots.

An n-node ring carries exactly n robots. Nodes are anonymous: the integer
positions used here are simulator bookkeeping, and robot decision rules
never receive them. Robots observe the world only through views or
snapshots anchored at their own node (see ``compute_view`` / ``Snapshot``).

Two forms of per-round dynamism exist:

* vertex permutation: node positions are shuffled and every node's
  occupants travel with it;
* single-edge removal: one ring edge is absent for the round, and a move
  that would cross it leaves the robot in place.

A node with no robot is a hole, with one robot a singleton node, with two
or more a multinode. A chain is a multinode followed, in one direction,
by zero or more singleton nodes and then a hole; it is good when none of
its edges is the removed one. Chains drive every shipped decision rule.

Every position index is taken modulo n with clockwise meaning +1. For
n == 2 the ring is treated as having two parallel edges (edge 0 between
positions 0 and 1 clockwise, edge 1 on the way back), so the edge crossed
by a move is always determined by the move's direction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum, IntEnum


class ScenarioError(Exception):
    """A run was configured with an incompatible policy, adversary or ring."""


class Mode(Enum):
    """Which kinds of per-round dynamism the adversary may apply."""

    NONE = "none"
    VP = "vp"
    ONE_INTERVAL = "1i"
    COMBINED = "combined"

    @property
    def allows_permutation(self) -> bool:
        return self in (Mode.VP, Mode.COMBINED)

    @property
    def allows_edge_removal(self) -> bool:
        return self in (Mode.ONE_INTERVAL, Mode.COMBINED)

    @classmethod
    def from_string(cls, text: str) -> "Mode":
        for mode in cls:
            if mode.value == text:
                return mode
        raise ValueError(f"unknown mode {text!r} (expected one of none, vp, 1i, combined)")


class Action(IntEnum):
    """A one-edge move choice. The value is the clockwise position delta."""

    ANTICLOCKWISE = -1
    STAY = 0
    CLOCKWISE = 1

    def inverse(self) -> "Action":
        return Action(-self.value)

    @property
    def short(self) -> str:
        return {Action.STAY: "stay", Action.CLOCKWISE: "cw", Action.ANTICLOCKWISE: "acw"}[self]


ACTION_FROM_SHORT = {"stay": Action.STAY, "cw": Action.CLOCKWISE, "acw": Action.ANTICLOCKWISE}


class Orientation(Enum):
    """A robot's private sense of clockwise relative to the global frame."""

    ALIGNED = "A"
    REVERSED = "R"

    @property
    def sign(self) -> int:
        return 1 if self is Orientation.ALIGNED else -1

    def flipped(self) -> "Orientation":
        return Orientation.REVERSED if self is Orientation.ALIGNED else Orientation.ALIGNED


def convert_frame(action: Action, orientation: Orientation) -> Action:
    """Map an action between a robot's own frame and the global frame.

    The mapping is an involution, so the same function translates both
    ways. STAY is frame independent.
    """
    return Action(action.value * orientation.sign)


@dataclass(frozen=True)
class RobotState:
    """One robot: unique label, current node, private orientation, memory."""

    label: int
    node: int
    orientation: Orientation = Orientation.ALIGNED
    memory: object = None


@dataclass(frozen=True)
class MoveIntent:
    """A robot's committed move for the round, in the global frame."""

    label: int
    action: Action


@dataclass(frozen=True)
class RingConfiguration:
    """Occupancy of the ring plus the (at most one) removed edge.

    ``slots[i]`` holds the sorted labels at clockwise position i. The total
    robot count must equal n and the labels must be exactly 1..n.
    ``missing_edge = e`` means the edge between positions e and e+1 (mod n)
    is absent for the current round; None means the ring is intact.
    """

    n: int
    slots: tuple[tuple[int, ...], ...]
    missing_edge: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("ring needs at least one node")
        if len(self.slots) != self.n:
            raise ValueError(f"expected {self.n} slots, got {len(self.slots)}")
        normal = tuple(tuple(sorted(slot)) for slot in self.slots)
        object.__setattr__(self, "slots", normal)
        labels = [lab for slot in normal for lab in slot]
        if len(labels) != self.n:
            raise ValueError(f"expected {self.n} robots, found {len(labels)}")
        if set(labels) != set(range(1, self.n + 1)):
            raise ValueError(f"robot labels must be exactly 1..{self.n}")
        if self.missing_edge is not None and not 0 <= self.missing_edge < self.n:
            raise ValueError(f"edge index {self.missing_edge} out of range for n={self.n}")

    def multiplicities(self) -> tuple[int, ...]:
        return tuple(len(slot) for slot in self.slots)

    def positions(self) -> dict[int, int]:
        return {lab: pos for pos, slot in enumerate(self.slots) for lab in slot}

    def labels(self) -> tuple[int, ...]:
        return tuple(sorted(lab for slot in self.slots for lab in slot))

    def __str__(self) -> str:
        body = " ".join("." if not s else ",".join(map(str, s)) for s in self.slots)
        edge = "" if self.missing_edge is None else f" !e{self.missing_edge}"
        return f"<ring {body}{edge}>"


def ring_from_slots(slots, missing_edge: int | None = None) -> RingConfiguration:
    slots = tuple(tuple(slot) for slot in slots)
    return RingConfiguration(len(slots), slots, missing_edge)


def ring_from_multiplicities(mults, missing_edge: int | None = None) -> RingConfiguration:
    """Build a configuration from per-node robot counts.

    Labels 1..n are dealt clockwise starting at position 0, which is the
    canonical labelling used wherever only counts matter.
    """
    mults = tuple(mults)
    slots = []
    nxt = 1
    for count in mults:
        slots.append(tuple(range(nxt, nxt + count)))
        nxt += count
    return RingConfiguration(len(mults), tuple(slots), missing_edge)


def all_on_one(n: int) -> RingConfiguration:
    return ring_from_multiplicities([n] + [0] * (n - 1))


def random_configuration(n: int, rng) -> RingConfiguration:
    slots = [[] for _ in range(n)]
    for label in range(1, n + 1):
        slots[rng.randrange(n)].append(label)
    return ring_from_slots(slots)


def crossing_edge(pos: int, action: Action, n: int) -> int | None:
    """Edge index crossed by a global-frame step from ``pos``; None for STAY."""
    if action is Action.STAY:
        return None
    if action is Action.CLOCKWISE:
        return pos
    return (pos - 1) % n


def apply_vertex_permutation(cfg: RingConfiguration, perm) -> RingConfiguration:
    """Shuffle node positions; occupants travel with their node.

    ``perm[i]`` is the new position of the node currently at i. Any removed
    edge is cleared, since edge removal is decided after the shuffle.
    """
    perm = tuple(perm)
    if sorted(perm) != list(range(cfg.n)):
        raise ValueError(f"not a permutation of 0..{cfg.n - 1}: {perm}")
    slots = [()] * cfg.n
    for old, new in enumerate(perm):
        slots[new] = cfg.slots[old]
    return RingConfiguration(cfg.n, tuple(slots), None)


def apply_edge_removal(cfg: RingConfiguration, edge: int | None) -> RingConfiguration:
    """Mark one edge as absent for the round. At most one edge may be out."""
    if edge is None:
        return cfg
    if cfg.missing_edge is not None:
        raise ValueError("an edge is already removed this round")
    if not 0 <= edge < cfg.n:
        raise ValueError(f"edge index {edge} out of range for n={cfg.n}")
    return RingConfiguration(cfg.n, cfg.slots, edge)


def resolve_moves(cfg: RingConfiguration, intents) -> RingConfiguration:
    """Apply all intents simultaneously; crossing the removed edge is a no-op.

    Every robot must appear in exactly one intent.
    """
    intents = list(intents)
    positions = cfg.positions()
    seen = set()
    for intent in intents:
        if intent.label not in positions:
            raise ValueError(f"intent for unknown robot {intent.label}")
        if intent.label in seen:
            raise ValueError(f"duplicate intent for robot {intent.label}")
        seen.add(intent.label)
    if len(seen) != cfg.n:
        raise ValueError(f"expected {cfg.n} intents, got {len(seen)}")
    slots = [[] for _ in range(cfg.n)]
    for intent in intents:
        pos = positions[intent.label]
        target = pos
        if intent.action is not Action.STAY:
            edge = crossing_edge(pos, intent.action, cfg.n)
            if edge != cfg.missing_edge:
                target = (pos + intent.action.value) % cfg.n
        slots[target].append(intent.label)
    return RingConfiguration(cfg.n, tuple(tuple(s) for s in slots), cfg.missing_edge)


@dataclass(frozen=True)
class Metrics:
    """Occupancy census of one configuration."""

    holes: int
    singletons: int
    multinodes: int
    dispersed: bool
    state_label: int | None  # 1..4 for the non-dispersed 4-node shapes, else None


# Non-dispersed occupancy shapes of the 4-node ring, keyed by sorted counts.
FOUR_NODE_STATES = {
    (4, 0, 0, 0): 1,
    (3, 1, 0, 0): 2,
    (2, 1, 1, 0): 3,
    (2, 2, 0, 0): 4,
}


def classify(cfg: RingConfiguration) -> Metrics:
    mult = cfg.multiplicities()
    holes = sum(1 for m in mult if m == 0)
    singles = sum(1 for m in mult if m == 1)
    multis = sum(1 for m in mult if m >= 2)
    dispersed = singles == cfg.n
    state = None
    if cfg.n == 4 and not dispersed:
        state = FOUR_NODE_STATES[tuple(sorted(mult, reverse=True))]
    return Metrics(holes, singles, multis, dispersed, state)


@dataclass(frozen=True)
class Chain(object):
    """A multinode, a run of singleton nodes, then a hole, in one direction.

    ``direction`` is the global direction walked from the multinode to the
    hole. ``good`` means no edge along the walk is the removed one. The
    chain's length is its singleton count.
    """

    direction: Action
    multinode: int
    singletons: tuple[int, ...]
    hole: int
    good: bool

    @property
    def length(self) -> int:
        return len(self.singletons)


def find_chains(cfg: RingConfiguration) -> tuple[Chain, ...]:
    """Every chain of the configuration, both directions, with good flags.

    A multinode anchors at most one chain per direction; the walk stops at
    the first node that is not a singleton. It yields a chain only when
    that node is a hole.
    """
    mult = cfg.multiplicities()
    n = cfg.n
    chains = []
    for anchor in range(n):
        if mult[anchor] < 2:
            continue
        for direction in (Action.CLOCKWISE, Action.ANTICLOCKWISE):
            singles = []
            edges = []
            pos = anchor
            while True:
                edges.append(crossing_edge(pos, direction, n))
                pos = (pos + direction.value) % n
                if mult[pos] == 1:
                    singles.append(pos)
                    continue
                break
            if mult[pos] == 0:
                good = cfg.missing_edge is None or cfg.missing_edge not in edges
                chains.append(Chain(direction, anchor, tuple(singles), pos, good))
    return tuple(chains)


@dataclass(frozen=True)
class View(object):
    """What a robot at visibility k perceives, in its own frame.

    ``clockwise`` / ``anti_clockwise`` hold the gaps between consecutive
    occupied nodes out to distance k in that own-frame direction (first
    entry is the distance to the nearest occupied node). ``multiplicity``
    lists own-frame clockwise distances (0 included for the robot's own
    node) of multinodes whose clockwise distance is at most k, or (-1,)
    when there is none. ``missing_edge`` is the smallest own-frame
    clockwise distance to an endpoint of the removed edge, reported only
    when some endpoint lies within ring distance k; otherwise None.
    """

    clockwise: tuple[int, ...]
    anti_clockwise: tuple[int, ...]
    multiplicity: tuple[int, ...]
    missing_edge: int | None
    own_count: int
    least_label_here: int
    is_least: bool
    second_least_label_here: int | None
    is_second_least: bool


def _gaps(distances) -> tuple[int, ...]:
    out = []
    prev = 0
    for d in distances:
        out.append(d - prev)
        prev = d
    return tuple(out)


def compute_view(cfg: RingConfiguration, robot: RobotState, k: int) -> View:
    if not 0 <= k <= cfg.n:
        raise ValueError(f"visibility k={k} out of range 0..{cfg.n}")
    n = cfg.n
    pos = robot.node
    sign = robot.orientation.sign
    mult = cfg.multiplicities()
    horizon = min(k, n - 1)

    def occ(step: int, d: int) -> int:
        return mult[(pos + step * d) % n]

    cw_occupied = [d for d in range(1, horizon + 1) if occ(sign, d) > 0]
    acw_occupied = [d for d in range(1, horizon + 1) if occ(-sign, d) > 0]
    multi = tuple(d for d in range(0, horizon + 1) if occ(sign, d) >= 2)
    if not multi:
        multi = (-1,)

    missing = None
    if cfg.missing_edge is not None:
        e = cfg.missing_edge
        endpoints = (e, (e + 1) % n)
        own_cw = [((q - pos) * sign) % n for q in endpoints]
        visible = any(min(d, n - d) <= k for d in own_cw)
        if visible:
            missing = min(own_cw)

    here = cfg.slots[pos]
    second = here[1] if len(here) >= 2 else None
    return View(
        clockwise=_gaps(cw_occupied),
        anti_clockwise=_gaps(acw_occupied),
        multiplicity=multi,
        missing_edge=missing,
        own_count=len(here),
        least_label_here=here[0],
        is_least=robot.label == here[0],
        second_least_label_here=second,
        is_second_least=robot.label == second,
    )


@dataclass(frozen=True)
class ChainView(object):
    """A chain as seen by a robot standing on it, in the robot's own frame.

    ``direction_own`` points from the multinode toward the hole, so it is
    also the robot's step toward the hole. ``other`` is the opposite
    direction chain anchored at the same multinode, when one exists; it is
    populated for singleton-node robots, which consult their chain's
    multinode.
    """

    direction_own: Action
    length: int
    good: bool
    other: "ChainView | None" = None

    @property
    def toward_hole(self) -> Action:
        return self.direction_own

    @property
    def toward_multinode(self) -> Action:
        return self.direction_own.inverse()


class ChainAnalysis:
    """Per-configuration chain index shared by every robot's snapshot."""

    def __init__(self, cfg: RingConfiguration):
        self.cfg = cfg
        self.mult = cfg.multiplicities()
        self.metrics = classify(cfg)
        self.chains = find_chains(cfg)
        self.by_singleton: dict[int, Chain] = {}
        self.by_anchor: dict[int, list[Chain]] = {}
        for chain in self.chains:
            self.by_anchor.setdefault(chain.multinode, []).append(chain)
            for pos in chain.singletons:
                # A singleton node belongs to at most one chain overall.
                self.by_singleton[pos] = chain

    def sibling(self, chain: Chain) -> Chain | None:
        for other in self.by_anchor.get(chain.multinode, ()):
            if other is not chain:
                return other
        return None

    def snapshot_for(self, robot: RobotState) -> "Snapshot":
        return Snapshot(self, robot)


class Snapshot:
    """Full visibility for one robot, anonymised and in its own frame.

    Decision rules receive only this object, never absolute positions, so
    node anonymity and (for orientation-free rules) reflection symmetry
    are enforced at the interface.
    """

    __slots__ = ("_analysis", "_pos", "_sign", "n", "own_labels", "own_count",
                 "least_label", "is_least", "has_multinode")

    def __init__(self, analysis: ChainAnalysis, robot: RobotState):
        self._analysis = analysis
        self._pos = robot.node
        self._sign = robot.orientation.sign
        self.n = analysis.cfg.n
        self.own_labels = analysis.cfg.slots[robot.node]
        if robot.label not in self.own_labels:
            raise ValueError(f"robot {robot.label} is not at node recorded in its state")
        self.own_count = len(self.own_labels)
        self.least_label = self.own_labels[0]
        self.is_least = robot.label == self.least_label
        self.has_multinode = analysis.metrics.multinodes > 0

    def _chain_view(self, chain: Chain, with_other: bool) -> ChainView:
        other = None
        if with_other:
            sib = self._analysis.sibling(chain)
            if sib is not None:
                other = self._chain_view(sib, with_other=False)
        return ChainView(
            direction_own=Action(chain.direction.value * self._sign),
            length=chain.length,
            good=chain.good,
            other=other,
        )

    def own_chain(self) -> ChainView | None:
        """The unique chain through this singleton node, if any."""
        chain = self._analysis.by_singleton.get(self._pos)
        if chain is None:
            return None
        return self._chain_view(chain, with_other=True)

    def anchored(self) -> tuple[ChainView, ...]:
        """Chains anchored at this multinode, at most one per direction."""
        chains = self._analysis.by_anchor.get(self._pos, ())
        return tuple(self._chain_view(c, with_other=False) for c in chains)

    def adjacent_to_two_holes(self) -> bool:
        mult = self._analysis.mult
        return mult[(self._pos + 1) % self.n] == 0 and mult[(self._pos - 1) % self.n] == 0


def rotate(cfg: RingConfiguration, shift: int) -> RingConfiguration:
    """Relabel positions so the node at i moves to (i + shift) mod n."""
    n = cfg.n
    shift %= n
    slots = [()] * n
    for old in range(n):
        slots[(old + shift) % n] = cfg.slots[old]
    edge = None if cfg.missing_edge is None else (cfg.missing_edge + shift) % n
    return RingConfiguration(n, tuple(slots), edge)


def reflect(cfg: RingConfiguration, pivot: int = 0) -> RingConfiguration:
    """Mirror the ring about ``pivot``, swapping the two directions."""
    n = cfg.n
    slots = [()] * n
    for old in range(n):
        slots[(2 * pivot - old) % n] = cfg.slots[old]
    edge = None
    if cfg.missing_edge is not None:
        edge = (2 * pivot - cfg.missing_edge - 1) % n
    return RingConfiguration(n, tuple(slots), edge)


def canonical_rotation(cfg: RingConfiguration) -> RingConfiguration:
    """The lexicographically least rotation; labels stay with their nodes."""
    best = None
    for shift in range(cfg.n):
        cand = rotate(cfg, shift)
        key = (cand.slots, -1 if cand.missing_edge is None else cand.missing_edge)
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]
