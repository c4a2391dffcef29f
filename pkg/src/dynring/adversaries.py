"""Adversaries that reshape the ring each round.

An adversary acts before the robots look: it may permute the nodes
(contents travel along) and may remove one edge for the round, subject to
the run's dynamism mode. Besides the benign and random baselines, this
module provides exhaustive branch generation for worst-case search and
three adaptive adversaries that keep zero-visibility robots from ever
reaching one-robot-per-node.

The adaptive adversaries rely on one observation: a robot that sees only
its own node makes the same decision before and after any permutation or
edge removal, because neither touches node contents. Their predicted
intents are therefore exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .ring import (
    Action,
    Mode,
    MoveIntent,
    RingConfiguration,
    ScenarioError,
    apply_edge_removal,
    apply_vertex_permutation,
    classify,
    crossing_edge,
    resolve_moves,
)


@dataclass(frozen=True)
class Dynamism:
    """One round's adversarial reshaping: permutation first, then edge."""

    permutation: tuple[int, ...] | None = None
    edge_removal: int | None = None

    def apply(self, cfg: RingConfiguration) -> RingConfiguration:
        out = cfg
        if self.permutation is not None:
            out = apply_vertex_permutation(out, self.permutation)
        if self.edge_removal is not None:
            out = apply_edge_removal(out, self.edge_removal)
        return out

    def check_mode(self, mode: Mode) -> None:
        if self.permutation is not None and not mode.allows_permutation:
            raise ScenarioError(f"mode {mode.value} does not allow vertex permutations")
        if self.edge_removal is not None and not mode.allows_edge_removal:
            raise ScenarioError(f"mode {mode.value} does not allow edge removal")


@dataclass
class AdversaryContext:
    """Everything an adversary may consult for one round."""

    cfg: RingConfiguration
    mode: Mode
    round_index: int
    rng: object = None
    predicted_intents: dict[int, Action] | None = None


class Adversary:
    adversary_id: str = ""
    adaptive: bool = False

    def check_scenario(self, n: int, mode: Mode) -> None:
        pass

    def choose(self, ctx: AdversaryContext) -> Dynamism:
        raise NotImplementedError


class BenignAdversary(Adversary):
    """Applies the identity permutation where allowed and removes nothing."""

    adversary_id = "benign"

    def choose(self, ctx):
        perm = tuple(range(ctx.cfg.n)) if ctx.mode.allows_permutation else None
        return Dynamism(perm, None)


class RandomAdversary(Adversary):
    """Uniform permutation and uniform edge choice (including no edge)."""

    adversary_id = "random"

    def choose(self, ctx):
        if ctx.rng is None:
            raise ScenarioError("random adversary needs a seeded rng")
        perm = None
        if ctx.mode.allows_permutation:
            nodes = list(range(ctx.cfg.n))
            ctx.rng.shuffle(nodes)
            perm = tuple(nodes)
        edge = None
        if ctx.mode.allows_edge_removal:
            edge = ctx.rng.choice([None] + list(range(ctx.cfg.n)))
        return Dynamism(perm, edge)


EXHAUSTIVE_PERMUTATION_LIMIT = 7


def permutation_classes(cfg: RingConfiguration) -> list[tuple[int, ...]]:
    """One permutation per distinct rearrangement, up to rotation.

    Two permutations whose resulting occupancy sequences are rotations of
    each other lead to equivalent rounds, since robot decisions and move
    resolution are rotation equivariant. Each kept permutation is composed
    with the rotation that makes its result the canonical representative.
    """
    n = cfg.n
    if n > EXHAUSTIVE_PERMUTATION_LIMIT:
        raise ScenarioError(
            f"exhaustive permutation branching is limited to n <= "
            f"{EXHAUSTIVE_PERMUTATION_LIMIT}, got n={n}")
    base = cfg.slots
    seen: dict[tuple, tuple[int, ...]] = {}
    for perm in itertools.permutations(range(n)):
        slots = [None] * n
        for old, new in enumerate(perm):
            slots[new] = base[old]
        arrangement = tuple(slots)
        best = arrangement
        shift = 0
        for r in range(1, n):
            rotated = arrangement[n - r:] + arrangement[:n - r]
            if rotated < best:
                best, shift = rotated, r
        if best not in seen:
            seen[best] = tuple((p + shift) % n for p in perm)
    return [seen[key] for key in sorted(seen)]


def exhaustive_branches(cfg: RingConfiguration, mode: Mode) -> tuple[Dynamism, ...]:
    """Every materially distinct dynamism choice for one round."""
    perms: list[tuple[int, ...] | None]
    if mode.allows_permutation:
        perms = list(permutation_classes(cfg))
    else:
        perms = [None]
    edges: list[int | None] = [None]
    if mode.allows_edge_removal:
        edges.extend(range(cfg.n))
    return tuple(Dynamism(p, e) for p in perms for e in edges)


def _final_positions(cfg: RingConfiguration, intents: dict[int, Action]) -> dict[int, int]:
    positions = cfg.positions()
    if set(intents) != set(positions):
        raise ScenarioError("predicted intents must cover every robot exactly once")
    return {lab: (positions[lab] + intents[lab].value) % cfg.n for lab in positions}


def _successor(cfg: RingConfiguration, intents: dict[int, Action]) -> RingConfiguration:
    return resolve_moves(cfg, [MoveIntent(lab, act) for lab, act in intents.items()])


def _swap(n: int, a: int, b: int) -> tuple[int, ...]:
    perm = list(range(n))
    perm[a], perm[b] = perm[b], perm[a]
    return tuple(perm)


def _arrangement(n: int, leading: list[int]) -> tuple[int, ...]:
    """Permutation placing ``leading`` old nodes first, the rest ascending."""
    rest = [p for p in range(n) if p not in leading]
    order = leading + rest
    perm = [0] * n
    for new, old in enumerate(order):
        perm[old] = new
    return tuple(perm)


def _require_predictions(ctx: AdversaryContext) -> dict[int, Action]:
    if ctx.predicted_intents is None:
        raise ScenarioError("adaptive adversary needs predicted robot intents")
    return ctx.predicted_intents


class ThreeRingPermuter(Adversary):
    """Keeps a 3-ring with a pair, a single node and a hole in that shape.

    Zero-visibility robots cannot tell the two cyclic arrangements of
    (pair, single, hole) apart. Whenever the robots' moves would gather
    everyone or spread them out, reversing the cyclic order makes the same
    moves land back in the pair/single/hole shape. The gathered state is
    never entered because from there a split into three groups could not
    be countered, every rearrangement of one pile being a plain rotation.
    """

    adversary_id = "vp-killer-n3"
    adaptive = True

    def check_scenario(self, n, mode):
        if n != 3:
            raise ScenarioError(f"{self.adversary_id} is specific to n=3, got n={n}")
        if not mode.allows_permutation:
            raise ScenarioError(f"{self.adversary_id} needs a mode with vertex permutations")

    def choose(self, ctx):
        cfg = ctx.cfg
        intents = _require_predictions(ctx)
        mult = cfg.multiplicities()
        if sorted(mult) != [0, 1, 2]:
            raise ScenarioError(
                f"{self.adversary_id} needs one pair, one single node and one hole, got {mult}")
        pair = mult.index(2)
        single = mult.index(1)
        hole = mult.index(0)
        successor = _successor(cfg, intents)
        if classify(successor).dispersed:
            leavers = sum(1 for lab in cfg.slots[pair] if intents[lab] is not Action.STAY)
            if leavers == 1:
                return Dynamism(_swap(3, pair, hole), None)
            return Dynamism(_swap(3, single, hole), None)
        if max(successor.multiplicities()) == 3:
            return Dynamism(_swap(3, pair, single), None)
        return Dynamism(tuple(range(3)), None)


class GeneralPermuter(Adversary):
    """Denies dispersion on rings of four or more nodes by rearranging.

    When the predicted moves would spread the robots out perfectly, some
    small rearrangement makes two of them collide or leaves a node that
    nobody can reach. Which rearrangement depends on how many holes exist
    and on how the occupied pairs or triple are about to break up.
    """

    adversary_id = "vp-killer"
    adaptive = True

    def check_scenario(self, n, mode):
        if n < 4:
            raise ScenarioError(f"{self.adversary_id} needs n >= 4, got n={n}")
        if not mode.allows_permutation:
            raise ScenarioError(f"{self.adversary_id} needs a mode with vertex permutations")

    def choose(self, ctx):
        cfg = ctx.cfg
        n = cfg.n
        intents = _require_predictions(ctx)
        if classify(cfg).dispersed:
            raise ScenarioError(f"{self.adversary_id} expects a non-dispersed configuration")
        if not classify(_successor(cfg, intents)).dispersed:
            return Dynamism(tuple(range(n)), None)

        mult = cfg.multiplicities()
        holes = [p for p in range(n) if mult[p] == 0]
        finals = _final_positions(cfg, intents)

        if len(holes) >= 3:
            occupied = [p for p in range(n) if mult[p] > 0]
            return Dynamism(_arrangement(n, occupied + holes), None)

        if len(holes) == 2:
            triples = [p for p in range(n) if mult[p] == 3]
            if triples:
                return Dynamism(self._counter_triple(cfg, triples[0], holes, finals), None)
            pairs = [p for p in range(n) if mult[p] == 2]
            return Dynamism(self._counter_two_pairs(cfg, pairs, holes, intents), None)

        return Dynamism(self._counter_single_pair(cfg, mult.index(2), holes[0], intents, finals), None)

    def _counter_triple(self, cfg, triple, holes, finals):
        # A perfect spread fills each hole with exactly one robot. Park the
        # triple on a hole fed from a singleton node: the feeder and the
        # triple's staying robot then share that node. If both holes are
        # fed by the triple itself, the triple sits between them; pushing
        # it one step aside reuses its old node as an unreachable gap.
        fed_from_singleton = []
        for hole in holes:
            feeder = next(lab for lab, pos in finals.items() if pos == hole)
            if len(cfg.slots[cfg.positions()[feeder]]) == 1:
                fed_from_singleton.append(hole)
        target = min(fed_from_singleton) if fed_from_singleton else min(holes)
        return _swap(cfg.n, triple, target)

    def _counter_two_pairs(self, cfg, pairs, holes, intents):
        n = cfg.n
        first, second = sorted(pairs)

        def breakup(pos):
            acts = sorted(intents[lab].value for lab in cfg.slots[pos])
            return "split" if acts == [-1, 1] else "retain"

        kinds = (breakup(first), breakup(second))
        if kinds == ("split", "split"):
            # Opposite leavers from both pairs meet in the hole between them.
            return _arrangement(n, [first, min(holes), second])
        if kinds == ("retain", "retain"):
            # Send the first pair's mover onto the second pair's stayer.
            mover = next(a for a in (intents[lab] for lab in cfg.slots[first])
                         if a is not Action.STAY)
            order = [first, second] if mover is Action.CLOCKWISE else [second, first]
            return _arrangement(n, order)
        splitter = first if kinds[0] == "split" else second
        retainer = second if splitter == first else first
        return _arrangement(n, [splitter, retainer])

    def _counter_single_pair(self, cfg, pair, hole, intents, finals):
        n = cfg.n
        acts = [intents[lab] for lab in cfg.slots[pair]]
        if Action.STAY in acts:
            # The staying robot keeps the pair's node occupied; put that
            # node where the hole's feeder expects emptiness.
            return _swap(n, pair, hole)
        # Both robots leave opposite ways, so their node is refilled by a
        # neighbouring donor. Swapping the donor with the hole leaves the
        # vacated node with no reachable replacement.
        donor = next(lab for lab, pos in finals.items()
                     if pos == pair and cfg.positions()[lab] != pair)
        return _swap(n, hole, cfg.positions()[donor])


class EdgeBlocker(Adversary):
    """Denies dispersion by cutting the edge one hole's filler would use."""

    adversary_id = "1i-killer"
    adaptive = True

    def check_scenario(self, n, mode):
        if not mode.allows_edge_removal:
            raise ScenarioError(f"{self.adversary_id} needs a mode with edge removal")

    def choose(self, ctx):
        cfg = ctx.cfg
        intents = _require_predictions(ctx)
        if classify(cfg).dispersed:
            raise ScenarioError(f"{self.adversary_id} expects a non-dispersed configuration")
        if not classify(_successor(cfg, intents)).dispersed:
            return Dynamism(None, None)
        mult = cfg.multiplicities()
        hole = next(p for p in range(cfg.n) if mult[p] == 0)
        finals = _final_positions(cfg, intents)
        entrant = next(lab for lab, pos in finals.items() if pos == hole)
        origin = cfg.positions()[entrant]
        edge = crossing_edge(origin, intents[entrant], cfg.n)
        return Dynamism(None, edge)


ADVERSARIES = {
    adv.adversary_id: adv
    for adv in (
        BenignAdversary(),
        RandomAdversary(),
        ThreeRingPermuter(),
        GeneralPermuter(),
        EdgeBlocker(),
    )
}


def get_adversary(adversary_id: str) -> Adversary:
    try:
        return ADVERSARIES[adversary_id]
    except KeyError:
        known = ", ".join(sorted(ADVERSARIES))
        raise ScenarioError(f"unknown adversary {adversary_id!r} (known: {known})") from None
