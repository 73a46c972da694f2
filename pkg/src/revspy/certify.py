"""Threat certificates: guarding feasibility and scripted punishments.

A threat (v, t, pair) is a commitment by two revolutionaries to stand
together on v after t further rounds.  A spy guards it only by being on
v when the spies finish moving in round t, so one spy can serve a list
of threats exactly when consecutive meeting points are reachable within
the deadline gaps.  A realizable threat set that no assignment of spies
can fully serve certifies a revolutionary win.

Everything here works on integer coordinate pairs; `punish` bridges to
engine states on lattice arenas.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .engine import GameState, JointMove, Phase
from .errors import UsageError

Point = tuple[int, int]


def dist(p: Point, q: Point) -> int:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


@dataclass(frozen=True)
class Threat:
    """Meeting of size 2 at `vertex` in `deadline` rounds by rev pair.

    `pair` holds indices into the position tuple the threat set is
    evaluated against.
    """

    vertex: Point
    deadline: int
    pair: tuple[int, int]

    def transformed(self, point_map) -> "Threat":
        return Threat(point_map(self.vertex), self.deadline, self.pair)


ThreatSet = tuple[Threat, ...]


def make_threat_set(threats) -> ThreatSet:
    """Sort by deadline and validate pair disjointness."""
    ts = tuple(sorted(threats, key=lambda t: (t.deadline, t.vertex)))
    used: set[int] = set()
    for t in ts:
        i, j = t.pair
        if i == j:
            raise UsageError(f"threat at {t.vertex} reuses one revolutionary")
        if i in used or j in used:
            raise UsageError(f"threat pairs overlap at {t.vertex}")
        used.update((i, j))
    return ts


@dataclass(frozen=True)
class Region:
    """Named finite set of lattice points."""

    name: str
    points: frozenset[Point]

    def __contains__(self, p) -> bool:
        return p in self.points

    def __iter__(self):
        return iter(sorted(self.points))

    def __len__(self) -> int:
        return len(self.points)


def rect(x0: int, x1: int, y0: int, y1: int, name: str = "") -> Region:
    pts = frozenset(
        (x, y) for x in range(x0, x1 + 1) for y in range(y0, y1 + 1)
    )
    if not pts:
        raise UsageError(f"empty region [{x0},{x1}]x[{y0},{y1}]")
    return Region(name or f"[{x0},{x1}]x[{y0},{y1}]", pts)


def single(p: Point, name: str = "") -> Region:
    return Region(name or str(p), frozenset([p]))


# -- guarding feasibility --------------------------------------------------


def covers(spy: Point, threats) -> bool:
    """Can one spy be at every threat vertex at its deadline?

    Threats must come sorted by deadline; the spy needs d(spy, v1) <= t1
    and d(v_j, v_{j+1}) <= t_{j+1} - t_j between consecutive stops.
    """
    threats = tuple(threats)
    deadlines = [t.deadline for t in threats]
    if deadlines != sorted(deadlines):
        raise UsageError("threats must be sorted by deadline")
    at: Point = spy
    now = 0
    for t in threats:
        if dist(at, t.vertex) > t.deadline - now:
            return False
        at = t.vertex
        now = t.deadline
    return True


def coverable(spies, ts: ThreatSet) -> bool:
    """Can some assignment of threats to spies serve every threat?

    Exhaustive search over assignments (at most 5^5 at certificate
    scale), pruned by reachability along each spy's growing itinerary.
    """
    spies = [tuple(s) for s in spies]
    if not ts:
        return True
    if not spies:
        return False
    # itinerary per spy: (current point, current time)
    state: list[tuple[Point, int]] = [(s, 0) for s in spies]

    def assign(i: int) -> bool:
        if i == len(ts):
            return True
        t = ts[i]
        for j, (at, now) in enumerate(state):
            if dist(at, t.vertex) <= t.deadline - now:
                state[j] = (t.vertex, t.deadline)
                if assign(i + 1):
                    state[j] = (at, now)
                    return True
                state[j] = (at, now)
        return False

    return assign(0)


def realizable(revs, ts: ThreatSet) -> bool:
    """Pairs disjoint and every named rev within deadline of its vertex."""
    revs = [tuple(p) for p in revs]
    used: set[int] = set()
    for t in ts:
        for i in t.pair:
            if i in used or not 0 <= i < len(revs):
                return False
            used.add(i)
            if dist(revs[i], t.vertex) > t.deadline:
                return False
    return True


# -- scripted marches ------------------------------------------------------


def march_step(p: Point, v: Point, moves_left: int) -> Point:
    """One step of the stall-then-march rule.

    Stays put while there is slack, then takes the lexicographically
    smallest king step that keeps the deadline feasible.
    """
    d = dist(p, v)
    if d > moves_left:
        raise UsageError(f"{v} unreachable from {p} in {moves_left} moves")
    if d < moves_left or d == 0:
        return p
    coords = []
    for a, b in zip(p, v):
        best = None
        for step in (-1, 0, 1):
            c = a + step
            if abs(b - c) <= moves_left - 1 and (best is None or c < best):
                best = c
        coords.append(best)
    return tuple(coords)


def march_plan(revs, ts: ThreatSet) -> list[list[Point]]:
    """Per-round coordinate targets executing every threat exactly at its
    deadline; non-threat revs stay.  Row m is the position of every rev
    after round m+1."""
    revs = [tuple(p) for p in revs]
    if not realizable(revs, ts):
        raise UsageError("threat set not realizable from these positions")
    horizon = max((t.deadline for t in ts), default=0)
    duty: dict[int, Threat] = {}
    for t in ts:
        for i in t.pair:
            duty[i] = t
    plan: list[list[Point]] = []
    current = list(revs)
    for m in range(1, horizon + 1):
        row = []
        for i, p in enumerate(current):
            t = duty.get(i)
            if t is not None and m <= t.deadline:
                row.append(march_step(p, t.vertex, t.deadline - m + 1))
            else:
                row.append(p)
        plan.append(row)
        current = row
    return plan


def punish(state: GameState, ts: ThreatSet) -> list[JointMove]:
    """Joint engine moves marching threat pairs to their meetings.

    Threat pairs index into the state's sorted revolutionary multiset.
    """
    arena = state.arena
    if not arena.is_lattice:
        raise UsageError("punish plans need a lattice arena")
    if state.phase is not Phase.REV_TO_MOVE:
        raise UsageError("punish plans start from a rev-to-move state")
    coords = [arena.coord_of(v) for v in state.revs]
    plan = march_plan(coords, ts)
    # rows are per-label; engine moves align to the sorted multiset of the
    # round they are played from, so re-order each row accordingly
    moves: list[JointMove] = []
    current = coords
    for row in plan:
        order = sorted(range(len(current)), key=lambda i: (current[i], i))
        moves.append(tuple(arena.vertex_at(row[lbl]) for lbl in order))
        current = row
    return moves
