"""Exact game semantics: states, joint moves, rounds, win detection, matches.

A round consists of every revolutionary moving at most one step, then every
spy doing the same.  The revolutionaries win exactly when, after a spy move
(placement included), some vertex holds at least k revolutionaries and no
spy.  States store each team as a sorted multiset, which is safe because the
win condition and the move rules are permutation-invariant within a team.
"""

from __future__ import annotations

import enum
import itertools
from collections import Counter
from dataclasses import dataclass, field

from .arena import Arena
from .errors import RuleViolation, UsageError

DEFAULT_MAX_ROUNDS = 200


class Phase(enum.Enum):
    REV_PLACEMENT = "rev-placement"
    SPY_PLACEMENT = "spy-placement"
    REV_TO_MOVE = "rev-to-move"
    SPY_TO_MOVE = "spy-to-move"


JointMove = tuple[int, ...]


@dataclass(frozen=True)
class GameState:
    """Positions of both teams plus whose move it is.

    `revs` and `spies` are sorted tuples of vertex ids.  `round` counts
    completed spy moves plus one while a round is in progress; placement
    happens in round 0.
    """

    arena: Arena
    revs: tuple[int, ...]
    spies: tuple[int, ...]
    phase: Phase
    round: int

    @staticmethod
    def initial(arena: Arena) -> "GameState":
        return GameState(arena, (), (), Phase.REV_PLACEMENT, 0)

    def moving_team(self) -> tuple[int, ...]:
        if self.phase in (Phase.REV_PLACEMENT, Phase.REV_TO_MOVE):
            return self.revs
        return self.spies


def unguarded_meeting(revs: tuple[int, ...], spies: tuple[int, ...],
                      k: int) -> int | None:
    """Smallest vertex holding >= k revolutionaries and no spy, if any."""
    counts = Counter(revs)
    guarded = set(spies)
    best = None
    for v, c in counts.items():
        if c >= k and v not in guarded and (best is None or v < best):
            best = v
    return best


def meeting_vertices(revs: tuple[int, ...], k: int) -> frozenset[int]:
    """Vertices holding >= k revolutionaries."""
    return frozenset(v for v, c in Counter(revs).items() if c >= k)


def multiset_moves(arena: Arena, positions: tuple[int, ...]):
    """All joint moves of a team, deduplicated to distinct result multisets.

    Yields each move as a target tuple aligned to the sorted multiset
    order of `positions`; agents sharing a vertex get nondecreasing
    targets, which picks one canonical alignment per result.
    """
    groups = sorted(Counter(positions).items())
    per_group = [
        itertools.combinations_with_replacement(arena.closed_neighborhood(v), c)
        for v, c in groups
    ]
    seen = set()
    for combo in itertools.product(*per_group):
        flat = tuple(itertools.chain.from_iterable(combo))
        key = tuple(sorted(flat))
        if key not in seen:
            seen.add(key)
            yield flat


def legal_joint_moves(state: GameState):
    """Stream of legal joint moves for the team to move, multiset-deduplicated."""
    if state.phase not in (Phase.REV_TO_MOVE, Phase.SPY_TO_MOVE):
        raise UsageError(f"no joint moves in phase {state.phase.value}")
    yield from multiset_moves(state.arena, state.moving_team())


def _validate_step(arena: Arena, positions: tuple[int, ...],
                   targets: JointMove) -> None:
    if len(targets) != len(positions):
        raise RuleViolation(
            f"move has {len(targets)} targets for {len(positions)} agents"
        )
    for i, (src, dst) in enumerate(zip(positions, targets)):
        arena.check_vertex(dst)
        if dst != src and not arena.is_adjacent(src, dst):
            raise RuleViolation(
                f"agent {i} cannot move {arena.format_vertex(src)} -> "
                f"{arena.format_vertex(dst)}",
                agent=i,
            )


def apply(state: GameState, move: JointMove) -> GameState:
    """Apply a joint move (or a placement) and advance the phase."""
    arena = state.arena
    move = tuple(move)
    if state.phase is Phase.REV_PLACEMENT:
        for v in move:
            arena.check_vertex(v)
        return GameState(arena, tuple(sorted(move)), (), Phase.SPY_PLACEMENT, 0)
    if state.phase is Phase.SPY_PLACEMENT:
        for v in move:
            arena.check_vertex(v)
        return GameState(arena, state.revs, tuple(sorted(move)),
                         Phase.REV_TO_MOVE, 1)
    if state.phase is Phase.REV_TO_MOVE:
        _validate_step(arena, state.revs, move)
        return GameState(arena, tuple(sorted(move)), state.spies,
                         Phase.SPY_TO_MOVE, state.round)
    _validate_step(arena, state.spies, move)
    return GameState(arena, state.revs, tuple(sorted(move)),
                     Phase.REV_TO_MOVE, state.round + 1)


# -- match execution -----------------------------------------------------


@dataclass
class Trace:
    """Move-by-move record of one match.

    `entries` holds (round, team, positions-after-move); `outcome` is one
    of "revwin@<v>", "round-limit", "ongoing", "forfeit:R", "forfeit:S".
    """

    arena: Arena
    r: int
    s: int
    k: int
    max_rounds: int
    seed: int
    entries: list[tuple[int, str, tuple[int, ...]]] = field(default_factory=list)
    outcome: str = "ongoing"
    win_vertex: int | None = None

    @property
    def rev_won(self) -> bool:
        return self.outcome.startswith("revwin") or self.outcome == "forfeit:S"

    def record(self, round_no: int, team: str, positions: tuple[int, ...]) -> None:
        self.entries.append((round_no, team, positions))

    def format(self) -> str:
        fmt = self.arena.format_vertex
        lines = [
            f"# arena={self.arena.label} r={self.r} s={self.s} k={self.k}"
            f" max_rounds={self.max_rounds} seed={self.seed}"
        ]
        for round_no, team, positions in self.entries:
            pos = ",".join(fmt(v) for v in positions)
            lines.append(f"round={round_no} team={team} pos={pos}")
        if self.outcome.startswith("revwin"):
            lines.append(f"outcome=revwin@{fmt(self.win_vertex)}")
        else:
            lines.append(f"outcome={self.outcome}")
        return "\n".join(lines) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.format())


def play(arena: Arena, r: int, s: int, k: int, rev_policy, spy_policy,
         max_rounds: int = DEFAULT_MAX_ROUNDS, seed: int = 0) -> Trace:
    """Run placement plus alternating rounds between two policies.

    A policy emitting an illegal move forfeits for its team.  The win
    check runs after every spy move, including spy placement.
    """
    trace = Trace(arena, r, s, k, max_rounds, seed)
    rev_policy.reset(arena, r, s, k, seed, team="R")
    spy_policy.reset(arena, r, s, k, seed, team="S")
    state = GameState.initial(arena)

    try:
        placement = tuple(rev_policy.place(state))
        if len(placement) != r:
            raise RuleViolation(f"revolutionaries placed {len(placement)} of {r}")
        state = apply(state, placement)
    except (RuleViolation, UsageError):
        trace.outcome = "forfeit:R"
        return trace
    trace.record(0, "R", state.revs)

    try:
        placement = tuple(spy_policy.place(state))
        if len(placement) != s:
            raise RuleViolation(f"spies placed {len(placement)} of {s}")
        state = apply(state, placement)
    except (RuleViolation, UsageError):
        trace.outcome = "forfeit:S"
        return trace
    trace.record(0, "S", state.spies)

    v = unguarded_meeting(state.revs, state.spies, k)
    if v is not None:
        trace.outcome = "revwin"
        trace.win_vertex = v
        return trace

    while state.round <= max_rounds:
        round_no = state.round
        try:
            state = apply(state, tuple(rev_policy.move(state)))
        except (RuleViolation, UsageError):
            trace.outcome = "forfeit:R"
            return trace
        trace.record(round_no, "R", state.revs)

        try:
            state = apply(state, tuple(spy_policy.move(state)))
        except (RuleViolation, UsageError):
            trace.outcome = "forfeit:S"
            return trace
        trace.record(round_no, "S", state.spies)

        v = unguarded_meeting(state.revs, state.spies, k)
        if v is not None:
            trace.outcome = "revwin"
            trace.win_vertex = v
            return trace

    trace.outcome = "round-limit"
    return trace
