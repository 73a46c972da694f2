"""Exact decision of the pursuit game on finite arenas.

The game is solved backwards: a rev-to-move state wins if some joint
revolutionary move reaches a winning spy-to-move state; a spy-to-move
state wins if every spy response either leaves an unguarded meeting or
hands the revolutionaries a winning state.  Revolutionary wins are the
least fixed point of that recurrence, and the spies win everything
outside it (their objective is a safety condition, so no depth bound is
sound for them; the fixed point is).

Spy-win is monotone in the spy count: an extra spy can shadow another
spy move for move, so any spy win with s spies is a spy win with s+1.
The sigma search below relies on that to stop at the first spy win.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from math import comb

from .arena import Arena
from .engine import (
    GameState,
    Phase,
    meeting_vertices,
    multiset_moves,
    unguarded_meeting,
)
from .errors import BudgetExceeded, UsageError

DEFAULT_STATE_BUDGET = 50_000_000


def state_budget_estimate(n: int, r: int, s: int) -> int:
    return comb(n + r - 1, r) * comb(n + s - 1, s) * 2


def multiset_successors(arena: Arena, positions: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    """Distinct sorted position multisets reachable in one joint move.

    The one-step relation on multisets is symmetric, so this doubles as
    the predecessor enumeration during backward propagation.
    """
    return tuple(sorted({tuple(sorted(m)) for m in multiset_moves(arena, positions)}))


@dataclass
class SolveTable:
    """Solved status for every state of one game instance."""

    arena: Arena
    r: int
    s: int
    k: int
    rev_wins_overall: bool
    states_explored: int
    iterations: int
    _rev_mss: list[tuple[int, ...]] = field(repr=False, default_factory=list)
    _spy_mss: list[tuple[int, ...]] = field(repr=False, default_factory=list)
    _rev_index: dict = field(repr=False, default_factory=dict)
    _spy_index: dict = field(repr=False, default_factory=dict)
    _rev_win: bytearray = field(repr=False, default_factory=bytearray)
    _spy_win: bytearray = field(repr=False, default_factory=bytearray)
    # marking order of the fixed-point iteration; winning play must move
    # to a successor marked strictly earlier or it can cycle forever
    _rev_rank: list = field(repr=False, default_factory=list)
    _spy_rank: list = field(repr=False, default_factory=list)

    def _key(self, revs: tuple[int, ...], spies: tuple[int, ...]) -> int:
        try:
            ri = self._rev_index[tuple(sorted(revs))]
            si = self._spy_index[tuple(sorted(spies))]
        except KeyError:
            raise UsageError("state outside solve table") from None
        return ri * len(self._spy_mss) + si

    def status(self, state: GameState) -> str:
        """'rev-win' or 'spy-win' for a rev-to-move or spy-to-move state."""
        idx = self._key(state.revs, state.spies)
        if state.phase is Phase.REV_TO_MOVE:
            return "rev-win" if self._rev_win[idx] else "spy-win"
        if state.phase is Phase.SPY_TO_MOVE:
            return "rev-win" if self._spy_win[idx] else "spy-win"
        raise UsageError(f"no status for phase {state.phase.value}")

    def rev_state_wins(self, revs, spies) -> bool:
        return bool(self._rev_win[self._key(revs, spies)])

    def spy_state_wins(self, revs, spies) -> bool:
        return bool(self._spy_win[self._key(revs, spies)])

    def spy_state_rank(self, revs, spies) -> int:
        return self._spy_rank[self._key(revs, spies)]


def _dihedral_vertex_perms(arena: Arena) -> list[tuple[int, ...]]:
    """Vertex permutations of the 8 square symmetries of a 2-D lattice box."""
    if arena.coords is None or len(arena.coords[0]) != 2:
        raise UsageError("symmetry canonicalization needs a 2-D lattice box")
    (xlo, xhi), (ylo, yhi) = arena.coord_bounds()
    if xhi - xlo != yhi - ylo:
        raise UsageError("symmetry canonicalization needs a square box")

    def maps():
        for swap in (False, True):
            for fx in (False, True):
                for fy in (False, True):
                    def f(c, swap=swap, fx=fx, fy=fy):
                        x, y = c
                        if swap:
                            x, y = y, x
                        if fx:
                            x = xlo + xhi - x
                        if fy:
                            y = ylo + yhi - y
                        return (x, y)
                    yield f

    perms = []
    for f in maps():
        perms.append(tuple(arena.vertex_at(f(c)) for c in arena.coords))
    return perms


def rev_wins(arena: Arena, r: int, s: int, k: int, *,
             budget: int = DEFAULT_STATE_BUDGET,
             worklist_seed: int | None = None,
             canonical_symmetry: bool = False) -> tuple[bool, SolveTable]:
    """Decide whether the revolutionaries win the full game.

    Placement is folded in at the end: the revolutionaries win overall
    iff some placement beats every spy placement.
    """
    if r < 1 or s < 0 or k < 1:
        raise UsageError("need r >= 1, s >= 0, k >= 1")
    n = arena.n
    estimate = state_budget_estimate(n, r, s)
    if estimate > budget:
        raise BudgetExceeded(
            f"instance has about {estimate} states, over the budget of {budget}",
            estimate=estimate,
        )
    if canonical_symmetry:
        return _rev_wins_canonical(arena, r, s, k, estimate)

    rev_mss = list(itertools.combinations_with_replacement(range(n), r))
    spy_mss = list(itertools.combinations_with_replacement(range(n), s))
    rev_index = {ms: i for i, ms in enumerate(rev_mss)}
    spy_index = {ms: i for i, ms in enumerate(spy_mss)}
    NR, NS = len(rev_mss), len(spy_mss)

    succ_cache: dict[tuple[int, ...], tuple[tuple[int, ...], ...]] = {}

    def successors(ms: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
        got = succ_cache.get(ms)
        if got is None:
            got = multiset_successors(arena, ms)
            succ_cache[ms] = got
        return got

    rev_succ = [tuple(rev_index[t] for t in successors(ms)) for ms in rev_mss]
    spy_succ = [tuple(spy_index[t] for t in successors(ms)) for ms in spy_mss]

    meets = [meeting_vertices(ms, k) for ms in rev_mss]
    ssets = [frozenset(ms) for ms in spy_mss]
    # cov[ri] = spy multisets guarding every meeting of rev multiset ri
    cov: list[frozenset[int]] = []
    all_spies = frozenset(range(NS))
    for m in meets:
        if not m:
            cov.append(all_spies)
        else:
            cov.append(frozenset(si for si in range(NS) if m <= ssets[si]))

    rev_win = bytearray(NR * NS)
    spy_win = bytearray(NR * NS)
    big = NR * NS * 2 + 1
    rev_rank = [big] * (NR * NS)
    spy_rank = [big] * (NR * NS)
    counter = [0] * (NR * NS)

    queue: deque[tuple[bool, int, int]] = deque()
    seeds = []
    for ri in range(NR):
        c_ri = cov[ri]
        base = ri * NS
        if len(c_ri) == NS:
            for si in range(NS):
                counter[base + si] = len(spy_succ[si])
        else:
            for si in range(NS):
                cnt = sum(1 for sj in spy_succ[si] if sj in c_ri)
                counter[base + si] = cnt
                if cnt == 0:
                    spy_win[base + si] = 1
                    seeds.append((True, ri, si))
    if worklist_seed is not None:
        random.Random(worklist_seed).shuffle(seeds)
    queue.extend(seeds)
    stamp = 0
    for _, ri, si in seeds:
        stamp += 1
        spy_rank[ri * NS + si] = stamp

    iterations = 0
    while queue:
        is_spy_state, ri, si = queue.popleft()
        iterations += 1
        if is_spy_state:
            # revolutionaries can move into ri from any one-step neighbour
            for rj in rev_succ[ri]:
                idx = rj * NS + si
                if not rev_win[idx]:
                    rev_win[idx] = 1
                    stamp += 1
                    rev_rank[idx] = stamp
                    queue.append((False, rj, si))
        else:
            # this rev-to-move state was a covered spy response; its
            # winning-ness removes one safe response from each spy parent
            if si in cov[ri]:
                base = ri * NS
                for sp in spy_succ[si]:
                    idx = base + sp
                    c = counter[idx] - 1
                    counter[idx] = c
                    if c == 0 and not spy_win[idx]:
                        spy_win[idx] = 1
                        stamp += 1
                        spy_rank[idx] = stamp
                        queue.append((True, ri, sp))

    overall = False
    for ri in range(NR):
        c_ri = cov[ri]
        base = ri * NS
        if all((si not in c_ri) or rev_win[base + si] for si in range(NS)):
            overall = True
            break

    table = SolveTable(
        arena=arena, r=r, s=s, k=k,
        rev_wins_overall=overall,
        states_explored=2 * NR * NS,
        iterations=iterations,
        _rev_mss=rev_mss, _spy_mss=spy_mss,
        _rev_index=rev_index, _spy_index=spy_index,
        _rev_win=rev_win, _spy_win=spy_win,
        _rev_rank=rev_rank, _spy_rank=spy_rank,
    )
    return overall, table


def _rev_wins_canonical(arena: Arena, r: int, s: int, k: int,
                        estimate: int) -> tuple[bool, SolveTable]:
    """Pass-based variant folding states through the 8 box symmetries.

    Slower per state but touches only orbit representatives; used as a
    cross-check, so it favors simplicity over the worklist machinery.
    """
    perms = _dihedral_vertex_perms(arena)

    def canon(revs: tuple[int, ...], spies: tuple[int, ...]):
        return min(
            (tuple(sorted(p[v] for v in revs)), tuple(sorted(p[v] for v in spies)))
            for p in perms
        )

    n = arena.n
    rev_mss = list(itertools.combinations_with_replacement(range(n), r))
    spy_mss = list(itertools.combinations_with_replacement(range(n), s))
    pairs = sorted({canon(R, S) for R in rev_mss for S in spy_mss})
    succ_cache: dict[tuple[int, ...], tuple[tuple[int, ...], ...]] = {}

    def successors(ms):
        got = succ_cache.get(ms)
        if got is None:
            got = multiset_successors(arena, ms)
            succ_cache[ms] = got
        return got

    rev_win: dict = {p: False for p in pairs}
    spy_win: dict = {p: False for p in pairs}
    iterations = 0
    changed = True
    while changed:
        changed = False
        iterations += 1
        for R, S in pairs:
            key = (R, S)
            if not spy_win[key]:
                meet = meeting_vertices(R, k)
                ok = True
                for S2 in successors(S):
                    if meet and not meet <= frozenset(S2):
                        continue
                    if not rev_win[canon(R, S2)]:
                        ok = False
                        break
                if ok:
                    spy_win[key] = True
                    changed = True
            if not rev_win[key]:
                if any(spy_win[canon(R2, S)] for R2 in successors(R)):
                    rev_win[key] = True
                    changed = True

    overall = False
    for R in rev_mss:
        meet = meeting_vertices(R, k)
        if all((meet and not meet <= frozenset(S)) or spy_win[canon(R, S)]
               for S in spy_mss):
            overall = True
            break

    # expose a plain lookup keyed through canonicalization
    table = SolveTable(
        arena=arena, r=r, s=s, k=k,
        rev_wins_overall=overall,
        states_explored=2 * len(pairs),
        iterations=iterations,
    )
    table._canon = canon  # type: ignore[attr-defined]
    table._rev_win_map = rev_win  # type: ignore[attr-defined]
    table._spy_win_map = spy_win  # type: ignore[attr-defined]
    table.status = _canonical_status.__get__(table)  # type: ignore[method-assign]
    return overall, table


def _canonical_status(self, state: GameState) -> str:
    key = self._canon(state.revs, state.spies)
    if state.phase is Phase.REV_TO_MOVE:
        return "rev-win" if self._rev_win_map[key] else "spy-win"
    if state.phase is Phase.SPY_TO_MOVE:
        return "rev-win" if self._spy_win_map[key] else "spy-win"
    raise UsageError(f"no status for phase {state.phase.value}")


# -- sigma ----------------------------------------------------------------


@dataclass(frozen=True)
class SigmaResult:
    """Value of sigma, or a bracket when the budget ran out.

    `low`/`high` always bracket the true value; `value` is None for
    partial results.
    """

    value: int | None
    low: int
    high: int
    states_explored: int = 0

    @property
    def complete(self) -> bool:
        return self.value is not None

    def bracket_str(self) -> str:
        return f"[{self.low},{self.high}]"


def lemma_bounds(n: int, r: int, k: int) -> tuple[int, int]:
    """The splitting bounds: min(n, r//k) <= sigma <= min(n, r-k+1)."""
    if r < k:
        return 0, 0
    return min(n, r // k), min(n, r - k + 1)


def sigma(arena: Arena, r: int, k: int, *,
          budget: int = DEFAULT_STATE_BUDGET) -> SigmaResult:
    """Smallest spy count that wins, searched upward from the lower bound."""
    if r < 1 or k < 1:
        raise UsageError("need r >= 1 and k >= 1")
    low, high = lemma_bounds(arena.n, r, k)
    if r < k:
        return SigmaResult(0, 0, 0)
    explored = 0
    for s in range(low, high + 1):
        try:
            win, table = rev_wins(arena, r, s, k, budget=budget)
        except BudgetExceeded:
            return SigmaResult(None, s, high, states_explored=explored)
        explored += table.states_explored
        if not win:
            return SigmaResult(s, s, s, states_explored=explored)
    raise RuntimeError(
        f"no spy win up to the splitting upper bound {high}; solver inconsistency"
    )


# -- policies extracted from a solve table --------------------------------


class TablePolicy:
    """Deterministic policy reading winning (or stalling-safe) moves
    off a solve table; picks the first qualifying joint move in
    enumeration order."""

    def __init__(self, table: SolveTable, team: str):
        if team not in ("R", "S"):
            raise UsageError("team must be 'R' or 'S'")
        self.table = table
        self.team = team
        self.name = f"solver-{team}"

    def reset(self, arena, r, s, k, seed, team):
        t = self.table
        if (arena is not t.arena and arena.neighbors != t.arena.neighbors) or \
                (r, s, k) != (t.r, t.s, t.k):
            raise UsageError("solve table does not match this game instance")
        if team != self.team:
            raise UsageError(f"policy extracted for team {self.team}, used as {team}")

    # placement ---------------------------------------------------------

    def place(self, state: GameState):
        t = self.table
        if self.team == "R":
            for R in t._rev_mss:
                meet = meeting_vertices(R, t.k)
                if all(
                    (meet and not meet <= frozenset(S)) or t.rev_state_wins(R, S)
                    for S in t._spy_mss
                ):
                    return R
            return t._rev_mss[0]
        R = state.revs
        meet = meeting_vertices(R, t.k)
        best_covered = None
        for S in t._spy_mss:
            if meet and not meet <= frozenset(S):
                continue
            if not t.rev_state_wins(R, S):
                return S
            if best_covered is None:
                best_covered = S
        return best_covered if best_covered is not None else t._spy_mss[0]

    # moves --------------------------------------------------------------

    def move(self, state: GameState):
        t = self.table
        if self.team == "R":
            # descend the fixed-point rank; an arbitrary winning successor
            # (staying put, say) can cycle without ever reaching the win
            best = None
            best_rank = None
            for mv in multiset_moves(state.arena, state.revs):
                key = tuple(sorted(mv))
                if t.spy_state_wins(key, state.spies):
                    rank = t.spy_state_rank(key, state.spies)
                    if best_rank is None or rank < best_rank:
                        best, best_rank = mv, rank
            return best if best is not None else state.revs
        meet = meeting_vertices(state.revs, t.k)
        fallback = None
        for mv in multiset_moves(state.arena, state.spies):
            target = frozenset(mv)
            if meet and not meet <= target:
                continue
            if not t.rev_state_wins(state.revs, tuple(sorted(mv))):
                return mv
            if fallback is None:
                fallback = mv
        return fallback if fallback is not None else state.spies


def extract_policy(table: SolveTable, team: str) -> TablePolicy:
    if not table._rev_mss:
        raise UsageError("policy extraction needs a plain (non-canonicalized) table")
    return TablePolicy(table, team)


# -- bounded adversarial search -------------------------------------------


def bounded_rev_wins(state: GameState, k: int, horizon: int,
                     spy_regions: list | None = None,
                     rev_move_candidates=None) -> bool:
    """Can the revolutionaries force an unguarded meeting within `horizon`
    full rounds, starting from a rev-to-move state?

    Depth-limited alternating search with memoization.  `spy_regions`,
    aligned to the sorted spy multiset, confines each spy to a vertex
    set for the whole search.  `rev_move_candidates(revs, depth)` may
    restrict the revolutionaries' joint moves; restricting the maximizer
    can only turn wins into non-wins, so a True result stays sound.
    """
    if state.phase is not Phase.REV_TO_MOVE:
        raise UsageError("bounded search starts from a rev-to-move state")
    arena = state.arena
    spies0 = state.spies
    if spy_regions is not None:
        if len(spy_regions) != len(spies0):
            raise UsageError("one region per spy required")
        regions = [frozenset(region) for region in spy_regions]
        for pos, reg in zip(spies0, regions):
            if pos not in reg:
                raise UsageError("spy starts outside its region")
    else:
        regions = [frozenset(range(arena.n))] * len(spies0)

    if unguarded_meeting(state.revs, spies0, k) is not None:
        return True
    if horizon <= 0:
        return False

    labeled0 = tuple(sorted(zip(spies0, range(len(spies0)))))
    memo: dict = {}

    def spy_options(pos: int, slot: int) -> tuple[int, ...]:
        return tuple(v for v in arena.closed_neighborhood(pos) if v in regions[slot])

    def cover_feasible(meets: frozenset[int], labeled) -> bool:
        """Can distinct spies land on all meeting vertices this move?"""
        targets = sorted(meets)
        used = [False] * len(labeled)

        def assign(i: int) -> bool:
            if i == len(targets):
                return True
            v = targets[i]
            for j, (pos, slot) in enumerate(labeled):
                if used[j]:
                    continue
                if v in regions[slot] and (v == pos or arena.is_adjacent(pos, v)):
                    used[j] = True
                    if assign(i + 1):
                        used[j] = False
                        return True
                    used[j] = False
            return False

        return assign(0)

    def covering_responses(meets: frozenset[int], labeled):
        """All joint spy responses landing a spy on every meeting vertex."""
        options = [spy_options(pos, slot) for pos, slot in labeled]
        seen = set()
        for combo in itertools.product(*options):
            if any(v not in combo for v in meets):
                continue
            nxt = tuple(sorted(zip(combo, (slot for _, slot in labeled))))
            if nxt not in seen:
                seen.add(nxt)
                yield nxt

    def rev_ply(revs: tuple[int, ...], labeled, remaining: int) -> bool:
        key = (revs, labeled, remaining)
        got = memo.get(key)
        if got is not None:
            return got
        if rev_move_candidates is not None:
            moves = rev_move_candidates(revs, horizon - remaining)
        else:
            moves = multiset_moves(arena, revs)
        result = False
        for mv in moves:
            nxt_revs = tuple(sorted(mv))
            meets = meeting_vertices(nxt_revs, k)
            if remaining == 1:
                if not cover_feasible(meets, labeled):
                    result = True
                    break
                continue
            spies_survive = False
            for nxt_labeled in covering_responses(meets, labeled):
                if not rev_ply(nxt_revs, nxt_labeled, remaining - 1):
                    spies_survive = True
                    break
            if not spies_survive:
                result = True
                break
        memo[key] = result
        return result

    return rev_ply(state.revs, labeled0, horizon)
