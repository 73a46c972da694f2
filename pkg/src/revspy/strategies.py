"""The policy catalogue.

All strategies share one deterministic interface: `reset` binds the
policy to a match, `place` returns the team's opening positions, and
`move` returns a joint move aligned to the sorted multiset order of the
team.  The engine anonymizes agents, so policies that need stable agent
identities re-derive them each round by matching consecutive multisets
under the one-step move constraint (any consistent matching preserves
the guarantees these strategies rely on).

Randomness comes from one generator seeded per (match seed, team), so
identical seeds reproduce identical matches.
"""

from __future__ import annotations

import random
from collections import deque

from .arena import Arena
from .engine import GameState, Phase
from .errors import UsageError
from .prooftree import (
    MAT_ID,
    REV_START,
    ProofTree,
    build_tree,
    mat_apply,
    mat_compose,
    mat_inverse,
)
from .certify import Threat, make_threat_set, march_plan
from .verify85 import in_board, route_placement, route_response

_TEAM_OFFSET = {"R": 1, "S": 2}


class Policy:
    """Base class; subclasses implement `_setup`, `place` and `move`."""

    name = "policy"

    def reset(self, arena: Arena, r: int, s: int, k: int, seed: int, team: str):
        self.arena = arena
        self.r, self.s, self.k = r, s, k
        self.seed = seed
        self.team = team
        self.rng = random.Random(seed * 1_000_003 + _TEAM_OFFSET[team])
        self._setup()

    def _setup(self) -> None:
        pass

    def place(self, state: GameState):
        raise NotImplementedError

    def move(self, state: GameState):
        raise NotImplementedError

    # -- helpers for label-keeping policies ------------------------------

    def _emit(self, own: list[int], targets: dict[int, int]):
        """Aligned joint move for labelled agents; `own` is updated."""
        order = sorted(range(len(own)), key=lambda i: (own[i], i))
        move = tuple(targets.get(lbl, own[lbl]) for lbl in order)
        for lbl, dst in targets.items():
            own[lbl] = dst
        return move


class LabelTracker:
    """Keeps stable labels for the opposing team across sorted multisets.

    Each update finds an assignment of old labelled positions onto the
    observed multiset with every agent moving at most one step; the
    lexicographically first assignment is taken, which is deterministic
    and sound for every strategy here.
    """

    def __init__(self, arena: Arena, positions):
        self.arena = arena
        self.positions = list(positions)

    def update(self, observed) -> list[int]:
        arena = self.arena
        remaining: dict[int, int] = {}
        for v in observed:
            remaining[v] = remaining.get(v, 0) + 1
        n = len(self.positions)
        assignment = [0] * n

        def assign(i: int) -> bool:
            if i == n:
                return True
            src = self.positions[i]
            for dst in sorted(remaining):
                if remaining[dst] == 0:
                    continue
                if dst == src or arena.is_adjacent(src, dst):
                    remaining[dst] -= 1
                    assignment[i] = dst
                    if assign(i + 1):
                        return True
                    remaining[dst] += 1
            return False

        if not assign(0):
            raise UsageError("observed positions not reachable from tracked labels")
        self.positions = list(assignment)
        return self.positions


# -- harness opponents -------------------------------------------------------


class RandomPolicy(Policy):
    """Uniform random placement and moves; the basic fuzz opponent."""

    name = "random"

    def place(self, state):
        count = self.r if self.team == "R" else self.s
        return tuple(self.rng.randrange(self.arena.n) for _ in range(count))

    def move(self, state):
        return tuple(
            self.rng.choice(self.arena.closed_neighborhood(v))
            for v in state.moving_team()
        )


class GreedyCrowdPolicy(Policy):
    """Revolutionaries that pile onto the coordinate median, the
    crowding stress test for spy strategies."""

    name = "greedy"

    def _setup(self):
        if self.team != "R":
            raise UsageError("greedy crowding is a revolutionary policy")
        if self.arena.coords is None:
            raise UsageError("greedy crowding needs a coordinate embedding")

    def place(self, state):
        return tuple(self.rng.randrange(self.arena.n) for _ in range(self.r))

    def move(self, state):
        coords = [self.arena.coord_of(v) for v in state.revs]
        dim = len(coords[0])
        target = tuple(
            sorted(c[i] for c in coords)[len(coords) // 2] for i in range(dim)
        )
        out = []
        for v in state.revs:
            p = self.arena.coord_of(v)
            step = tuple(
                a + (0 if a == b else (1 if b > a else -1))
                for a, b in zip(p, target)
            )
            out.append(self.arena.vertex_at(step))
        return tuple(out)


# -- spy strategies from the catalogue ---------------------------------------


class FollowerSpies(Policy):
    """Each spy shadows one revolutionary, move for move."""

    name = "follower"

    def __init__(self, targets=None):
        self.targets = list(targets) if targets is not None else None

    def _setup(self):
        if self.team != "S":
            raise UsageError("follower is a spy policy")
        targets = self.targets if self.targets is not None else list(range(self.s))
        if len(targets) > self.s:
            raise UsageError(f"{len(targets)} targets for {self.s} spies")
        if any(not 0 <= t < self.r for t in targets):
            raise UsageError("follow targets must be revolutionary labels")
        # spies beyond the target list shadow the first target
        self._assigned = targets + [targets[0]] * (self.s - len(targets)) \
            if targets else []
        self._tracker = None
        self._own: list[int] = []

    def place(self, state):
        self._tracker = LabelTracker(self.arena, state.revs)
        self._own = [self._tracker.positions[t] for t in self._assigned]
        return tuple(self._own)

    def move(self, state):
        revs = self._tracker.update(state.revs)
        targets = {i: revs[t] for i, t in enumerate(self._assigned)}
        return self._emit(self._own, targets)


class OrderStatSpies(Policy):
    """Line strategy: spy i sits on the (i*k)-th smallest revolutionary
    coordinate; the one-step Lipschitz property of order statistics
    keeps every move legal."""

    name = "orderstat"

    def __init__(self, k: int | None = None):
        self.declared_k = k

    def _setup(self):
        if self.team != "S":
            raise UsageError("orderstat is a spy policy")
        if self.declared_k is not None and self.declared_k != self.k:
            raise UsageError(f"policy built for k={self.declared_k}, game has k={self.k}")
        if self.arena.coords is None or len(self.arena.coords[0]) != 1:
            raise UsageError("orderstat needs a path or 1-d lattice arena")
        need = self.r // self.k
        if self.s < need:
            raise UsageError(f"orderstat needs at least r//k = {need} spies")
        self._own: list[int] = []

    def _stations(self, revs):
        xs = sorted(self.arena.coord_of(v)[0] for v in revs)
        need = self.r // self.k
        stations = [xs[i * self.k - 1] for i in range(1, need + 1)]
        stations += [stations[-1]] * (self.s - need)
        return [self.arena.vertex_at((x,)) for x in stations]

    def place(self, state):
        self._own = self._stations(state.revs)
        return tuple(self._own)

    def move(self, state):
        stations = self._stations(state.revs)
        return self._emit(self._own, dict(enumerate(stations)))


class MedianSpy(Policy):
    """One spy on the coordinatewise k-th order statistic of 2k-1
    revolutionaries; guards every meeting of size k among them."""

    name = "medianspy"

    def _setup(self):
        if self.team != "S":
            raise UsageError("medianspy is a spy policy")
        if self.arena.coords is None:
            raise UsageError("medianspy needs a lattice arena")
        if self.r != 2 * self.k - 1:
            raise UsageError(f"medianspy wants exactly 2k-1 = {2 * self.k - 1} revolutionaries")
        if self.s != 1:
            raise UsageError("medianspy is a single spy")
        self._own: list[int] = []

    def _station(self, revs):
        coords = [self.arena.coord_of(v) for v in revs]
        dim = len(coords[0])
        point = tuple(
            sorted(c[i] for c in coords)[self.k - 1] for i in range(dim)
        )
        return self.arena.vertex_at(point)

    def place(self, state):
        self._own = [self._station(state.revs)]
        return tuple(self._own)

    def move(self, state):
        return self._emit(self._own, {0: self._station(state.revs)})


class SumCombinator(Policy):
    """Runs sub-policies side by side on disjoint agent groups.

    `parts` is a list of (r_i, s_i, k_i, sub-policy); groups take
    consecutive label ranges.  Guards every meeting of size
    sum(k_i) - len(parts) + 1.
    """

    name = "sum"

    def __init__(self, parts):
        self.parts = list(parts)

    def _setup(self):
        if self.team != "S":
            raise UsageError("sum combinator is a spy policy")
        if sum(p[0] for p in self.parts) != self.r:
            raise UsageError("group revolutionary counts must sum to r")
        if sum(p[1] for p in self.parts) != self.s:
            raise UsageError("group spy counts must sum to s")
        self._tracker = None
        self._own: list[int] = []
        for idx, (ri, si, ki, sub) in enumerate(self.parts):
            sub.reset(self.arena, ri, si, ki, self.seed * 31 + idx, "S")

    def _group_slices(self):
        rev_at = spy_at = 0
        for ri, si, ki, sub in self.parts:
            yield (slice(rev_at, rev_at + ri), slice(spy_at, spy_at + si), sub)
            rev_at += ri
            spy_at += si

    def _virtual(self, revs, spies, phase, round_no):
        return GameState(self.arena, tuple(sorted(revs)), tuple(sorted(spies)),
                         phase, round_no)

    def place(self, state):
        self._tracker = LabelTracker(self.arena, state.revs)
        own: list[int] = []
        for rev_sl, spy_sl, sub in self._group_slices():
            revs = self._tracker.positions[rev_sl]
            placement = tuple(sub.place(self._virtual(revs, (), Phase.SPY_PLACEMENT, 0)))
            own.extend(placement)
        self._own = own
        return tuple(self._own)

    def move(self, state):
        revs = self._tracker.update(state.revs)
        targets: dict[int, int] = {}
        for rev_sl, spy_sl, sub in self._group_slices():
            group_revs = revs[rev_sl]
            group_labels = list(range(spy_sl.start, spy_sl.stop))
            group_own = [self._own[i] for i in group_labels]
            vstate = self._virtual(group_revs, group_own, Phase.SPY_TO_MOVE,
                                   state.round)
            sub_move = tuple(sub.move(vstate))
            order = sorted(group_labels, key=lambda i: (self._own[i], i))
            for lbl, dst in zip(order, sub_move):
                targets[lbl] = dst
        return self._emit(self._own, targets)


def composite_spies(r: int, k: int) -> SumCombinator:
    """Followers pin r-2k+1 revolutionaries and one median spy guards
    the remaining 2k-1; wins with r-2k+2 spies on king lattices."""
    if not 1 <= k <= r // 2:
        raise UsageError("composite needs 1 <= k <= r/2")
    followers = r - 2 * k + 1
    parts = [(followers, followers, 1, FollowerSpies()),
             (2 * k - 1, 1, k, MedianSpy())]
    pol = SumCombinator(parts)
    pol.name = "composite"
    return pol


# -- adaptors ----------------------------------------------------------------


class PowerLiftSpies(Policy):
    """Lifts a winning spy policy from G to the n-th power of G by
    decomposing every observed revolutionary jump into at most n single
    steps and replaying them for the base policy."""

    name = "powerlift"

    def __init__(self, base: Policy, n: int, base_arena: Arena):
        self.base = base
        self.n = n
        self.base_arena = base_arena

    def _setup(self):
        if self.team != "S":
            raise UsageError("powerlift adapts spy policies")
        if self.arena.n != self.base_arena.n:
            raise UsageError("power arena must share the base vertex set")
        self.base.reset(self.base_arena, self.r, self.s, self.k, self.seed, "S")
        self._tracker = None
        self._own: list[int] = []

    def place(self, state):
        self._tracker = LabelTracker(self.arena, state.revs)
        vstate = GameState(self.base_arena, state.revs, (), Phase.SPY_PLACEMENT, 0)
        self._own = list(self.base.place(vstate))
        return tuple(self._own)

    def _decompose(self, src: int, dst: int) -> list[int]:
        """Single base-graph steps from src to dst, lexicographically
        smallest intermediate first, padded with stays."""
        from .arena import all_distances

        steps = []
        here = src
        for remaining in range(self.n, 0, -1):
            if here == dst:
                steps.append(here)
                continue
            dist_to = all_distances(self.base_arena, dst)
            best = None
            for q in self.base_arena.closed_neighborhood(here):
                if dist_to[q] <= remaining - 1 and (best is None or q < best):
                    best = q
            if best is None:
                raise UsageError("observed jump exceeds the power of the base arena")
            steps.append(best)
            here = best
        return steps

    def move(self, state):
        old_rev = list(self._tracker.positions)
        new_rev = self._tracker.update(state.revs)
        paths = [self._decompose(a, b) for a, b in zip(old_rev, new_rev)]
        start = list(self._own)
        for step in range(self.n):
            revs_step = tuple(sorted(p[step] for p in paths))
            vstate = GameState(self.base_arena, revs_step, tuple(sorted(self._own)),
                               Phase.SPY_TO_MOVE, state.round)
            sub_move = tuple(self.base.move(vstate))
            order = sorted(range(len(self._own)), key=lambda i: (self._own[i], i))
            for lbl, dst in zip(order, sub_move):
                self._own[lbl] = dst
        order = sorted(range(len(start)), key=lambda i: (start[i], i))
        return tuple(self._own[lbl] for lbl in order)


class ProjectionRevs(Policy):
    """Plays a winning revolutionary policy inside one copy of a strong
    product factor, feeding it the spies' projections."""

    name = "project"

    def __init__(self, base: Policy, left: Arena, right: Arena, which: str = "left"):
        if which not in ("left", "right"):
            raise UsageError("which must be 'left' or 'right'")
        self.base = base
        self.left = left
        self.right = right
        self.which = which

    def _setup(self):
        if self.team != "R":
            raise UsageError("projection adapts revolutionary policies")
        if self.arena.n != self.left.n * self.right.n:
            raise UsageError("arena is not the declared product")
        factor = self.left if self.which == "left" else self.right
        self.base.reset(factor, self.r, self.s, self.k, self.seed, "R")
        self._factor = factor
        self._own: list[int] = []

    def _project(self, v: int) -> int:
        i, j = divmod(v, self.right.n)
        return i if self.which == "left" else j

    def _lift(self, g: int) -> int:
        return g * self.right.n if self.which == "left" else g

    def place(self, state):
        vstate = GameState(self._factor, (), (), Phase.REV_PLACEMENT, 0)
        base_placement = list(self.base.place(vstate))
        self._own = [self._lift(g) for g in base_placement]
        self._base_own = base_placement
        return tuple(self._own)

    def move(self, state):
        spies = tuple(sorted(self._project(v) for v in state.spies))
        vstate = GameState(self._factor, tuple(sorted(self._base_own)), spies,
                           Phase.REV_TO_MOVE, state.round)
        sub_move = tuple(self.base.move(vstate))
        order = sorted(range(len(self._base_own)),
                       key=lambda i: (self._base_own[i], i))
        targets = {}
        for lbl, dst in zip(order, sub_move):
            self._base_own[lbl] = dst
            targets[lbl] = self._lift(dst)
        return self._emit(self._own, targets)


class GroupLiftSpies(Policy):
    """Plays a spy policy for (a*r, a*k) against r revolutionaries by
    pretending each stands for a co-located group of a."""

    name = "grouplift"

    def __init__(self, base: Policy, a: int):
        if a < 1:
            raise UsageError("group size must be >= 1")
        self.base = base
        self.a = a

    def _setup(self):
        if self.team != "S":
            raise UsageError("group lift adapts spy policies")
        self.base.reset(self.arena, self.a * self.r, self.s, self.a * self.k,
                        self.seed, "S")

    def _virtual(self, state, phase):
        revs = tuple(sorted(v for v in state.revs for _ in range(self.a)))
        return GameState(self.arena, revs, state.spies, phase, state.round)

    def place(self, state):
        return tuple(self.base.place(self._virtual(state, Phase.SPY_PLACEMENT)))

    def move(self, state):
        return tuple(self.base.move(self._virtual(state, Phase.SPY_TO_MOVE)))


# -- the certificate-driven revolutionary policy ------------------------------


class _CertificateDriver:
    """Interprets the case-analysis tree for eight revolutionaries.

    Tracks the composed square symmetry between real coordinates and
    the tree's canonical frame, plays scripted moves while the spies
    conform, and commits to a punishment march the moment they do not.
    """

    def __init__(self, tree: ProofTree, offset):
        self.tree = tree
        self.offset = offset
        self.own = [self._to_real(p) for p in REV_START]
        self.frame = MAT_ID
        self.node_id: str | None = None
        self.plan: deque = deque()
        self.stalled = False
        self.started = False
        self.issued: list[tuple[tuple[int, int], int]] = []

    def _to_real(self, p):
        return (p[0] + self.offset[0], p[1] + self.offset[1])

    def _from_real(self, p):
        return (p[0] - self.offset[0], p[1] - self.offset[1])

    def _canon(self, p):
        return mat_apply(self.frame, self._from_real(p))

    def _decanon(self, p):
        return self._to_real(mat_apply(mat_inverse(self.frame), p))

    def _commit(self, threats, canonical_revs) -> None:
        """Queue the march executing a canonical-frame threat set."""
        real_threats = []
        for t in threats:
            vertex = self._decanon(t.vertex)
            pair_real = [self._decanon(canonical_revs[i]) for i in t.pair]
            pair_labels = tuple(self.own.index(c) for c in pair_real)
            real_threats.append(Threat(vertex, t.deadline, pair_labels))
            self.issued.append((vertex, t.deadline))
        ts = make_threat_set(real_threats)
        for row in march_plan(self.own, ts):
            self.plan.append(list(row))

    def _enter_node(self, node_id: str):
        node = self.tree.node(node_id)
        if node.kind == "leaf":
            self._commit(node.leaf_set, node.revs_after)
            return self._pop_plan()
        self.node_id = node_id
        targets = {}
        for src, dst in node.script:
            lbl = self.own.index(self._decanon(src))
            targets[lbl] = self._decanon(dst)
        return [targets.get(lbl, p) for lbl, p in enumerate(self.own)]

    def _pop_plan(self):
        return self.plan.popleft() if self.plan else None

    def next_targets(self, spy_coords) -> list | None:
        """Coordinate row for all eight labels, or None to stall."""
        if self.stalled:
            return None
        if self.plan:
            row = self._pop_plan()
        elif not self.started:
            self.started = True
            decision = route_placement(
                self.tree, [self._from_real(p) for p in spy_coords]
            )
            if decision.kind == "stall":
                row = None
            else:
                self.frame = decision.frame  # absolute for placement routing
                if decision.kind == "punish":
                    self._commit(decision.threats, decision.revs)
                    row = self._pop_plan()
                else:
                    row = self._enter_node(decision.node_id)
        elif self.node_id is not None:
            canon_spies = [self._canon(p) for p in spy_coords]
            node_id = self.node_id
            self.node_id = None
            decision = route_response(self.tree, node_id, canon_spies)
            if decision.kind == "stall":
                row = None
            elif decision.kind == "punish":
                self._commit(decision.threats, decision.revs)
                row = self._pop_plan()
            else:
                self.frame = mat_compose(decision.frame, self.frame)
                row = self._enter_node(decision.node_id)
        else:
            row = None
        if row is None:
            self.stalled = True
            return None
        self.own = list(row)
        return row


class EightVsFivePolicy(Policy):
    """Scripted revolutionary policy for 8 vs 5 with meetings of two on
    a king lattice; interprets the verified case-analysis tree."""

    name = "thm85"

    def __init__(self, offset=(0, 0)):
        self.offset = tuple(offset)
        self.tree = build_tree()
        self.issued_threats: list = []

    def _setup(self):
        if self.team != "R":
            raise UsageError("this is a revolutionary policy")
        if self.r != 8 or self.k != 2:
            raise UsageError("needs r = 8 and k = 2")
        if self.arena.coords is None or len(self.arena.coords[0]) != 2:
            raise UsageError("needs a 2-d lattice arena")
        for corner in ((-11, -11), (-11, 11), (11, -11), (11, 11)):
            p = (corner[0] + self.offset[0], corner[1] + self.offset[1])
            if not self.arena.contains_coord(p):
                raise UsageError("arena too small for the certificate box")
        self.driver = _CertificateDriver(self.tree, self.offset)
        self.issued_threats = self.driver.issued
        self._own_ids: list[int] = []

    def place(self, state):
        self._own_ids = [self.arena.vertex_at(p) for p in self.driver.own]
        return tuple(self._own_ids)

    def move(self, state):
        spies = [self.arena.coord_of(v) for v in state.spies]
        row = self.driver.next_targets(spies)
        if row is None:
            return state.revs
        own = self._own_ids
        order = sorted(range(len(own)), key=lambda i: (own[i], i))
        ids = [self.arena.vertex_at(p) for p in row]
        move = tuple(ids[lbl] for lbl in order)
        self._own_ids = ids
        return move


class ReplicatedEightPolicy(Policy):
    """Opens one eight-revolutionary pattern per group of eight at
    (30i, 0) and engages the first box holding at most five spies;
    everyone else holds position."""

    name = "replicated"

    def _setup(self):
        if self.team != "R":
            raise UsageError("this is a revolutionary policy")
        if self.r < 8 or self.k != 2:
            raise UsageError("needs r >= 8 and k = 2")
        if self.arena.coords is None or len(self.arena.coords[0]) != 2:
            raise UsageError("needs a 2-d lattice arena")
        self.groups = self.r // 8
        for i in range(1, self.groups + 1):
            for corner in ((-11, -11), (11, 11)):
                p = (30 * i + corner[0], corner[1])
                if not self.arena.contains_coord(p):
                    raise UsageError(f"arena too small for engagement box {i}")
        self.tree = build_tree()
        self.driver: _CertificateDriver | None = None
        self.selected_box: int | None = None
        self.issued_threats: list = []
        self.gave_up = False
        self._own: list = []

    def place(self, state):
        own = []
        for i in range(1, self.groups + 1):
            own.extend((30 * i + p[0], p[1]) for p in REV_START)
        own.extend([(30, 0)] * (self.r - 8 * self.groups))
        self._own = own
        return tuple(self.arena.vertex_at(p) for p in own)

    def _spies_in_box(self, spies, i):
        cx = 30 * i
        return [p for p in spies
                if abs(p[0] - cx) <= 11 and abs(p[1]) <= 11]

    def move(self, state):
        spies = [self.arena.coord_of(v) for v in state.spies]
        if self.driver is None and not self.gave_up:
            for i in range(1, self.groups + 1):
                if len(self._spies_in_box(spies, i)) <= 5:
                    self.selected_box = i
                    self.driver = _CertificateDriver(self.tree, (30 * i, 0))
                    self.issued_threats = self.driver.issued
                    self._engaged = list(range(8 * (i - 1), 8 * i))
                    break
            else:
                self.gave_up = True
        if self.driver is None:
            return state.revs

        row = self.driver.next_targets(
            self._spies_in_box(spies, self.selected_box)
        )
        if row is None:
            return state.revs
        old_ids = [self.arena.vertex_at(p) for p in self._own]
        for lbl, p in zip(self._engaged, row):
            self._own[lbl] = p
        new_ids = [self.arena.vertex_at(p) for p in self._own]
        order = sorted(range(len(old_ids)), key=lambda i: (old_ids[i], i))
        return tuple(new_ids[lbl] for lbl in order)


# -- spec-named constructors --------------------------------------------------


def follower_spies(targets=None) -> FollowerSpies:
    return FollowerSpies(targets)


def order_statistic_spies_path(k: int | None = None) -> OrderStatSpies:
    return OrderStatSpies(k)


def coordinatewise_orderstat_spy(k: int | None = None, d: int | None = None) -> MedianSpy:
    return MedianSpy()


def composite_zd_spies(r: int, k: int, d: int | None = None) -> SumCombinator:
    return composite_spies(r, k)


def sum_combinator(parts) -> SumCombinator:
    return SumCombinator(parts)


def power_adaptor(base: Policy, n: int, base_arena: Arena) -> PowerLiftSpies:
    return PowerLiftSpies(base, n, base_arena)


def projection_rev_adaptor(base: Policy, left: Arena, right: Arena,
                           which: str = "left") -> ProjectionRevs:
    return ProjectionRevs(base, left, right, which)


def group_lift_spies(base: Policy, a: int) -> GroupLiftSpies:
    return GroupLiftSpies(base, a)


def theorem85_policy(offset=(0, 0)) -> EightVsFivePolicy:
    return EightVsFivePolicy(offset)


def replicated_policy() -> ReplicatedEightPolicy:
    return ReplicatedEightPolicy()
