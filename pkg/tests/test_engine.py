"""Game semantics tests: moves, rounds, win timing, match execution."""

import pytest
from hypothesis import given, settings, strategies as st

from revspy.arena import king_arena, make_arena, path_arena
from revspy.engine import (
    GameState,
    Phase,
    Trace,
    apply,
    legal_joint_moves,
    multiset_moves,
    play,
    unguarded_meeting,
)
from revspy.errors import RuleViolation, UsageError


def state_at(arena, revs, spies, phase=Phase.REV_TO_MOVE, round_no=1):
    return GameState(arena, tuple(sorted(revs)), tuple(sorted(spies)),
                     phase, round_no)


class FixedPolicy:
    """Places at fixed vertices, then replays scripted moves (staying after)."""

    def __init__(self, placement, moves=()):
        self.placement = tuple(placement)
        self.moves = [tuple(m) for m in moves]

    def reset(self, arena, r, s, k, seed, team):
        self._step = 0

    def place(self, state):
        return self.placement

    def move(self, state):
        if self._step < len(self.moves):
            mv = self.moves[self._step]
            self._step += 1
            return mv
        return state.moving_team()


def test_joint_moves_center_of_king():
    arena = king_arena(3, 3)
    st_ = state_at(arena, [], [4], phase=Phase.SPY_TO_MOVE)
    assert len(list(legal_joint_moves(st_))) == 9


def test_joint_moves_multiset_dedup():
    arena = path_arena(2)
    st_ = state_at(arena, [0, 0], [])
    moves = {tuple(sorted(m)) for m in legal_joint_moves(st_)}
    assert moves == {(0, 0), (0, 1), (1, 1)}


def test_joint_moves_isolated_vertex():
    arena = make_arena("star:1")
    st_ = state_at(arena, [0], [])
    assert list(legal_joint_moves(st_)) == [(0,)]


def test_joint_moves_wrong_phase():
    arena = path_arena(2)
    st_ = GameState.initial(arena)
    with pytest.raises(UsageError):
        next(legal_joint_moves(st_))


def test_unguarded_meeting_guarded():
    assert unguarded_meeting((3, 3), (3,), 2) is None


def test_unguarded_meeting_found():
    assert unguarded_meeting((3, 3), (5,), 2) == 3


def test_unguarded_meeting_tiebreak_smallest():
    assert unguarded_meeting((2, 2, 7, 7), (9,), 2) == 2


def test_initial_eight_positions_all_distinct():
    b = make_arena("box:2:-4:4")
    revs = tuple(sorted(
        b.vertex_at(c)
        for c in [(1, 1), (1, -1), (-1, 1), (-1, -1), (3, 3), (3, -3), (-3, 3), (-3, -3)]
    ))
    assert unguarded_meeting(revs, (), 2) is None


def test_apply_round_progression():
    arena = path_arena(3)
    st_ = GameState.initial(arena)
    st_ = apply(st_, (0, 2))              # rev placement
    assert st_.phase is Phase.SPY_PLACEMENT and st_.round == 0
    st_ = apply(st_, (1,))                # spy placement
    assert st_.phase is Phase.REV_TO_MOVE and st_.round == 1
    st_ = apply(st_, (1, 2))              # revs move
    assert st_.phase is Phase.SPY_TO_MOVE and st_.round == 1
    st_ = apply(st_, (1,))                # spies move
    assert st_.phase is Phase.REV_TO_MOVE and st_.round == 2


def test_apply_stay_move_identity():
    arena = path_arena(3)
    st_ = state_at(arena, [0, 2], [1])
    nxt = apply(st_, (0, 2))
    assert nxt.revs == st_.revs
    assert nxt.phase is Phase.SPY_TO_MOVE


def test_apply_rejects_illegal_move_with_agent_index():
    arena = path_arena(4)
    st_ = state_at(arena, [0, 3], [])
    with pytest.raises(RuleViolation) as err:
        apply(st_, (0, 1))
    assert err.value.agent == 1


def test_apply_rejects_wrong_arity():
    arena = path_arena(4)
    st_ = state_at(arena, [0, 3], [])
    with pytest.raises(RuleViolation):
        apply(st_, (0,))


@given(st.lists(st.integers(min_value=0, max_value=5), min_size=2, max_size=4))
@settings(max_examples=60, deadline=None)
def test_permutation_invariance(positions):
    arena = path_arena(6)
    st_ = GameState.initial(arena)
    a = apply(st_, tuple(positions))
    b = apply(st_, tuple(reversed(positions)))
    assert a == b


def test_every_emitted_move_is_accepted():
    arena = king_arena(3, 3)
    st_ = state_at(arena, [0, 4, 4], [8], phase=Phase.REV_TO_MOVE)
    count = 0
    for mv in legal_joint_moves(st_):
        nxt = apply(st_, mv)
        assert nxt.phase is Phase.SPY_TO_MOVE
        count += 1
    assert count > 0


def test_multiset_moves_match_brute_force():
    arena = path_arena(4)
    pos = (1, 1, 2)
    got = {tuple(sorted(m)) for m in multiset_moves(arena, pos)}
    import itertools
    brute = set()
    for combo in itertools.product(*[arena.closed_neighborhood(v) for v in pos]):
        brute.add(tuple(sorted(combo)))
    assert got == brute


def test_win_waits_for_spy_reply():
    # revolutionaries form a meeting, but a spy can step onto it
    arena = path_arena(3)
    revs = FixedPolicy([0, 2], moves=[(1, 1)])
    spies = FixedPolicy([2], moves=[(1,)])
    trace = play(arena, 2, 1, 2, revs, spies, max_rounds=3)
    assert trace.outcome == "round-limit"


def test_win_when_spy_cannot_cover():
    arena = path_arena(5)
    revs = FixedPolicy([0, 2], moves=[(1, 1)])
    spies = FixedPolicy([4], moves=[(4,)])
    trace = play(arena, 2, 1, 2, revs, spies, max_rounds=3)
    assert trace.outcome == "revwin"
    assert trace.win_vertex == 1


def test_no_spies_win_at_placement():
    arena = path_arena(2)
    trace = play(arena, 2, 0, 2, FixedPolicy([0, 0]), FixedPolicy([]), max_rounds=5)
    assert trace.rev_won
    assert trace.entries[-1] == (0, "S", ())


def test_spy_guards_single_vertex_forever():
    arena = path_arena(1)
    trace = play(arena, 2, 1, 2, FixedPolicy([0, 0]), FixedPolicy([0]), max_rounds=20)
    assert trace.outcome == "round-limit"


def test_spy_placement_win_check():
    # spies place away from a double meeting and immediately lose
    arena = path_arena(3)
    trace = play(arena, 2, 1, 2, FixedPolicy([0, 0]), FixedPolicy([2]), max_rounds=5)
    assert trace.outcome == "revwin"
    assert len(trace.entries) == 2


def test_illegal_policy_move_forfeits():
    arena = path_arena(4)

    class Cheater(FixedPolicy):
        def move(self, state):
            return (3, 3)  # jump from vertex 0

    trace = play(arena, 2, 1, 2, Cheater([0, 0]), FixedPolicy([0]), max_rounds=5)
    assert trace.outcome == "forfeit:R"
    assert not trace.rev_won


def test_round_counter_counts_spy_moves():
    arena = path_arena(3)
    revs = FixedPolicy([0, 2])
    spies = FixedPolicy([1])
    trace = play(arena, 2, 1, 2, revs, spies, max_rounds=4)
    spy_moves = [e for e in trace.entries if e[1] == "S" and e[0] > 0]
    assert [e[0] for e in spy_moves] == [1, 2, 3, 4]


def test_trace_format_plain_ids():
    arena = path_arena(3)
    trace = play(arena, 2, 1, 2, FixedPolicy([0, 2]), FixedPolicy([1]), max_rounds=1)
    text = trace.format()
    assert "round=0 team=R pos=0,2" in text
    assert text.strip().endswith("outcome=round-limit")


def test_trace_format_lattice_coords():
    arena = make_arena("box:2:-1:1")
    c = arena.vertex_at((0, 0))
    trace = play(arena, 2, 1, 2, FixedPolicy([c, c]), FixedPolicy([c]), max_rounds=1)
    assert "pos=(0,0),(0,0)" in trace.format()
