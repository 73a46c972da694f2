"""Threat machinery and certificate verification tests."""

import itertools
import random

import pytest

from revspy.arena import box_arena
from revspy.certify import (
    Threat,
    coverable,
    covers,
    dist,
    make_threat_set,
    march_plan,
    punish,
    realizable,
)
from revspy.engine import GameState, Phase, apply, meeting_vertices
from revspy.errors import UsageError
from revspy.prooftree import REV_START, build_tree, mat_apply, D4, ROT_CW
from revspy.solver import bounded_rev_wins
from revspy.verify85 import (
    route_placement,
    route_response,
    verify_leaf,
    verify_node,
    verify_theorem85,
)


def T(vertex, deadline, pair=(0, 1)):
    return Threat(vertex, deadline, pair)


# -- covers ------------------------------------------------------------------


def test_covers_near_meeting():
    assert covers((1, 1), [T((0, 2), 1)]) is True


def test_covers_far_meeting():
    assert covers((3, 3), [T((0, 6), 3)]) is True


def test_covers_cannot_chain_far_apart():
    # serving (0,2) at round 1 leaves a 4-step gap to (0,6) by round 3
    assert covers((1, 1), [T((0, 2), 1), T((0, 6), 3, (2, 3))]) is False


def test_covers_rejects_unsorted():
    with pytest.raises(UsageError):
        covers((0, 0), [T((0, 6), 3), T((0, 2), 1, (2, 3))])


def test_covers_chain_same_deadline_needs_same_vertex():
    assert covers((0, 0), [T((0, 1), 1), T((1, 1), 1, (2, 3))]) is False
    assert covers((0, 0), [T((0, 1), 1), T((0, 1), 1, (2, 3))]) is True


# -- coverable ---------------------------------------------------------------


def test_coverable_wedge_positions():
    ts = make_threat_set([T((0, 2), 1, (0, 1)), T((0, 6), 3, (2, 3))])
    assert coverable([(1, 1), (3, 3)], ts) is True


def test_coverable_fails_when_both_far():
    ts = make_threat_set([T((0, 2), 1, (0, 1)), T((0, 6), 3, (2, 3))])
    assert coverable([(0, 0), (9, 9)], ts) is False


def test_coverable_empty_set():
    assert coverable([(0, 0)], ()) is True
    assert coverable([], ()) is True


def test_coverable_no_spies():
    assert coverable([], make_threat_set([T((0, 0), 1)])) is False


def test_coverable_single_spy_equals_covers():
    rng = random.Random(7)
    for _ in range(300):
        spy = (rng.randint(-5, 5), rng.randint(-5, 5))
        threats = []
        deadline = 0
        pair = 0
        for _ in range(rng.randint(1, 3)):
            deadline += rng.randint(0, 3)
            threats.append(T((rng.randint(-5, 5), rng.randint(-5, 5)),
                             deadline, (pair, pair + 1)))
            pair += 2
        ts = tuple(threats)
        assert coverable([spy], ts) == covers(spy, ts)


# -- realizable --------------------------------------------------------------


def test_realizable_wedge_set_from_opening():
    ts = make_threat_set([
        Threat((0, 2), 1, (REV_START.index((-1, 1)), REV_START.index((1, 1)))),
        Threat((0, 6), 3, (REV_START.index((-3, 3)), REV_START.index((3, 3)))),
    ])
    assert realizable(REV_START, ts) is True


def test_realizable_rejects_shared_rev():
    ts = (Threat((0, 2), 1, (0, 1)), Threat((0, 4), 3, (1, 2)))
    assert realizable(REV_START, ts) is False


def test_realizable_rejects_too_far():
    idx = (REV_START.index((3, 3)), REV_START.index((1, 1)))
    assert realizable(REV_START, (Threat((0, 6), 2, idx),)) is False


def test_make_threat_set_rejects_overlap():
    with pytest.raises(UsageError):
        make_threat_set([T((0, 0), 1, (0, 1)), T((2, 2), 1, (1, 2))])


# -- marching ----------------------------------------------------------------


def test_march_plan_single_step():
    revs = [(1, 1), (3, 3)]
    ts = make_threat_set([T((2, 2), 1, (0, 1))])
    assert march_plan(revs, ts) == [[(2, 2), (2, 2)]]


def test_march_plan_lexicographic_intermediates():
    revs = [(-3, 3), (3, 3)]
    ts = make_threat_set([T((0, 6), 3, (0, 1))])
    plan = march_plan(revs, ts)
    assert plan[0] == [(-2, 4), (2, 4)]
    assert plan[1] == [(-1, 5), (1, 5)]
    assert plan[2] == [(0, 6), (0, 6)]


def test_march_plan_deadline_zero_empty():
    revs = [(5, 5), (5, 5)]
    ts = make_threat_set([T((5, 5), 0, (0, 1))])
    assert march_plan(revs, ts) == []


def test_march_plan_stalls_until_needed():
    revs = [(0, 0), (2, 2)]
    ts = make_threat_set([T((1, 1), 3, (0, 1))])
    plan = march_plan(revs, ts)
    # both revs sit still for two rounds, then step in together
    assert plan[0][0] == (0, 0) and plan[1][0] == (0, 0)
    assert plan[2] == [(1, 1), (1, 1)]


def test_punish_through_engine_meets_exactly_at_deadline():
    arena = box_arena(2, -11, 11)
    revs = tuple(sorted(arena.vertex_at(p) for p in REV_START))
    spies = (arena.vertex_at((9, 9)),)
    state = GameState(arena, revs, spies, Phase.REV_TO_MOVE, 1)
    i, j = (sorted(REV_START).index((-3, 3)), sorted(REV_START).index((3, 3)))
    ts = make_threat_set([Threat((0, 6), 3, (i, j))])
    moves = punish(state, ts)
    assert len(moves) == 3
    target = arena.vertex_at((0, 6))
    for round_no, mv in enumerate(moves, start=1):
        state = apply(state, mv)
        meets = meeting_vertices(state.revs, 2)
        if round_no < 3:
            assert target not in meets
        else:
            assert target in meets
        state = apply(state, state.spies)  # spies stall


def test_punish_requires_realizable():
    arena = box_arena(2, -4, 4)
    revs = (arena.vertex_at((0, 0)), arena.vertex_at((4, 4)))
    state = GameState(arena, tuple(sorted(revs)), (), Phase.REV_TO_MOVE, 1)
    with pytest.raises(UsageError):
        punish(state, make_threat_set([T((0, 0), 1, (0, 1))]))


# -- the certificate ----------------------------------------------------------


def test_verify_clean_tree_passes():
    report = verify_theorem85()
    assert report.ok
    assert all(n.gaps == 0 for n in report.nodes)
    assert len(report.nodes) == 8


@pytest.mark.parametrize("mutation", ["shrunk-deadline", "widened-box", "deleted-threat"])
def test_verify_mutations_fail(mutation):
    report = verify_theorem85(mutation=mutation)
    assert not report.ok
    assert report.first_counterexample() is not None


def test_verify_workers_do_not_change_report():
    a = verify_theorem85(workers=1)
    b = verify_theorem85(workers=4)
    assert a.format() == b.format()


def test_verify_single_node_filter():
    report = verify_theorem85(only=["case1-round1"])
    assert report.ok
    assert [n.node_id for n in report.nodes] == ["case1-round1"]


def test_threat_locality_bounds():
    tree = build_tree()
    for name, ts in tree.all_threat_sets():
        for t in ts:
            assert max(abs(t.vertex[0]), abs(t.vertex[1])) <= 6, name
            assert t.deadline <= 5, name


def test_empty_ne_box_placement_is_punished():
    tree = build_tree()
    # nobody within reach of (2,2): the NE box threat fires
    placement = [(-2, -2), (-2, 2), (2, -2), (0, 5), (-5, 0)]
    decision = route_placement(tree, placement)
    assert decision.kind == "punish"
    assert decision.label == "box-ne"
    assert not coverable(placement, decision.threats)


def test_far_spies_never_cover():
    tree = build_tree()
    placement = [(2, 2), (2, -2), (-2, -2), (-2, 2), (50, 50)]
    decision = route_placement(tree, placement)
    # wedge duties cannot all be met with the fifth spy out of play
    assert decision.kind == "punish"


def test_route_placement_case1_and_mirror():
    tree = build_tree()
    base = [(1, 1), (3, 3), (1, -2), (-3, -3), (-1, 1)]
    decision = route_placement(tree, base)
    assert decision.kind == "node" and decision.node_id == "case1-start"
    mirrored = [(y, x) for x, y in base]
    decision = route_placement(tree, mirrored)
    assert decision.kind == "node" and decision.node_id == "case1-start"


def test_route_placement_case2_rotated():
    tree = build_tree()
    base = [(1, 1), (3, 3), (1, -3), (-1, -1), (-3, 1)]
    for m in D4:
        rotated = [mat_apply(m, p) for p in base]
        decision = route_placement(tree, rotated)
        assert decision.kind == "node" and decision.node_id == "case2-start"


def test_route_placement_stalls_on_wrong_count():
    tree = build_tree()
    placement = [(1, 1), (3, 3), (1, -3), (-1, -1), (-3, 1), (0, 7)]
    decision = route_placement(tree, placement)
    assert decision.kind in ("punish", "stall")


def test_route_response_conforming_reaches_leaf():
    tree = build_tree()
    reply = [(1, 0), (3, 3), (1, -3), (-1, -1), (-3, 1)]
    reply = [(1, 0), (3, 3), (0, -3), (-1, -1), (-3, 1)]
    decision = route_response(tree, "case2-start", reply)
    assert decision.kind == "node" and decision.node_id == "case2-round1"


def test_route_response_defecting_spy_is_punished():
    tree = build_tree()
    # the SW spy abandons its post
    reply = [(1, 0), (3, 3), (0, -3), (0, 0), (-3, 1)]
    decision = route_response(tree, "case2-start", reply)
    assert decision.kind == "punish"
    assert not coverable([p for p in reply], decision.threats)


def test_random_placements_always_classified():
    tree = build_tree()
    rng = random.Random(99)
    for _ in range(400):
        placement = [(rng.randint(-11, 11), rng.randint(-11, 11)) for _ in range(5)]
        decision = route_placement(tree, placement)
        assert decision.kind in ("punish", "node")
        if decision.kind == "punish":
            in_box = [p for p in placement if abs(p[0]) <= 11 and abs(p[1]) <= 11]
            assert not coverable(in_box, decision.threats)
            frame_revs = [mat_apply(decision.frame, p) for p in REV_START]
            assert realizable(tuple(sorted(frame_revs)), decision.threats)


# -- leaf cross-checks through the game search --------------------------------


def leaf_states(tree, node_id, arena, rev_points):
    node = tree.node(node_id)
    rev_ids = tuple(sorted(arena.vertex_at(p) for p in rev_points))
    for config in itertools.product(*(sorted(r.points) for r in node.regions)):
        spy_ids = tuple(sorted(arena.vertex_at(p) for p in config))
        yield GameState(arena, rev_ids, spy_ids, Phase.REV_TO_MOVE, 2)


def test_case1_leaf_beats_game_search():
    tree = build_tree()
    arena = box_arena(2, -11, 11)
    # only the threat pair marches; fewer revolutionaries only weakens them
    for state in leaf_states(tree, "case1-round1", arena, [(-3, 3), (1, 1)]):
        assert bounded_rev_wins(state, 2, 2) is True


def test_case1_leaf_guarded_variant_fails():
    # moving a spy within reach of the meeting point flips the verdict
    arena = box_arena(2, -11, 11)
    revs = tuple(sorted(arena.vertex_at(p) for p in [(-3, 3), (1, 1)]))
    spies = tuple(sorted(arena.vertex_at(p) for p in
                         [(0, 2), (3, 3), (1, -2), (-3, -3), (-2, 0)]))
    state = GameState(arena, revs, spies, Phase.REV_TO_MOVE, 2)
    assert bounded_rev_wins(state, 2, 2) is False
