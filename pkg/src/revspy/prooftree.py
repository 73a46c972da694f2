"""The built-in case-analysis tree for the 8-vs-5 lattice endgame.

Certifies that 8 revolutionaries beat 5 spies on the king lattice with
meeting size 2.  The revolutionaries open on (+-1,+-1) and (+-3,+-3);
the analysis then constrains where the 5 spies can possibly stand, in
stages:

  * four corner boxes must each hold a spy, and each of the four wedges
    must be able to serve a near meeting (deadline 1) and a far meeting
    (deadline 3) with two distinct spies;
  * by the pigeonhole principle some closed quadrant holds two spies,
    and a square symmetry moves that quadrant to x>=0, y>=0, leaving
    exactly one spy in each of the other three boxes;
  * the south-west box spy is forced onto a diagonal corner, splitting
    the analysis into two cases, each of which pins the remaining spies
    and ends after one or two scripted revolutionary moves in a
    realizable threat set no spy assignment can serve.

Every stage is verified by finite enumeration: each spy configuration
drawn from the stage's constraint regions must either route to a child
node (possibly through a recorded reflection) or fail to cover one of
the stage's punishment threat sets.  Spies outside [-11,11]^2 can never
serve any threat here (all threats sit inside [-6,6]^2 with deadlines
at most 5), so they are folded into a single FAR token.

The same tree data drives the executable revolutionary policy, so the
verifier and the policy cannot drift apart.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .certify import (
    Point,
    Region,
    Threat,
    ThreatSet,
    coverable,
    dist,
    make_threat_set,
    realizable,
    rect,
    single,
)
from .errors import UsageError

BOX_LIMIT = 11          # spies beyond this box are irrelevant (FAR)
THREAT_BOUND = 6        # every tree threat stays inside this box
MAX_DEADLINE = 5

FAR = None  # abstract token for a spy outside [-BOX_LIMIT, BOX_LIMIT]^2


# -- square symmetries -----------------------------------------------------

Mat = tuple[int, int, int, int]  # (a, b, c, d): (x, y) -> (a x + b y, c x + d y)

MAT_ID: Mat = (1, 0, 0, 1)
MAT_DIAG: Mat = (0, 1, 1, 0)           # reflect through y = x
ROT_CW: Mat = (0, 1, -1, 0)            # quarter turn clockwise
ROT_180: Mat = (-1, 0, 0, -1)
ROT_CCW: Mat = (0, -1, 1, 0)

D4: tuple[Mat, ...] = (
    (1, 0, 0, 1), (-1, 0, 0, 1), (1, 0, 0, -1), (-1, 0, 0, -1),
    (0, 1, 1, 0), (0, -1, 1, 0), (0, 1, -1, 0), (0, -1, -1, 0),
)


def mat_apply(m: Mat, p: Point) -> Point:
    a, b, c, d = m
    x, y = p
    return (a * x + b * y, c * x + d * y)


def mat_compose(m2: Mat, m1: Mat) -> Mat:
    """Matrix of applying m1 first, then m2."""
    a2, b2, c2, d2 = m2
    a1, b1, c1, d1 = m1
    return (
        a2 * a1 + b2 * c1, a2 * b1 + b2 * d1,
        c2 * a1 + d2 * c1, c2 * b1 + d2 * d1,
    )


def mat_inverse(m: Mat) -> Mat:
    a, b, c, d = m           # signed permutation: inverse is the transpose
    return (a, c, b, d)


# -- tree data --------------------------------------------------------------

REV_START: tuple[Point, ...] = tuple(sorted(
    [(sx, sy) for sx in (-1, 1) for sy in (-1, 1)]
    + [(3 * sx, 3 * sy) for sx in (-1, 1) for sy in (-1, 1)]
))


def _threat(revs: tuple[Point, ...], vertex: Point, deadline: int,
            a: Point, b: Point) -> Threat:
    try:
        i, j = revs.index(a), revs.index(b)
    except ValueError:
        raise UsageError(f"threat pair {a},{b} not in rev positions") from None
    return Threat(vertex, deadline, (i, j))


def _tset(revs, *items) -> ThreatSet:
    return make_threat_set(_threat(revs, *item) for item in items)


def transform_threat_set(ts: ThreatSet, m: Mat,
                         revs_from: tuple[Point, ...],
                         revs_to: tuple[Point, ...]) -> ThreatSet:
    """Map a set through a symmetry, re-indexing pairs into revs_to."""
    out = []
    for t in ts:
        pa, pb = (mat_apply(m, revs_from[i]) for i in t.pair)
        out.append(_threat(revs_to, mat_apply(m, t.vertex), t.deadline, pa, pb))
    return make_threat_set(out)


def transform_region(region: Region, m: Mat, name: str = "") -> Region:
    return Region(name or region.name, frozenset(mat_apply(m, p) for p in region.points))


@dataclass(frozen=True)
class ChildRoute:
    transform: Mat          # applied to observed points before matching
    child: str


@dataclass(frozen=True)
class CaseNode:
    """One stage of the analysis.

    `regions` constrain the five spies (slot order: the two quadrant
    spies, then the SE, SW, NW box spies).  Response nodes carry a
    scripted revolutionary move; `punishments` are threat sets measured
    from `revs_after`.  A leaf carries the final, always-uncoverable
    threat set instead of children.
    """

    node_id: str
    kind: str  # "entry" | "response" | "leaf"
    revs: tuple[Point, ...]
    regions: tuple[Region, ...]
    script: tuple[tuple[Point, Point], ...]
    revs_after: tuple[Point, ...]
    punishments: tuple[tuple[str, ThreatSet], ...]
    routes: tuple[ChildRoute, ...]
    leaf_set: ThreatSet | None = None
    symmetry: str = "identity"


def apply_script(revs: tuple[Point, ...],
                 script: tuple[tuple[Point, Point], ...]) -> tuple[Point, ...]:
    out = list(revs)
    for src, dst in script:
        idx = out.index(src)
        if dist(src, dst) > 1:
            raise UsageError(f"scripted move {src}->{dst} is not a king step")
        out[idx] = dst
    return tuple(sorted(out))


# quadrant boxes (claim: each must hold a spy at placement)
BOX_NE = rect(1, 3, 1, 3, "box-ne")
BOX_SE = rect(1, 3, -3, -1, "box-se")
BOX_SW = rect(-3, -1, -3, -1, "box-sw")
BOX_NW = rect(-3, -1, 1, 3, "box-nw")
BOXES = {"ne": BOX_NE, "se": BOX_SE, "sw": BOX_SW, "nw": BOX_NW}

Q1_REGION = rect(0, BOX_LIMIT, 0, BOX_LIMIT, "closed-quadrant-1")


def in_closed_q1(p: Point) -> bool:
    return p[0] >= 0 and p[1] >= 0


def wedge_north_contains(p: Point) -> bool:
    x, y = p
    return y >= 1 and y >= abs(x)


# box punishment sets: the pair can meet at the box center next round,
# and the guard disc of that meeting is exactly the box
BOX_SETS = {
    "ne": _tset(REV_START, ((2, 2), 1, (1, 1), (3, 3))),
    "se": _tset(REV_START, ((2, -2), 1, (1, -1), (3, -3))),
    "sw": _tset(REV_START, ((-2, -2), 1, (-1, -1), (-3, -3))),
    "nw": _tset(REV_START, ((-2, 2), 1, (-1, 1), (-3, 3))),
}

# wedge punishment sets: near meeting in 1 and far meeting in 3 need two
# distinct spies inside the wedge
WEDGE_NORTH = _tset(
    REV_START,
    ((0, 2), 1, (-1, 1), (1, 1)),
    ((0, 6), 3, (-3, 3), (3, 3)),
)
WEDGE_SETS = {
    "n": WEDGE_NORTH,
    "e": transform_threat_set(WEDGE_NORTH, ROT_CW, REV_START, REV_START),
    "s": transform_threat_set(WEDGE_NORTH, ROT_180, REV_START, REV_START),
    "w": transform_threat_set(WEDGE_NORTH, ROT_CCW, REV_START, REV_START),
}

ROOT_SET_ORDER = [
    ("box-ne", BOX_SETS["ne"]), ("box-se", BOX_SETS["se"]),
    ("box-sw", BOX_SETS["sw"]), ("box-nw", BOX_SETS["nw"]),
    ("wedge-n", WEDGE_SETS["n"]), ("wedge-e", WEDGE_SETS["e"]),
    ("wedge-s", WEDGE_SETS["s"]), ("wedge-w", WEDGE_SETS["w"]),
]


def threat_disc(t: Threat) -> frozenset[Point]:
    """Points from which one spy can still serve the threat."""
    v, d = t.vertex, t.deadline
    return frozenset(
        (x, y)
        for x in range(max(v[0] - d, -BOX_LIMIT), min(v[0] + d, BOX_LIMIT) + 1)
        for y in range(max(v[1] - d, -BOX_LIMIT), min(v[1] + d, BOX_LIMIT) + 1)
    )


# derived constraint regions for the two case shapes: the SW spy must
# serve both the S and W wedges, the SE spy the remaining S disc, the
# NW spy the remaining W disc
NEAR_S = threat_disc(WEDGE_SETS["s"][0])
FAR_S = threat_disc(WEDGE_SETS["s"][1])
NEAR_W = threat_disc(WEDGE_SETS["w"][0])
FAR_W = threat_disc(WEDGE_SETS["w"][1])

CASE1_SE = Region("se-near-south", frozenset(BOX_SE.points & NEAR_S))
CASE1_NW = Region("nw-near-west", frozenset(BOX_NW.points & NEAR_W))
CASE2_SE = Region("se-far-south", frozenset(BOX_SE.points & FAR_S))
CASE2_NW = Region("nw-far-west", frozenset(BOX_NW.points & FAR_W))
SW_CASE1: Point = (-3, -3)
SW_CASE2: Point = (-1, -1)


def _build_case1_nodes(mutation: str | None):
    revs0 = REV_START
    entry = CaseNode(
        node_id="case1-entry",
        kind="entry",
        revs=revs0,
        regions=(Q1_REGION, Q1_REGION, CASE1_SE, single(SW_CASE1), CASE1_NW),
        script=(),
        revs_after=revs0,
        punishments=(
            ("box-ne", BOX_SETS["ne"]),
            ("wedge-n", WEDGE_SETS["n"]),
            ("wedge-e", WEDGE_SETS["e"]),
            ("center-triple", _tset(
                revs0,
                ((0, 0), 1, (-1, -1), (1, 1)),
                ((2, -2), 1, (1, -1), (3, -3)),
                ((-2, 2), 1, (-1, 1), (-3, 3)),
            )),
            ("west-diagonal", _tset(
                revs0,
                ((-2, 0), 1, (-1, 1), (-1, -1)),
                ((-1, 3), 2, (-3, 3), (1, 1)),
            )),
            ("south-diagonal", _tset(
                revs0,
                ((0, -2), 1, (1, -1), (-1, -1)),
                ((3, -1), 2, (3, -3), (1, 1)),
            )),
            ("west-near", _tset(revs0, ((-1, 0), 1, (-1, 1), (-1, -1)))),
            ("south-near", _tset(revs0, ((0, -1), 1, (1, -1), (-1, -1)))),
            ("flank-pair", _tset(
                revs0,
                ((0, 0), 1, (-1, 1), (-1, -1)),
                ((2, 0), 1, (1, 1), (1, -1)),
            )),
        ),
        routes=(
            ChildRoute(MAT_ID, "case1-start"),
            ChildRoute(MAT_DIAG, "case1-start"),
        ),
        symmetry="quadrant rotation, then optional diagonal reflection",
    )

    script = (((-1, -1), (-2, -2)), ((-1, 1), (0, 0)))
    revs1 = apply_script(revs0, script)
    start = CaseNode(
        node_id="case1-start",
        kind="response",
        revs=revs0,
        regions=(
            single((1, 1)), single((3, 3)),
            Region("se-strip", frozenset({(1, -1), (1, -2)})),
            single(SW_CASE1), single((-1, 1)),
        ),
        script=script,
        revs_after=revs1,
        punishments=(
            ("north-far", _tset(revs1, ((0, 6), 3, (-3, 3), (3, 3)))),
            ("east-far", _tset(revs1, ((6, 0), 3, (3, 3), (3, -3)))),
            ("west-far", _tset(revs1, ((-6, 0), 3, (-3, 3), (-3, -3)))),
            ("se-corner", _tset(revs1, ((2, -2), 1, (1, -1), (3, -3)))),
            ("push-down", _tset(revs1, ((1, -5), 3, (-2, -2), (3, -3)))),
            ("south-far-mid", _tset(
                revs1,
                ((0, -6), 3, (-3, -3), (3, -3)),
                ((0, -3), 2, (-2, -2), (1, -1)),
            )),
            ("south-far-low", _tset(
                revs1,
                ((0, -6), 3, (-3, -3), (3, -3)),
                ((-1, -3), 2, (-2, -2), (1, -1)),
            )),
            ("west-far-low", _tset(
                revs1,
                ((-6, 0), 3, (-3, 3), (-3, -3)),
                ((-1, -3), 2, (-2, -2), (1, -1)),
            )),
            ("west-far-mid", _tset(
                revs1,
                ((-6, 0), 3, (-3, 3), (-3, -3)),
                ((0, -3), 2, (-2, -2), (1, -1)),
            )),
            ("origin-east", _tset(
                revs1,
                ((0, -1), 1, (0, 0), (1, -1)),
                ((-1, 3), 2, (-3, 3), (1, 1)),
                ((1, -5), 3, (-2, -2), (3, -3)),
            )),
            ("east-pin", _tset(
                revs1,
                ((2, 0), 1, (1, 1), (1, -1)),
                ((1, -5), 3, (-2, -2), (3, -3)),
            )),
            ("north-pin", _tset(
                revs1,
                ((0, 1), 1, (0, 0), (1, 1)),
                ((1, -5), 3, (-2, -2), (3, -3)),
            )),
            ("inner-west", _tset(
                revs1,
                ((-1, -1), 1, (-2, -2), (0, 0)),
                ((2, 0), 1, (1, 1), (1, -1)),
                ((0, -6), 3, (-3, -3), (3, -3)),
            )),
            ("west-push", _tset(
                revs1,
                ((-5, 1), 3, (-3, 3), (-2, -2)),
                ((2, 0), 1, (1, 1), (1, -1)),
                ((0, -6), 3, (-3, -3), (3, -3)),
            )),
        ),
        routes=(ChildRoute(MAT_ID, "case1-round1"),),
    )

    final_deadline = 1 if mutation == "shrunk-deadline" else 2
    leaf = CaseNode(
        node_id="case1-round1",
        kind="leaf",
        revs=revs1,
        regions=(
            single((1, 0)), single((3, 3)),
            Region("se-strip-low", frozenset({(1, -2), (1, -3)})),
            single(SW_CASE1), single((-2, 0)),
        ),
        script=(),
        revs_after=revs1,
        punishments=(),
        routes=(),
        leaf_set=_tset(revs1, ((-1, 3), final_deadline, (-3, 3), (1, 1))),
    )
    return entry, start, leaf


def _build_case2_nodes(mutation: str | None):
    revs0 = REV_START
    entry = CaseNode(
        node_id="case2-entry",
        kind="entry",
        revs=revs0,
        regions=(Q1_REGION, Q1_REGION, CASE2_SE, single(SW_CASE2), CASE2_NW),
        script=(),
        revs_after=revs0,
        punishments=(
            ("box-ne", BOX_SETS["ne"]),
            ("wedge-n", WEDGE_SETS["n"]),
            ("wedge-e", WEDGE_SETS["e"]),
            ("corner-pincer", _tset(
                revs0,
                ((-2, 0), 1, (-1, 1), (-1, -1)),
                ((-1, -3), 2, (1, -1), (-3, -3)),
            )),
            ("sw-vertical", _tset(
                revs0,
                ((0, -1), 1, (-1, -1), (1, -1)),
                ((-3, -1), 2, (-1, 1), (-3, -3)),
            )),
            ("sw-horizontal", _tset(
                revs0,
                ((-1, 0), 1, (-1, -1), (-1, 1)),
                ((-1, -3), 2, (1, -1), (-3, -3)),
            )),
        ),
        routes=(ChildRoute(MAT_ID, "case2-start"),),
        symmetry="quadrant rotation; the surviving configuration is mirror-symmetric",
    )

    script = (((-1, 1), (0, 0)), ((1, 1), (2, 1)))
    revs1 = apply_script(revs0, script)
    triple = _tset(
        revs1,
        ((-1, 0), 1, (0, 0), (-1, -1)),
        ((-1, -3), 2, (1, -1), (-3, -3)),
        ((4, -1), 2, (2, 1), (3, -3)),
    )
    start = CaseNode(
        node_id="case2-start",
        kind="response",
        revs=revs0,
        regions=(
            single((1, 1)), single((3, 3)),
            single((1, -3)), single(SW_CASE2), single((-3, 1)),
        ),
        script=script,
        revs_after=revs1,
        punishments=(
            ("north-far", _tset(revs1, ((0, 6), 3, (-3, 3), (3, 3)))),
            ("east-far", _tset(revs1, ((6, 0), 3, (3, 3), (3, -3)))),
            ("west-far", _tset(revs1, ((-6, 0), 3, (-3, 3), (-3, -3)))),
            ("south-far", _tset(revs1, ((0, -6), 3, (-3, -3), (3, -3)))),
            ("home-pair", _tset(
                revs1,
                ((-2, -2), 1, (-1, -1), (-3, -3)),
                ((0, 0), 1, (0, 0), (1, -1)),
            )),
            ("home-east", _tset(
                revs1,
                ((0, 0), 1, (0, 0), (-1, -1)),
                ((2, 0), 1, (2, 1), (1, -1)),
            )),
            ("low-pair", _tset(
                revs1,
                ((0, -1), 1, (0, 0), (1, -1)),
                ((-2, -2), 1, (-1, -1), (-3, -3)),
            )),
            ("final-triple", triple),
        ),
        routes=(ChildRoute(MAT_ID, "case2-round1"),),
    )

    if mutation == "deleted-threat":
        triple_leaf = make_threat_set([t for t in triple if t.vertex != (4, -1)])
    else:
        triple_leaf = triple
    leaf = CaseNode(
        node_id="case2-round1",
        kind="leaf",
        revs=revs1,
        regions=(
            single((1, 0)), single((3, 3)),
            rect(0, 2, -4, -3, "low-strip-south"),
            single(SW_CASE2), rect(-4, -3, 0, 2, "low-strip-west"),
        ),
        script=(),
        revs_after=revs1,
        punishments=(),
        routes=(),
        leaf_set=triple_leaf,
    )
    return entry, start, leaf


@dataclass
class ProofTree:
    nodes: dict[str, CaseNode]
    boxes: dict[str, Region]
    box_sets: dict[str, ThreatSet]
    wedge_sets: dict[str, ThreatSet]
    rev_start: tuple[Point, ...]
    mutation: str | None = None

    def node(self, node_id: str) -> CaseNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UsageError(f"unknown proof-tree node {node_id!r}") from None

    def all_threat_sets(self):
        for label, ts in ROOT_SET_ORDER:
            yield f"root:{label}", ts
        for node in self.nodes.values():
            for label, ts in node.punishments:
                yield f"{node.node_id}:{label}", ts
            if node.leaf_set is not None:
                yield f"{node.node_id}:leaf", node.leaf_set


def build_tree(mutation: str | None = None) -> ProofTree:
    """Assemble the tree; `mutation` deliberately damages it for tests.

    Mutations: "shrunk-deadline" (final case-1 threat loses a round),
    "widened-box" (NE box grown to [0,3]^2), "deleted-threat" (the
    east meeting vanishes from the case-2 leaf set).
    """
    if mutation not in (None, "shrunk-deadline", "widened-box", "deleted-threat"):
        raise UsageError(f"unknown mutation {mutation!r}")
    boxes = dict(BOXES)
    if mutation == "widened-box":
        boxes["ne"] = rect(0, 3, 0, 3, "box-ne")
    nodes = {}
    for node in _build_case1_nodes(mutation) + _build_case2_nodes(mutation):
        nodes[node.node_id] = node
    return ProofTree(
        nodes=nodes,
        boxes=boxes,
        box_sets=dict(BOX_SETS),
        wedge_sets=dict(WEDGE_SETS),
        rev_start=REV_START,
        mutation=mutation,
    )
