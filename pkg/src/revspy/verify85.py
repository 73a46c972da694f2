"""Mechanical verification of the 8-vs-5 case-analysis tree.

Every stage reduces to a finite enumeration: a spy configuration drawn
from the stage's constraint regions either routes to a child node
(possibly through a recorded square symmetry) or fails to cover one of
the stage's punishment threat sets.  A configuration that does neither
is a gap and fails the whole verification.

The routing helpers at the bottom are shared with the executable
revolutionary policy, so the strategy plays exactly the tree that was
verified.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .certify import Point, ThreatSet, coverable, dist, realizable
from .errors import UsageError
from .prooftree import (
    BOX_LIMIT,
    D4,
    FAR,
    MAT_ID,
    MAX_DEADLINE,
    ROOT_SET_ORDER,
    ROT_CCW,
    ROT_CW,
    ROT_180,
    CaseNode,
    ProofTree,
    build_tree,
    in_closed_q1,
    mat_apply,
    mat_compose,
    mat_inverse,
    threat_disc,
    wedge_north_contains,
)


def in_board(p: Point) -> bool:
    return abs(p[0]) <= BOX_LIMIT and abs(p[1]) <= BOX_LIMIT


def king_moves(p: Point) -> tuple[Point, ...]:
    x, y = p
    return tuple(
        (x + dx, y + dy)
        for dx in (-1, 0, 1)
        for dy in (-1, 0, 1)
        if in_board((x + dx, y + dy))
    )


class PunishChecker:
    """Memoized uncoverability test for one threat set.

    Only spies inside some threat's service disc can ever serve it, so
    results are cached on that projection of the configuration.
    """

    def __init__(self, label: str, ts: ThreatSet, revs: tuple[Point, ...]):
        if not realizable(revs, ts):
            raise UsageError(f"punishment {label!r} is not realizable")
        self.label = label
        self.ts = ts
        self.relevant = frozenset().union(*(threat_disc(t) for t in ts))
        self._memo: dict[tuple, bool] = {}

    def uncoverable(self, config) -> bool:
        rel = tuple(sorted(
            p for p in config if p is not None and p in self.relevant
        ))
        got = self._memo.get(rel)
        if got is None:
            got = not coverable(rel, self.ts)
            self._memo[rel] = got
        return got


def config_matches(regions, points) -> bool:
    """Perfect matching between spy points and per-slot regions."""
    n = len(regions)
    pts = list(points)
    if len(pts) != n:
        return False
    used = [False] * n

    def assign(i: int) -> bool:
        if i == n:
            return True
        p = pts[i]
        if p is None:
            return False
        for j in range(n):
            if not used[j] and p in regions[j]:
                used[j] = True
                if assign(i + 1):
                    used[j] = False
                    return True
                used[j] = False
        return False

    return assign(0)


def route_config(tree: ProofTree, node: CaseNode, points):
    """First declared child route matching the configuration, or None."""
    for route in node.routes:
        child = tree.node(route.child)
        transformed = [
            None if p is None else mat_apply(route.transform, p) for p in points
        ]
        if config_matches(child.regions, transformed):
            return route
    return None


# -- reports ----------------------------------------------------------------


@dataclass
class NodeReport:
    node_id: str
    configs: int = 0
    punished: int = 0
    routed: int = 0
    gaps: int = 0
    gap_examples: list = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def line(self) -> str:
        return (
            f"node={self.node_id} configs={self.configs} "
            f"punished={self.punished} routed={self.routed} gaps={self.gaps}"
        )

    def record_gap(self, example) -> None:
        self.gaps += 1
        if len(self.gap_examples) < 5:
            self.gap_examples.append(example)


@dataclass
class VerifyReport:
    ok: bool
    nodes: list[NodeReport]
    claims: list[tuple[str, bool, str]]

    def node_lines(self) -> list[str]:
        return [n.line() for n in self.nodes]

    def first_counterexample(self) -> str | None:
        for name, ok, detail in self.claims:
            if not ok:
                return f"claim {name}: {detail}"
        for n in self.nodes:
            if n.gap_examples:
                return f"node {n.node_id}: gap at {n.gap_examples[0]}"
        return None

    def format(self) -> str:
        lines = list(self.node_lines())
        for name, ok, detail in self.claims:
            if not ok:
                lines.append(f"# failed claim: {name}: {detail}")
        for n in self.nodes:
            for flag in n.flags:
                lines.append(f"# flag {n.node_id}: {flag}")
            for ex in n.gap_examples:
                lines.append(f"# gap {n.node_id}: {ex}")
        lines.append(
            f"{'PASS' if self.ok else 'FAIL'} nodes={len(self.nodes)}"
        )
        return "\n".join(lines) + "\n"


# -- claim battery -----------------------------------------------------------


def verify_claims(tree: ProofTree) -> list[tuple[str, bool, str]]:
    claims: list[tuple[str, bool, str]] = []

    def claim(name: str, ok: bool, detail: str = "") -> None:
        claims.append((name, bool(ok), detail))

    start = tree.rev_start
    claim(
        "opening-symmetric",
        all(tuple(sorted(mat_apply(m, p) for p in start)) == start for m in D4),
        "opening positions must be invariant under all square symmetries",
    )

    for key, ts in tree.box_sets.items():
        disc = threat_disc(ts[0])
        box = tree.boxes[key].points
        claim(
            f"box-{key}-disc-exact",
            disc == box,
            f"guard disc {sorted(disc)[:4]}... must equal box {key}",
        )
        claim(f"box-{key}-realizable", realizable(start, ts), "")

    wedge_orientation = {"n": MAT_ID, "e": ROT_CW, "s": ROT_180, "w": ROT_CCW}
    for key, ts in tree.wedge_sets.items():
        near, far = ts
        claim(f"wedge-{key}-realizable", realizable(start, ts), "")
        claim(
            f"wedge-{key}-needs-two-spies",
            dist(near.vertex, far.vertex) > far.deadline - near.deadline,
            "one spy must not be able to serve both meetings",
        )
        inv = mat_inverse(wedge_orientation[key])
        inside = all(
            wedge_north_contains(mat_apply(inv, p))
            for t in ts
            for p in threat_disc(t)
        )
        claim(f"wedge-{key}-discs-inside-wedge", inside, "")

    side = [tree.boxes[k].points for k in ("se", "sw", "nw")]
    claim(
        "side-boxes-disjoint",
        all(not (a & b) for a, b in itertools.combinations(side, 2)),
        "",
    )
    claim(
        "side-boxes-avoid-quadrant",
        all(not any(in_closed_q1(p) for p in pts) for pts in side),
        "",
    )
    claim(
        "ne-box-inside-quadrant",
        all(in_closed_q1(p) for p in tree.boxes["ne"].points),
        "",
    )

    sw_discs = [threat_disc(t) for t in tree.wedge_sets["s"]]
    sw_discs += [threat_disc(t) for t in tree.wedge_sets["w"]]
    claim(
        "south-west-discs-avoid-quadrant",
        all(not any(in_closed_q1(p) for p in d) for d in sw_discs),
        "quadrant spies must be unable to serve the S/W wedge threats",
    )

    bound_ok = True
    for name, ts in tree.all_threat_sets():
        for t in ts:
            if max(abs(t.vertex[0]), abs(t.vertex[1])) > 6 or t.deadline > MAX_DEADLINE:
                bound_ok = False
    claim(
        "threat-locality",
        bound_ok and (BOX_LIMIT + 1) - 6 > MAX_DEADLINE,
        "threats inside [-6,6]^2 with deadlines <= 5; outside spies irrelevant",
    )

    realizable_ok = True
    detail = ""
    for name, ts in tree.all_threat_sets():
        node_revs = tree.rev_start
        if ":" in name:
            node_id = name.split(":", 1)[0]
            if node_id in tree.nodes:
                node_revs = tree.nodes[node_id].revs_after
        if not realizable(node_revs, ts):
            realizable_ok = False
            detail = f"{name} not realizable"
    claim("all-sets-realizable", realizable_ok, detail)

    for node in tree.nodes.values():
        if node.kind != "response":
            continue
        reachable = set()
        for region in node.regions:
            for p in region:
                reachable.update(king_moves(p))
        for route in node.routes:
            child = tree.node(route.child)
            image = {mat_apply(route.transform, p) for p in reachable}
            ok = all(
                set(region.points) <= image for region in child.regions
            )
            claim(f"{node.node_id}->{child.node_id}-reachable", ok, "")

    return claims


# -- stage enumerations -------------------------------------------------------


def _checkers(tree: ProofTree, node: CaseNode) -> list[PunishChecker]:
    return [PunishChecker(lbl, ts, node.revs_after) for lbl, ts in node.punishments]


def verify_triples(tree: ProofTree) -> NodeReport:
    """The SW/SE/NW box spies must fall into one of the two case shapes,
    or fail a south/west wedge set on their own (quadrant spies cannot
    reach those discs; see the claim battery)."""
    report = NodeReport("root-triples")
    case1 = tree.node("case1-entry")
    case2 = tree.node("case2-entry")
    wedge_s = PunishChecker("wedge-s", tree.wedge_sets["s"], tree.rev_start)
    wedge_w = PunishChecker("wedge-w", tree.wedge_sets["w"], tree.rev_start)
    for se, sw, nw in itertools.product(
        sorted(tree.boxes["se"].points),
        sorted(tree.boxes["sw"].points),
        sorted(tree.boxes["nw"].points),
    ):
        report.configs += 1
        triple = (se, sw, nw)
        if sw in case1.regions[3] and se in case1.regions[2] and nw in case1.regions[4]:
            report.routed += 1
            if not (coverable(triple, wedge_s.ts) and coverable(triple, wedge_w.ts)):
                report.flags.append(f"case-1 shape fails its wedge duty: {triple}")
            continue
        if sw in case2.regions[3] and se in case2.regions[2] and nw in case2.regions[4]:
            report.routed += 1
            if not (coverable(triple, wedge_s.ts) and coverable(triple, wedge_w.ts)):
                report.flags.append(f"case-2 shape fails its wedge duty: {triple}")
            continue
        if wedge_s.uncoverable(triple) or wedge_w.uncoverable(triple):
            report.punished += 1
        else:
            report.record_gap(triple)
    return report


def _q1_candidates() -> list:
    pts = sorted((x, y) for x in range(0, BOX_LIMIT + 1)
                 for y in range(0, BOX_LIMIT + 1))
    return pts + [FAR]


def verify_entry(tree: ProofTree, node_id: str) -> NodeReport:
    """Placement refinement: every configuration in the entry space is
    routed to the case-start node or punished."""
    node = tree.node(node_id)
    if node.kind != "entry":
        raise UsageError(f"{node_id} is not an entry node")
    report = NodeReport(node_id)
    checkers = _checkers(tree, node)
    q1 = _q1_candidates()
    se_pts = sorted(node.regions[2].points)
    sw_pts = sorted(node.regions[3].points)
    nw_pts = sorted(node.regions[4].points)
    survivors: set = set()
    for a, b in itertools.combinations_with_replacement(q1, 2):
        for se in se_pts:
            for sw in sw_pts:
                for nw in nw_pts:
                    report.configs += 1
                    config = (a, b, se, sw, nw)
                    if route_config(tree, node, config) is not None:
                        report.routed += 1
                        survivors.add(config)
                        continue
                    for checker in checkers:
                        if checker.uncoverable(config):
                            report.punished += 1
                            break
                    else:
                        report.record_gap(config)
    # surviving quadrant positions, for manual review of the forced spots
    q1_survivors = sorted({(c[0], c[1]) for c in survivors})
    if len(q1_survivors) > 1:
        report.flags.append(f"multiple surviving quadrant pairs: {q1_survivors}")
    return report


def verify_response(tree: ProofTree, node_id: str) -> NodeReport:
    """Scripted move, then every joint spy reply is routed or punished."""
    node = tree.node(node_id)
    if node.kind != "response":
        raise UsageError(f"{node_id} is not a response node")
    report = NodeReport(node_id)
    checkers = _checkers(tree, node)
    for config in itertools.product(*(sorted(r.points) for r in node.regions)):
        options = [king_moves(p) for p in config]
        for reply in itertools.product(*options):
            report.configs += 1
            if route_config(tree, node, reply) is not None:
                report.routed += 1
                continue
            for checker in checkers:
                if checker.uncoverable(reply):
                    report.punished += 1
                    break
            else:
                report.record_gap((config, reply))
    return report


def verify_leaf(tree: ProofTree, node_id: str) -> NodeReport:
    node = tree.node(node_id)
    if node.kind != "leaf":
        raise UsageError(f"{node_id} is not a leaf")
    report = NodeReport(node_id)
    for config in itertools.product(*(sorted(r.points) for r in node.regions)):
        report.configs += 1
        if realizable(node.revs_after, node.leaf_set) and \
                not coverable(config, node.leaf_set):
            report.punished += 1
        else:
            report.record_gap(config)
    return report


def verify_node(tree: ProofTree, node_id: str) -> NodeReport:
    """Verify one tree node by exhaustive enumeration."""
    node = tree.node(node_id)
    if node.kind == "entry":
        return verify_entry(tree, node_id)
    if node.kind == "response":
        return verify_response(tree, node_id)
    return verify_leaf(tree, node_id)


STAGE_ORDER = [
    "root-claims",
    "root-triples",
    "case1-entry",
    "case1-start",
    "case1-round1",
    "case2-entry",
    "case2-start",
    "case2-round1",
]


def verify_theorem85(mutation: str | None = None, workers: int = 1,
                     only: list[str] | None = None) -> VerifyReport:
    """Run the whole certificate check; PASS iff no claim fails and no
    stage has gaps.  `workers` parallelizes independent stages without
    affecting the result."""
    tree = build_tree(mutation)
    stages = [s for s in STAGE_ORDER if only is None or s in only]

    claims: list[tuple[str, bool, str]] = []
    if "root-claims" in stages:
        claims = verify_claims(tree)

    def run(stage: str) -> NodeReport:
        if stage == "root-triples":
            return verify_triples(tree)
        return verify_node(tree, stage)

    enum_stages = [s for s in stages if s != "root-claims"]
    if workers > 1 and len(enum_stages) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, enum_stages))
    else:
        reports = [run(s) for s in enum_stages]

    nodes: list[NodeReport] = []
    if "root-claims" in stages:
        bad = sum(1 for _, ok, _ in claims if not ok)
        head = NodeReport("root-claims", configs=len(claims),
                          routed=len(claims) - bad, gaps=bad)
        nodes.append(head)
    nodes.extend(reports)

    ok = all(ok for _, ok, _ in claims) and all(n.gaps == 0 for n in nodes)
    return VerifyReport(ok=ok, nodes=nodes, claims=claims)


# -- routing shared with the executable policy --------------------------------


@dataclass(frozen=True)
class RouteDecision:
    """What the revolutionary side should do about a spy configuration.

    kind "node": continue at `node_id`; `frame` maps real coordinates
    into the tree's canonical frame.  kind "punish": execute `threats`
    (canonical frame, pairs indexing `revs`).  kind "stall": the
    configuration is outside the certificate (wrong spy count).
    """

    kind: str
    frame: tuple = MAT_ID
    node_id: str | None = None
    label: str | None = None
    threats: ThreatSet | None = None
    revs: tuple[Point, ...] | None = None


def _stall() -> RouteDecision:
    return RouteDecision(kind="stall")


def route_placement(tree: ProofTree, spies: list[Point]) -> RouteDecision:
    """Classify a raw spy placement against the tree."""
    in_box = [p for p in spies if in_board(p)]

    for label, ts in ROOT_SET_ORDER:
        if not coverable(in_box, ts):
            return RouteDecision(kind="punish", frame=MAT_ID, label=label,
                                 threats=ts, revs=tree.rev_start)

    if len(spies) != 5:
        return _stall()

    frame = None
    for m in D4:
        if sum(1 for p in spies if in_closed_q1(mat_apply(m, p))) >= 2:
            frame = m
            break
    if frame is None:
        return _stall()

    canon = [mat_apply(frame, p) for p in spies]
    canon_in_box = [p for p in canon if in_board(p)]
    se = [p for p in canon if p in tree.boxes["se"]]
    sw = [p for p in canon if p in tree.boxes["sw"]]
    nw = [p for p in canon if p in tree.boxes["nw"]]
    q1 = [p for p in canon if in_closed_q1(p)]
    if len(se) != 1 or len(sw) != 1 or len(nw) != 1 or len(q1) != 2:
        return _stall()

    if sw[0] == (-3, -3):
        entry = tree.node("case1-entry")
    elif sw[0] == (-1, -1):
        entry = tree.node("case2-entry")
    else:
        for key in ("s", "w"):
            ts = tree.wedge_sets[key]
            if not coverable(canon_in_box, ts):
                return RouteDecision(kind="punish", frame=frame,
                                     label=f"wedge-{key}", threats=ts,
                                     revs=tree.rev_start)
        return _stall()

    config = (q1[0], q1[1], se[0], sw[0], nw[0])
    route = route_config(tree, entry, [None if not in_board(p) else p for p in config])
    if route is not None:
        return RouteDecision(kind="node",
                             frame=mat_compose(route.transform, frame),
                             node_id=route.child)
    for label, ts in entry.punishments:
        if not coverable(canon_in_box, ts):
            return RouteDecision(kind="punish", frame=frame, label=label,
                                 threats=ts, revs=entry.revs_after)
    return _stall()


def route_response(tree: ProofTree, node_id: str,
                   canon_spies: list[Point]) -> RouteDecision:
    """Classify the spies' reply to a response node's scripted move.

    `canon_spies` must already be in the node's canonical frame; the
    returned frame is relative to it.
    """
    node = tree.node(node_id)
    if node.kind != "response":
        raise UsageError(f"{node_id} does not take spy responses")
    in_box = [p for p in canon_spies if in_board(p)]
    boxed = [p if in_board(p) else None for p in canon_spies]
    route = route_config(tree, node, boxed)
    if route is not None:
        return RouteDecision(kind="node", frame=route.transform,
                             node_id=route.child)
    for label, ts in node.punishments:
        if not coverable(in_box, ts):
            return RouteDecision(kind="punish", frame=MAT_ID, label=label,
                                 threats=ts, revs=node.revs_after)
    return _stall()
