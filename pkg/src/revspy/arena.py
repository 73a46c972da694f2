"""Arena construction and metric queries.

An arena is a finite undirected graph with dense integer vertex ids.
Lattice arenas (finite box slices of the king-move integer lattice)
additionally carry a bijection between vertex ids and integer coordinate
tuples.  Arenas are immutable after construction and safe to share
between concurrent readers.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field

from .errors import BudgetExceeded, UsageError

DEFAULT_VERTEX_BUDGET = 10**6

Coord = tuple[int, ...]


def chebyshev(p: Coord, q: Coord) -> int:
    """L-infinity distance between two coordinate tuples."""
    return max(abs(a - b) for a, b in zip(p, q))


@dataclass(frozen=True)
class Arena:
    """Immutable graph with optional lattice coordinates.

    `neighbors[v]` is the sorted tuple of vertices adjacent to v (no
    self-loops).  For kind="lattice-box", `coords[v]` is the coordinate
    tuple of v and `box` holds (dimension, lo, hi).
    """

    n: int
    neighbors: tuple[tuple[int, ...], ...]
    kind: str = "explicit"
    label: str = ""
    coords: tuple[Coord, ...] | None = None
    box: tuple[int, int, int] | None = None
    _coord_index: dict[Coord, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.coords is not None and self._coord_index is None:
            object.__setattr__(
                self, "_coord_index", {c: v for v, c in enumerate(self.coords)}
            )

    # -- basic queries -------------------------------------------------

    def check_vertex(self, v: int) -> int:
        if not isinstance(v, int) or not 0 <= v < self.n:
            raise UsageError(f"invalid vertex id {v!r} for arena with {self.n} vertices")
        return v

    def degree(self, v: int) -> int:
        return len(self.neighbors[self.check_vertex(v)])

    def is_adjacent(self, u: int, v: int) -> bool:
        self.check_vertex(u)
        self.check_vertex(v)
        return v in self.neighbors[u]

    def closed_neighborhood(self, v: int) -> tuple[int, ...]:
        """Sorted tuple of v and its neighbors (the one-move target set)."""
        self.check_vertex(v)
        return tuple(sorted(self.neighbors[v] + (v,)))

    def edge_count(self) -> int:
        return sum(len(ns) for ns in self.neighbors) // 2

    # -- lattice helpers -----------------------------------------------

    @property
    def is_lattice(self) -> bool:
        return self.coords is not None

    def coord_of(self, v: int) -> Coord:
        if self.coords is None:
            raise UsageError("arena has no coordinate embedding")
        return self.coords[self.check_vertex(v)]

    def vertex_at(self, coord: Coord) -> int:
        if self.coords is None:
            raise UsageError("arena has no coordinate embedding")
        try:
            return self._coord_index[tuple(coord)]
        except KeyError:
            raise UsageError(f"coordinate {coord} outside arena") from None

    def contains_coord(self, coord: Coord) -> bool:
        return self.coords is not None and tuple(coord) in self._coord_index

    def format_vertex(self, v: int) -> str:
        """Vertex id, or the coordinate tuple on lattice-box arenas."""
        if self.kind == "lattice-box" and self.coords is not None:
            return "(" + ",".join(str(x) for x in self.coords[v]) + ")"
        return str(v)

    def coord_bounds(self) -> tuple[tuple[int, int], ...]:
        """Per-dimension (min, max) over the coordinate embedding."""
        if self.coords is None:
            raise UsageError("arena has no coordinate embedding")
        dim = len(self.coords[0])
        return tuple(
            (min(c[i] for c in self.coords), max(c[i] for c in self.coords))
            for i in range(dim)
        )


def _build(edges: set[tuple[int, int]], n: int, kind: str, label: str,
           coords: tuple[Coord, ...] | None = None,
           box: tuple[int, int, int] | None = None) -> Arena:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return Arena(
        n=n,
        neighbors=tuple(tuple(sorted(ns)) for ns in adj),
        kind=kind,
        label=label,
        coords=coords,
        box=box,
    )


def _check_budget(n: int, max_vertices: int, what: str) -> None:
    if n > max_vertices:
        raise BudgetExceeded(
            f"{what} would have {n} vertices, over the budget of {max_vertices}",
            estimate=n,
        )


# -- generators ---------------------------------------------------------


def path_arena(n: int) -> Arena:
    """Path on n vertices, embedded in the integers as coordinates (0,)..(n-1,)."""
    if n < 1:
        raise UsageError("path needs at least 1 vertex")
    coords = tuple((i,) for i in range(n))
    return _build({(i, i + 1) for i in range(n - 1)}, n, "explicit", f"path:{n}",
                  coords=coords)


def cycle_arena(n: int) -> Arena:
    if n < 3:
        raise UsageError("cycle needs at least 3 vertices")
    edges = {(i, (i + 1) % n) for i in range(n)}
    return _build({(min(u, v), max(u, v)) for u, v in edges}, n, "explicit", f"cycle:{n}")


def star_arena(n: int) -> Arena:
    """Star on n vertices: vertex 0 is the hub."""
    if n < 1:
        raise UsageError("star needs at least 1 vertex")
    return _build({(0, i) for i in range(1, n)}, n, "explicit", f"star:{n}")


def box_arena(dim: int, lo: int, hi: int,
              max_vertices: int = DEFAULT_VERTEX_BUDGET) -> Arena:
    """Finite box slice [lo,hi]^dim of the king-move integer lattice.

    u ~ v iff u != v and all coordinates differ by at most 1.  Boundary
    vertices simply have fewer neighbors.
    """
    if dim < 1:
        raise UsageError("box dimension must be >= 1")
    if hi < lo:
        raise UsageError(f"empty box range [{lo},{hi}]")
    side = hi - lo + 1
    n = side**dim
    _check_budget(n, max_vertices, f"box:{dim}:{lo}:{hi}")
    coords = tuple(itertools.product(range(lo, hi + 1), repeat=dim))
    index = {c: i for i, c in enumerate(coords)}
    edges = set()
    steps = [s for s in itertools.product((-1, 0, 1), repeat=dim) if any(s)]
    for i, c in enumerate(coords):
        for s in steps:
            q = tuple(a + d for a, d in zip(c, s))
            j = index.get(q)
            if j is not None and i < j:
                edges.add((i, j))
    return _build(edges, n, "lattice-box", f"box:{dim}:{lo}:{hi}",
                  coords=coords, box=(dim, lo, hi))


def king_arena(w: int, h: int, max_vertices: int = DEFAULT_VERTEX_BUDGET) -> Arena:
    """w-by-h king graph; identical numbering to product:path:w:path:h."""
    a = strong_product(path_arena(w), path_arena(h), max_vertices=max_vertices)
    return Arena(n=a.n, neighbors=a.neighbors, kind=a.kind, label=f"king:{w}x{h}",
                 coords=a.coords, box=a.box)


# -- operations ----------------------------------------------------------


def distance(arena: Arena, u: int, v: int) -> int | float:
    """BFS shortest-path length; math.inf when disconnected."""
    arena.check_vertex(u)
    arena.check_vertex(v)
    if u == v:
        return 0
    seen = {u}
    frontier = deque([(u, 0)])
    while frontier:
        w, d = frontier.popleft()
        for x in arena.neighbors[w]:
            if x == v:
                return d + 1
            if x not in seen:
                seen.add(x)
                frontier.append((x, d + 1))
    return math.inf


def all_distances(arena: Arena, u: int) -> list[int | float]:
    """BFS distances from u to every vertex."""
    arena.check_vertex(u)
    dist: list[int | float] = [math.inf] * arena.n
    dist[u] = 0
    frontier = deque([u])
    while frontier:
        w = frontier.popleft()
        for x in arena.neighbors[w]:
            if dist[x] is math.inf:
                dist[x] = dist[w] + 1
                frontier.append(x)
    return dist


def power(arena: Arena, n: int) -> Arena:
    """Graph power: same vertices, edges between vertices at distance 1..n."""
    if n < 1:
        raise UsageError("power exponent must be >= 1")
    if n == 1:
        return arena
    edges = set()
    for u in range(arena.n):
        dists = all_distances(arena, u)
        for v in range(u + 1, arena.n):
            if 0 < dists[v] <= n:
                edges.add((u, v))
    return _build(edges, arena.n, "explicit", f"power:{n}:{arena.label}")


def strong_product(a: Arena, b: Arena,
                   max_vertices: int = DEFAULT_VERTEX_BUDGET) -> Arena:
    """Strong product: pairs adjacent iff distinct and both factor
    distances are at most 1.  Vertex numbering is row-major with the
    b-index varying fastest."""
    n = a.n * b.n
    _check_budget(n, max_vertices, f"product:{a.label}:{b.label}")

    def vid(i: int, j: int) -> int:
        return i * b.n + j

    edges = set()
    for i in range(a.n):
        a_near = a.neighbors[i] + (i,)
        for j in range(b.n):
            b_near = b.neighbors[j] + (j,)
            u = vid(i, j)
            for i2 in a_near:
                for j2 in b_near:
                    v = vid(i2, j2)
                    if u < v:
                        edges.add((u, v))

    coords = None
    if a.coords is not None and b.coords is not None:
        coords = tuple(ca + cb for ca in a.coords for cb in b.coords)
    return _build(edges, n, "explicit" if coords is None else "lattice-box",
                  f"product:{a.label}:{b.label}", coords=coords)


def from_file(path: str) -> Arena:
    """Read the explicit graph file format.

    Line 1 is `n m`; the next m lines are `u v` with 0 <= u,v < n.
    Blank lines and text after `#` are ignored.  Duplicate and self
    edges are rejected.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read graph file {path}: {exc}") from exc
    lines = []
    for line in raw.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise UsageError(f"graph file {path} is empty")
    head = lines[0].split()
    if len(head) != 2:
        raise UsageError(f"graph file {path}: first line must be 'n m'")
    n, m = (int(x) for x in head)
    if n < 1:
        raise UsageError(f"graph file {path}: need at least one vertex")
    if len(lines) - 1 != m:
        raise UsageError(
            f"graph file {path}: header promises {m} edges, found {len(lines) - 1}"
        )
    edges: set[tuple[int, int]] = set()
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise UsageError(f"graph file {path}: bad edge line {line!r}")
        u, v = (int(x) for x in parts)
        if not (0 <= u < n and 0 <= v < n):
            raise UsageError(f"graph file {path}: edge {u} {v} out of range")
        if u == v:
            raise UsageError(f"graph file {path}: self edge at {u}")
        key = (min(u, v), max(u, v))
        if key in edges:
            raise UsageError(f"graph file {path}: duplicate edge {u} {v}")
        edges.add(key)
    return _build(edges, n, "explicit", f"file:{path}")


# -- spec parser ---------------------------------------------------------


def make_arena(spec: str, max_vertices: int = DEFAULT_VERTEX_BUDGET) -> Arena:
    """Build an arena from a spec string.

    Grammar: `path:N | cycle:N | star:N | king:WxH | box:d:lo:hi
    | power:n:<spec> | product:<spec>:<spec> | file:<path>`.
    """
    tokens = spec.strip().split(":")
    arena, rest = _parse(tokens, spec, max_vertices)
    if rest:
        raise UsageError(f"trailing tokens {':'.join(rest)!r} in arena spec {spec!r}")
    return arena


def _take(tokens: list[str], spec: str, what: str) -> str:
    if not tokens:
        raise UsageError(f"arena spec {spec!r}: missing {what}")
    return tokens[0]


def _int(token: str, spec: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise UsageError(f"arena spec {spec!r}: {what} must be an integer, got {token!r}") from None


def _parse(tokens: list[str], spec: str, budget: int) -> tuple[Arena, list[str]]:
    head = _take(tokens, spec, "arena kind").lower()
    rest = tokens[1:]
    if head == "path":
        return path_arena(_int(_take(rest, spec, "path size"), spec, "path size")), rest[1:]
    if head == "cycle":
        return cycle_arena(_int(_take(rest, spec, "cycle size"), spec, "cycle size")), rest[1:]
    if head == "star":
        return star_arena(_int(_take(rest, spec, "star size"), spec, "star size")), rest[1:]
    if head == "king":
        dims = _take(rest, spec, "king WxH")
        parts = dims.lower().split("x")
        if len(parts) != 2:
            raise UsageError(f"arena spec {spec!r}: king size must look like 3x3")
        w = _int(parts[0], spec, "king width")
        h = _int(parts[1], spec, "king height")
        return king_arena(w, h, max_vertices=budget), rest[1:]
    if head == "box":
        if len(rest) < 3:
            raise UsageError(f"arena spec {spec!r}: box needs d:lo:hi")
        d = _int(rest[0], spec, "box dimension")
        lo = _int(rest[1], spec, "box lo")
        hi = _int(rest[2], spec, "box hi")
        return box_arena(d, lo, hi, max_vertices=budget), rest[3:]
    if head == "power":
        n = _int(_take(rest, spec, "power exponent"), spec, "power exponent")
        base, rest2 = _parse(rest[1:], spec, budget)
        return power(base, n), rest2
    if head == "product":
        left, rest2 = _parse(rest, spec, budget)
        right, rest3 = _parse(rest2, spec, budget)
        return strong_product(left, right, max_vertices=budget), rest3
    if head == "file":
        if not rest:
            raise UsageError(f"arena spec {spec!r}: missing file path")
        return from_file(":".join(rest)), []
    raise UsageError(f"arena spec {spec!r}: unknown kind {head!r}")
