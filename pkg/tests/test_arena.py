"""Arena construction and metric tests."""

import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from revspy.arena import (
    Arena,
    all_distances,
    box_arena,
    chebyshev,
    cycle_arena,
    distance,
    from_file,
    king_arena,
    make_arena,
    path_arena,
    power,
    star_arena,
    strong_product,
)
from revspy.errors import BudgetExceeded, UsageError


def test_path_distance_endpoints():
    p3 = path_arena(3)
    assert distance(p3, 0, 2) == 2


def test_distance_self_is_zero():
    for a in (path_arena(4), cycle_arena(5), box_arena(2, -1, 1)):
        for v in range(a.n):
            assert distance(a, v, v) == 0


def test_box_corner_to_corner_is_chebyshev():
    b = box_arena(2, -3, 3)
    u = b.vertex_at((-3, -3))
    v = b.vertex_at((3, 3))
    assert distance(b, u, v) == 6


def test_distance_disconnected_is_infinite():
    a = Arena(n=2, neighbors=((), ()))
    assert distance(a, 0, 1) == math.inf


def test_distance_invalid_vertex():
    with pytest.raises(UsageError):
        distance(path_arena(3), 0, 7)


def test_power_of_p3_is_complete():
    k3 = power(path_arena(3), 2)
    for u, v in itertools.combinations(range(3), 2):
        assert k3.is_adjacent(u, v)


def test_power_one_is_identity():
    p = path_arena(5)
    assert power(p, 1) is p


def test_power_p5_squared_neighborhood():
    g = power(path_arena(5), 2)
    assert set(g.neighbors[0]) == {1, 2}


def test_power_zero_rejected():
    with pytest.raises(UsageError):
        power(path_arena(3), 0)


def test_strong_product_king_graph():
    g = strong_product(path_arena(3), path_arena(3))
    assert g.n == 9
    # corners have 3 neighbors, the center has all 8
    assert g.degree(0) == 3
    assert g.degree(4) == 8


def test_p2_product_p2_is_k4():
    g = strong_product(path_arena(2), path_arena(2))
    assert g.edge_count() == 6


def test_product_matches_king_generator():
    a = strong_product(path_arena(3), path_arena(3))
    b = king_arena(3, 3)
    assert a.n == b.n
    assert a.neighbors == b.neighbors
    assert a.coords == b.coords


def test_make_arena_path():
    a = make_arena("path:4")
    assert a.n == 4
    assert a.edge_count() == 3


def test_make_arena_king_equals_product_spec():
    a = make_arena("king:3x3")
    b = make_arena("product:path:3:path:3")
    assert a.neighbors == b.neighbors


def test_make_arena_box_size():
    a = make_arena("box:2:-11:11")
    assert a.n == 529
    assert a.kind == "lattice-box"


def test_make_arena_power_product_nesting():
    a = make_arena("power:2:product:path:3:path:3")
    b = power(strong_product(path_arena(3), path_arena(3)), 2)
    assert a.neighbors == b.neighbors


def test_make_arena_rejects_garbage():
    for bad in ("", "blob:3", "path", "king:3", "path:x", "path:3:junk"):
        with pytest.raises(UsageError):
            make_arena(bad)


def test_vertex_budget_enforced():
    with pytest.raises(BudgetExceeded):
        make_arena("box:2:-1000:1000", max_vertices=10**4)


def test_file_roundtrip(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# a triangle plus a pendant\n4 4\n0 1\n1 2\n2 0\n2 3\n")
    a = from_file(str(p))
    assert a.n == 4
    assert a.edge_count() == 4
    assert distance(a, 0, 3) == 2


@pytest.mark.parametrize(
    "body",
    [
        "2 1\n0 0\n",          # self edge
        "2 2\n0 1\n1 0\n",     # duplicate edge
        "2 1\n0 5\n",          # out of range
        "2 9\n0 1\n",          # wrong edge count
    ],
)
def test_file_rejects_bad_input(tmp_path, body):
    p = tmp_path / "bad.txt"
    p.write_text(body)
    with pytest.raises(UsageError):
        from_file(str(p))


def test_triangle_inequality_small_arenas():
    arenas = [path_arena(6), cycle_arena(7), star_arena(6),
              king_arena(3, 3), box_arena(2, -2, 2)]
    for a in arenas:
        assert a.n <= 30
        dist = [all_distances(a, u) for u in range(a.n)]
        for u, v, w in itertools.product(range(a.n), repeat=3):
            assert dist[u][w] <= dist[u][v] + dist[v][w]


@pytest.mark.parametrize("spec", ["path:7", "cycle:6", "star:5", "king:4x3"])
@pytest.mark.parametrize("n", [2, 3])
def test_power_distance_formula(spec, n):
    # d_{G^n}(u,v) == ceil(d_G(u,v) / n) for connected pairs
    g = make_arena(spec)
    assert g.n <= 20
    gn = power(g, n)
    for u in range(g.n):
        base = all_distances(g, u)
        powered = all_distances(gn, u)
        for v in range(g.n):
            if base[v] is not math.inf:
                assert powered[v] == -(-base[v] // n)


@given(st.integers(min_value=1, max_value=12), st.integers(min_value=1, max_value=4))
@settings(max_examples=40, deadline=None)
def test_power_distance_formula_on_paths(n, e):
    g = path_arena(n)
    gn = power(g, e)
    base = all_distances(g, 0)
    powered = all_distances(gn, 0)
    for v in range(n):
        assert powered[v] == -(-base[v] // e)


def test_chebyshev_matches_bfs_inside_box():
    b = box_arena(2, -4, 4)
    pts = [(-4, -4), (0, 0), (3, -2), (4, 4), (-1, 3)]
    for p, q in itertools.combinations(pts, 2):
        assert distance(b, b.vertex_at(p), b.vertex_at(q)) == chebyshev(p, q)


def test_format_vertex():
    assert path_arena(3).format_vertex(1) == "1"
    b = box_arena(2, -1, 1)
    assert b.format_vertex(b.vertex_at((0, -1))) == "(0,-1)"
