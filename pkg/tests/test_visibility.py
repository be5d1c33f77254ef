import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from altguard.oracles import oracle_cover_check, oracle_spt
from altguard.terrain import OutOfDomain, Point, Terrain
from altguard.visibility import (
    FullyVisible,
    edge_viewers,
    is_visible,
    min_guards_at_height,
    peak,
    point_viewers,
    shortest_path_tree,
    vertex_viewers,
    visible_portion,
    visible_portions,
)

from conftest import random_terrain, terrains


@pytest.fixture
def spts(tw):
    return shortest_path_tree(tw, "left"), shortest_path_tree(tw, "right")


def test_is_visible_examples(tw):
    assert is_visible(tw, (2, 2), (4, 0))
    assert not is_visible(tw, (1, 1), (mpq(7, 2), mpq(1, 2)))
    assert is_visible(tw, (1, 1), (1, 1))
    with pytest.raises(OutOfDomain):
        is_visible(tw, (5, 2), (4, 0))


def test_spt_w_terrain(tw):
    # 0-based: v1 -> index 0
    assert shortest_path_tree(tw, "right").parent == (1, 3, 3, 4, None)
    assert shortest_path_tree(tw, "left").parent == (None, 0, 1, 1, 3)


def test_spt_convex_chain_follows_chain():
    t = Terrain.from_points([(0, 0), (1, 3), (2, 5), (3, 6), (4, 6.5)])
    assert shortest_path_tree(t, "right").parent == (1, 2, 3, 4, None)


def test_spt_matches_dijkstra():
    rng = random.Random(3)
    for _ in range(60):
        t = random_terrain(rng, rng.randint(2, 10))
        for root in ("left", "right"):
            assert shortest_path_tree(t, root).parent == oracle_spt(t, root)


def test_spt_parents_visible_and_directed():
    rng = random.Random(4)
    for _ in range(40):
        t = random_terrain(rng, rng.randint(3, 25))
        right = shortest_path_tree(t, "right").parent
        for v, p in enumerate(right):
            if p is not None:
                assert t.xs[p] > t.xs[v]
                assert is_visible(t, t.vertices[p], t.vertices[v])


def test_vertex_viewers(tw, spts):
    left, right = spts
    assert vertex_viewers(tw, left, right, 0, mpq(3, 2)).f_x == mpq(3, 2)
    assert vertex_viewers(tw, left, right, 4, 7).f_x == 4
    # the line through (3,1) and (4,0) meets y=1 at x=3, but the tangent from
    # v4 runs to v5 itself, which is lower: nothing on the right blocks it
    assert vertex_viewers(tw, left, right, 3, 1).f_x == 4


def test_edge_viewers(tw, spts):
    last = edge_viewers(tw, spts, 3, 1)
    first = edge_viewers(tw, spts, 0, 1)
    assert (last.g_x, last.f_x) == (3, 4)
    assert (first.g_x, first.f_x) == (0, 1)


def test_edge_viewers_single_edge():
    t = Terrain.from_points([(0, 0), (2, 1)])
    sp = shortest_path_tree(t, "left"), shortest_path_tree(t, "right")
    iv = edge_viewers(t, sp, 0, 1)
    assert not iv.empty and iv.contains(2)


def test_visible_portions(tw):
    p = visible_portion(tw, (1, 1), 3)
    assert p.start == p.end == Point(3, 1)
    assert visible_portion(tw, (2, 2), 1).is_full(tw)
    assert all(q.is_full(tw) for q in visible_portions(tw, (2, 2)))


def test_peak(tw):
    assert peak(tw, (1, 1), 3).vertices == {3}
    with pytest.raises(FullyVisible):
        peak(tw, (2, 2), 0)


def test_peak_degenerate_two_vertices():
    # (0,3) views edge (4,2)-(5,0) past (2,2.5)... both (1,?) line up on one sightline
    t = Terrain.from_points([(0, 3), (1, 1), (2, 2), (3, 0), (4, 1), (5, -2)])
    # sightline from (0,3) through (2,2) also passes (4,1)
    assert peak(t, (0, 3), 4).vertices == {2, 4}


def test_peak_invisible_edge_is_empty():
    t = Terrain.from_points([(0, 0), (1, 5), (2, -5), (3, -6)])
    assert peak(t, (0, 5), 2).vertices == frozenset()


def test_min_guards_examples(tw):
    assert min_guards_at_height(tw, 1) == (2, [1, 4])
    assert min_guards_at_height(tw, 2) == (1, [2])
    assert min_guards_at_height(Terrain.from_points([(0, 0), (1, 0)]), 0)[0] == 1


def test_greedy_guards_cover():
    rng = random.Random(8)
    for _ in range(60):
        t = random_terrain(rng, rng.randint(2, 25))
        h = t.y_max + mpq(rng.randint(0, 30), 4)
        _, g = min_guards_at_height(t, h)
        assert oracle_cover_check(t, h, g)


def _portion_from_sampling(t, u, e, k=400):
    a, b = t.edge(e)
    vis = []
    for i in range(k + 1):
        s = mpq(i, k)
        p = (a.x + s * (b.x - a.x), a.y + s * (b.y - a.y))
        if is_visible(t, u, p):
            vis.append(p[0])
    return vis


def test_visible_portions_against_sampling():
    rng = random.Random(9)
    for _ in range(25):
        t = random_terrain(rng, rng.randint(3, 10))
        u = (mpq(rng.randint(4 * int(t.x_min), 4 * int(t.x_max)), 4), t.y_max + rng.randint(0, 4))
        for e, por in enumerate(visible_portions(t, u)):
            xs = _portion_from_sampling(t, u, e)
            if por.empty:
                assert len(xs) <= 1
                continue
            assert all(por.start.x <= x <= por.end.x for x in xs)
            assert all(is_visible(t, u, p) for p in (por.start, por.end))


@settings(max_examples=60, deadline=None)
@given(terrains(min_n=2, max_n=10), st.integers(0, 8), st.integers(1, 6))
def test_viewer_monotone_in_h(t, lift, step):
    sp = shortest_path_tree(t, "left"), shortest_path_tree(t, "right")
    h1 = t.y_max + lift
    h2 = h1 + step
    for e in range(t.n - 1):
        a, b = edge_viewers(t, sp, e, h1), edge_viewers(t, sp, e, h2)
        assert b.f_x >= a.f_x and b.g_x <= a.g_x


@settings(max_examples=60, deadline=None)
@given(terrains(min_n=3, max_n=10), st.integers(0, 6), st.data())
def test_one_sided_blocking(t, lift, data):
    h = t.y_max + lift
    i = data.draw(st.integers(0, 4 * (t.n - 1)))
    e, frac = divmod(i, 4)
    e = min(e, t.n - 2)
    a, b = t.edge(e)
    p = (a.x + mpq(frac, 4) * (b.x - a.x), a.y + mpq(frac, 4) * (b.y - a.y))
    ux = data.draw(st.integers(int(t.x_min) * 4, int(t.x_max) * 4)) / mpq(4)
    if ux < p[0] and not is_visible(t, (ux, h), p):
        for wx in (t.x_min, (t.x_min + ux) / 2):
            assert not is_visible(t, (wx, h), p)


@settings(max_examples=60, deadline=None)
@given(terrains(min_n=2, max_n=10), st.integers(0, 6))
def test_prefix_visible_from_first_viewer(t, lift):
    h = t.y_max + lift
    f = min(point_viewers(t, v, h).f_x for v in t.vertices)
    for v in t.vertices:
        if v.x <= f:
            assert is_visible(t, (f, h), v)


@settings(max_examples=60, deadline=None)
@given(terrains(min_n=2, max_n=12), st.lists(st.integers(0, 40), min_size=2, max_size=5))
def test_min_guards_non_increasing(t, lifts):
    hs = sorted(t.y_max + mpq(x, 4) for x in lifts)
    counts = [min_guards_at_height(t, h)[0] for h in hs]
    assert counts == sorted(counts, reverse=True)
