import random

import numpy as np
import pytest
from gmpy2 import mpq

from altguard.oracles import (
    UNBOUNDED,
    HalfPlane,
    SampleGrid,
    edge_halfplanes,
    oracle_batc,
    oracle_batc_count,
    oracle_cover_check,
    oracle_lowest_point,
    oracle_min_guards,
    oracle_required_height,
    oracle_spt,
    sample_viewers,
)
from altguard.terrain import Line, Point, Terrain
from altguard.visibility import is_visible

from conftest import random_terrain

FLAT = Terrain.from_points([(0, 0), (1, 0)])


def test_lowest_point_examples(tw):
    assert oracle_lowest_point(edge_halfplanes(tw, with_range=False)) == Point(2, 2)
    assert oracle_lowest_point([HalfPlane(Line.through((0, 0), (1, 1)))]) is UNBOUNDED
    parallel = [HalfPlane(Line.through((0, 0), (1, 1))), HalfPlane(Line.through((0, 1), (1, 2)))]
    assert oracle_lowest_point(parallel) is UNBOUNDED
    with pytest.raises(ValueError):
        oracle_lowest_point([])


def test_lowest_point_boxed_and_tie_break():
    # one rising edge: lowest boxed point is the left end of its line
    t = Terrain.from_points([(0, 0), (2, 1)])
    assert oracle_lowest_point(edge_halfplanes(t)) == Point(0, 0)
    # horizontal floor: the whole segment is lowest, leftmost wins
    assert oracle_lowest_point(edge_halfplanes(FLAT)) == Point(0, 0)


def test_lowest_point_float_filter_matches_exhaustive():
    rng = random.Random(2)
    for _ in range(40):
        pts = [(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(8)]
        hps = [
            HalfPlane(Line.through(a, b), rng.choice((1, -1)))
            for a, b in zip(pts[::2], pts[1::2])
            if a[0] != b[0]
        ]
        hps.append(HalfPlane(Line.vertical(-10), 1))
        hps.append(HalfPlane(Line.vertical(10), -1))
        got = oracle_lowest_point(hps)
        if got is UNBOUNDED:
            continue
        assert all(h.contains(got) for h in hps)
        # nothing feasible lies lower on a coarse exact scan of the box
        for x in range(-10, 11):
            ys = [h for h in hps if h.line.b != 0]
            low = max((h.line.c - h.line.a * x) / h.line.b for h in ys if h.side * h.line.b > 0)
            cap = [(h.line.c - h.line.a * x) / h.line.b for h in ys if h.side * h.line.b < 0]
            if not cap or low <= min(cap):
                assert got.y <= low


def test_cover_examples(tw):
    assert oracle_cover_check(tw, 1, [1, 3])
    assert not oracle_cover_check(tw, 1, [1])
    assert not oracle_cover_check(tw, 1, [])


def test_cover_exact_recheck_grazing(tw):
    # the guard at (1,1) grazes (3,1): only the exact pass settles those samples
    assert oracle_cover_check(tw, 1, [1, 3], SampleGrid(7), exact_recheck=True)


def test_cover_matches_is_visible():
    rng = random.Random(3)
    for _ in range(15):
        t = random_terrain(rng, rng.randint(2, 8))
        h = t.y_max + rng.randint(0, 5)
        g = [t.xs[rng.randrange(t.n)]]
        grid = SampleGrid(5)
        ok = True
        for e in range(t.n - 1):
            a, b = t.edge(e)
            for i in range(5):
                s = mpq(i, 4)
                p = Point(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y))
                ok &= is_visible(t, Point(g[0], h), p)
        assert oracle_cover_check(t, h, g, grid) == ok


def test_min_guards_examples(tw):
    assert oracle_min_guards(tw, 1) == 2
    assert oracle_min_guards(tw, 2) == 1
    assert oracle_min_guards(FLAT, 0) == 1


def test_sample_viewers_shape(tw):
    iv = sample_viewers(tw, 2, SampleGrid(8))
    assert iv.shape == (32, 2)
    assert np.all(iv[:, 0] <= iv[:, 1] + 1e-12)


def test_batc_examples(tw):
    assert oracle_batc(tw, 2) == 1
    assert oracle_batc(tw, 1) == 2
    assert oracle_batc(tw, 4) == oracle_batc(tw, 9) == 1
    assert oracle_required_height(tw, 0, 4) == 2
    assert oracle_batc_count(tw, 1) == 2
    with pytest.raises(ValueError):
        oracle_batc(tw, 0)


def test_batc_dp_matches_enumeration():
    rng = random.Random(5)
    for _ in range(10):
        t = random_terrain(rng, rng.randint(4, 10))
        for k in (2, 3):
            assert oracle_batc(t, k) == oracle_batc(t, k, exhaustive_below=0)


def test_spt_w_terrain(tw):
    assert oracle_spt(tw, "right") == (1, 3, 3, 4, None)
    assert oracle_spt(tw, "left") == (None, 0, 1, 1, 3)
