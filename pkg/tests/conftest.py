import random

import pytest
from gmpy2 import mpq
from hypothesis import strategies as st

from altguard.terrain import Terrain, orientation

W_POINTS = [(0, 0), (1, 1), (2, 0), (3, 1), (4, 0)]


@pytest.fixture
def tw():
    return Terrain.from_points(W_POINTS)


def random_terrain(rng: random.Random, n: int, width: int = 3, height: int = 30) -> Terrain:
    """Integer terrain with distinct x in [0, width*n] and y in [0, height]."""
    xs = sorted(rng.sample(range(width * n + 3), n))
    return Terrain.from_points([(x, rng.randint(0, height)) for x in xs])


def rational_terrain(rng: random.Random, n: int) -> Terrain:
    x = mpq(0)
    pts = []
    for _ in range(n):
        x += mpq(rng.randint(1, 40), rng.randint(1, 9))
        pts.append((x, mpq(rng.randint(0, 300), rng.randint(1, 7))))
    return Terrain.from_points(pts)


@st.composite
def terrains(draw, min_n=2, max_n=12):
    n = draw(st.integers(min_n, max_n))
    steps = draw(st.lists(st.integers(1, 6), min_size=n - 1, max_size=n - 1))
    ys = draw(st.lists(st.integers(0, 12), min_size=n, max_size=n))
    xs = [0]
    for s in steps:
        xs.append(xs[-1] + s)
    return Terrain.from_points(list(zip(xs, ys)))


def no_three_collinear(t: Terrain) -> bool:
    v = t.vertices
    return all(orientation(v[i], v[i + 1], v[i + 2]) != 0 for i in range(t.n - 2))
