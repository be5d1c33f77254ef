"""Deterministic terrain generators."""

from __future__ import annotations

import random

from ..terrain import Terrain, orientation

PROFILES = ("random", "peaks", "staircase")


def _rng(n: int, seed: int, profile: str) -> random.Random:
    return random.Random(f"{profile}:{n}:{seed}")


def _append(pts: list, x: int, y: int, rng: random.Random, amplitude: int) -> None:
    # nudge y until the new vertex breaks collinearity with the last two
    while len(pts) >= 2 and orientation(pts[-2], pts[-1], (x, y)) == 0:
        y = rng.randint(0, amplitude)
    pts.append((x, y))


def generate(n: int, seed: int, profile: str = "random", amplitude: int = 100) -> Terrain:
    if n < 2:
        raise ValueError("a terrain needs at least 2 vertices")
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    amplitude = max(int(amplitude), 2)
    rng = _rng(n, seed, profile)
    pts: list = []
    x = 0
    if profile == "random":
        for _ in range(n):
            _append(pts, x, rng.randint(0, amplitude), rng, amplitude)
            x += rng.randint(1, 10)
    elif profile == "peaks":
        hi_lo = (amplitude * 6 // 10, amplitude // 4)
        for i in range(n):
            y = rng.randint(hi_lo[0], amplitude) if i % 2 else rng.randint(0, hi_lo[1])
            _append(pts, x, y, rng, amplitude)
            x += rng.randint(1, 4)
    else:
        # rise/flat steps: every riser shares one slope, every tread is flat
        rise = max(1, amplitude // max(n, 1))
        y = 0
        for i in range(n):
            pts.append((x, y))
            if i % 2 == 0:
                x += 1
                y += rise
            else:
                x += rng.randint(1, 5)
    return Terrain.from_points(pts, merge_collinear=False)
