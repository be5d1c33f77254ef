"""Brute-force reference implementations used to check the solvers.

None of these share code paths with the solvers beyond the terrain type:
visibility is re-derived from vertex/segment orientation, viewer intervals
from per-sample slope scans, and one-guard optima from pairwise line
intersections.  They are slow on purpose.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from gmpy2 import mpq

from .terrain import Line, Point, Q, Terrain, line_intersection


@dataclass(frozen=True)
class SampleGrid:
    """Evenly spaced samples per edge, endpoints included."""

    per_edge: int = 64

    def __post_init__(self):
        if self.per_edge < 2:
            raise ValueError("need at least 2 samples per edge")

    def points(self, terrain: Terrain) -> np.ndarray:
        xs, ys = np.array(terrain.xs_float), np.array(terrain.ys_float)
        t = np.linspace(0.0, 1.0, self.per_edge)
        px = (xs[:-1, None] * (1 - t) + xs[1:, None] * t).ravel()
        py = (ys[:-1, None] * (1 - t) + ys[1:, None] * t).ravel()
        return np.stack([px, py], axis=1)


class _Unbounded:
    def __repr__(self) -> str:
        return "UNBOUNDED"


UNBOUNDED = _Unbounded()


@dataclass(frozen=True)
class HalfPlane:
    """``line`` plus the side kept: +1 above (right of a vertical line), -1 below (left)."""

    line: Line
    side: int = 1

    def value(self, p) -> mpq:
        ln = self.line
        return self.side * (ln.a * p[0] + ln.b * p[1] - ln.c)

    def contains(self, p) -> bool:
        return self.value(p) >= 0


def edge_halfplanes(terrain: Terrain, i: int = 0, j: Optional[int] = None, with_range: bool = True) -> list:
    """Upper half-planes of edges ``i .. j-1``, optionally boxed to ``x(v_i) <= x <= x(v_j)``."""
    j = terrain.n - 1 if j is None else j
    hps = [HalfPlane(terrain.edge_line(e), 1) for e in range(i, j)]
    if with_range:
        hps.append(HalfPlane(Line.vertical(terrain.xs[i]), 1))
        hps.append(HalfPlane(Line.vertical(terrain.xs[j]), -1))
    return hps


def _unbounded_below(hps: Sequence[HalfPlane]) -> bool:
    """Some recession direction of the region points downward.

    The recession cone's extreme rays run along constraint boundaries, so it
    suffices to try those directions and straight down.
    """
    dirs = [(mpq(0), mpq(-1))]
    for hp in hps:
        d = (hp.line.b, -hp.line.a)
        for s in (1, -1):
            if s * d[1] < 0:
                dirs.append((s * d[0], s * d[1]))
    return any(all(hp.side * (hp.line.a * dx + hp.line.b * dy) >= 0 for hp in hps) for dx, dy in dirs)


def oracle_lowest_point(halfplanes: Sequence[HalfPlane]):
    """Lowest (then leftmost) vertex of the intersection, or UNBOUNDED when there is none.

    Every pairwise line intersection is tested against every constraint;
    a float pass discards the hopeless pairs before the exact check.
    """
    hps = list(halfplanes)
    if not hps:
        raise ValueError("no half-planes")
    if len(hps) < 2 or _unbounded_below(hps):
        return UNBOUNDED
    m = len(hps)
    A = np.array([[float(h.line.a), float(h.line.b), float(h.line.c), h.side] for h in hps])
    ii, jj = np.triu_indices(m, 1)
    a1, b1, c1 = A[ii, 0], A[ii, 1], A[ii, 2]
    a2, b2, c2 = A[jj, 0], A[jj, 1], A[jj, 2]
    det = a1 * b2 - b1 * a2
    ok = np.abs(det) > 1e-300
    safe = np.where(ok, det, 1.0)
    x = np.where(ok, (c1 * b2 - b1 * c2) / safe, 0.0)
    y = np.where(ok, (a1 * c2 - c1 * a2) / safe, 0.0)
    scale = 1.0 + np.abs(A[:, 2]).max() + np.abs(x).max() + np.abs(y).max()
    tol = 1e-7 * scale
    viol = (A[None, :, 0] * x[:, None] + A[None, :, 1] * y[:, None] - A[None, :, 2]) * A[None, :, 3]
    feasible = ok & (viol >= -tol).all(axis=1)
    if not feasible.any():
        return _exact_lowest(hps, itertools.combinations(range(m), 2))
    y_min = y[feasible].min()
    pick = np.nonzero(feasible & (y <= y_min + tol))[0]
    best = _exact_lowest(hps, ((int(ii[k]), int(jj[k])) for k in pick))
    if best is UNBOUNDED:
        best = _exact_lowest(hps, itertools.combinations(range(m), 2))
    return best


def _exact_lowest(hps: list, pairs) -> object:
    best = None
    for i, j in pairs:
        p = line_intersection(hps[i].line, hps[j].line)
        if not isinstance(p, Point):
            continue
        if all(h.contains(p) for h in hps):
            if best is None or (p.y, p.x) < (best.y, best.x):
                best = p
    return UNBOUNDED if best is None else best


# ---------------------------------------------------------------- sampled visibility


def _blocked(xs, ys, ux, uy, px, py, tol=1e-9) -> np.ndarray:
    """For viewer ``u`` and sample arrays ``px, py``: is some vertex strictly above the sightline?"""
    lo = np.minimum(ux, px)[:, None]
    hi = np.maximum(ux, px)[:, None]
    between = (xs[None, :] > lo + tol) & (xs[None, :] < hi - tol)
    dx = (px - ux)[:, None]
    dy = (py - uy)[:, None]
    # height of the vertex above the sightline, scaled by |dx|
    cross = (ys[None, :] - uy) * dx - (xs[None, :] - ux) * dy
    above = np.where(dx > 0, cross, -cross) > tol * (1 + np.abs(dx))
    return (between & above).any(axis=1)


def oracle_cover_check(
    terrain: Terrain, h, guards: Sequence, grid: SampleGrid = SampleGrid(), exact_recheck: bool = True
) -> bool:
    """Every sampled terrain point is seen by at least one guard on the altitude line.

    Samples that look blocked in floating point are re-tested in exact
    arithmetic unless ``exact_recheck`` is off.
    """
    pts = grid.points(terrain)
    if len(guards) == 0:
        return False
    xs, ys = np.array(terrain.xs_float), np.array(terrain.ys_float)
    seen = np.zeros(len(pts), dtype=bool)
    hf = float(h)
    for g in guards:
        gx = float(g)
        seen |= ~_blocked(xs, ys, gx, hf, pts[:, 0], pts[:, 1])
    if seen.all():
        return True
    if not exact_recheck:
        return False
    # float says blocked: settle those samples exactly
    h = Q(h)
    per = grid.per_edge
    for s in np.nonzero(~seen)[0]:
        e, i = divmod(int(s), per)
        a, b = terrain.edge(e)
        t = mpq(i, per - 1)
        p = (a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
        if not any(_sees_point(terrain, (Q(g), h), p) for g in guards):
            return False
    return True


def _sees_point(terrain: Terrain, u, p) -> bool:
    (lx, ly), (rx, ry) = (u, p) if u[0] <= p[0] else (p, u)
    for v in terrain.vertices:
        if lx < v.x < rx and (rx - lx) * (v.y - ly) - (ry - ly) * (v.x - lx) > 0:
            return False
    return True


def sample_viewers(terrain: Terrain, h, grid: SampleGrid = SampleGrid()) -> np.ndarray:
    """Per sample, the interval ``[g, f]`` of altitude-line abscissas that see it."""
    pts = grid.points(terrain)
    xs, ys = np.array(terrain.xs_float), np.array(terrain.ys_float)
    hf = float(h)
    px, py = pts[:, 0][:, None], pts[:, 1][:, None]
    dx = xs[None, :] - px
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = (ys[None, :] - py) / dx
    right = np.where(dx > 1e-12, slope, -np.inf).max(axis=1)
    left = np.where(dx < -1e-12, slope, np.inf).min(axis=1)
    x0, x1 = xs[0], xs[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(right > 0, pts[:, 0] + (hf - pts[:, 1]) / right, x1)
        g = np.where(left < 0, pts[:, 0] + (hf - pts[:, 1]) / left, x0)
    return np.stack([np.maximum(g, x0), np.minimum(f, x1)], axis=1)


def oracle_min_guards(terrain: Terrain, h, grid: SampleGrid = SampleGrid()) -> int:
    """Fewest points on the altitude line stabbing every sample's viewer interval."""
    iv = sample_viewers(terrain, h, grid)
    order = np.argsort(iv[:, 1], kind="stable")
    count = 0
    guard = -math.inf
    for g, f in iv[order]:
        if g > guard + 1e-9:
            count += 1
            guard = f
    return count


# ---------------------------------------------------------------- bijective cover


def oracle_required_height(terrain: Terrain, i: int, j: int) -> mpq:
    p = oracle_lowest_point(edge_halfplanes(terrain, i, j))
    return max(terrain.y_max, p.y)


def oracle_batc(terrain: Terrain, k: int, cap: int = 200, exhaustive_below: int = 14) -> mpq:
    """Optimal altitude over all vertex partitions into at most ``k`` subchains."""
    n = terrain.n
    if k < 1:
        raise ValueError("k must be at least 1")
    if n > cap:
        raise ValueError(f"terrain too large for the oracle ({n} > {cap})")
    if k >= n - 1:
        return terrain.y_max
    req = {}
    for i in range(n - 1):
        for j in range(i + 1, n):
            req[i, j] = oracle_required_height(terrain, i, j)
    if n <= exhaustive_below:
        best = None
        for pieces in range(1, k + 1):
            for cut in itertools.combinations(range(1, n - 1), pieces - 1):
                cs = (0, *cut, n - 1)
                v = max(req[a, b] for a, b in zip(cs, cs[1:]))
                best = v if best is None else min(best, v)
        return best
    # best[j]: optimum for the prefix ending at j with the pieces used so far
    best = {j: req[0, j] for j in range(1, n)}
    for _ in range(k - 1):
        best = {j: min([best[j]] + [max(best[i], req[i, j]) for i in range(1, j)]) for j in range(1, n)}
    return best[n - 1]


def oracle_batc_count(terrain: Terrain, h) -> int:
    """Fewest subchains, each coverable from the altitude line at ``h`` (partition DP)."""
    h = Q(h)
    n = terrain.n
    req = {(i, j): oracle_required_height(terrain, i, j) for i in range(n - 1) for j in range(i + 1, n)}
    best = [0] + [None] * (n - 1)
    for j in range(1, n):
        best[j] = min(best[i] + 1 for i in range(j) if best[i] is not None and req[i, j] <= h)
    return best[n - 1]


# ---------------------------------------------------------------- shortest path trees


def _sees(terrain: Terrain, i: int, j: int) -> bool:
    a, b = terrain.vertices[i], terrain.vertices[j]
    for v in terrain.vertices[i + 1 : j]:
        if (b.x - a.x) * (v.y - a.y) - (b.y - a.y) * (v.x - a.x) > 0:
            return False
    return True


def oracle_spt(terrain: Terrain, root: str = "right") -> tuple:
    """Parents of the geodesic tree from Dijkstra on the vertex visibility graph.

    Equal-length paths prefer the predecessor closest in index, which makes
    collinear vertices chain through each other.
    """
    n = terrain.n
    src = n - 1 if root == "right" else 0
    pts = [(float(v.x), float(v.y)) for v in terrain.vertices]
    adj = {i: [] for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            if _sees(terrain, i, j):
                w = math.dist(pts[i], pts[j])
                adj[i].append((j, w))
                adj[j].append((i, w))
    dist = [math.inf] * n
    dist[src] = 0.0
    parent: list = [None] * n
    heap = [(0.0, src)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adj[u]:
            nd = d + w
            tol = 1e-9 * (1 + nd)
            if nd < dist[v] - tol:
                dist[v], parent[v] = nd, u
                heapq.heappush(heap, (nd, v))
            elif abs(nd - dist[v]) <= tol and parent[v] is not None and abs(u - v) < abs(parent[v] - v):
                parent[v] = u
    return tuple(parent)
