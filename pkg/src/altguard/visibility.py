"""Visibility on x-monotone terrains.

Shortest path trees, extreme viewers on an altitude line, visible portions,
peaks and the fixed-altitude greedy guard minimization.

Conventions: vertices and edges are 0-based; edge ``e`` joins vertices ``e``
and ``e + 1``.  Visibility is closed (a sightline may graze the terrain).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from gmpy2 import mpq

from .terrain import OutOfDomain, Point, Q, Terrain, orientation


class FullyVisible(ValueError):
    """The edge is entirely visible from the viewer, so it has no peak."""


# ---------------------------------------------------------------- predicates


def is_visible(terrain: Terrain, u: Sequence, p: Sequence) -> bool:
    """True iff segment ``u p`` does not properly cross the terrain.

    ``u`` must lie on or above the terrain and ``p`` on it.  Linear scan.
    """
    ux, uy = Q(u[0]), Q(u[1])
    px, py = Q(p[0]), Q(p[1])
    if not terrain.x_min <= ux <= terrain.x_max:
        raise OutOfDomain(f"viewer x = {ux} outside terrain domain")
    if ux == px:
        return True
    lo, hi = (ux, px) if ux < px else (px, ux)
    left, right = (ux, uy), (px, py)
    if px < ux:
        left, right = right, left
    for v in terrain.vertices:
        if lo < v.x < hi and orientation(left, right, v) > 0:
            return False
    return True


# ---------------------------------------------------------------- shortest path trees


@dataclass(frozen=True)
class ShortestPathTree:
    """Geodesic tree rooted at the first (``left``) or last (``right``) vertex."""

    root: str
    parent: tuple

    def path(self, v: int) -> list:
        out = [v]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out


def _right_parents(xs: Sequence, ys: Sequence) -> list:
    n = len(xs)
    parent: list = [None] * n
    stack = [n - 1]
    for i in range(n - 2, -1, -1):
        p = (xs[i], ys[i])
        while len(stack) >= 2:
            t, s = stack[-1], stack[-2]
            if orientation(p, (xs[t], ys[t]), (xs[s], ys[s])) > 0:
                stack.pop()
            else:
                break
        parent[i] = stack[-1]
        stack.append(i)
    return parent


def shortest_path_tree(terrain: Terrain, root: str = "right") -> ShortestPathTree:
    """Parent links of the geodesic tree from every vertex to ``v_0`` or ``v_{n-1}``.

    Single stack scan over the upper hulls of suffixes (or prefixes).  On
    collinear ties the nearer vertex is the parent.
    """
    if root == "right":
        return ShortestPathTree("right", tuple(_right_parents(terrain.xs, terrain.ys)))
    if root == "left":
        n = terrain.n
        m = _right_parents(terrain.mirrored.xs, terrain.mirrored.ys)
        parent = [None if m[n - 1 - i] is None else n - 1 - m[n - 1 - i] for i in range(n)]
        return ShortestPathTree("left", tuple(parent))
    raise ValueError(f"root must be 'left' or 'right', not {root!r}")


# ---------------------------------------------------------------- per-terrain tables


class TerrainViews:
    """Right shortest path tree with binary lifting and per-vertex viewer slopes.

    The left-facing quantities are obtained from ``mirror``, the same table
    built over the mirrored terrain.
    """

    def __init__(self, terrain: Terrain):
        self.terrain = terrain
        self.n = terrain.n
        self.xs = terrain.xs
        self.ys = terrain.ys
        self.x_last = self.xs[-1]
        self.parent = _right_parents(self.xs, self.ys)
        n = self.n
        up = [list(self.parent)]
        span = 1
        while span < n:
            prev = up[-1]
            up.append([None if prev[i] is None else prev[prev[i]] for i in range(n)])
            span *= 2
        self.up = up
        # f(v, h) = x_v + (h - y_v) * inv[v] when inv[v] is not None, else x_last
        inv: list = [None] * n
        for i in range(n):
            t = self.parent[i]
            if t is not None and self.ys[t] > self.ys[i]:
                inv[i] = (self.xs[t] - self.xs[i]) / (self.ys[t] - self.ys[i])
        self.inv = inv
        self._mirror: Optional["TerrainViews"] = None
        self._left_parent: Optional[list] = None

    @property
    def mirror(self) -> "TerrainViews":
        if self._mirror is None:
            m = TerrainViews(self.terrain.mirrored)
            m._mirror = self
            self._mirror = m
        return self._mirror

    @property
    def left_parent(self) -> list:
        if self._left_parent is None:
            n, mp = self.n, self.mirror.parent
            self._left_parent = [None if mp[n - 1 - i] is None else n - 1 - mp[n - 1 - i] for i in range(n)]
        return self._left_parent

    def f_vertex(self, i: int, h):
        k = self.inv[i]
        if k is None:
            return self.x_last
        x = self.xs[i] + (h - self.ys[i]) * k
        return x if x < self.x_last else self.x_last

    def tangent(self, cx, cy, e: int) -> Optional[int]:
        """Vertex of maximal slope from point ``c`` on edge ``e`` among vertices right of ``c``."""
        xs, ys = self.xs, self.ys
        if cx == xs[e]:
            return self.parent[e]
        if cx == xs[e + 1]:
            return self.parent[e + 1]
        t = e + 1
        c = (cx, cy)
        par = self.parent

        def ahead(v):
            q = par[v]
            return q is not None and orientation(c, (xs[v], ys[v]), (xs[q], ys[q])) > 0

        if not ahead(t):
            return t
        for level in range(len(self.up) - 1, -1, -1):
            cand = self.up[level][t]
            if cand is not None and ahead(cand):
                t = cand
        return par[t]

    def f_point(self, cx, cy, t: Optional[int], h):
        """Rightmost viewer abscissa of point ``c`` whose tangent vertex is ``t``."""
        if t is None or self.ys[t] <= cy:
            return self.x_last
        x = cx + (h - cy) * (self.xs[t] - cx) / (self.ys[t] - cy)
        return x if x < self.x_last else self.x_last


def views_of(terrain: Terrain) -> TerrainViews:
    v = terrain.__dict__.get("_views")
    if v is None:
        v = TerrainViews(terrain)
        object.__setattr__(terrain, "_views", v)
    return v


# ---------------------------------------------------------------- viewer intervals


@dataclass(frozen=True)
class ViewerInterval:
    g_x: mpq
    f_x: mpq
    h: mpq

    @property
    def empty(self) -> bool:
        return self.g_x > self.f_x

    def contains(self, x) -> bool:
        return self.g_x <= x <= self.f_x


def _clamped_viewer(terrain: Terrain, v: int, t, h, right: bool):
    if t is None or terrain.ys[t] <= terrain.ys[v]:
        return terrain.x_max if right else terrain.x_min
    x = terrain.xs[v] + (h - terrain.ys[v]) * (terrain.xs[t] - terrain.xs[v]) / (
        terrain.ys[t] - terrain.ys[v]
    )
    if right:
        return min(x, terrain.x_max)
    return max(x, terrain.x_min)


def vertex_viewers(
    terrain: Terrain, spt_left: ShortestPathTree, spt_right: ShortestPathTree, v: int, h
) -> ViewerInterval:
    """Leftmost and rightmost points of the altitude line that see vertex ``v``."""
    h = Q(h)
    f = _clamped_viewer(terrain, v, spt_right.parent[v], h, right=True)
    g = _clamped_viewer(terrain, v, spt_left.parent[v], h, right=False)
    return ViewerInterval(g, f, h)


def edge_viewers(terrain: Terrain, spts: tuple, e: int, h) -> ViewerInterval:
    """Viewer interval of the whole edge ``e``: the tighter of its endpoints' intervals."""
    left, right = spts
    a = vertex_viewers(terrain, left, right, e, h)
    b = vertex_viewers(terrain, left, right, e + 1, h)
    return ViewerInterval(max(a.g_x, b.g_x), min(a.f_x, b.f_x), Q(h))


def point_viewers(terrain: Terrain, q: Sequence, h) -> ViewerInterval:
    """Viewer interval of an arbitrary terrain point ``q``."""
    views = views_of(terrain)
    qx, qy = Q(q[0]), Q(q[1])
    h = Q(h)
    e = _edge_at(terrain, qx)
    f = views.f_point(qx, qy, views.tangent(qx, qy, e), h) if qx < terrain.x_max else terrain.x_max
    m = views.mirror
    me = _edge_at(m.terrain, -qx)
    g = -m.f_point(-qx, qy, m.tangent(-qx, qy, me), h) if qx > terrain.x_min else terrain.x_min
    return ViewerInterval(g, f, h)


def _edge_at(terrain: Terrain, x) -> int:
    from bisect import bisect_right

    return max(0, min(bisect_right(terrain.xs, x) - 1, terrain.n - 2))


# ---------------------------------------------------------------- edge status from a guard


class Status(enum.Enum):
    BEHIND = "behind"  # edge lies left of the guard
    FULL = "full"  # whole edge visible
    NONE = "none"  # nothing, or only the left endpoint, visible
    SUFFIX = "suffix"  # visible part is [p, b] with p past the left endpoint


def ray_edge_point(ux, uy, rx, ry, ax, ay, bx, by):
    """Intersection of the line through ``u`` and ``r`` with the line through ``a`` and ``b``.

    Written with plain arithmetic so it also evaluates on symbolic altitude functions.
    """
    dx, dy = rx - ux, ry - uy
    s = (dx * (uy - ay) - dy * (ux - ax)) / (dx * (by - ay) - dy * (bx - ax))
    return ax + s * (bx - ax), ay + s * (by - ay)


def edge_statuses(views: TerrainViews, ux, h) -> list:
    """Status of every edge as seen from guard ``(ux, h)``, looking right.

    Returns ``(Status, r, a_on)`` per edge, where ``r`` is the horizon vertex
    (the first vertex of maximal slope from the guard) for edges right of the
    guard and ``a_on`` tells whether the left endpoint is on the horizon line.
    """
    xs, ys, n = views.xs, views.ys, views.n
    out = []
    sig = None
    r = None
    for e in range(n - 1):
        if xs[e + 1] <= ux:
            out.append((Status.BEHIND if xs[e + 1] < ux else Status.FULL, None, False))
            continue
        if xs[e] <= ux:
            out.append((Status.FULL, None, False))
            continue
        slope = (ys[e] - h) / (xs[e] - ux)
        if sig is None or slope > sig:
            sig, r = slope, e
        a_on = slope == sig
        db = ys[e + 1] - h - sig * (xs[e + 1] - ux)
        if a_on:
            out.append((Status.FULL if db >= 0 else Status.NONE, r, True))
        elif db < 0:
            out.append((Status.NONE, r, False))
        else:
            out.append((Status.SUFFIX, r, False))
    return out


def horizon_peak(views: TerrainViews, ux, h, e: int) -> frozenset:
    """All vertices between the guard and edge ``e`` attaining the horizon slope."""
    xs, ys = views.xs, views.ys
    best = None
    members: list = []
    for j in range(e + 1):
        if xs[j] <= ux:
            continue
        s = (ys[j] - h) / (xs[j] - ux)
        if best is None or s > best:
            best, members = s, [j]
        elif s == best:
            members.append(j)
    return frozenset(members)


# ---------------------------------------------------------------- visible portions


@dataclass(frozen=True)
class VisiblePortion:
    """Maximal visible subsegment of one edge; ``start``/``end`` are None when empty."""

    edge: int
    start: Optional[Point]
    end: Optional[Point]

    @property
    def empty(self) -> bool:
        return self.start is None

    def is_full(self, terrain: Terrain) -> bool:
        a, b = terrain.edge(self.edge)
        return self.start == a and self.end == b


def _portion_right(views: TerrainViews, ux, h, e: int, st) -> tuple:
    kind, r, a_on = st
    xs, ys = views.xs, views.ys
    a = Point(xs[e], ys[e])
    b = Point(xs[e + 1], ys[e + 1])
    if kind is Status.FULL or kind is Status.BEHIND:
        return a, b
    if kind is Status.NONE:
        return (a, a) if a_on else (None, None)
    px, py = ray_edge_point(ux, h, xs[r], ys[r], a.x, a.y, b.x, b.y)
    return Point(px, py), b


def visible_portions(terrain: Terrain, u: Sequence) -> list:
    """Visible portion of every edge from guard ``u``; linear in the number of edges."""
    views = views_of(terrain)
    ux, h = Q(u[0]), Q(u[1])
    if not terrain.x_min <= ux <= terrain.x_max:
        raise OutOfDomain(f"viewer x = {ux} outside terrain domain")
    n = terrain.n
    right = edge_statuses(views, ux, h)
    m = views.mirror
    left = edge_statuses(m, -ux, h)
    out = []
    for e in range(n - 1):
        if right[e][0] is not Status.BEHIND:
            s, t = _portion_right(views, ux, h, e, right[e])
        else:
            me = n - 2 - e
            s2, t2 = _portion_right(m, -ux, h, me, left[me])
            s, t = (None, None) if s2 is None else (Point(-t2.x, t2.y), Point(-s2.x, s2.y))
        out.append(VisiblePortion(e, s, t))
    return out


def visible_portion(terrain: Terrain, u: Sequence, e: int) -> VisiblePortion:
    """Maximal subsegment of edge ``e`` visible from ``u``."""
    return visible_portions(terrain, u)[e]


@dataclass(frozen=True)
class PeakSet:
    edge: int
    viewer: Point
    vertices: frozenset


def peak(terrain: Terrain, u: Sequence, e: int) -> PeakSet:
    """Vertices on the grazing sightline that bounds the visible portion of ``e``.

    Raises FullyVisible when the edge is entirely visible; returns an empty
    set when nothing of the edge is visible.
    """
    views = views_of(terrain)
    ux, h = Q(u[0]), Q(u[1])
    viewer = Point(ux, h)
    n = terrain.n
    st = edge_statuses(views, ux, h)[e]
    if st[0] is Status.BEHIND:
        m = views.mirror
        me = n - 2 - e
        mst = edge_statuses(m, -ux, h)[me]
        if mst[0] is Status.FULL:
            raise FullyVisible(f"edge {e} is fully visible")
        if mst[0] is Status.NONE and not mst[2]:
            return PeakSet(e, viewer, frozenset())
        verts = horizon_peak(m, -ux, h, me)
        return PeakSet(e, viewer, frozenset(n - 1 - j for j in verts))
    if st[0] is Status.FULL:
        raise FullyVisible(f"edge {e} is fully visible")
    if st[0] is Status.NONE and not st[2]:
        return PeakSet(e, viewer, frozenset())
    return PeakSet(e, viewer, horizon_peak(views, ux, h, e))


# ---------------------------------------------------------------- greedy guarding


def greedy_guards(views: TerrainViews, h, limit: Optional[int] = None) -> list:
    """Left-to-right greedy: each guard at the smallest rightmost-viewer of the uncovered set.

    Stops early once more than ``limit`` guards were placed.
    """
    xs, ys, n = views.xs, views.ys, views.n
    f_vertex = views.f_vertex
    guards: list = []
    u = None
    e0 = 0
    while True:
        best = None
        if u is None:
            for e in range(n - 1):
                if best is not None and xs[e] >= best:
                    break
                c = f_vertex(e, h)
                d = f_vertex(e + 1, h)
                if d < c:
                    c = d
                if best is None or c < best:
                    best = c
        else:
            while e0 < n and xs[e0] <= u:
                e0 += 1
            sig = None
            # edges starting at or left of u are behind the guard or below it
            for e in range(e0, n - 1):
                ax = xs[e]
                if best is not None and ax >= best:
                    break
                slope = (ys[e] - h) / (ax - u)
                if sig is None or slope > sig:
                    sig, r = slope, e
                db = ys[e + 1] - h - sig * (xs[e + 1] - u)
                if slope == sig:
                    if db >= 0:
                        continue
                    c = f_vertex(e, h)
                    d = f_vertex(e + 1, h)
                elif db < 0:
                    c = f_vertex(e, h)
                    d = f_vertex(e + 1, h)
                else:
                    px, py = ray_edge_point(u, h, xs[r], ys[r], ax, ys[e], xs[e + 1], ys[e + 1])
                    c = f_vertex(e, h)
                    d = views.f_point(px, py, views.tangent(px, py, e), h)
                if d < c:
                    c = d
                if best is None or c < best:
                    best = c
        if best is None:
            break
        if u is not None and best <= u:
            raise RuntimeError("greedy guard placement made no progress")
        guards.append(best)
        u = best
        if limit is not None and len(guards) > limit:
            break
    return guards


def min_guards_at_height(terrain: Terrain, h) -> tuple:
    """Minimum number of guards on the altitude line at ``h`` and a canonical placement.

    Guards sit at the rightmost feasible abscissa (left-to-right greedy).
    """
    h = Q(h)
    if h < terrain.y_max:
        raise ValueError("altitude below the terrain")
    guards = greedy_guards(views_of(terrain), h)
    return len(guards), guards
