"""Bijective altitude terrain cover.

The terrain is cut at vertices into contiguous subchains and each subchain
gets its own guard, which must see the whole subchain.  A guard at ``(x, h)``
sees subchain ``[i, j]`` exactly when ``(x, h)`` lies on or above the line of
every edge in it, so everything here is about upper envelopes of edge lines.

Vertex indices are 0-based; subchain ``(i, j)`` holds edges ``i .. j-1``.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Iterator, Optional

from gmpy2 import mpq

from .envelope import AltitudeInterval
from .terrain import Point, Q, Terrain, scalar_to_str


@dataclass(frozen=True)
class SubchainWitness:
    i: int
    j: int
    w: Point
    required_h: mpq


@dataclass(frozen=True)
class BatcSolution:
    h_star: mpq
    pairs: tuple  # ((guard_x, i, j), ...)

    @property
    def count(self) -> int:
        return len(self.pairs)

    def to_dict(self) -> dict:
        return {
            "h_star": scalar_to_str(self.h_star),
            "pairs": [{"guard_x": scalar_to_str(x), "from": i, "to": j} for x, i, j in self.pairs],
        }


@dataclass(frozen=True)
class RefinementRow:
    """Altitude intervals ``[lo, hi)`` on which the first ``index`` greedy guards reach vertex ``reach``."""

    index: int
    cells: tuple  # ((lo, hi or None, reach), ...)
    ops: int = 0

    def reach_at(self, h) -> int:
        for lo, hi, s in self.cells:
            if lo <= h and (hi is None or h < hi):
                return s
        raise ValueError("altitude outside the row")


# ---------------------------------------------------------------- line envelopes


class _Hull:
    """Upper envelope of lines ``y = m x + c`` under insertion, kept sorted by slope."""

    __slots__ = ("ms", "cs", "ops")

    def __init__(self):
        self.ms: list = []
        self.cs: list = []
        self.ops = 0

    def __len__(self):
        return len(self.ms)

    def _hidden(self, m1, c1, m2, c2, m3, c3) -> bool:
        # slopes m1 < m2 < m3: the middle line never rises above the other two
        return (c1 - c3) * (m2 - m1) <= (c1 - c2) * (m3 - m1)

    def insert(self, m, c) -> None:
        ms, cs = self.ms, self.cs
        k = bisect_left(ms, m)
        self.ops += 1
        if k < len(ms) and ms[k] == m:
            if cs[k] >= c:
                return
            del ms[k], cs[k]
        if 0 < k < len(ms) and self._hidden(ms[k - 1], cs[k - 1], m, c, ms[k], cs[k]):
            return
        ms.insert(k, m)
        cs.insert(k, c)
        while k + 2 < len(ms) and self._hidden(m, c, ms[k + 1], cs[k + 1], ms[k + 2], cs[k + 2]):
            del ms[k + 1], cs[k + 1]
            self.ops += 1
        while k >= 2 and self._hidden(ms[k - 2], cs[k - 2], ms[k - 1], cs[k - 1], m, c):
            del ms[k - 1], cs[k - 1]
            k -= 1
            self.ops += 1

    def _break(self, k):
        """Abscissa where line ``k + 1`` overtakes line ``k``."""
        return (self.cs[k] - self.cs[k + 1]) / (self.ms[k + 1] - self.ms[k])

    def line_at(self, x) -> int:
        lo, hi = 0, len(self.ms) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            self.ops += 1
            if self._break(mid) >= x:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def __call__(self, x):
        k = self.line_at(x)
        return self.ms[k] * x + self.cs[k]

    def x_at_height(self, h, increasing: bool):
        """Abscissa where the (monotone) envelope takes the value ``h``."""
        ms, cs = self.ms, self.cs
        lo, hi = 0, len(ms) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            self.ops += 1
            b = self._break(mid)
            above = ms[mid] * b + cs[mid] >= h
            if above == increasing:
                hi = mid
            else:
                lo = mid + 1
        return (h - cs[lo]) / ms[lo]


def _crossing(P: _Hull, N: _Hull):
    """Abscissa where the increasing envelope ``P`` meets the decreasing envelope ``N``."""
    lo, hi = 0, len(P.ms) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        b = P._break(mid)
        P.ops += 1
        if P.ms[mid] * b + P.cs[mid] >= N(b):
            hi = mid
        else:
            lo = mid + 1
    m, c = P.ms[lo], P.cs[lo]
    a, b_ = 0, len(N.ms) - 1
    while a < b_:
        mid = (a + b_) // 2
        x = N._break(mid)
        N.ops += 1
        if m * x + c >= N.ms[mid] * x + N.cs[mid]:
            b_ = mid
        else:
            a = mid + 1
    return (N.cs[a] - c) / (m - N.ms[a])


class _Subchain:
    """Lines of a growing subchain ``[i, j]`` split by slope sign."""

    def __init__(self, terrain: Terrain, i: int):
        self.T = terrain
        self.i = i
        self.j = i
        self.P = _Hull()
        self.N = _Hull()
        self.flat = None
        self.top = i

    @property
    def ops(self) -> int:
        return self.P.ops + self.N.ops + (self.j - self.i)

    def extend(self) -> None:
        T, j = self.T, self.j
        a, b = T.vertices[j], T.vertices[j + 1]
        m = (b.y - a.y) / (b.x - a.x)
        c = a.y - m * a.x
        if m > 0:
            self.P.insert(m, c)
        elif m < 0:
            self.N.insert(m, c)
        else:
            self.flat = c if self.flat is None else max(self.flat, c)
        self.j = j + 1
        if b.y > T.vertices[self.top].y:
            self.top = j + 1

    def required(self):
        """Lowest altitude from which one guard sees the whole subchain."""
        y_t = self.T.y_max
        if not self.P or not self.N:
            return y_t
        x = _crossing(self.P, self.N)
        return max(y_t, self.P(x))

    def guard_x(self, h):
        """Guard abscissa at altitude ``h``: the highest vertex, pushed into the feasible range."""
        xs = self.T.xs
        lo, hi = xs[self.i], xs[self.j]
        if self.P:
            hi = min(hi, self.P.x_at_height(h, True))
        if self.N:
            lo = max(lo, self.N.x_at_height(h, False))
        return min(max(xs[self.top], lo), hi)


def _sweep(terrain: Terrain, i: int, stop_h=None) -> Iterator[tuple]:
    """Yield ``(j, required_h, subchain)`` for ``j = i+1, ...``; stops after the first value above ``stop_h``."""
    sc = _Subchain(terrain, i)
    for _ in range(i + 1, terrain.n):
        sc.extend()
        h = sc.required()
        yield sc.j, h, sc
        if stop_h is not None and h > stop_h:
            return


# ---------------------------------------------------------------- witnesses


def required_height(terrain: Terrain, i: int, j: int) -> SubchainWitness:
    """Lowest guard for subchain ``[i, j]`` (0-based vertex indices, ``i < j``)."""
    if not 0 <= i < j < terrain.n:
        raise IndexError(f"bad subchain ({i}, {j})")
    sc = _Subchain(terrain, i)
    while sc.j < j:
        sc.extend()
    h = sc.required()
    return SubchainWitness(i, j, Point(sc.guard_x(h), h), h)


@dataclass
class SweepStats:
    steps: int = 0
    ops: int = 0


def sweep_w_prefix(terrain: Terrain, i: int, stats: Optional[SweepStats] = None) -> list:
    """Witnesses ``w(i, l)`` for every ``l > i`` in one incremental pass."""
    out = []
    sc = None
    for j, h, sc in _sweep(terrain, i):
        out.append(SubchainWitness(i, j, Point(sc.guard_x(h), h), h))
    if stats is not None and sc is not None:
        stats.steps += len(out)
        stats.ops += sc.ops
    return out


# ---------------------------------------------------------------- fixed altitude


def _greedy_cuts(terrain: Terrain, h) -> list:
    """Vertex indices where the farthest-reaching greedy cuts the terrain at altitude ``h``."""
    xs, ys = terrain.xs, terrain.ys
    n = terrain.n
    cuts = [0]
    lo = hi = None
    for e in range(n - 1):
        m = (ys[e + 1] - ys[e]) / (xs[e + 1] - xs[e])
        if m == 0:
            bound_lo = bound_hi = None
        else:
            b = (h - ys[e] + m * xs[e]) / m
            bound_lo, bound_hi = (None, b) if m > 0 else (b, None)
        nlo = lo if bound_lo is None else (bound_lo if lo is None else max(lo, bound_lo))
        nhi = hi if bound_hi is None else (bound_hi if hi is None else min(hi, bound_hi))
        if nlo is not None and nhi is not None and nlo > nhi:
            cuts.append(e)
            lo, hi = bound_lo, bound_hi
        else:
            lo, hi = nlo, nhi
    cuts.append(n - 1)
    return cuts


def _pairs_from_cuts(terrain: Terrain, cuts: list, h) -> tuple:
    pairs = []
    for i, j in zip(cuts[:-1], cuts[1:]):
        sc = _Subchain(terrain, i)
        while sc.j < j:
            sc.extend()
        pairs.append((sc.guard_x(h), i, j))
    return tuple(pairs)


def batc_count(terrain: Terrain, h) -> BatcSolution:
    """Fewest subchain/guard pairs on the altitude line at ``h``."""
    h = Q(h)
    if h < terrain.y_max:
        raise ValueError("altitude below the terrain")
    cuts = _greedy_cuts(terrain, h)
    return BatcSolution(h, _pairs_from_cuts(terrain, cuts, h))


def _split_to(cuts: list, k: int) -> list:
    """Add vertex cuts (leftmost first) until there are ``k`` pieces or every piece is one edge."""
    cuts = list(cuts)
    i = 0
    while len(cuts) - 1 < k and i < len(cuts) - 1:
        if cuts[i + 1] - cuts[i] > 1:
            cuts.insert(i + 1, cuts[i] + 1)
        i += 1
    return cuts


# ---------------------------------------------------------------- optimisation


def _mirror_index(n: int, i: int) -> int:
    return n - 1 - i


def batc_altitude_k2(terrain: Terrain) -> BatcSolution:
    """Best single split vertex, from a forward and a mirrored witness sweep."""
    n = terrain.n
    if n < 3:
        return batc_altitude(terrain, 1)
    fwd = {j: h for j, h, _ in _sweep(terrain, 0)}
    back = {_mirror_index(n, j): h for j, h, _ in _sweep(terrain.mirrored, 0)}
    best = None
    for s in range(1, n - 1):
        v = max(fwd[s], back[s])
        if best is None or v < best[0]:
            best = (v, s)
    h, s = best
    return BatcSolution(h, _pairs_from_cuts(terrain, [0, s, n - 1], h))


class _Bounds:
    """Incremental feasibility of a growing subchain at a fixed altitude."""

    __slots__ = ("h", "lo", "hi", "ok")

    def __init__(self, h):
        self.h = h
        self.lo = self.hi = None
        self.ok = True

    def add(self, ax, ay, bx, by) -> bool:
        m = (by - ay) / (bx - ax)
        if m == 0:
            return self.ok
        b = (self.h - ay + m * ax) / m
        if m > 0:
            self.hi = b if self.hi is None else min(self.hi, b)
        else:
            self.lo = b if self.lo is None else max(self.lo, b)
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            self.ok = False
        return self.ok


def refine_intervals(terrain: Terrain, prev: RefinementRow) -> RefinementRow:
    """Row for one more guard: split each cell where that guard's reach changes.

    Within a cell ``[lo, hi)`` the reach is extended with constant-time
    feasibility tests at ``lo`` and ``hi``; exact required heights are only
    computed for subchains whose break falls strictly inside the cell.
    """
    n = terrain.n
    xs, ys = terrain.xs, terrain.ys
    cells = []
    ops = 0
    for lo, hi, s in prev.cells:
        if s >= n - 1:
            cells.append((lo, hi, s))
            continue
        at_lo, at_hi = _Bounds(lo), (_Bounds(hi) if hi is not None else None)
        reach = s
        cuts = []  # (altitude, reach) inside (lo, hi)
        at_cut = None
        for j in range(s + 1, n):
            seg = (xs[j - 1], ys[j - 1], xs[j], ys[j])
            ops += 1
            if at_lo.ok and at_lo.add(*seg):
                if at_hi is not None:
                    at_hi.add(*seg)
                reach = j
                continue
            if at_hi is not None and not at_hi.add(*seg):
                break
            if at_cut is not None and at_cut.add(*seg):
                cuts[-1] = (cuts[-1][0], j)
                continue
            # the reach passes a new break height: compute it and re-anchor
            h = required_height(terrain, s, j).required_h
            at_cut = _Bounds(h)
            for v in range(s, j):
                at_cut.add(xs[v], ys[v], xs[v + 1], ys[v + 1])
            ops += 2 * (j - s)
            cuts.append((h, j))
        start = lo
        for h, j in cuts:
            cells.append((start, h, reach))
            start, reach = h, j
        cells.append((start, hi, reach))
    merged = []
    for c in cells:
        if merged and merged[-1][2] == c[2] and merged[-1][1] == c[0]:
            merged[-1] = (merged[-1][0], c[1], c[2])
        else:
            merged.append(c)
    return RefinementRow(prev.index + 1, tuple(merged), ops)


def _count_float(xs: list, ys: list, h: float) -> int:
    count = 1
    lo, hi = -math.inf, math.inf
    for e in range(len(xs) - 1):
        m = (ys[e + 1] - ys[e]) / (xs[e + 1] - xs[e])
        if m == 0:
            continue
        b = (h - ys[e] + m * xs[e]) / m
        if m > 0:
            if b < lo:
                count += 1
                lo, hi = -math.inf, b
            else:
                hi = min(hi, b)
        else:
            if b > hi:
                count += 1
                lo, hi = b, math.inf
            else:
                lo = max(lo, b)
    return count


def _count(terrain: Terrain, h) -> int:
    return len(_greedy_cuts(terrain, h)) - 1


def _narrow(terrain: Terrain, k: int, rounds: int = 48) -> tuple:
    """Altitudes ``lo < hi`` with ``lo`` infeasible and ``hi`` feasible for ``k`` pairs.

    Bisection runs in floats; the bracket is then widened until both ends
    are confirmed in exact arithmetic.
    """
    y_t = terrain.y_max
    top = _sweep_last(terrain)
    xs, ys = terrain.xs_float, terrain.ys_float
    flo, fhi = float(y_t), float(top)
    for _ in range(rounds):
        mid = (flo + fhi) / 2
        if _count_float(xs, ys, mid) <= k:
            fhi = mid
        else:
            flo = mid
    pad = (float(top) - float(y_t)) * 2.0**-40 + 1e-12 * (1 + abs(fhi))
    lo = max(y_t, Q(flo) - Q(pad))
    hi = min(top, Q(fhi) + Q(pad))
    while lo > y_t and _count(terrain, lo) <= k:
        pad *= 16
        lo = max(y_t, lo - Q(pad))
    while hi < top and _count(terrain, hi) > k:
        pad *= 16
        hi = min(top, hi + Q(pad))
    return lo, hi


def _sweep_last(terrain: Terrain):
    sc = _Subchain(terrain, 0)
    while sc.j < terrain.n - 1:
        sc.extend()
    return sc.required()


def batc_rows(terrain: Terrain, k: int, window: Optional[tuple] = None) -> list:
    lo, hi = window if window is not None else (terrain.y_max, None)
    row = RefinementRow(0, ((lo, hi, 0),))
    rows = []
    for _ in range(k):
        row = refine_intervals(terrain, row)
        rows.append(row)
    return rows


def batc_altitude(terrain: Terrain, k: int, narrow_above: int = 64) -> BatcSolution:
    """Lowest altitude admitting ``k`` subchain/guard pairs, with an optimal partition."""
    if k < 1:
        raise ValueError("k must be at least 1")
    n = terrain.n
    y_t = terrain.y_max
    if k >= n - 1:
        return BatcSolution(y_t, _pairs_from_cuts(terrain, list(range(n)), y_t))
    if k == 1:
        h = _sweep_last(terrain)
        return BatcSolution(h, _pairs_from_cuts(terrain, [0, n - 1], h))
    if k == 2:
        return batc_altitude_k2(terrain)
    if len(_greedy_cuts(terrain, y_t)) - 1 <= k:
        h_star = y_t
    else:
        window = None
        if n > narrow_above:
            lo, hi = _narrow(terrain, k)
            # keep hi inside the last cell
            window = (lo, hi + (hi - lo))
        rows = batc_rows(terrain, k, window)
        h_star = None
        for lo_c, hi_c, s in rows[-1].cells:
            if s >= n - 1:
                h_star = lo_c
                break
        if h_star is None:
            raise RuntimeError("no cell of the last row reaches the end of the terrain")
    cuts = _split_to(_greedy_cuts(terrain, h_star), k)
    return BatcSolution(h_star, _pairs_from_cuts(terrain, cuts, h_star))
