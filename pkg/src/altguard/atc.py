"""Altitude terrain cover: the lowest altitude line admitting k covering guards."""

from __future__ import annotations

import collections
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from gmpy2 import mpq

from .envelope import (
    AltitudeInterval,
    NoCrossing,
    RationalCurve,
    RootIsolationFailure,
    breakpoints,
    first_crossing_height,
    pointwise_extreme,
    sign_change_roots,
)
from .stages import (
    COVERED,
    Closure,
    as_curve,
    closure_events,
    closures,
    end_labels,
    end_value,
    exact_trace,
    stage_curves,
    status_events,
    suffix_start,
)
from .envelope import H
from .terrain import Q, Terrain
from .visibility import Status, edge_statuses, greedy_guards, views_of, visible_portions

INFINITY = math.inf

# number of pipeline solves that had to fall back to plain bisection, by method
FALLBACKS: collections.Counter = collections.Counter()


class EmptyCandidates(ValueError):
    """interval_search was given no candidate altitudes."""


class StageDegeneracy(RuntimeError):
    """A greedy side covered the terrain before its last stage."""


class PeaksChanged(RuntimeError):
    """The horizon vertex of an edge is not constant on the given interval."""


class PipelineFailure(RuntimeError):
    """The staged computation could not certify an optimum."""


@dataclass(frozen=True)
class StageState:
    index: int
    interval: AltitudeInterval
    f_curve: Optional[RationalCurve]
    g_curve: Optional[RationalCurve]
    covered: frozenset = frozenset()
    left_pairs: frozenset = frozenset()
    right_pairs: frozenset = frozenset()


@dataclass(frozen=True)
class AtcSolution:
    h_star: mpq
    guards: tuple
    method: str
    certificate: dict = field(default_factory=dict)
    stages: tuple = ()
    fallback: bool = False

    def to_dict(self) -> dict:
        from .terrain import scalar_to_str

        return {
            "h_star": scalar_to_str(self.h_star),
            "guards": [scalar_to_str(g) for g in self.guards],
            "method": self.method,
            "certificate": {str(e): list(v) for e, v in sorted(self.certificate.items())},
            "fallback": self.fallback,
        }


# ---------------------------------------------------------------- decision


def decide(terrain: Terrain, k: int, h) -> tuple:
    """Whether ``k`` guards on the altitude line at ``h`` can cover the terrain.

    Returns ``(ok, guards)`` where ``guards`` is the greedy witness when ``ok``.
    """
    h = Q(h)
    if h < terrain.y_max:
        raise ValueError("altitude below the terrain")
    g = greedy_guards(views_of(terrain), h, limit=k)
    ok = len(g) <= k
    return ok, (g if ok else [])


def _decider(terrain: Terrain, k: int):
    views = views_of(terrain)
    cache: dict = {}

    def ok(h) -> bool:
        v = cache.get(h)
        if v is None:
            v = len(greedy_guards(views, h, limit=k)) <= k
            cache[h] = v
        return v

    return ok


# ---------------------------------------------------------------- certificates


def coverage_certificate(terrain: Terrain, h, guards: Sequence) -> Optional[dict]:
    """Map each edge to one or two guard indices that jointly see all of it, or None."""
    h = Q(h)
    portions = [visible_portions(terrain, (Q(g), h)) for g in guards]
    cert = {}
    for e in range(terrain.n - 1):
        a, b = terrain.edge(e)
        spans = []
        for i, ps in enumerate(portions):
            p = ps[e]
            if p.empty:
                continue
            if p.start.x == a.x and p.end.x == b.x:
                cert[e] = (i,)
                break
            spans.append((i, p.start.x, p.end.x))
        else:
            found = None
            for i, s1, t1 in spans:
                if s1 != a.x:
                    continue
                for j, s2, t2 in spans:
                    if t2 == b.x and s2 <= t1:
                        found = (i, j)
                        break
                if found:
                    break
            if found is None:
                return None
            cert[e] = found
    return cert


def _pad(terrain: Terrain, guards: list, k: int) -> tuple:
    out = list(guards)
    have = set(out)
    for x in terrain.xs:
        if len(out) >= k:
            break
        if x not in have:
            out.append(x)
            have.add(x)
    return tuple(sorted(out))


def _every_other_vertex(terrain: Terrain, k: int) -> AtcSolution:
    n = terrain.n
    guards = [terrain.xs[i] for i in range(1, n, 2)]
    if (n - 1) % 2 == 1 and terrain.xs[n - 1] not in guards:
        guards.append(terrain.xs[n - 1])
    h = terrain.y_max
    guards = _pad(terrain, guards, k)
    return AtcSolution(h, guards, "every-other-vertex", coverage_certificate(terrain, h, guards) or {})


def _floor_solution(terrain: Terrain, k: int, method: str) -> Optional[AtcSolution]:
    h = terrain.y_max
    ok, g = decide(terrain, k, h)
    if not ok:
        return None
    guards = _pad(terrain, g, k)
    return AtcSolution(h, guards, method, coverage_certificate(terrain, h, guards) or {})


# ---------------------------------------------------------------- one guard


def _upper_envelope(lines: list) -> list:
    """Upper envelope of lines ``(slope, intercept)``, sorted by slope."""
    lines = sorted(set(lines))
    hull: list = []
    for m, c in lines:
        if hull and hull[-1][0] == m:
            hull.pop()  # same slope, larger intercept wins (sorted ascending)
        while len(hull) >= 2:
            (m1, c1), (m2, c2) = hull[-2], hull[-1]
            # the middle line is hidden when the outer two cross left of where it starts
            if (c1 - c) * (m2 - m1) <= (c1 - c2) * (m - m1):
                hull.pop()
            else:
                break
        hull.append((m, c))
    return hull


def edge_lines(terrain: Terrain, lo: int = 0, hi: Optional[int] = None) -> list:
    hi = terrain.n - 1 if hi is None else hi
    out = []
    for e in range(lo, hi):
        a, b = terrain.edge(e)
        m = (b.y - a.y) / (b.x - a.x)
        out.append((m, a.y - m * a.x))
    return out


def lowest_over_range(lines: list, x_lo, x_hi) -> tuple:
    """Leftmost minimiser and minimum of ``max(lines)`` over ``[x_lo, x_hi]``."""
    hull = _upper_envelope(lines)
    x = None
    for j, (m, c) in enumerate(hull):
        if m >= 0:
            if j == 0:
                x = x_lo
            else:
                m0, c0 = hull[j - 1]
                x = (c0 - c) / (m - m0)
            break
    if x is None:
        x = x_hi
    x = min(max(x, x_lo), x_hi)
    return x, max(m * x + c for m, c in hull)


def feasible_range(lines: list, h, x_lo, x_hi) -> tuple:
    """``[lo, hi]`` of abscissas where every line is at most ``h`` (may be empty: lo > hi)."""
    lo, hi = x_lo, x_hi
    for m, c in lines:
        if m > 0:
            hi = min(hi, (h - c) / m)
        elif m < 0:
            lo = max(lo, (h - c) / m)
        elif c > h:
            return x_hi, x_lo
    return lo, hi


def solve_k1(terrain: Terrain) -> AtcSolution:
    """One guard: the lowest point above every edge line, clamped to the terrain's range."""
    lines = edge_lines(terrain)
    x, low = lowest_over_range(lines, terrain.x_min, terrain.x_max)
    y_t = terrain.y_max
    if low > y_t:
        h, g = low, x
    else:
        h = y_t
        top = terrain.xs[terrain.ys.index(y_t)]
        lo, hi = feasible_range(lines, h, terrain.x_min, terrain.x_max)
        g = min(max(top, lo), hi)
    return AtcSolution(h, (g,), "k1", {e: (0,) for e in range(terrain.n - 1)})


# ---------------------------------------------------------------- interval search


def interval_search(terrain: Terrain, candidate_heights: Sequence, k: int) -> AltitudeInterval:
    """Consecutive candidates bracketing the optimum, found by binary search on ``decide``.

    Returns ``(c_j, c_{j+1}]``; ``[y(T), c_0]`` when the optimum is at most the
    first candidate and ``(c_last, inf)`` when no candidate is feasible.
    """
    cands = sorted({Q(c) for c in candidate_heights})
    if not cands:
        raise EmptyCandidates("no candidate altitudes")
    ok = _decider(terrain, k)
    lo, hi = 0, len(cands)
    while lo < hi:
        mid = (lo + hi) // 2
        if cands[mid] >= terrain.y_max and ok(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    if lo == 0:
        return AltitudeInterval(terrain.y_max, max(cands[0], terrain.y_max))
    if lo == len(cands):
        return AltitudeInterval(cands[-1], None, lower_open=True, upper_open=True)
    return AltitudeInterval(cands[lo - 1], cands[lo], lower_open=True)


# ---------------------------------------------------------------- bisection baseline


def solve_bisect(terrain: Terrain, k: int, eps=mpq(1, 10**9)) -> AtcSolution:
    """Exponential bracketing above y(T), then bisection on ``decide`` to width ``eps``."""
    eps = Q(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    sol = _floor_solution(terrain, k, "bisect")
    if sol is not None:
        return sol
    ok = _decider(terrain, k)
    lo = terrain.y_max
    step = mpq(1)
    hi = lo + step
    while not ok(hi):
        lo = hi
        step *= 2
        hi = lo + step
    while hi - lo > eps:
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    _, g = decide(terrain, k, hi)
    guards = _pad(terrain, g, k)
    return AtcSolution(hi, guards, "bisect", coverage_certificate(terrain, hi, guards) or {})


# ---------------------------------------------------------------- two guards on one edge


@dataclass(frozen=True)
class GuardTrack:
    """A guard trajectory x(h) in original coordinates and the horizon vertex it sees past."""

    curve: RationalCurve
    peak: int


def _last_uncovered(d, lo, hi):
    """Supremum of ``h`` in ``(lo, hi)`` with ``d(h) > 0``, or ``lo`` if there is none."""
    d = as_curve(d)
    cuts = [lo] + [r.value for r in sign_change_roots(d.num, lo, hi)] + [hi]
    last = lo
    for s, t in zip(cuts[:-1], cuts[1:]):
        if d((s + t) / 2) > 0:
            last = t
    return last


def min_h_edge_two_guards(
    terrain: Terrain, e: int, left: GuardTrack, right: GuardTrack, interval: AltitudeInterval
):
    """Smallest altitude in ``interval`` from which the two guards jointly see edge ``e``.

    The left guard sees a suffix of the edge past its horizon vertex, the right
    guard a prefix.  Returns INFINITY when the edge stays uncovered up to the
    interval's end.
    """
    L = views_of(terrain)
    R = L.mirror
    n = terrain.n
    lo, hi = interval.lower, interval.upper
    if hi is None:
        raise ValueError("interval must be bounded")
    for h in (lo + (hi - lo) / 1024, hi - (hi - lo) / 1024):
        sl = edge_statuses(L, left.curve(h), h)[e]
        sr = edge_statuses(R, -right.curve(h), h)[n - 2 - e]
        if sl[0] is not Status.SUFFIX or sl[1] != left.peak:
            raise PeaksChanged(f"left horizon of edge {e} changes inside the interval")
        if sr[0] is not Status.SUFFIX or n - 1 - sr[1] != right.peak:
            raise PeaksChanged(f"right horizon of edge {e} changes inside the interval")
    c = Closure(e, ("p", left.peak), ("q", n - 1 - right.peak))
    q, p = c.ends(L, left.curve, -right.curve, H)
    d = as_curve(p[0]) - as_curve(q[0])
    last = _last_uncovered(d, lo, hi)
    if last == hi and d(hi - (hi - lo) / 2**30) > 0:
        return INFINITY
    return last


# ---------------------------------------------------------------- staged pipeline


class _Restart(Exception):
    def __init__(self, lo, hi):
        super().__init__()
        self.lo, self.hi = lo, hi


def _probes(lo, hi) -> tuple:
    w = hi - lo
    return lo + w / 2**20, lo + w / 2, hi - w / 2**20


def stage_sets(terrain: Terrain, index: int, h) -> tuple:
    """Covered edges and (edge, horizon vertex) pairs seen from the guards of stage ``index - 1``."""
    if index <= 1:
        return frozenset(), frozenset(), frozenset()
    L = views_of(terrain)
    R = L.mirror
    n = terrain.n
    h = Q(h)
    tl = exact_trace(L, h, index - 1)
    tr = exact_trace(R, h, index - 1)
    if tl[-1][0] is None or tr[-1][0] is None:
        return frozenset(range(n - 1)), frozenset(), frozenset()
    stl = edge_statuses(L, tl[-1][0], h)
    st_r = edge_statuses(R, tr[-1][0], h)
    covered = set()
    lp, rp = set(), set()
    for e in range(n - 1):
        a, b = stl[e], st_r[n - 2 - e]
        if a[0] in COVERED or b[0] in COVERED:
            covered.add(e)
        if a[0] not in COVERED and a[1] is not None:
            lp.add((e, a[1]))
        if b[0] not in COVERED and b[1] is not None:
            rp.add((e, n - 1 - b[1]))
    return frozenset(covered), frozenset(lp), frozenset(rp)


class _Pipeline:
    MAX_RUNS = 14

    def __init__(self, terrain: Terrain, k: int):
        self.T = terrain
        self.k = k
        self.m = k // 2
        self.odd = k % 2 == 1
        self.L = views_of(terrain)
        self.R = self.L.mirror
        self.ok = _decider(terrain, k)
        self.floor = terrain.y_max
        self.runs = 0

    # -- helpers
    def narrow(self, lo, hi, events):
        cands = sorted({e for e in events if lo < e < hi})
        a, b = 0, len(cands)
        while a < b:
            mid = (a + b) // 2
            if self.ok(cands[mid]):
                b = mid
            else:
                a = mid + 1
        new_lo = cands[a - 1] if a > 0 else lo
        new_hi = cands[a] if a < len(cands) else hi
        return new_lo, new_hi

    def bisect(self, lo, hi, steps=6):
        for _ in range(steps):
            mid = (lo + hi) / 2
            if self.ok(mid):
                hi = mid
            else:
                lo = mid
        return lo, hi

    # -- main loop
    def solve(self):
        lo, hi = self.floor, solve_k1(self.T).h_star
        for _ in range(self.MAX_RUNS):
            self.runs += 1
            try:
                h_star, lo2, hi2, stages, curves = self._run(lo, hi)
            except _Restart as r:
                lo, hi = r.lo, r.hi
                continue
            except (RootIsolationFailure, ZeroDivisionError, StageDegeneracy):
                lo, hi = self.bisect(lo, hi)
                continue
            if self._consistent(lo2, hi2, curves) and self._verify(h_star):
                return h_star, stages
            lo, hi = self.bisect(lo2, hi2)
        raise PipelineFailure("staged search did not converge")

    def _verify(self, h) -> bool:
        if not self.ok(h):
            return False
        below = h - mpq(1, 2**40) * (1 + abs(h))
        return below <= self.floor or not self.ok(below)

    def _signature(self, h):
        m = self.m
        tl = exact_trace(self.L, h, m)
        tr = exact_trace(self.R, h, m)
        sig = (tuple((lab, key) for _, lab, key in tl), tuple((lab, key) for _, lab, key in tr))
        vals = ([x for x, _, _ in tl], [x for x, _, _ in tr])
        if tl[-1][0] is None or tr[-1][0] is None:
            return sig, vals
        cs, key = closures(self.L, tl[-1][0], tr[-1][0], h)
        extra = [key, tuple(c.key() for c in cs)]
        if self.odd:
            for c in cs:
                q, p = c.ends(self.L, tl[-1][0], tr[-1][0], h)
                extra.append((p[0] > q[0], end_labels(self.L, c, q, p)))
        return sig + tuple(extra), vals

    def _consistent(self, lo, hi, curves) -> bool:
        sigs = []
        for h in _probes(lo, hi):
            sig, vals = self._signature(h)
            sigs.append(sig)
            for side, cs in zip(vals, curves):
                if len(side) != len(cs) or any(x is None or c(h) != x for x, c in zip(side, cs)):
                    return False
        return sigs[0] == sigs[1] == sigs[2]

    def _run(self, lo, hi):
        L, R, m = self.L, self.R, self.m
        left: list = []
        right: list = []
        stages = []
        for i in range(1, m + 1):
            if i > 1:
                h0 = (lo + hi) / 2
                ev = status_events(L, left[-1], lo, hi, h0) + status_events(R, right[-1], lo, hi, h0)
                lo, hi = self.narrow(lo, hi, ev)
            h0 = (lo + hi) / 2
            cl = stage_curves(L, left[-1] if left else None, h0)
            cr = stage_curves(R, right[-1] if right else None, h0)
            if not cl or not cr:
                if self.ok(h0):
                    raise _Restart(lo, h0)
                raise StageDegeneracy(f"stage {i} has no candidates at a non-coverable altitude")
            dom = AltitudeInterval(lo, hi)
            el = pointwise_extreme(cl, "min", dom)
            er = pointwise_extreme(cr, "min", dom)
            lo, hi = self.narrow(lo, hi, breakpoints(el, er))
            h0 = (lo + hi) / 2
            left.append(el.piece_at(h0).curve)
            right.append(er.piece_at(h0).curve)
            cov, lp, rp = stage_sets(self.T, i, h0)
            stages.append(
                StageState(i, AltitudeInterval(lo, hi, lower_open=True), left[-1], -right[-1], cov, lp, rp)
            )
        h0 = (lo + hi) / 2
        ev = status_events(L, left[-1], lo, hi, h0) + status_events(R, right[-1], lo, hi, h0)
        lo, hi = self.narrow(lo, hi, ev)
        h0 = (lo + hi) / 2
        cs, _ = closures(L, left[-1](h0), right[-1](h0), h0)
        if self.odd:
            h_star, lo, hi = self._finish_odd(cs, left[-1], right[-1], lo, hi)
        else:
            h_star = lo
            for c in cs:
                q, p = c.ends(L, left[-1], right[-1], H)
                h_star = max(h_star, _last_uncovered(as_curve(p[0]) - as_curve(q[0]), lo, hi))
        return h_star, lo, hi, stages, (left, right)

    def _finish_odd(self, cs, lc, rc, lo, hi):
        L = self.L
        h0 = (lo + hi) / 2
        ev = closure_events(L, cs, lc, rc, lo, hi, h0, with_tangents=True)
        lo, hi = self.narrow(lo, hi, ev)
        h0 = (lo + hi) / 2
        cs, _ = closures(L, lc(h0), rc(h0), h0)
        F = []
        G = []
        uncovered = 0
        for c in cs:
            q0, p0 = c.ends(L, lc(h0), rc(h0), h0)
            if not p0[0] > q0[0]:
                continue
            uncovered += 1
            fl, gl = end_labels(L, c, q0, p0)
            q, p = c.ends(L, lc, rc, H)
            F.extend(as_curve(end_value(L, lab, q, p, H, False), ("F", c.edge) + lab) for lab in fl)
            G.extend(as_curve(end_value(L, lab, q, p, H, True), ("G", c.edge) + lab) for lab in gl)
        if not uncovered:
            return lo, lo, hi
        F.append(as_curve(L.x_last, ("clamp",)))
        G.append(as_curve(L.xs[0], ("clamp",)))
        dom = AltitudeInterval(lo, hi)
        fm = pointwise_extreme(F, "min", dom)
        gm = pointwise_extreme(G, "max", dom, direction=-1)
        try:
            return first_crossing_height(fm, gm), lo, hi
        except NoCrossing:
            return hi, lo, hi


def _canonical_guards(terrain: Terrain, k: int, h) -> list:
    L = views_of(terrain)
    R = L.mirror
    m = k // 2
    tl = exact_trace(L, h, m)
    tr = exact_trace(R, h, m)
    guards = [x for x, _, _ in tl if x is not None] + [-x for x, _, _ in tr if x is not None]
    if k % 2 == 1:
        middle = None
        if tl and tr and tl[-1][0] is not None and tr[-1][0] is not None:
            cs, _ = closures(L, tl[-1][0], tr[-1][0], h)
            fs = []
            for c in cs:
                q, p = c.ends(L, tl[-1][0], tr[-1][0], h)
                if p[0] > q[0]:
                    fl, _ = end_labels(L, c, q, p)
                    fs.extend(end_value(L, lab, q, p, h, False) for lab in fl)
                    fs.append(L.x_last)
            if fs:
                middle = min(fs)
        if middle is None:
            nxt = exact_trace(L, h, m + 1)
            middle = nxt[-1][0] if nxt[-1][0] is not None else terrain.xs[0]
        guards.append(middle)
    return sorted(guards)


def _staged(terrain: Terrain, k: int, method: str) -> AtcSolution:
    n = terrain.n
    if k >= n // 2:
        return _every_other_vertex(terrain, k)
    sol = _floor_solution(terrain, k, method)
    if sol is not None:
        return sol
    pipe = _Pipeline(terrain, k)
    try:
        h_star, stages = pipe.solve()
    except (PipelineFailure, RootIsolationFailure, ZeroDivisionError):
        FALLBACKS[method] += 1
        b = solve_bisect(terrain, k, mpq(1, 2**50))
        return AtcSolution(b.h_star, b.guards, method, b.certificate, (), True)
    guards = _canonical_guards(terrain, k, h_star)
    cert = coverage_certificate(terrain, h_star, guards)
    if cert is None:
        ok, g = decide(terrain, k, h_star)
        guards = list(g)
        cert = coverage_certificate(terrain, h_star, guards)
        if cert is None:
            FALLBACKS[method] += 1
            b = solve_bisect(terrain, k, mpq(1, 2**50))
            return AtcSolution(b.h_star, b.guards, method, b.certificate, (), True)
    return AtcSolution(h_star, _pad(terrain, guards, k), method, cert, tuple(stages))


def solve_k2(terrain: Terrain) -> AtcSolution:
    """Two guards: canonical extreme guards at the optimum altitude."""
    if terrain.n < 3:
        sol = solve_k1(terrain)
        return AtcSolution(sol.h_star, _pad(terrain, list(sol.guards), 2), "k2", sol.certificate)
    return _staged(terrain, 2, "k2")


def solve_even(terrain: Terrain, k: int) -> AtcSolution:
    if k % 2 or k < 2:
        raise ValueError("k must be an even number >= 2")
    if k == 2:
        return solve_k2(terrain)
    return _staged(terrain, k, "even")


def solve_odd(terrain: Terrain, k: int) -> AtcSolution:
    if k % 2 == 0 or k < 1:
        raise ValueError("k must be an odd number >= 1")
    if k == 1:
        return solve_k1(terrain)
    return _staged(terrain, k, "odd")


def solve(terrain: Terrain, k: int, mode: str = "exact", eps=mpq(1, 10**9)) -> AtcSolution:
    """Dispatch on ``k``; ``mode='bisect'`` uses the bisection baseline instead."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if mode == "bisect":
        return solve_bisect(terrain, k, eps)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if k == 1:
        return solve_k1(terrain)
    if k % 2 == 0:
        return solve_even(terrain, k)
    return solve_odd(terrain, k)
