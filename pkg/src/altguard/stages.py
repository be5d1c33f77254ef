"""Label-driven evaluation of the greedy guard trajectories.

Every guard of the one-sided greedy is the smallest rightmost-viewer among a
finite list of candidates.  A candidate is described by a *label*:

* ``("v", v)``: vertex ``v`` viewed along its tangent vertex,
* ``("p", e, r, t)``: start of the visible suffix of edge ``e`` (sightline
  through horizon vertex ``r``) viewed along tangent vertex ``t``,
* ``("clamp",)``: the right end of the terrain.

The same label formulas evaluate on exact numbers and on
:class:`~altguard.envelope.RationalCurve` objects in the altitude, which is
how the pipeline turns a combinatorial snapshot into curves x(h).

The right-hand greedy is the left-hand greedy run on the mirrored terrain, so
all code below works in the coordinates of whichever ``TerrainViews`` it is
given.
"""

from __future__ import annotations

from typing import Optional

from gmpy2 import mpq

from .envelope import H, Poly, RationalCurve, sign_change_roots
from .visibility import Status, TerrainViews, edge_statuses, ray_edge_point

CLAMP = ("clamp",)
COVERED = (Status.BEHIND, Status.FULL)


def as_curve(v, label=None) -> RationalCurve:
    if isinstance(v, RationalCurve):
        return v.with_label(label) if label is not None else v
    return RationalCurve.const(v, label)


def suffix_start(views: TerrainViews, guard, h, e: int, r: int):
    xs, ys = views.xs, views.ys
    return ray_edge_point(guard, h, xs[r], ys[r], xs[e], ys[e], xs[e + 1], ys[e + 1])


def view_along(views: TerrainViews, cx, cy, t: int, h):
    """Abscissa at altitude ``h`` on the line from ``c`` through vertex ``t``."""
    return cx + (h - cy) * (views.xs[t] - cx) / (views.ys[t] - cy)


def label_value(views: TerrainViews, label: tuple, guard, h):
    kind = label[0]
    if kind == "clamp":
        return views.x_last
    if kind == "v":
        v = label[1]
        return views.xs[v] + (h - views.ys[v]) * views.inv[v]
    _, e, r, t = label
    px, py = suffix_start(views, guard, h, e, r)
    return view_along(views, px, py, t, h)


def status_key(statuses: list) -> tuple:
    return tuple((s.value, r, a_on) for s, r, a_on in statuses)


def candidate_labels(views: TerrainViews, guard: Optional[mpq], h: mpq) -> tuple:
    """Labels of all candidates for the next guard, plus the status key they depend on."""
    n = views.n
    if guard is None:
        labels = [("v", v) for v in range(n) if views.inv[v] is not None]
        return labels + [CLAMP], ()
    st = edge_statuses(views, guard, h)
    verts: set = set()
    pts = []
    for e, (kind, r, _) in enumerate(st):
        if kind is Status.NONE:
            verts.update((e, e + 1))
        elif kind is Status.SUFFIX:
            verts.add(e)
            px, py = suffix_start(views, guard, h, e, r)
            t = views.tangent(px, py, e)
            if t is not None and views.ys[t] > py:
                pts.append(("p", e, r, t))
    key = status_key(st)
    if not verts:
        return [], key
    labels = [("v", v) for v in sorted(verts) if views.inv[v] is not None]
    return labels + pts + [CLAMP], key


def exact_trace(views: TerrainViews, h: mpq, m: int) -> list:
    """First ``m`` greedy guards at altitude ``h`` as ``(x, label, key)`` triples.

    A trailing ``(None, None, key)`` marks that the terrain was covered early.
    """
    out = []
    g = None
    for _ in range(m):
        labels, key = candidate_labels(views, g, h)
        if not labels:
            out.append((None, None, key))
            break
        best_v, best_l = None, None
        for lab in labels:
            v = label_value(views, lab, g, h)
            if best_v is None or v < best_v:
                best_v, best_l = v, lab
        out.append((best_v, best_l, key))
        g = best_v
    return out


def stage_curves(views: TerrainViews, guard_curve: Optional[RationalCurve], h0: mpq) -> list:
    """Candidate curves for the next guard, valid while the snapshot taken at ``h0`` holds."""
    g0 = None if guard_curve is None else guard_curve(h0)
    labels, _ = candidate_labels(views, g0, h0)
    return [as_curve(label_value(views, lab, guard_curve, H), lab) for lab in labels]


# ---------------------------------------------------------------- events


def _line_poly(curve: RationalCurve, p: tuple, q: tuple) -> Poly:
    """Numerator of the signed distance of guard ``(curve(h), h)`` to the line ``p q``."""
    n, d = curve.num, curve.den
    hd = Poly([0, 1]) * d
    return (hd - d * p[1]) * (q[0] - p[0]) - (n - d * p[0]) * (q[1] - p[1])


def _roots(poly: Poly, lo, hi) -> list:
    return [r.value for r in sign_change_roots(poly, lo, hi)]


def tangent_chain_events(views: TerrainViews, px, py, e: int, lo, hi, h0) -> list:
    """Altitudes where the tangent vertex of the moving point ``p(h)`` on edge ``e`` changes."""
    xs, ys, par = views.xs, views.ys, views.parent
    tangents = set()
    for h in (lo, hi, h0):
        try:
            x, y = px(h), py(h)
        except ZeroDivisionError:
            tangents = None
            break
        if not xs[e] <= x <= xs[e + 1]:
            x = min(max(x, xs[e]), xs[e + 1])
            y = ys[e] + (x - xs[e]) * (ys[e + 1] - ys[e]) / (xs[e + 1] - xs[e])
        tangents.add(views.tangent(x, y, e))
    chain = []
    t = e + 1
    while t is not None:
        chain.append(t)
        if tangents is not None:
            tangents.discard(t)
            if not tangents:
                break
        t = par[t]
    out = []
    ax, ay, bx, by = xs[e], ys[e], xs[e + 1], ys[e + 1]
    m_e = (by - ay) / (bx - ax)
    pxc, pyc = as_curve(px), as_curve(py)
    for t in chain:
        q = par[t]
        if q is not None:
            m_t = (ys[q] - ys[t]) / (xs[q] - xs[t])
            if m_t != m_e:
                zx = (ys[t] - m_t * xs[t] - ay + m_e * ax) / (m_e - m_t)
                if ax < zx < bx:
                    out.extend(_roots((pxc - zx).num, lo, hi))
        if ay != by and min(ay, by) < ys[t] < max(ay, by):
            out.extend(_roots((pyc - ys[t]).num, lo, hi))
    return out


def status_events(views: TerrainViews, guard: RationalCurve, lo, hi, h0) -> list:
    """Altitudes in ``(lo, hi)`` where the edge statuses seen from ``guard`` may change."""
    xs, ys, n = views.xs, views.ys, views.n
    events = []
    for x in xs:
        events.extend(_roots((guard - x).num, lo, hi))
    pairs = set()
    lp = views.left_parent
    for v in range(n):
        if lp[v] is not None:
            pairs.add((lp[v], v))
        if views.parent[v] is not None:
            pairs.add((v, views.parent[v]))
        if v + 1 < n:
            pairs.add((v, v + 1))
    st = edge_statuses(views, guard(h0), h0)
    suffix = []
    for e, (kind, r, _) in enumerate(st):
        if kind in COVERED or r is None:
            continue
        pairs.add((r, e + 1))
        if r != e:
            pairs.add((r, e))
        if kind is Status.SUFFIX:
            suffix.append((e, r))
    for i, j in pairs:
        events.extend(_roots(_line_poly(guard, (xs[i], ys[i]), (xs[j], ys[j])), lo, hi))
    for e, r in suffix:
        px, py = suffix_start(views, guard, H, e, r)
        events.extend(tangent_chain_events(views, px, py, e, lo, hi, h0))
    return events


# ---------------------------------------------------------------- two-sided closures


class Closure:
    """Uncovered part of one edge between the last left guard and the last right guard.

    ``left`` is ``("p", r)`` (suffix start seen from the left guard) or
    ``("b",)``; ``right`` is ``("q", r)`` with ``r`` indexed on the mirrored
    terrain, or ``("a",)``.
    """

    __slots__ = ("edge", "left", "right")

    def __init__(self, edge: int, left: tuple, right: tuple):
        self.edge, self.left, self.right = edge, left, right

    def key(self) -> tuple:
        return (self.edge, self.left, self.right)

    def ends(self, L: TerrainViews, left_guard, right_guard_m, h) -> tuple:
        """Endpoints ``(q, p)`` of the closure in original coordinates."""
        e, n = self.edge, L.n
        xs, ys = L.xs, L.ys
        if self.left[0] == "p":
            p = suffix_start(L, left_guard, h, e, self.left[1])
        else:
            p = (xs[e + 1], ys[e + 1])
        if self.right[0] == "q":
            mx, my = suffix_start(L.mirror, right_guard_m, h, n - 2 - e, self.right[1])
            q = (-mx, my)
        else:
            q = (xs[e], ys[e])
        return q, p


def closures(L: TerrainViews, left_guard: mpq, right_guard_m: mpq, h: mpq) -> tuple:
    """Closures for every edge not fully seen by either final guard, and the status key."""
    R = L.mirror
    n = L.n
    stl = edge_statuses(L, left_guard, h)
    str_ = edge_statuses(R, right_guard_m, h)
    out = []
    for e in range(n - 1):
        sl, sr = stl[e], str_[n - 2 - e]
        if sl[0] in COVERED or sr[0] in COVERED:
            continue
        left = ("p", sl[1]) if sl[0] is Status.SUFFIX else ("b",)
        right = ("q", sr[1]) if sr[0] is Status.SUFFIX else ("a",)
        out.append(Closure(e, left, right))
    return out, (status_key(stl), status_key(str_))


def end_labels(L: TerrainViews, c: Closure, q, p) -> tuple:
    """Tangent labels for the right viewer (F) and left viewer (G) of both closure ends."""
    R = L.mirror
    n, e = L.n, c.edge
    me = n - 2 - e
    f_labels, g_labels = [], []
    for which, pt, vertex in (("q", q, e if c.right[0] == "a" else None),
                              ("p", p, e + 1 if c.left[0] == "b" else None)):
        if vertex is not None:
            if L.inv[vertex] is not None:
                f_labels.append(("v", vertex))
            mv = n - 1 - vertex
            if R.inv[mv] is not None:
                g_labels.append(("v", mv))
            continue
        x, y = pt
        t = L.tangent(x, y, e)
        if t is not None and L.ys[t] > y:
            f_labels.append((which, t))
        t = R.tangent(-x, y, me)
        if t is not None and R.ys[t] > y:
            g_labels.append((which, t))
    return tuple(f_labels), tuple(g_labels)


def end_value(L: TerrainViews, label: tuple, q, p, h, mirrored: bool):
    views = L.mirror if mirrored else L
    if label[0] == "v":
        v = label[1]
        val = views.xs[v] + (h - views.ys[v]) * views.inv[v]
    else:
        x, y = q if label[0] == "q" else p
        if mirrored:
            x = -x
        val = view_along(views, x, y, label[1], h)
    return -val if mirrored else val


def closure_events(L: TerrainViews, cs: list, left_curve, right_curve_m, lo, hi, h0, with_tangents: bool) -> list:
    """Roots of every closure length, and optionally tangent changes at closure ends."""
    R = L.mirror
    n = L.n
    out = []
    for c in cs:
        q, p = c.ends(L, left_curve, right_curve_m, H)
        d = as_curve(p[0]) - as_curve(q[0])
        out.extend(_roots(d.num, lo, hi))
        if not with_tangents:
            continue
        for which, pt in (("q", q), ("p", p)):
            if (which == "q" and c.right[0] == "a") or (which == "p" and c.left[0] == "b"):
                continue
            out.extend(tangent_chain_events(L, pt[0], pt[1], c.edge, lo, hi, h0))
            out.extend(tangent_chain_events(R, -as_curve(pt[0]), pt[1], n - 2 - c.edge, lo, hi, h0))
    return out


# ---------------------------------------------------------------- first-guard envelopes


def viewer_curves(views: TerrainViews) -> tuple:
    """Curves f(h) (rightmost single-guard position) and g(h) (leftmost) over ``[y(T), inf)``.

    Each vertex contributes the line through itself and its tangent vertex;
    the terrain ends clamp both curves.
    """
    from .envelope import AltitudeInterval, pointwise_extreme

    dom = AltitudeInterval(max(views.ys))
    R = views.mirror
    n = views.n
    f_in = [as_curve(label_value(views, ("v", v), None, H), ("v", v)) for v in range(n) if views.inv[v] is not None]
    g_in = [
        (-as_curve(label_value(R, ("v", v), None, H))).with_label(("v", n - 1 - v))
        for v in range(n)
        if R.inv[v] is not None
    ]
    f_in.append(as_curve(views.x_last, CLAMP))
    g_in.append(as_curve(views.xs[0], CLAMP))
    return pointwise_extreme(f_in, "min", dom, 1), pointwise_extreme(g_in, "max", dom, -1)
