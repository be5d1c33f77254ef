"""Standalone SVG pictures of terrains, guards and altitude curves."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional
from xml.sax.saxutils import escape

from ..terrain import Terrain

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")
W, HGT, PAD = 480, 320, 28


class _Frame:
    def __init__(self, x0, x1, y0, y1, left):
        self.x0, self.x1 = x0, x1 if x1 > x0 else x0 + 1
        self.y0, self.y1 = y0, y1 if y1 > y0 else y0 + 1
        self.left = left

    def __call__(self, x, y) -> tuple:
        px = self.left + PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2 * PAD)
        py = HGT - PAD - (y - self.y0) / (self.y1 - self.y0) * (HGT - 2 * PAD)
        return round(px, 2), round(py, 2)


def _num(s) -> float:
    return float(Fraction(str(s)))


def _poly(coeffs: list, h: float) -> float:
    v = 0.0
    for c in reversed(coeffs):
        v = v * h + _num(c)
    return v


def curve_samples(curve: dict, h_lo: float, h_hi: float, steps: int = 200) -> list:
    """Points ``(x, h)`` of a serialized piecewise curve."""
    out = []
    pieces = curve["pieces"]
    for i in range(steps + 1):
        h = h_lo + (h_hi - h_lo) * i / steps
        for p in pieces:
            up = None if p["upper"] is None else _num(p["upper"])
            if up is None or h <= up:
                d = _poly(p["den"], h)
                if d != 0:
                    out.append((_poly(p["num"], h) / d, h))
                break
    return out


def render_svg(
    terrain: Terrain,
    solution: Optional[dict] = None,
    curves: Optional[list] = None,
) -> str:
    xs, ys = terrain.xs_float, terrain.ys_float
    h = _num(solution["h_star"]) if solution and "h_star" in solution else None
    top = max(max(ys), h or max(ys))
    span = top - min(ys) or 1.0
    fr = _Frame(xs[0], xs[-1], min(ys), top + 0.1 * span, 0)
    width = W * (2 if curves else 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{HGT}" '
        f'viewBox="0 0 {width} {HGT}">',
        f'<rect x="0" y="0" width="{width}" height="{HGT}" fill="white"/>',
    ]
    pts = " ".join(f"{a},{b}" for a, b in (fr(x, y) for x, y in zip(xs, ys)))
    parts.append(f'<polyline class="terrain" points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
    if h is not None:
        (ax, ay), (bx, _) = fr(xs[0], h), fr(xs[-1], h)
        parts.append(
            f'<line class="altitude" x1="{ax}" y1="{ay}" x2="{bx}" y2="{ay}" stroke="gray" stroke-dasharray="6,4"/>'
        )
        if "pairs" in solution:
            for c, pair in enumerate(solution["pairs"]):
                col = PALETTE[c % len(PALETTE)]
                seg = " ".join(
                    f"{a},{b}" for a, b in (fr(xs[i], ys[i]) for i in range(pair["from"], pair["to"] + 1))
                )
                parts.append(f'<polyline class="subchain" points="{seg}" fill="none" stroke="{col}" stroke-width="3"/>')
                gx, gy = fr(_num(pair["guard_x"]), h)
                parts.append(f'<circle class="guard" cx="{gx}" cy="{gy}" r="4" fill="{col}"/>')
        for g in solution.get("guards", []):
            gx, gy = fr(_num(g), h)
            parts.append(f'<circle class="guard" cx="{gx}" cy="{gy}" r="4" fill="#d62728"/>')
    if curves:
        y_t = max(ys)
        hs = [y_t, y_t + span]
        for c in curves:
            for p in c["pieces"]:
                if p["upper"] is not None:
                    hs.append(_num(p["upper"]))
        h_hi = max(hs) + 0.25 * (max(hs) - y_t or 1.0)
        cf = _Frame(xs[0], xs[-1], y_t, h_hi, W)
        parts.append(f'<text x="{W + PAD}" y="{PAD - 8}" font-size="11">h versus x</text>')
        for c, curve in enumerate(curves):
            samp = [(x, hh) for x, hh in curve_samples(curve, y_t, h_hi) if xs[0] <= x <= xs[-1]]
            if not samp:
                continue
            line = " ".join(f"{a},{b}" for a, b in (cf(x, hh) for x, hh in samp))
            col = PALETTE[c % len(PALETTE)]
            parts.append(f'<polyline class="curve" points="{line}" fill="none" stroke="{col}" stroke-width="1.5"/>')
            if curve.get("name"):
                parts.append(f'<text x="{W + PAD + 4}" y="{PAD + 12 * (c + 1)}" font-size="10" fill="{col}">'
                             f"{escape(str(curve['name']))}</text>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
