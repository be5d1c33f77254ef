"""Curves x(h) of altitude, their pointwise extremes and crossings.

A :class:`RationalCurve` is a quotient of polynomials with exact rational
coefficients.  It supports ordinary arithmetic, so geometric formulas written
for numbers also build curves when fed the identity curve ``H``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpq

from .terrain import Q, scalar_to_str


class RootIsolationFailure(ArithmeticError):
    """Sign-change bracketing could not certify a root."""


class NoCrossing(ValueError):
    """The increasing curve never reaches the decreasing one on the domain."""


ZERO = mpq(0)
ONE = mpq(1)


# ---------------------------------------------------------------- polynomials


class Poly:
    """Dense univariate polynomial, coefficients low to high."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Iterable = ()):
        c = [Q(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    @property
    def deg(self) -> int:
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def lead(self) -> mpq:
        return self.c[-1]

    def __eq__(self, other):
        return isinstance(other, Poly) and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        return f"Poly({[scalar_to_str(x) for x in self.c]})"

    def __add__(self, o: "Poly") -> "Poly":
        a, b = self.c, o.c
        if len(a) < len(b):
            a, b = b, a
        return Poly([x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)])

    def __neg__(self) -> "Poly":
        return Poly([-x for x in self.c])

    def __sub__(self, o: "Poly") -> "Poly":
        return self + (-o)

    def __mul__(self, o) -> "Poly":
        if not isinstance(o, Poly):
            return Poly([x * o for x in self.c])
        if not self.c or not o.c:
            return Poly()
        out = [ZERO] * (len(self.c) + len(o.c) - 1)
        for i, x in enumerate(self.c):
            if x == 0:
                continue
            for j, y in enumerate(o.c):
                out[i + j] += x * y
        return Poly(out)

    def divmod(self, o: "Poly") -> tuple:
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.c)
        q = [ZERO] * max(0, len(r) - len(o.c) + 1)
        lead = o.c[-1]
        for k in range(len(q) - 1, -1, -1):
            coef = r[k + len(o.c) - 1] / lead
            q[k] = coef
            if coef:
                for j, y in enumerate(o.c):
                    r[k + j] -= coef * y
        return Poly(q), Poly(r)

    def monic(self) -> "Poly":
        return self * (1 / self.lead()) if self.c else self

    def __call__(self, x):
        acc = ZERO if not isinstance(x, float) else 0.0
        for coef in reversed(self.c):
            acc = acc * x + coef
        return acc

    def eval_float(self, x: float) -> float:
        acc = 0.0
        for coef in reversed(self.c):
            acc = acc * x + float(coef)
        return acc

    def sign_at(self, x) -> int:
        v = self(x)
        return (v > 0) - (v < 0)

    def derivative(self) -> "Poly":
        return Poly([c * i for i, c in enumerate(self.c)][1:])


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic() if not a.is_zero() else Poly([1])


# ---------------------------------------------------------------- rational curves


@dataclass(frozen=True, eq=False)
class RationalCurve:
    """x = num(h) / den(h), kept in lowest terms with a monic denominator.

    ``label`` names the combinatorial object the curve came from; it takes no
    part in arithmetic or equality.
    """

    num: Poly
    den: Poly = field(default_factory=lambda: Poly([1]))
    label: object = None

    def __post_init__(self):
        num, den = self.num, self.den
        if den.is_zero():
            raise ZeroDivisionError("rational curve with zero denominator")
        if num.is_zero():
            num, den = Poly(), Poly([1])
        elif den.deg > 0:
            g = poly_gcd(num, den)
            if g.deg > 0:
                num = num.divmod(g)[0]
                den = den.divmod(g)[0]
        lead = den.lead()
        if lead != 1:
            num, den = num * (1 / lead), den * (1 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    # construction helpers
    @classmethod
    def const(cls, v, label=None) -> "RationalCurve":
        return cls(Poly([v]), Poly([1]), label)

    @classmethod
    def linear(cls, slope, intercept, label=None) -> "RationalCurve":
        """x = intercept + slope * h."""
        return cls(Poly([intercept, slope]), Poly([1]), label)

    @classmethod
    def from_coefficients(cls, num: Sequence, den: Sequence, label=None) -> "RationalCurve":
        return cls(Poly(num), Poly(den), label)

    def with_label(self, label) -> "RationalCurve":
        c = RationalCurve(self.num, self.den)
        object.__setattr__(c, "label", label)
        return c

    @property
    def degrees(self) -> tuple:
        return max(self.num.deg, 0), max(self.den.deg, 0)

    @property
    def is_linear(self) -> bool:
        return self.den.deg == 0 and self.num.deg <= 1

    def same_function(self, o: "RationalCurve") -> bool:
        return self.num == o.num and self.den == o.den

    def __call__(self, h):
        if isinstance(h, float):
            return self.num.eval_float(h) / self.den.eval_float(h)
        return self.num(h) / self.den(h)

    # arithmetic
    @staticmethod
    def _lift(o) -> "RationalCurve":
        if isinstance(o, RationalCurve):
            return o
        return RationalCurve(Poly([Q(o)]), Poly([1]))

    def __add__(self, o):
        o = self._lift(o)
        if self.den == o.den:
            return RationalCurve(self.num + o.num, self.den)
        return RationalCurve(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalCurve(-self.num, self.den)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        return RationalCurve(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        if o.num.is_zero():
            raise ZeroDivisionError("division by the zero curve")
        return RationalCurve(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def __repr__(self):
        return f"RationalCurve({self.num!r} / {self.den!r}, label={self.label!r})"

    def to_dict(self) -> dict:
        return {
            "num": [scalar_to_str(c) for c in self.num.c] or ["0"],
            "den": [scalar_to_str(c) for c in self.den.c],
            "label": None if self.label is None else repr(self.label),
        }


H = RationalCurve(Poly([0, 1]), Poly([1]))


def difference_poly(c1: RationalCurve, c2: RationalCurve) -> Poly:
    """Polynomial whose roots are the crossings of ``c1`` and ``c2`` (denominators sign-constant)."""
    return c1.num * c2.den - c2.num * c1.den


# ---------------------------------------------------------------- intervals


@dataclass(frozen=True)
class AltitudeInterval:
    """Range of altitudes; ``upper`` None means unbounded."""

    lower: mpq
    upper: Optional[mpq] = None
    lower_open: bool = False
    upper_open: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lower", Q(self.lower))
        if self.upper is not None:
            object.__setattr__(self, "upper", Q(self.upper))
            if self.upper < self.lower:
                raise ValueError("empty altitude interval")

    def contains(self, h) -> bool:
        if h < self.lower or (self.lower_open and h == self.lower):
            return False
        if self.upper is None:
            return True
        return h < self.upper or (h == self.upper and not self.upper_open)

    def interior_point(self):
        if self.upper is None:
            return self.lower + 1
        return (self.lower + self.upper) / 2

    def __repr__(self):
        lo = "(" if self.lower_open else "["
        hi = ")" if self.upper_open or self.upper is None else "]"
        up = "inf" if self.upper is None else scalar_to_str(self.upper)
        return f"{lo}{scalar_to_str(self.lower)}, {up}{hi}"


# ---------------------------------------------------------------- root isolation


@dataclass(frozen=True)
class Root:
    """A sign change of a polynomial inside the bracket ``[lo, hi]`` (equal when exact)."""

    lo: mpq
    hi: mpq

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def value(self) -> mpq:
        return self.hi


REL_TOL = mpq(1, 2**46)


def _refine(p: Poly, lo: mpq, hi: mpq, slo: int) -> Root:
    tol = REL_TOL * (1 + abs(lo) + abs(hi))
    while hi - lo > tol:
        mid = (lo + hi) / 2
        s = p.sign_at(mid)
        if s == 0:
            return Root(mid, mid)
        if s == slo:
            lo = mid
        else:
            hi = mid
    return Root(lo, hi)


def _cauchy_bound(p: Poly) -> mpq:
    lead = abs(p.lead())
    return 1 + max(abs(c) / lead for c in p.c[:-1]) if p.deg > 0 else ONE


def _float_candidates(p: Poly) -> list:
    scale = max(abs(c) for c in p.c)
    coeffs = [float(c / scale) for c in reversed(p.c)]
    with np.errstate(all="ignore"):
        roots = np.roots(coeffs)
    out = []
    for z in roots:
        if not np.isfinite(z):
            continue
        if abs(z.imag) <= 1e-6 * (1 + abs(z.real)):
            out.append(float(z.real))
    return sorted(out)


def _to_q(x: float) -> mpq:
    return mpq(x)


def sign_change_roots(p: Poly, lo, hi=None) -> list:
    """Points strictly inside ``(lo, hi)`` where ``p`` changes sign, ascending.

    Exact for degree one and for rational roots of quadratics; otherwise each
    root is returned as a certified bracket narrower than about 1e-14 relative.
    """
    lo = Q(lo)
    if p.deg <= 0:
        return []
    if hi is None:
        hi = max(lo, ZERO) + _cauchy_bound(p) + 1
    else:
        hi = Q(hi)
    if hi <= lo:
        return []
    if p.deg == 1:
        r = -p.c[0] / p.c[1]
        return [Root(r, r)] if lo < r < hi else []
    if p.deg == 2:
        c0, c1, c2 = p.c
        disc = c1 * c1 - 4 * c2 * c0
        if disc < 0:
            return []
        if disc == 0:
            return []  # double root, no sign change
        num, den = int(disc.numerator), int(disc.denominator)
        if gmpy2.is_square(num) and gmpy2.is_square(den):
            s = mpq(int(gmpy2.isqrt(num)), int(gmpy2.isqrt(den)))
            rs = sorted({(-c1 - s) / (2 * c2), (-c1 + s) / (2 * c2)})
            return [Root(r, r) for r in rs if lo < r < hi]
    # general case: float seeds, then exact sign scan and bisection
    try:
        cands = [c for c in _float_candidates(p) if float(lo) - 1 <= c <= float(hi) + 1]
    except (OverflowError, ValueError, np.linalg.LinAlgError):
        cands = []
    pts = {lo, hi}
    span = hi - lo
    for c in cands:
        cq = _to_q(c)
        snap = mpq(Fraction(c).limit_denominator(10**6))
        if lo < snap < hi and p(snap) == 0:
            pts.add(snap)
        d = mpq(1, 2**30) * (1 + abs(cq))
        for x in (cq - d, cq + d):
            if lo < x < hi:
                pts.add(x)
    for i in range(1, 16):
        pts.add(lo + span * i / 16)
    out = []
    last_x, last_s = None, 0
    zeros: list = []
    for x in sorted(pts):
        s = p.sign_at(x)
        if s == 0:
            if lo < x < hi:
                zeros.append(x)
            continue
        if last_s and s != last_s:
            hits = [z for z in zeros if _changes_sign(p, z)]
            if hits:
                out.extend(Root(z, z) for z in hits)
            else:
                out.append(_refine(p, last_x, x, last_s))
        last_x, last_s, zeros = x, s, []
    if len(out) > p.deg:
        raise RootIsolationFailure(f"{len(out)} sign changes for degree {p.deg}")
    return out


def _changes_sign(p: Poly, z: mpq) -> bool:
    d = mpq(1, 2**40) * (1 + abs(z))
    return p.sign_at(z - d) * p.sign_at(z + d) < 0


def curve_crossings(c1: RationalCurve, c2: RationalCurve, domain: AltitudeInterval) -> list:
    """Altitudes in the open domain where ``c1 - c2`` changes sign, ascending."""
    d = difference_poly(c1, c2)
    return [r.value for r in sign_change_roots(d, domain.lower, domain.upper)]


# ---------------------------------------------------------------- piecewise curves


@dataclass(frozen=True)
class Piece:
    lower: mpq
    upper: Optional[mpq]
    curve: RationalCurve


@dataclass(frozen=True)
class PiecewiseMonotoneCurve:
    """Contiguous pieces over a domain; ``direction`` is +1 (f-type) or -1 (g-type)."""

    pieces: tuple
    direction: int = 1
    jumps: frozenset = frozenset()

    @property
    def domain(self) -> AltitudeInterval:
        return AltitudeInterval(self.pieces[0].lower, self.pieces[-1].upper)

    def piece_at(self, h) -> Piece:
        from bisect import bisect_right

        uppers = [p.upper for p in self.pieces[:-1]]
        return self.pieces[bisect_right(uppers, h) if uppers else 0]

    def __call__(self, h):
        return self.piece_at(h).curve(h)

    def boundaries(self) -> list:
        return [p.upper for p in self.pieces[:-1]]

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "pieces": [
                {
                    "lower": scalar_to_str(p.lower),
                    "upper": None if p.upper is None else scalar_to_str(p.upper),
                    **p.curve.to_dict(),
                }
                for p in self.pieces
            ],
            "jumps": sorted(scalar_to_str(j) for j in self.jumps),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _mid(lo, hi):
    return lo + 1 if hi is None else (lo + hi) / 2


def _compact(pieces: list) -> list:
    out: list = []
    for p in pieces:
        if p.upper is not None and p.upper <= p.lower:
            continue
        if out and out[-1].curve.same_function(p.curve):
            out[-1] = Piece(out[-1].lower, p.upper, out[-1].curve)
        else:
            out.append(p)
    return out


def _merge(a: list, b: list, better) -> list:
    bounds = sorted({p.lower for p in a} | {p.lower for p in b})
    top = a[-1].upper
    cuts = bounds + [top]
    pieces = []
    ia = ib = 0
    for s, t in zip(cuts[:-1], cuts[1:]):
        while a[ia].upper is not None and a[ia].upper <= s:
            ia += 1
        while b[ib].upper is not None and b[ib].upper <= s:
            ib += 1
        ca, cb = a[ia].curve, b[ib].curve
        if ca.same_function(cb):
            pieces.append(Piece(s, t, ca))
            continue
        roots = [r.value for r in sign_change_roots(difference_poly(ca, cb), s, t)]
        edges = [s] + roots + [t]
        for lo, hi in zip(edges[:-1], edges[1:]):
            m = _mid(lo, hi)
            pieces.append(Piece(lo, hi, ca if not better(cb(m), ca(m)) else cb))
    return _compact(pieces)


def pointwise_extreme(
    curves: Sequence[RationalCurve], mode: str, domain: AltitudeInterval, direction: int = 0
) -> PiecewiseMonotoneCurve:
    """Pointwise minimum (``mode='min'``) or maximum of curves over ``domain``.

    Divide and conquer; each pairwise switch point is a certified sign change
    of the difference polynomial.  Ties keep the earlier curve.
    """
    if not curves:
        raise ValueError("no curves")
    if mode == "min":
        better = lambda x, y: x < y  # noqa: E731
    elif mode == "max":
        better = lambda x, y: x > y  # noqa: E731
    else:
        raise ValueError(f"mode must be 'min' or 'max', not {mode!r}")
    lo, hi = domain.lower, domain.upper

    def rec(cs):
        if len(cs) == 1:
            return [Piece(lo, hi, cs[0])]
        k = len(cs) // 2
        return _merge(rec(cs[:k]), rec(cs[k:]), better)

    pieces = rec(list(curves))
    jumps = set()
    for p, q in zip(pieces[:-1], pieces[1:]):
        x = p.upper
        vp, vq = p.curve(x), q.curve(x)
        if abs(vp - vq) > mpq(1, 10**9) * (1 + abs(vp)):
            jumps.add(x)
    if not direction:
        direction = 1 if mode == "min" else -1
    return PiecewiseMonotoneCurve(tuple(pieces), direction, frozenset(jumps))


def breakpoints(*curves: PiecewiseMonotoneCurve) -> list:
    """Sorted distinct piece boundaries of one or more piecewise curves."""
    out = set()
    for c in curves:
        out.update(c.boundaries())
    return sorted(out)


def first_crossing_height(fm: PiecewiseMonotoneCurve, gm: PiecewiseMonotoneCurve):
    """Smallest altitude in the common domain where ``fm >= gm``.

    Raises NoCrossing when ``fm`` stays strictly left of ``gm``.
    """
    lo = max(fm.pieces[0].lower, gm.pieces[0].lower)
    ups = [u for u in (fm.pieces[-1].upper, gm.pieces[-1].upper) if u is not None]
    hi = min(ups) if ups else None
    cuts = sorted({lo} | {b for b in breakpoints(fm, gm) if b > lo and (hi is None or b < hi)})
    cuts.append(hi)
    for s, t in zip(cuts[:-1], cuts[1:]):
        cf, cg = fm.piece_at(_mid(s, t)).curve, gm.piece_at(_mid(s, t)).curve
        if cf(s) >= cg(s):
            return s
        roots = sign_change_roots(difference_poly(cf, cg), s, t)
        if roots:
            return roots[0].value
    if hi is not None and fm(hi) >= gm(hi):
        return hi
    raise NoCrossing("curves do not meet on the domain")


def piece_count_bound_ok(curve: PiecewiseMonotoneCurve, n: int) -> bool:
    return len(curve.pieces) <= max(1, n - 1)
