"""Exact scalars, planar primitives and the x-monotone terrain type."""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence, Union

from gmpy2 import mpq

Scalar = mpq
Number = Union[mpq, int, float]


class Mode(enum.Enum):
    """Arithmetic used by a pipeline stage."""

    EXACT = "exact"
    FLOAT = "float"


FLOAT_EPS = 1e-9


def Q(value) -> mpq:
    """Convert ``value`` to an exact rational.

    Accepts ints, mpq, Fraction, floats (converted exactly) and strings in
    decimal (``"1.25"``, ``"3e-2"``) or ``"num/den"`` form.
    """
    if isinstance(value, mpq):
        return value
    if isinstance(value, str):
        value = value.strip()
        if not value:
            raise ValueError("empty number")
        return mpq(Fraction(value))
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, bool):
        raise TypeError("booleans are not coordinates")
    return mpq(value)


def scalar_to_str(value: Number) -> str:
    """Serialize a rational as a terminating decimal when possible, else ``num/den``."""
    if isinstance(value, float):
        return repr(value)
    q = Q(value)
    num, den = int(q.numerator), int(q.denominator)
    if den == 1:
        return str(num)
    d, twos, fives = den, 0, 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{num}/{den}"
    digits = max(twos, fives)
    scaled = abs(num) * (10**digits // den)
    sign = "-" if num < 0 else ""
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{str(frac).rjust(digits, '0').rstrip('0')}"


class Point(NamedTuple):
    x: mpq
    y: mpq


def orientation(p: Sequence, q: Sequence, r: Sequence) -> int:
    """Sign of the cross product (q - p) x (r - p): +1 left turn, -1 right turn, 0 collinear."""
    d = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (d > 0) - (d < 0)


@dataclass(frozen=True)
class Line:
    """The line ``a*x + b*y = c``, scaled so that ``b == 1`` (or ``a == 1`` when vertical).

    For non-vertical lines the upper half-plane is ``y >= c - a*x``.
    """

    a: mpq
    b: mpq
    c: mpq

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValueError("degenerate line: a = b = 0")
        s = self.b if self.b != 0 else self.a
        if s != 1:
            object.__setattr__(self, "a", Q(self.a) / s)
            object.__setattr__(self, "b", Q(self.b) / s)
            object.__setattr__(self, "c", Q(self.c) / s)

    @classmethod
    def through(cls, p: Sequence, q: Sequence) -> "Line":
        a = q[1] - p[1]
        b = p[0] - q[0]
        return cls(Q(a), Q(b), Q(a * p[0] + b * p[1]))

    @classmethod
    def horizontal(cls, h) -> "Line":
        return cls(mpq(0), mpq(1), Q(h))

    @classmethod
    def vertical(cls, x) -> "Line":
        return cls(mpq(1), mpq(0), Q(x))

    @property
    def is_vertical(self) -> bool:
        return self.b == 0

    @property
    def slope(self) -> mpq:
        if self.is_vertical:
            raise ValueError("vertical line has no slope")
        return -self.a

    def y_at(self, x) -> mpq:
        return self.c - self.a * x

    def side(self, p: Sequence) -> int:
        """+1 if ``p`` is strictly in the upper (or, for vertical lines, right) open half-plane."""
        v = self.a * p[0] + self.b * p[1] - self.c
        return (v > 0) - (v < 0)

    def contains_upper(self, p: Sequence) -> bool:
        return self.side(p) >= 0


COINCIDENT = object()


def line_intersection(l1: Line, l2: Line):
    """Unique intersection point, ``None`` for parallel lines, ``COINCIDENT`` for equal lines."""
    det = l1.a * l2.b - l1.b * l2.a
    if det == 0:
        if l1 == l2:
            return COINCIDENT
        return None
    x = (l1.c * l2.b - l1.b * l2.c) / det
    y = (l1.a * l2.c - l1.c * l2.a) / det
    return Point(x, y)


class TerrainError(ValueError):
    pass


class ParseError(TerrainError):
    pass


class DuplicateX(TerrainError):
    pass


class NonMonotone(TerrainError):
    pass


class TooFewVertices(TerrainError):
    pass


class OutOfDomain(ValueError):
    pass


@dataclass(frozen=True)
class Terrain:
    """An x-monotone polygonal chain v_0 .. v_{n-1} (indices are 0-based)."""

    vertices: tuple
    y_max: mpq = field(init=False)

    def __post_init__(self):
        vs = tuple(Point(Q(x), Q(y)) for x, y in self.vertices)
        if len(vs) < 2:
            raise TooFewVertices(f"terrain needs at least 2 vertices, got {len(vs)}")
        for i in range(len(vs) - 1):
            if vs[i].x == vs[i + 1].x:
                raise DuplicateX(f"vertices {i} and {i + 1} share x = {scalar_to_str(vs[i].x)}")
            if vs[i].x > vs[i + 1].x:
                raise NonMonotone(f"x decreases between vertices {i} and {i + 1}")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "y_max", max(v.y for v in vs))

    @classmethod
    def from_points(cls, points: Iterable[Sequence], merge_collinear: bool = True) -> "Terrain":
        t = cls(tuple(points))
        return t.normalized() if merge_collinear else t

    def normalized(self) -> "Terrain":
        """Drop middle vertices of collinear consecutive triples."""
        out = [self.vertices[0]]
        for v in self.vertices[1:]:
            while len(out) >= 2 and orientation(out[-2], out[-1], v) == 0:
                out.pop()
            out.append(v)
        if len(out) == len(self.vertices):
            return self
        return Terrain(tuple(out))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def x_min(self) -> mpq:
        return self.vertices[0].x

    @property
    def x_max(self) -> mpq:
        return self.vertices[-1].x

    @cached_property
    def xs(self) -> tuple:
        return tuple(v.x for v in self.vertices)

    @cached_property
    def ys(self) -> tuple:
        return tuple(v.y for v in self.vertices)

    @cached_property
    def xs_float(self) -> tuple:
        return tuple(float(x) for x in self.xs)

    @cached_property
    def ys_float(self) -> tuple:
        return tuple(float(y) for y in self.ys)

    def edge(self, e: int) -> tuple:
        return self.vertices[e], self.vertices[e + 1]

    def edge_line(self, e: int) -> Line:
        return Line.through(self.vertices[e], self.vertices[e + 1])

    def edge_slope(self, e: int) -> mpq:
        a, b = self.vertices[e], self.vertices[e + 1]
        return (b.y - a.y) / (b.x - a.x)

    def height_at(self, x) -> mpq:
        """Terrain height above ``x``; raises OutOfDomain outside [x_min, x_max]."""
        from bisect import bisect_right

        if x < self.x_min or x > self.x_max:
            raise OutOfDomain(f"x = {x} outside terrain domain")
        e = min(bisect_right(self.xs, x) - 1, self.n - 2)
        a, b = self.vertices[e], self.vertices[e + 1]
        return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x)

    @cached_property
    def mirrored(self) -> "Terrain":
        """Reflection through the y-axis, re-indexed left to right (vertex i <-> n-1-i)."""
        t = Terrain(tuple(Point(-v.x, v.y) for v in reversed(self.vertices)))
        object.__setattr__(t, "mirrored", self)
        return t

    def to_json(self) -> str:
        return json.dumps(
            {"vertices": [[scalar_to_str(v.x), scalar_to_str(v.y)] for v in self.vertices]}
        )

    def digest(self) -> str:
        import hashlib

        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class AltitudeLine:
    h: mpq
    terrain: Terrain

    def __post_init__(self):
        object.__setattr__(self, "h", Q(self.h))
        if self.h < self.terrain.y_max:
            raise ValueError(
                f"altitude {scalar_to_str(self.h)} below terrain maximum "
                f"{scalar_to_str(self.terrain.y_max)}"
            )

    def point(self, x) -> Point:
        return Point(Q(x), self.h)


def _parse_number(tok) -> mpq:
    try:
        return Q(tok)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParseError(f"bad coordinate {tok!r}") from exc


def _json_number(text: str):
    # keeps decimal literals exact
    return Fraction(text)


def parse_terrain(text: str, fmt: str | None = None) -> Terrain:
    """Parse a terrain from JSON (``{"vertices": [[x, y], ...]}``) or CSV (``x,y`` per line).

    Coordinates may be integers, decimal literals or ``num/den`` strings; they are
    converted to exact rationals.  Collinear consecutive vertices are merged.
    """
    stripped = text.strip()
    if fmt is None:
        fmt = "json" if stripped.startswith(("{", "[")) else "csv"
    if fmt == "json":
        try:
            data = json.loads(stripped, parse_float=_json_number)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        rows = data.get("vertices") if isinstance(data, dict) else data
        if not isinstance(rows, list):
            raise ParseError("expected a 'vertices' list")
    elif fmt == "csv":
        rows = []
        for rec in csv.reader(io.StringIO(stripped)):
            if not rec or rec[0].strip().startswith("#"):
                continue
            if len(rec) != 2:
                raise ParseError(f"expected 'x,y', got {','.join(rec)!r}")
            if not rows and not _looks_numeric(rec[0]):
                continue  # header row
            rows.append(rec)
    else:
        raise ParseError(f"unknown format {fmt!r}")
    pts = []
    for row in rows:
        if not isinstance(row, (list, tuple)) or len(row) != 2:
            raise ParseError(f"vertex must be a pair, got {row!r}")
        pts.append((_parse_number(row[0]), _parse_number(row[1])))
    return Terrain.from_points(pts)


def _looks_numeric(tok: str) -> bool:
    try:
        Fraction(tok.strip())
    except ValueError:
        return False
    return True


def load_terrain(path) -> Terrain:
    with open(path) as fh:
        text = fh.read()
    fmt = "csv" if str(path).lower().endswith(".csv") else None
    return parse_terrain(text, fmt)
