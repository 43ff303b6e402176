"""Exact planar geometry for the annulus embedding.

All coordinates are exact rationals and every predicate is a sign of a
polynomial expression, so there is no epsilon tuning anywhere: crossing
signs, cone membership and point-on-segment tests are reproducible.

The three geometric quantities the network theory needs are

* ``intersection_index``: the signed transversal crossing count of an
  oriented polyline with the cut (+1 when the ordered pair of tangents is a
  positively oriented basis);
* ``concordance``: the mod-2 rotation invariant of a closed polygonal
  curve, computed by counting, for a generic probe direction, the corners
  whose spanned cone contains the probe (the result is probe-independent);
* ``close_path``: the closed curve obtained from a boundary-to-boundary
  path by appending counterclockwise boundary arcs and, for endpoints on
  distinct circles, the cut itself.

Non-generic inputs (endpoint on the cut, collinear overlap, exact cusps)
are rejected rather than resolved; callers are expected to perturb.
Boundary arcs are polygonal approximations produced by adaptive
subdivision on the rational circle parametrization t -> ((1-t^2), 2t) *
r/(1+t^2), which keeps every construction point rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .fields import QQ, rational

_Q0 = QQ.zero
_Q1 = QQ.one


class GeometryError(ValueError):
    """Non-generic or degenerate geometric input."""


@dataclass(frozen=True)
class Point:
    x: object
    y: object

    def __iter__(self):
        return iter((self.x, self.y))

    def __add__(self, other: "Point") -> "Point":
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point") -> "Point":
        return Point(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Point":
        return Point(-self.x, -self.y)

    def scale(self, c) -> "Point":
        return Point(self.x * c, self.y * c)

    def norm2(self):
        return self.x * self.x + self.y * self.y

    def to_obj(self) -> list[str]:
        from .fields import format_rational

        return [format_rational(self.x), format_rational(self.y)]

    @staticmethod
    def of(x, y) -> "Point":
        return Point(rational(x), rational(y))


def cross(u: Point, v: Point):
    return u.x * v.y - u.y * v.x

def dot(u: Point, v: Point):
    return u.x * v.x + u.y * v.y

def sgn(v) -> int:
    return (v > 0) - (v < 0)


@dataclass(frozen=True)
class Polyline:
    """Ordered rational points; closed curves do not repeat the first point."""

    points: tuple[Point, ...]
    closed: bool = False

    def __post_init__(self):
        if len(self.points) < 2:
            raise GeometryError("polyline needs at least two points")
        n = len(self.points)
        last = n if self.closed else n - 1
        for i in range(last):
            if self.points[i] == self.points[(i + 1) % n]:
                raise GeometryError("zero-length segment")

    def segments(self) -> Iterator[tuple[Point, Point]]:
        pts = self.points
        for i in range(len(pts) - 1):
            yield pts[i], pts[i + 1]
        if self.closed:
            yield pts[-1], pts[0]

    def directions(self) -> list[Point]:
        return [b - a for a, b in self.segments()]

    def reversed(self) -> "Polyline":
        return Polyline(tuple(reversed(self.points)), self.closed)

    def first_dir(self) -> Point:
        return self.points[1] - self.points[0]

    def last_dir(self) -> Point:
        return self.points[-1] - self.points[-2]

    @staticmethod
    def of(coords: Iterable[Sequence], closed: bool = False) -> "Polyline":
        return Polyline(tuple(Point.of(x, y) for x, y in coords), closed)

    def to_obj(self):
        return [p.to_obj() for p in self.points]


def concat_polylines(parts: Sequence[Polyline], closed: bool = False) -> Polyline:
    """Join open polylines whose consecutive end/start points coincide."""
    pts: list[Point] = list(parts[0].points)
    for part in parts[1:]:
        if part.points[0] != pts[-1]:
            raise GeometryError("polylines do not share a junction point")
        pts.extend(part.points[1:])
    if closed and pts[0] == pts[-1]:
        pts.pop()
    return Polyline(tuple(pts), closed)


@dataclass(frozen=True)
class AnnulusSpec:
    inner_radius: object
    outer_radius: object

    def __post_init__(self):
        if not (_Q0 < self.inner_radius < self.outer_radius):
            raise GeometryError("need 0 < inner radius < outer radius")

    @staticmethod
    def of(inner, outer) -> "AnnulusSpec":
        return AnnulusSpec(rational(inner), rational(outer))


# ---------------------------------------------------------------------------
# segment predicates


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    """p lies on closed segment [a, b] (collinearity assumed checked by caller)."""
    if cross(b - a, p - a):
        return False
    return dot(p - a, b - a) >= 0 and dot(p - b, a - b) >= 0


def segment_crossing(a: Point, b: Point, c: Point, d: Point) -> Optional[int]:
    """Classify segment [a,b] against [c,d].

    Returns +1/-1 for a proper interior crossing (sign of det[b-a, d-c]),
    None when disjoint, and raises GeometryError for any touching,
    endpoint-on-segment or collinear-overlap configuration.
    """
    d1 = b - a
    d2 = d - c
    denom = cross(d1, d2)
    s_c = sgn(cross(d1, c - a))
    s_d = sgn(cross(d1, d - a))
    s_a = sgn(cross(d2, a - c))
    s_b = sgn(cross(d2, b - c))
    if denom == 0:
        if s_c == 0:  # collinear lines
            if _on_segment(c, a, b) or _on_segment(d, a, b) or _on_segment(a, c, d):
                raise GeometryError("non-generic intersection")
            return None
        return None
    if s_c * s_d > 0 or s_a * s_b > 0:
        return None
    if s_c == 0 or s_d == 0 or s_a == 0 or s_b == 0:
        raise GeometryError("non-generic intersection")
    return sgn(denom)


def crossing_point(a: Point, b: Point, c: Point, d: Point) -> Point:
    """Intersection point of the supporting lines (caller ensures a proper crossing)."""
    d1 = b - a
    d2 = d - c
    denom = cross(d1, d2)
    t = cross(c - a, d2) / denom
    return Point(a.x + d1.x * t, a.y + d1.y * t)


def intersection_index(curve: Polyline, cut: Polyline) -> int:
    """Signed count of transversal crossings of ``curve`` with ``cut``.

    +1 when the oriented tangents (curve, cut) form a positively oriented
    basis.  Any tangency, endpoint contact or collinear overlap raises
    GeometryError("non-generic intersection").
    """
    total = 0
    for a, b in curve.segments():
        for c, d in cut.segments():
            s = segment_crossing(a, b, c, d)
            if s is not None:
                total += s
    return total


# ---------------------------------------------------------------------------
# concordance


_PROBE_CANDIDATES = [
    (1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2),
    (3, 1), (1, 3), (3, -1), (1, -3), (3, 2), (2, 3), (5, 1), (1, 5),
    (5, 2), (2, 5), (4, 1), (1, 4), (5, 3), (3, 5), (7, 1), (1, 7),
    (7, 2), (2, 7), (7, 3), (3, 7), (8, 1), (1, 8), (9, 2), (2, 9),
]


def pick_probe(directions: Sequence[Point], skip: int = 0) -> Point:
    """Deterministically pick a direction not collinear with any given one."""
    found = 0
    for px, py in _PROBE_CANDIDATES:
        l = Point.of(px, py)
        if all(cross(l, d) for d in directions):
            if found == skip:
                return l
            found += 1
    # fall back to a slope no segment can have: steeper than any rational in play
    k = 2
    while True:
        l = Point.of(1, k)
        if all(cross(l, d) for d in directions):
            return l
        k += 1


def cone_contains(d1: Point, d2: Point, probe: Point) -> int:
    """1 if probe is interior to the convex cone spanned by d1, d2, else 0.

    Requires the cone not to be a line: exactly opposite directions raise
    GeometryError("degenerate turn").
    """
    c = cross(d1, d2)
    if c == 0:
        if dot(d1, d2) < 0:
            raise GeometryError("degenerate turn")
        return 0  # same direction: the cone is a ray, empty interior
    s = sgn(c)
    return 1 if (sgn(cross(d1, probe)) == s and sgn(cross(probe, d2)) == s) else 0


def turn_count(d1: Point, d2: Point, probe: Point) -> int:
    return cone_contains(d1, d2, probe)


def concordance(curve: Polyline, probe: Optional[Point] = None) -> int:
    """Mod-2 rotation invariant of a closed polygonal curve.

    Sums, over all consecutive segment pairs, the indicator that the probe
    direction lies inside the spanned cone; the mod-2 result does not
    depend on the probe as long as it is not collinear with any segment.
    """
    if not curve.closed:
        raise GeometryError("concordance needs a closed curve")
    dirs = curve.directions()
    if probe is None:
        probe = pick_probe(dirs)
    elif any(not cross(probe, d) for d in dirs):
        probe = pick_probe(dirs)
    total = 0
    n = len(dirs)
    for i in range(n):
        total += cone_contains(dirs[i], dirs[(i + 1) % n], probe)
    return total & 1


# ---------------------------------------------------------------------------
# rational circle points and counterclockwise arcs


def circle_point(radius, t) -> Point:
    """Rational point at parameter t = tan(theta/2); t may be the string "inf"."""
    r = rational(radius)
    if t == "inf":
        return Point(-r, _Q0)
    t = rational(t)
    d = 1 + t * t
    return Point(r * (1 - t * t) / d, r * 2 * t / d)


def circle_param(p: Point):
    """Inverse of circle_point: t = y/(x+r); "inf" at (-r, 0)."""
    r2 = p.norm2()
    # r = sqrt(r2) is rational for the points this package constructs
    r = _sqrt_rational(r2)
    if p.x + r == 0:
        return "inf"
    return p.y / (p.x + r)


def _sqrt_rational(q):
    from math import isqrt

    num = int(q.numerator)
    den = int(q.denominator)
    rn = isqrt(num)
    rd = isqrt(den)
    if rn * rn != num or rd * rd != den:
        raise GeometryError("point is not at rational distance from the center")
    return rational(rn, rd)


def angle_key(p: Point):
    """Total order of directions by angle in [0, 2*pi), exact."""
    # half: 0 for upper half plane including positive x-axis, 1 for lower
    if p.y > 0 or (p.y == 0 and p.x > 0):
        half = 0
    else:
        half = 1
    return half, CCWSlope(p)


class CCWSlope:
    """Comparator wrapper: within one half-plane, ccw order = cross-product order."""

    __slots__ = ("p",)

    def __init__(self, p: Point):
        self.p = p

    def __lt__(self, other: "CCWSlope") -> bool:
        return cross(self.p, other.p) > 0

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CCWSlope) and cross(self.p, other.p) == 0


def ccw_between(a: Point, x: Point, b: Point) -> bool:
    """True when direction x lies strictly inside the ccw sweep from a to b."""
    ka, kx, kb = angle_key(a), angle_key(x), angle_key(b)
    if ka == kx or kx == kb or ka == kb:
        return False
    if ka < kb:
        return ka < kx < kb
    return kx > ka or kx < kb


def arc_point_between(radius, a: Point, b: Point, avoid: Sequence[Point] = ()) -> Point:
    """A rational circle point strictly inside the ccw arc from a to b."""
    r = rational(radius)
    banned = set(avoid)
    candidates = [Point(r, _Q0), Point(_Q0, r), Point(-r, _Q0), Point(_Q0, -r)]
    for t_num in (1, -1, 2, -2, 3, -3):
        candidates.append(circle_point(r, rational(t_num, 2)))
        candidates.append(circle_point(r, t_num))
    for c in candidates:
        if c not in banned and ccw_between(a, c, b):
            return c
    # fall back to parameter interpolation; the parameter is tan(theta/2),
    # increasing counterclockwise with a pole at (-r, 0)
    lo = circle_param(a)
    hi = circle_param(b)
    trial: list = []
    for k in range(1, 16):
        if lo == "inf":
            trial.append(hi - k)  # just past the pole, before b
        elif hi == "inf":
            trial.append(lo + k)
        elif lo >= hi:
            # the arc wraps the pole: bridge it with a far-out parameter on
            # the side whose endpoint is closer, so successive splits leave
            # only a short chord straddling the pole
            big = 4 * max(abs(lo), abs(hi), 4) * k
            if abs(lo) <= abs(hi):
                trial.append(big)
                trial.append(-big)
            else:
                trial.append(-big)
                trial.append(big)
            trial.append(lo + k)
            trial.append(hi - k)
        else:
            trial.append((lo * k + hi) / (k + 1))
    for mid in trial:
        p = circle_point(r, mid)
        if p not in banned and ccw_between(a, p, b):
            return p
    raise GeometryError("approximation too coarse")


def ccw_arc(radius, start: Point, end: Point, avoid: Sequence[Point] = (), max_chord2=None) -> list[Point]:
    """Polygonal ccw arc from start to end on the circle of given radius.

    Subdivides until each chord is shorter than max_chord2 (squared length,
    default r^2/4, about 29 degrees) and no chord passes through a point in
    ``avoid``; returns the full point list including both endpoints.
    """
    r = rational(radius)
    if max_chord2 is None:
        max_chord2 = r * r / 4
    pts = [start, end]

    def needs_split(a: Point, b: Point) -> bool:
        ch = (b - a).norm2()
        if ch > max_chord2:
            return True
        return any(_hits(a, b, p) for p in avoid)

    def _hits(a: Point, b: Point, p: Point) -> bool:
        if p == a or p == b:
            return False
        return cross(b - a, p - a) == 0 and dot(p - a, b - a) > 0 and dot(p - b, a - b) > 0

    changed = True
    guard = 0
    while changed:
        changed = False
        guard += 1
        if guard > 64:
            raise GeometryError("approximation too coarse")
        out = [pts[0]]
        for a, b in zip(pts, pts[1:]):
            if needs_split(a, b):
                out.append(arc_point_between(r, a, b, avoid=avoid))
                changed = True
            out.append(b)
        pts = out
    return pts


# ---------------------------------------------------------------------------
# path closure


def close_path(
    path: Polyline,
    start_circle: str,
    end_circle: str,
    annulus: AnnulusSpec,
    cut: Polyline,
    avoid: Sequence[Point] = (),
) -> Polyline:
    """Close a boundary-to-boundary path into the curve used for its sign.

    ``start_circle``/``end_circle`` are "inner" or "outer".  Same circle:
    append the counterclockwise boundary arc from the path's end back to
    its start.  Distinct circles: go counterclockwise to the base point of
    the cut, traverse the cut to its other base point, then
    counterclockwise to the start.  The appended arcs avoid the points in
    ``avoid`` (raising "approximation too coarse" when impossible).
    """
    start = path.points[0]
    end = path.points[-1]
    radius = {"inner": annulus.inner_radius, "outer": annulus.outer_radius}
    inner_base = cut.points[0]
    outer_base = cut.points[-1]
    pieces: list[Point] = list(path.points)

    def extend_arc(r, a: Point, b: Point):
        arc = ccw_arc(r, a, b, avoid=avoid)
        pieces.extend(arc[1:])

    if start_circle == end_circle:
        extend_arc(radius[end_circle], end, start)
    elif end_circle == "inner":
        extend_arc(radius["inner"], end, inner_base)
        pieces.extend(cut.points[1:])
        extend_arc(radius["outer"], outer_base, start)
    else:
        extend_arc(radius["outer"], end, outer_base)
        pieces.extend(list(reversed(cut.points))[1:])
        extend_arc(radius["inner"], inner_base, start)
    pieces.pop()  # closed polylines do not repeat the first point
    return Polyline(tuple(pieces), closed=True)


def point_on_circle(p: Point, radius) -> bool:
    r = rational(radius)
    return p.norm2() == r * r


def point_in_annulus(p: Point, annulus: AnnulusSpec, strict: bool = True) -> bool:
    n2 = p.norm2()
    lo = annulus.inner_radius * annulus.inner_radius
    hi = annulus.outer_radius * annulus.outer_radius
    if strict:
        return lo < n2 < hi
    return lo <= n2 <= hi


def segment_stays_in_annulus(a: Point, b: Point, annulus: AnnulusSpec) -> bool:
    """Open segment (a,b) stays strictly inside the annulus interior.

    Endpoints may lie on the circles; the interior must not cross either
    circle.  Exact: the squared distance from the origin to the segment is
    a rational optimization with rational critical point.
    """
    lo2 = annulus.inner_radius * annulus.inner_radius
    hi2 = annulus.outer_radius * annulus.outer_radius
    na, nb = a.norm2(), b.norm2()
    if na > hi2 or nb > hi2 or na < lo2 or nb < lo2:
        return False
    # max over the segment is at an endpoint; min is at the projection of 0
    d = b - a
    dd = d.norm2()
    t = -dot(a, d) / dd
    if _Q0 < t < _Q1:
        m = Point(a.x + d.x * t, a.y + d.y * t)
        if m.norm2() < lo2:
            return False
    return True
