"""The crossing-resolver gadget and its placement machinery.

A transversal crossing of two directed wires cannot occur in a planar
perfect network, but it can be replaced by an 11-edge acyclic gadget
whose measurement matrix is the 2x2 identity: each wire passes through
with weight 1 and the two cross measurements cancel exactly (two routes
differing by a -1-weighted detour).  Orientation-preserving affine
placements keep all turning parities, so splicing the gadget into any
drawing preserves every boundary measurement.

The template lives in a local frame: wire one enters at (-6, 1) heading
east and leaves at (6, -1); wire two enters at (-6, -1) and leaves at
(6, 1).  ``splice_crossings`` replaces every interior crossing of a
network under construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .fields import QQ, rational
from .geometry import Point, Polyline, cross, crossing_point, segment_crossing
from .network import Edge, Network, Vertex


# local-frame template: vertex name -> (kind, x, y)
_TEMPLATE_VERTICES = {
    "X": ("white", -4, 1),
    "A": ("black", -3, -1),
    "C": ("black", 0, 1),
    "B": ("white", -1, -1),
    "D": ("white", 4, 1),
    "F": ("black", 3, -1),
}

# edge name -> (tail, head, weight, local waypoints); terminals T1..T4 are
# stubs merged into the host wires at placement time
_TEMPLATE_EDGES = [
    ("g1", "T1", "X", 1, [(-6, 1), (-4, 1)]),
    ("g2", "X", "C", 1, [(-4, 1), (0, 1)]),
    ("g3", "C", "D", 1, [(0, 1), (4, 1)]),
    ("g4", "D", "T4", 1, [(4, 1), (6, 1)]),
    ("g5", "T2", "A", -1, [(-6, -1), (-3, -1)]),
    ("g6", "A", "B", 1, [(-3, -1), (-1, -1)]),
    ("g7", "B", "F", 1, [(-1, -1), (3, -1)]),
    ("g8", "F", "T3", 1, [(3, -1), (6, -1)]),
    ("g9", "X", "A", 1, [(-4, 1), (-3, -1)]),
    ("g10", "B", "C", -1, [(-1, -1), (0, 1)]),
    ("g11", "D", "F", 1, [(4, 1), (3, -1)]),
]

# wire one: in at T1, out at T3; wire two: in at T2, out at T4
GADGET_IN = {"one": Point.of(-6, 1), "two": Point.of(-6, -1)}
GADGET_OUT = {"one": Point.of(6, -1), "two": Point.of(6, 1)}


@dataclass
class PlacedGadget:
    vertices: list[Vertex]
    edges: list[Edge]
    in_points: dict[str, Point]   # wire -> entry point (host joins here)
    out_points: dict[str, Point]
    in_edge: dict[str, str]       # wire -> gadget edge id at the entry
    out_edge: dict[str, str]


_COUNTER = [0]


def _dist2_point_segment(p: Point, a: Point, b: Point):
    d = b - a
    dd = d.norm2()
    t = (p - a).x * d.x + (p - a).y * d.y
    if t <= 0:
        return (p - a).norm2()
    if t >= dd:
        return (p - b).norm2()
    c = cross(d, p - a)
    return c * c / dd


def _rational_below_sqrt(q):
    """A positive rational r with r^2 < q (q > 0), within ~10% of sqrt(q)."""
    from fractions import Fraction
    import math

    approx = Fraction(math.sqrt(float(q)) * 0.9).limit_denominator(10**6)
    r = rational(approx.numerator, approx.denominator)
    while r * r >= q:
        r = r / 2
    return r


def splice_crossings(vertices: list[Vertex], edges: list[Edge], cut: Polyline) -> tuple[list[Vertex], list[Edge]]:
    """Replace every transversal interior crossing between edges by a gadget.

    Host weights stay on the incoming halves; the gadget passes each wire
    through with total weight 1 and cancels the cross terms, so all
    boundary measurements are preserved.  Raises if a crossing has no
    clearance (e.g. sits on the cut).
    """
    from .network import SegmentGrid

    vertices = list(vertices)
    edges = list(edges)

    def find_crossing():
        grid = SegmentGrid()
        index = {e.id: e for e in edges}
        for e in edges:
            for si, (a, b) in enumerate(e.polyline.segments()):
                for (oid, osi), c, d in grid.candidates(a, b):
                    if oid == e.id or {a, b} & {c, d}:
                        continue
                    s = segment_crossing(c, d, a, b)
                    if s is not None:
                        return (index[oid], osi, e, si)
                grid.add((e.id, si), a, b)
        return None

    while True:
        hit = find_crossing()
        if hit is None:
            return vertices, edges
        e1, si, e2, sj = hit
        segs1 = list(e1.polyline.segments())
        segs2 = list(e2.polyline.segments())
        a, b = segs1[si]
        c, d = segs2[sj]
        if cross(b - a, d - c) < 0:
            # wire roles swap so the placement frame stays positively oriented
            e1, e2, si, sj = e2, e1, sj, si
            segs1, segs2 = segs2, segs1
            (a, b), (c, d) = (c, d), (a, b)
        x = crossing_point(a, b, c, d)
        d1 = b - a
        d2 = d - c

        # clearance: everything except the two crossing segments themselves
        clear2 = None

        def consider(q):
            nonlocal clear2
            if clear2 is None or q < clear2:
                clear2 = q

        for v in vertices:
            consider((v.pos - x).norm2())
        for k, e in enumerate(edges):
            for sk, (p, q) in enumerate(e.polyline.segments()):
                if (e.id == e1.id and sk == si) or (e.id == e2.id and sk == sj):
                    continue
                consider(_dist2_point_segment(x, p, q))
        for p, q in cut.segments():
            consider(_dist2_point_segment(x, p, q))
        consider((a - x).norm2())
        consider((b - x).norm2())
        consider((c - x).norm2())
        consider((d - x).norm2())
        if clear2 is None or clear2 == 0:
            raise ValueError("no clearance around crossing point")
        rho = _rational_below_sqrt(clear2) / 2
        # delta * |d| <= rho/2 per wire keeps the gadget inside the clearance
        del1 = rho / (2 * _rational_below_sqrt(d1.norm2()) * rational(2))
        del2 = rho / (2 * _rational_below_sqrt(d2.norm2()) * rational(2))
        u = Point((del1 * d1.x + del2 * d2.x) / 12, (del1 * d1.y + del2 * d2.y) / 12)
        v = Point((del2 * d2.x - del1 * d1.x) / 2, (del2 * d2.y - del1 * d1.y) / 2)
        g = place_gadget(x, u, v)
        vertices.extend(g.vertices)

        def split_edge(e: Edge, seg_idx: int, entry: Point, exit_: Point, wire: str) -> list[Edge]:
            pts = list(e.polyline.points)
            pre = pts[: seg_idx + 1] + [entry]
            post = [exit_] + pts[seg_idx + 1 :]
            gin = next(ge for ge in g.edges if ge.id == g.in_edge[wire])
            gout = next(ge for ge in g.edges if ge.id == g.out_edge[wire])
            e_in = Edge(
                f"{e.id}<{g.in_edge[wire]}",
                e.tail,
                gin.head,
                e.weight * gin.weight,
                Polyline(tuple(pre + list(gin.polyline.points[1:]))),
            )
            e_out = Edge(
                f"{e.id}>{g.out_edge[wire]}",
                gout.tail,
                e.head,
                gout.weight,
                Polyline(tuple(list(gout.polyline.points[:-1]) + post)),
            )
            return [e_in, e_out]

        new_edges = [e for e in edges if e.id not in (e1.id, e2.id)]
        new_edges.extend(split_edge(e1, si, g.in_points["one"], g.out_points["one"], "one"))
        new_edges.extend(split_edge(e2, sj, g.in_points["two"], g.out_points["two"], "two"))
        for ge in g.edges:
            if ge.id not in (g.in_edge["one"], g.in_edge["two"], g.out_edge["one"], g.out_edge["two"]):
                new_edges.append(ge)
        edges = new_edges


def place_gadget(origin: Point, ex: Point, ey: Point, prefix: str | None = None) -> PlacedGadget:
    """Instantiate the template under p -> origin + x*ex + y*ey.

    The frame must be positively oriented (cross(ex, ey) > 0) so that
    turning parities, and with them the internal cancellations, are
    preserved.
    """
    if cross(ex, ey) <= 0:
        raise ValueError("gadget frame must be positively oriented")
    if prefix is None:
        _COUNTER[0] += 1
        prefix = f"x{_COUNTER[0]}"

    def f(x, y) -> Point:
        x = rational(x)
        y = rational(y)
        return Point(origin.x + x * ex.x + y * ey.x, origin.y + x * ex.y + y * ey.y)

    vertices = [Vertex(f"{prefix}.{name}", kind, f(x, y)) for name, (kind, x, y) in _TEMPLATE_VERTICES.items()]
    edges = []
    in_edge: dict[str, str] = {}
    out_edge: dict[str, str] = {}
    for name, tail, head, w, pts in _TEMPLATE_EDGES:
        eid = f"{prefix}.{name}"
        tl = tail if tail.startswith("T") else f"{prefix}.{tail}"
        hd = head if head.startswith("T") else f"{prefix}.{head}"
        edges.append(Edge(eid, tl, hd, rational(w), Polyline(tuple(f(x, y) for x, y in pts))))
    in_edge["one"] = f"{prefix}.g1"
    in_edge["two"] = f"{prefix}.g5"
    out_edge["one"] = f"{prefix}.g8"
    out_edge["two"] = f"{prefix}.g4"
    return PlacedGadget(
        vertices,
        edges,
        {k: f(p.x, p.y) for k, p in GADGET_IN.items()},
        {k: f(p.x, p.y) for k, p in GADGET_OUT.items()},
        in_edge,
        out_edge,
    )
