"""The perfect-network data model.

A network is a directed graph drawn in an annulus: boundary vertices
(sources with out-degree 1, sinks with in-degree 1) sit exactly on the two
circles, internal vertices are trivalent and colored white (one incoming
edge) or black (one outgoing edge), every edge carries an explicit
polyline embedding, and an oriented cut runs from the inner circle to the
outer one.  Everything is exact and immutable; transformations return new
networks.

Weights are either exact rationals or named symbols; symbolic weights are
bound to numbers (or to distinct function-field generators) before any
measurement computation.

File format (UTF-8 JSON, bit-exact round trip)::

    {"annulus": {"inner_radius": "1", "outer_radius": "3"},
     "cut": [["1", "0"], ["3", "0"]],
     "vertices": [{"id": "b1", "kind": "source", "pos": ["0", "3"]}, ...],
     "edges": [{"id": "e1", "tail": "b1", "head": "v1", "weight": "2/3",
                "polyline": [["0", "3"], ...]}, ...]}

A weight may be {"symbol": "w1"} instead of a rational string.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, Optional, Sequence

from .fields import QQ, format_rational, rational
from .geometry import (
    AnnulusSpec,
    GeometryError,
    Point,
    Polyline,
    angle_key,
    cross,
    dot,
    point_in_annulus,
    point_on_circle,
    segment_crossing,
    segment_stays_in_annulus,
    sgn,
)

SOURCE = "source"
SINK = "sink"
WHITE = "white"
BLACK = "black"

BOUNDARY_KINDS = (SOURCE, SINK)
INTERNAL_KINDS = (WHITE, BLACK)


@dataclass(frozen=True)
class Symbol:
    name: str


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: str
    pos: Point


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    weight: Any  # exact rational or Symbol
    polyline: Polyline


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Network:
    annulus: AnnulusSpec
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    cut: Polyline

    # -- derived lookups (cached, network is immutable) -------------------

    @cached_property
    def vertex_map(self) -> dict[str, Vertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def edge_map(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def out_edges(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            out[e.tail].append(e)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[Edge, ...]]:
        inc: dict[str, list[Edge]] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            inc[e.head].append(e)
        return {k: tuple(v) for k, v in inc.items()}

    def circle_of(self, vertex: Vertex) -> Optional[str]:
        if point_on_circle(vertex.pos, self.annulus.outer_radius):
            return "outer"
        if point_on_circle(vertex.pos, self.annulus.inner_radius):
            return "inner"
        return None

    @cached_property
    def boundary_vertices(self) -> tuple[Vertex, ...]:
        return tuple(v for v in self.vertices if v.kind in BOUNDARY_KINDS)

    @cached_property
    def internal_vertices(self) -> tuple[Vertex, ...]:
        return tuple(v for v in self.vertices if v.kind in INTERNAL_KINDS)

    def with_edges(self, edges: Iterable[Edge]) -> "Network":
        return Network(self.annulus, self.vertices, tuple(edges), self.cut)

    def with_weights(self, weights: dict[str, Any]) -> "Network":
        """Rebind edge weights by edge id (rationals or Symbols).

        Geometry is untouched, so any cached geometric sign data carries
        over to the new network.
        """
        new_edges = []
        for e in self.edges:
            w = weights.get(e.id, e.weight)
            if not isinstance(w, Symbol):
                w = w if QQ.contains(w) else rational(w)
            new_edges.append(Edge(e.id, e.tail, e.head, w, e.polyline))
        out = self.with_edges(new_edges)
        if "_sign_cache" in self.__dict__:
            out.__dict__["_sign_cache"] = self.__dict__["_sign_cache"]
        return out

    def symbols(self) -> list[str]:
        names = {e.weight.name for e in self.edges if isinstance(e.weight, Symbol)}
        return sorted(names)

    # -- serialization -----------------------------------------------------

    def to_obj(self) -> dict:
        def weight_obj(w):
            return {"symbol": w.name} if isinstance(w, Symbol) else format_rational(w)

        return {
            "annulus": {
                "inner_radius": format_rational(self.annulus.inner_radius),
                "outer_radius": format_rational(self.annulus.outer_radius),
            },
            "cut": self.cut.to_obj(),
            "vertices": [{"id": v.id, "kind": v.kind, "pos": v.pos.to_obj()} for v in self.vertices],
            "edges": [
                {
                    "id": e.id,
                    "tail": e.tail,
                    "head": e.head,
                    "weight": weight_obj(e.weight),
                    "polyline": e.polyline.to_obj(),
                }
                for e in self.edges
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=1)

    @staticmethod
    def from_obj(obj: dict) -> "Network":
        ann = AnnulusSpec.of(obj["annulus"]["inner_radius"], obj["annulus"]["outer_radius"])
        cut = Polyline.of(obj["cut"])
        vertices = tuple(Vertex(v["id"], v["kind"], Point.of(*v["pos"])) for v in obj["vertices"])
        edges = []
        for e in obj["edges"]:
            w = e["weight"]
            weight: Any = Symbol(w["symbol"]) if isinstance(w, dict) else rational(w)
            edges.append(Edge(e["id"], e["tail"], e["head"], weight, Polyline.of(e["polyline"])))
        return Network(ann, vertices, tuple(edges), cut)

    @staticmethod
    def from_json(text: str) -> "Network":
        return Network.from_obj(json.loads(text))


# ---------------------------------------------------------------------------
# validation


def _bbox(points: Sequence[Point]):
    xs = [float(p.x) for p in points]
    ys = [float(p.y) for p in points]
    return min(xs), min(ys), max(xs), max(ys)


def _bbox_overlap(b1, b2, pad: float = 1e-9) -> bool:
    return not (b1[2] < b2[0] - pad or b2[2] < b1[0] - pad or b1[3] < b2[1] - pad or b2[3] < b1[1] - pad)


def _polyline_self_ok(pl: Polyline) -> bool:
    segs = list(pl.segments())
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            a, b = segs[i]
            c, d = segs[j]
            adjacent = b == c or a == d or (pl.closed and j == len(segs) - 1 and i == 0)
            try:
                hit = segment_crossing(a, b, c, d)
            except GeometryError:
                if adjacent:
                    continue  # shared joint contact is fine
                return False
            if hit is not None:
                return False
    return True


def _segment_contact(a: Point, b: Point, c: Point, d: Point, allowed_points: set[Point], crossings_ok: bool):
    """None when clean, else a description string for this segment pair."""
    shared_end = {a, b} & {c, d}
    if shared_end and shared_end <= allowed_points:
        # segments meeting at a declared common vertex: only make sure
        # they do not overlap collinearly through it
        e1 = (b - a) if a in shared_end else (a - b)
        e2 = (d - c) if c in shared_end else (c - d)
        if cross(e1, e2) == 0 and dot(e1, e2) > 0:
            return "collinear overlap at shared vertex"
        return None
    try:
        hit = segment_crossing(a, b, c, d)
    except GeometryError:
        return "non-transversal contact"
    if hit is not None and not crossings_ok:
        return "interior crossing"
    return None


def _pair_contacts(p1: Polyline, p2: Polyline, allowed_points: set[Point], crossings_ok: bool) -> list[str]:
    """Check two polylines touch only at allowed shared endpoints.

    Proper interior crossings are tolerated iff crossings_ok; any other
    contact (endpoint on interior, collinear overlap) is reported.
    """
    issues = []
    if not _bbox_overlap(_bbox(p1.points), _bbox(p2.points)):
        return issues
    for a, b in p1.segments():
        for c, d in p2.segments():
            issue = _segment_contact(a, b, c, d, allowed_points, crossings_ok)
            if issue:
                issues.append(issue)
    return issues


class SegmentGrid:
    """Uniform spatial hash of segments for near-linear pairwise sweeps.

    The cell size adapts to the first segments seen, so grids work equally
    for unit-scale and compiler-scale coordinates.
    """

    def __init__(self, cell: float | None = None):
        self.cell = cell
        self.cells: dict[tuple[int, int], list] = {}
        self.items: list = []

    def _ensure_cell(self, a: Point, b: Point):
        if self.cell is None:
            extent = max(abs(float(a.x)), abs(float(a.y)), abs(float(b.x)), abs(float(b.y)), 1.0)
            self.cell = extent / 16.0

    def _span(self, a: Point, b: Point):
        c = self.cell
        x0, x1 = sorted((float(a.x), float(b.x)))
        y0, y1 = sorted((float(a.y), float(b.y)))
        return (int(x0 // c), int(x1 // c), int(y0 // c), int(y1 // c))

    @staticmethod
    def _fbox(a: Point, b: Point):
        ax, ay, bx, by = float(a.x), float(a.y), float(b.x), float(b.y)
        return (min(ax, bx) - 1e-12, min(ay, by) - 1e-12, max(ax, bx) + 1e-12, max(ay, by) + 1e-12)

    def add(self, key, a: Point, b: Point):
        self._ensure_cell(a, b)
        idx = len(self.items)
        self.items.append((key, a, b, self._fbox(a, b)))
        gx0, gx1, gy0, gy1 = self._span(a, b)
        for gx in range(gx0, gx1 + 1):
            for gy in range(gy0, gy1 + 1):
                self.cells.setdefault((gx, gy), []).append(idx)

    def candidates(self, a: Point, b: Point):
        """Stored segments whose float boxes meet the query's box."""
        self._ensure_cell(a, b)
        qx0, qy0, qx1, qy1 = self._fbox(a, b)
        gx0, gx1, gy0, gy1 = self._span(a, b)
        seen: set[int] = set()
        items = self.items
        for gx in range(gx0, gx1 + 1):
            for gy in range(gy0, gy1 + 1):
                for idx in self.cells.get((gx, gy), ()):
                    if idx in seen:
                        continue
                    seen.add(idx)
                    key, c, d, (x0, y0, x1, y1) = items[idx]
                    if x1 < qx0 or qx1 < x0 or y1 < qy0 or qy1 < y0:
                        continue
                    yield key, c, d


def validate(n: Network) -> list[str]:
    """Return every violated network invariant, with offending ids."""
    errs: list[str] = []
    ann = n.annulus

    seen_ids: set[str] = set()
    for v in n.vertices:
        if v.id in seen_ids:
            errs.append(f"vertex {v.id}: duplicate id")
        seen_ids.add(v.id)
        circ = n.circle_of(v)
        if v.kind in BOUNDARY_KINDS:
            if circ is None:
                errs.append(f"vertex {v.id}: boundary vertex not on a boundary circle")
        elif v.kind in INTERNAL_KINDS:
            if not point_in_annulus(v.pos, ann, strict=True):
                errs.append(f"vertex {v.id}: internal vertex not strictly inside the annulus")
        else:
            errs.append(f"vertex {v.id}: unknown kind {v.kind}")
    positions: dict[Point, str] = {}
    for v in n.vertices:
        if v.pos in positions:
            errs.append(f"vertices {positions[v.pos]},{v.id}: coincident positions")
        positions[v.pos] = v.id

    seen_eids: set[str] = set()
    for e in n.edges:
        if e.id in seen_eids:
            errs.append(f"edge {e.id}: duplicate id")
        seen_eids.add(e.id)
        tail = n.vertex_map.get(e.tail)
        head = n.vertex_map.get(e.head)
        if tail is None or head is None:
            errs.append(f"edge {e.id}: dangling endpoint")
            continue
        if e.polyline.points[0] != tail.pos or e.polyline.points[-1] != head.pos:
            errs.append(f"edge {e.id}: polyline does not join its endpoints")
            continue
        for p in e.polyline.points[1:-1]:
            if not point_in_annulus(p, ann, strict=True):
                errs.append(f"edge {e.id}: polyline joint outside the open annulus")
        for a, b in e.polyline.segments():
            if not segment_stays_in_annulus(a, b, ann):
                errs.append(f"edge {e.id}: segment leaves the annulus")
        if not _polyline_self_ok(e.polyline):
            errs.append(f"edge {e.id}: self-intersecting polyline")
        for vtx, direction in ((tail, e.polyline.first_dir()), (head, -e.polyline.last_dir())):
            if vtx.kind in BOUNDARY_KINDS and dot(vtx.pos, direction) == 0:
                errs.append(f"edge {e.id}: tangent to the boundary circle at {vtx.id}")

    # degrees
    for v in n.vertices:
        outs = n.out_edges.get(v.id, ())
        ins = n.in_edges.get(v.id, ())
        if v.kind == SOURCE and (len(outs) != 1 or len(ins) != 0):
            errs.append(f"vertex {v.id}: source must have out-degree 1 and in-degree 0")
        if v.kind == SINK and (len(ins) != 1 or len(outs) != 0):
            errs.append(f"vertex {v.id}: sink must have in-degree 1 and out-degree 0")
        if v.kind == WHITE and (len(outs) + len(ins) != 3 or len(ins) != 1):
            errs.append(f"vertex {v.id}: internal degree != 3 or white in-degree != 1")
        if v.kind == BLACK and (len(outs) + len(ins) != 3 or len(outs) != 1):
            errs.append(f"vertex {v.id}: internal degree != 3 or black out-degree != 1")

    # planarity: no two edge interiors cross, and all contacts are at shared
    # vertices; a spatial hash keeps the sweep near-linear on large networks
    vertex_points = {v.pos for v in n.vertices}
    grid = SegmentGrid()
    for e in n.edges:
        for si, (a, b) in enumerate(e.polyline.segments()):
            for (other_id, other_si), c, d in grid.candidates(a, b):
                if other_id == e.id:
                    continue
                issue = _segment_contact(c, d, a, b, vertex_points, crossings_ok=False)
                if issue:
                    errs.append(f"edges {other_id},{e.id}: planarity violation ({issue})")
            grid.add((e.id, si), a, b)

    # the cut
    cut = n.cut
    if not point_on_circle(cut.points[0], ann.inner_radius):
        errs.append("cut: first point must lie on the inner circle")
    if not point_on_circle(cut.points[-1], ann.outer_radius):
        errs.append("cut: last point must lie on the outer circle")
    for p in cut.points[1:-1]:
        if not point_in_annulus(p, ann, strict=True):
            errs.append("cut: interior joint outside the open annulus")
    for a, b in cut.segments():
        if not segment_stays_in_annulus(a, b, ann):
            errs.append("cut: segment leaves the annulus")
    if not _polyline_self_ok(cut):
        errs.append("cut: self-intersecting")
    for v in n.vertices:
        if v.pos in (cut.points[0], cut.points[-1]):
            errs.append(f"vertex {v.id}: coincides with a cut base point")
    for e in n.edges:
        for issue in _pair_contacts(e.polyline, cut, set(), crossings_ok=True):
            errs.append(f"edge {e.id} vs cut: {issue}")
    for v in n.vertices:
        for a, b in cut.segments():
            if cross(b - a, v.pos - a) == 0 and dot(v.pos - a, b - a) >= 0 and dot(v.pos - b, a - b) >= 0:
                errs.append(f"vertex {v.id}: lies on the cut")
    return errs


# ---------------------------------------------------------------------------
# boundary labeling


@dataclass(frozen=True)
class BoundaryLabeling:
    """Labels b_1..b_n: outer circle counterclockwise from the cut base point,
    then inner circle clockwise from its base point."""

    order: tuple[str, ...]  # vertex ids, position i holds b_{i+1}
    n1: int

    @property
    def n(self) -> int:
        return len(self.order)

    def label_of(self, vertex_id: str) -> int:
        return self.order.index(vertex_id) + 1

    def vertex_at(self, label: int) -> str:
        return self.order[label - 1]

    def index_sets(self, n: Network) -> tuple[list[int], list[int], list[int], list[int]]:
        """(I1, J1, I2, J2): source/sink labels on the outer/inner circles."""
        i1, j1, i2, j2 = [], [], [], []
        for pos, vid in enumerate(self.order, start=1):
            kind = n.vertex_map[vid].kind
            if pos <= self.n1:
                (i1 if kind == SOURCE else j1).append(pos)
            else:
                (i2 if kind == SOURCE else j2).append(pos)
        return i1, j1, i2, j2

    def sources(self, n: Network) -> list[int]:
        i1, _, i2, _ = self.index_sets(n)
        return i1 + i2

    def sinks(self, n: Network) -> list[int]:
        _, j1, _, j2 = self.index_sets(n)
        return j1 + j2


def _ccw_order_from(base: Point, points: list[tuple[Point, str]], clockwise: bool = False) -> list[str]:
    """Vertex ids sorted by (counter)clockwise angle starting just after base."""
    kb = angle_key(base)

    if clockwise:
        def key(item):
            ka = angle_key(item[0])
            return (0 if ka < kb else 1, _Rev(ka))
    else:
        def key(item):
            ka = angle_key(item[0])
            return (0 if ka > kb else 1, ka)

    return [vid for _, vid in sorted(points, key=key)]


class _Rev:
    __slots__ = ("k",)

    def __init__(self, k):
        self.k = k

    def __lt__(self, other: "_Rev") -> bool:
        return other.k < self.k

    def __eq__(self, other: object) -> bool:
        return isinstance(other, _Rev) and self.k == other.k


def label_boundary(n: Network) -> BoundaryLabeling:
    outer: list[tuple[Point, str]] = []
    inner: list[tuple[Point, str]] = []
    for v in n.boundary_vertices:
        circ = n.circle_of(v)
        if circ == "outer":
            outer.append((v.pos, v.id))
        elif circ == "inner":
            inner.append((v.pos, v.id))
        else:
            raise NetworkError(f"boundary vertex {v.id} not on a circle")
    outer_ids = _ccw_order_from(n.cut.points[-1], outer, clockwise=False)
    inner_ids = _ccw_order_from(n.cut.points[0], inner, clockwise=True)
    return BoundaryLabeling(tuple(outer_ids + inner_ids), n1=len(outer_ids))


# ---------------------------------------------------------------------------
# gauge action


@dataclass(frozen=True)
class GaugeAssignment:
    """Nonzero rescaling of internal vertices; boundary vertices are fixed at 1."""

    values: dict[str, Any]

    def value(self, n: Network, vertex_id: str):
        v = n.vertex_map[vertex_id]
        if v.kind in BOUNDARY_KINDS:
            return QQ.one
        return self.values.get(vertex_id, QQ.one)


def gauge_transform(n: Network, phi: GaugeAssignment) -> Network:
    """Multiply each edge (u, v) weight by phi(v)/phi(u)."""
    for val in phi.values.values():
        if not val:
            raise NetworkError("gauge values must be nonzero")
    new_edges = []
    for e in n.edges:
        if isinstance(e.weight, Symbol):
            raise NetworkError("bind symbolic weights before gauge transforms")
        w = e.weight * phi.value(n, e.head) / phi.value(n, e.tail)
        new_edges.append(Edge(e.id, e.tail, e.head, w, e.polyline))
    return n.with_edges(new_edges)


# ---------------------------------------------------------------------------
# rotation systems, faces, trails


def rotation_system(n: Network) -> dict[str, list[tuple[str, int]]]:
    """Counterclockwise cyclic order of edge-ends (edge id, +1 tail / -1 head) at each vertex."""
    rot: dict[str, list[tuple[Point, str, int]]] = {v.id: [] for v in n.vertices}
    for e in n.edges:
        rot[e.tail].append((e.polyline.first_dir(), e.id, +1))
        rot[e.head].append((-e.polyline.last_dir(), e.id, -1))
    out: dict[str, list[tuple[str, int]]] = {}
    for vid, ends in rot.items():
        ends.sort(key=lambda item: angle_key(item[0]))
        out[vid] = [(eid, side) for _, eid, side in ends]
    return out


@dataclass(frozen=True)
class Face:
    """A face of the embedding: the darts along its boundary, interior to the left.

    Darts are (edge id, +1/-1) for network edges and ("arc", circle, k) for
    boundary-circle arcs; ``unbounded`` marks faces whose boundary contains
    circle arcs.
    """

    darts: tuple[tuple, ...]
    unbounded: bool


def _face_darts(n: Network) -> list[Face]:
    # dart = ("e", edge_id, dir) with dir +1 tail->head; or ("a", circle, i, orient)
    # arcs: between consecutive boundary vertices on each circle (ccw order)
    arcs: dict[str, list[str]] = {"outer": [], "inner": []}
    for v in n.boundary_vertices:
        arcs[n.circle_of(v)].append(v.id)
    for circ in ("outer", "inner"):
        pts = [(n.vertex_map[vid].pos, vid) for vid in arcs[circ]]
        arcs[circ] = _ccw_order_from(_circle_anchor(n, circ), pts, clockwise=False)

    # incident dart-ends at each vertex: (direction, dart, is_outgoing)
    ends: dict[str, list[tuple[Point, tuple]]] = {v.id: [] for v in n.vertices}
    rev: dict[tuple, tuple] = {}
    heads: dict[tuple, str] = {}

    for e in n.edges:
        d_fwd = ("e", e.id, +1)
        d_bwd = ("e", e.id, -1)
        rev[d_fwd] = d_bwd
        rev[d_bwd] = d_fwd
        heads[d_fwd] = e.head
        heads[d_bwd] = e.tail
        ends[e.tail].append((e.polyline.first_dir(), d_fwd))
        ends[e.head].append((-e.polyline.last_dir(), d_bwd))

    for circ in ("outer", "inner"):
        ids = arcs[circ]
        for i, vid in enumerate(ids):
            nxt = ids[(i + 1) % len(ids)]
            d_ccw = ("a", circ, i, +1)  # vid -> nxt counterclockwise
            d_cw = ("a", circ, i, -1)
            rev[d_ccw] = d_cw
            rev[d_cw] = d_ccw
            heads[d_ccw] = nxt
            heads[d_cw] = vid
            p = n.vertex_map[vid].pos
            q = n.vertex_map[nxt].pos
            ends[vid].append((Point(-p.y, p.x), d_ccw))  # ccw tangent
            ends[nxt].append((Point(q.y, -q.x), d_cw))  # cw tangent

    order: dict[str, list[tuple]] = {}
    pos_in_order: dict[tuple, int] = {}
    for vid, lst in ends.items():
        lst.sort(key=lambda item: angle_key(item[0]))
        order[vid] = [d for _, d in lst]
        for i, d in enumerate(order[vid]):
            pos_in_order[d] = i

    def face_next(d: tuple) -> tuple:
        v = heads[d]
        lst = order[v]
        i = pos_in_order[rev[d]]
        return lst[(i - 1) % len(lst)]  # next clockwise = interior on the left

    faces: list[Face] = []
    unvisited = set(rev.keys())
    while unvisited:
        start = unvisited.pop()
        cycle = [start]
        d = face_next(start)
        while d != start:
            unvisited.discard(d)
            cycle.append(d)
            d = face_next(d)
        faces.append(Face(tuple(cycle), unbounded=any(c[0] == "a" for c in cycle)))

    # drop the two non-annulus regions: the disk inside the inner circle and
    # the unbounded outside; their boundary cycles consist purely of arcs
    def is_circle_only(f: Face, circ: str) -> bool:
        return all(c[0] == "a" and c[1] == circ for c in f.darts) and len(f.darts) > 0

    kept = []
    for f in faces:
        if is_circle_only(f, "inner") or is_circle_only(f, "outer"):
            continue
        kept.append(f)

    # a circle with no boundary vertices is invisible to the dart trace; the
    # face enclosing it still has that circle on its boundary, so flag it
    for circ in ("outer", "inner"):
        if arcs[circ] or not n.edges:
            continue
        d = _dart_facing_bare_circle(n, circ)
        if d is None:
            continue
        for i, f in enumerate(kept):
            if d in f.darts:
                kept[i] = Face(f.darts, unbounded=True)
                break
    return kept


def _dart_facing_bare_circle(n: Network, circ: str):
    """Dart of the face adjacent to a vertex-free boundary circle."""
    from .geometry import circle_point, crossing_point

    r = n.annulus.inner_radius if circ == "inner" else n.annulus.outer_radius
    sign = 1 if circ == "inner" else -1  # cast the ray into the annulus
    for t0 in (0, 1, -1, 2, -2, "inf", rational(1, 2), rational(-1, 2)):
        p0 = circle_point(r, t0)
        u = p0.scale(rational(sign))
        best = None
        degenerate = False
        for e in n.edges:
            for a, b in e.polyline.segments():
                d = b - a
                denom = cross(u, d)
                if denom == 0:
                    if cross(d, a - p0) == 0:
                        degenerate = True
                    continue
                t = cross(a - p0, d) / denom
                s = cross(a - p0, u) / denom
                if t <= 0:
                    continue
                if s == 0 or s == 1:
                    degenerate = True
                    continue
                if 0 < s < 1 and (best is None or t < best[0]):
                    side = sgn(cross(d, p0 - a))
                    best = (t, ("e", e.id, +1 if side > 0 else -1))
        if degenerate:
            continue
        if best is not None:
            return best[1]
        return None
    return None


def _circle_anchor(n: Network, circ: str) -> Point:
    return n.cut.points[-1] if circ == "outer" else n.cut.points[0]


def faces(n: Network) -> list[Face]:
    return _face_darts(n)


def face_weights(n: Network, fs: Optional[list[Face]] = None):
    """Weight of each face: product over boundary edges of w^(+1/-1).

    +1 when the edge direction agrees with the counterclockwise orientation
    of the face boundary (equivalently, the face lies to the edge's left).
    """
    fs = fs if fs is not None else faces(n)
    out = []
    for f in fs:
        y = QQ.one
        for d in f.darts:
            if d[0] != "e":
                continue
            e = n.edge_map[d[1]]
            if isinstance(e.weight, Symbol):
                raise NetworkError("bind symbolic weights before face weights")
            if not e.weight:
                raise NetworkError(f"edge {e.id}: zero weight")
            y = y * e.weight if d[2] == +1 else y / e.weight
        out.append((f, y))
    return out


def trail_weight(n: Network, trail: Sequence[str]):
    """Product of w_e over forward steps and 1/w_e over backward steps."""
    if len(trail) < 2:
        raise NetworkError("trail too short")
    for vid in (trail[0], trail[-1]):
        if n.vertex_map[vid].kind not in BOUNDARY_KINDS:
            raise NetworkError("trail endpoints must be boundary vertices")
    w = QQ.one
    for a, b in zip(trail, trail[1:]):
        fwd = next((e for e in n.out_edges[a] if e.head == b), None)
        if fwd is not None:
            w = w * fwd.weight
            continue
        bwd = next((e for e in n.in_edges[a] if e.tail == b), None)
        if bwd is None:
            raise NetworkError(f"broken trail at {a}->{b}")
        w = w / bwd.weight
    return w


def find_connecting_trail(n: Network) -> Optional[list[str]]:
    """Any undirected trail joining the outer and inner circles, or None."""
    outer = [v.id for v in n.boundary_vertices if n.circle_of(v) == "outer"]
    inner = {v.id for v in n.boundary_vertices if n.circle_of(v) == "inner"}
    if not outer or not inner:
        return None
    adj: dict[str, list[str]] = {v.id: [] for v in n.vertices}
    for e in n.edges:
        adj[e.tail].append(e.head)
        adj[e.head].append(e.tail)
    from collections import deque

    for start in outer:
        prev: dict[str, Optional[str]] = {start: None}
        dq = deque([start])
        while dq:
            cur = dq.popleft()
            if cur in inner:
                path = [cur]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return list(reversed(path))
            for nxt in adj[cur]:
                if nxt not in prev:
                    prev[nxt] = cur
                    dq.append(nxt)
    return None
