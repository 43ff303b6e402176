"""Compile rational matrix functions into networks realizing them.

Scalar atoms are monomial spirals: a single edge from the outer to the
inner circle winding |d| times around the annulus, crossing the cut once
per winding, measuring a * lam^d after an exact sign calibration.  Gadget
combinators build everything else:

* series concatenation glues the m sinks of one network to the m sources
  of another (sink i to source m+1-i, cuts aligned on the positive x-axis)
  and multiplies matrices through the antidiagonal permutation;
* the direct sum nests scalar operands in concentric rings and wires
  boundary slots radially, measuring the antidiagonal matrix of the
  operands; wire/ring crossings are resolved by the identity gadget;
* the feedback loop closes a scalar operand through a black/white pair,
  measuring F/(1+F) after an exact two-point calibration of the return
  weight; splitter/merger trees give sums.

All constructions self-calibrate: after building, the relevant entries are
measured and designated private edges are rescaled so the result is exact
(the corrections are always +-1 and the code asserts that).  The master
property measured(realize(F)) == F is asserted for every compilation.

Boundary slots are canonical: with c terminals on a circle, slot j sits at
angle 2*pi*j/(c+1) (sources counterclockwise on the outer circle, sinks
clockwise on the inner one land on the same geometric points, which is
what makes concatenation a pointwise gluing).  Cuts are always the
straight radial segment on the positive x-axis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any, Optional, Sequence

from .fields import QQ, FieldError, format_rational, rational
from .gadget import splice_crossings
from .geometry import AnnulusSpec, GeometryError, Point, Polyline, ccw_arc, circle_point
from .matrixops import Matrix
from .measurement import (
    MeasurementError,
    MeasurementMatrix,
    boundary_measurement,
    measurement_field,
    measurement_matrix,
)
from .network import Edge, Network, NetworkError, Vertex, label_boundary, validate
from .ratfunc import FunctionField, RatFunc

LAM_FIELD: FunctionField = measurement_field(
    Network(
        AnnulusSpec.of(1, 3),
        (Vertex("s", "source", Point.of(0, 3)), Vertex("t", "sink", Point.of(0, 1))),
        (Edge("e", "s", "t", rational(1), Polyline.of([(0, 3), (0, 1)])),),
        Polyline.of([(1, 0), (3, 0)]),
    )
)[0]


class CompileError(ValueError):
    pass


@dataclass
class CompileLog:
    steps: list[dict] = dc_field(default_factory=list)

    def note(self, gadget: str, detail: str) -> None:
        self.steps.append({"gadget": gadget, "detail": detail})


# ---------------------------------------------------------------------------
# slots, scaling, bookkeeping


def _slot_t(j: int, count: int):
    """tan(half angle) parameter of slot j among count, antisymmetric in j."""
    if 2 * j == count + 1:
        return "inf"
    if 2 * j > count + 1:
        t = _slot_t(count + 1 - j, count)
        return -t
    approx = Fraction(math.tan(math.pi * j / (count + 1))).limit_denominator(512)
    if approx <= 0:
        raise CompileError("slot parameter collapsed")
    return rational(approx.numerator, approx.denominator)


def slot_point(radius, j: int, count: int) -> Point:
    return circle_point(radius, _slot_t(j, count))


def _scale_network(n: Network, s) -> Network:
    s = rational(s)

    def sp(p: Point) -> Point:
        return Point(p.x * s, p.y * s)

    return Network(
        AnnulusSpec(n.annulus.inner_radius * s, n.annulus.outer_radius * s),
        tuple(Vertex(v.id, v.kind, sp(v.pos)) for v in n.vertices),
        tuple(Edge(e.id, e.tail, e.head, e.weight, Polyline(tuple(sp(p) for p in e.polyline.points))) for e in n.edges),
        Polyline(tuple(sp(p) for p in n.cut.points)),
    )


def _prefix(n: Network, pre: str) -> Network:
    return Network(
        n.annulus,
        tuple(Vertex(pre + v.id, v.kind, v.pos) for v in n.vertices),
        tuple(Edge(pre + e.id, pre + e.tail, pre + e.head, e.weight, e.polyline) for e in n.edges),
        n.cut,
    )


def _radial_cut(r_in, r_out) -> Polyline:
    return Polyline((Point(rational(r_in), QQ.zero), Point(rational(r_out), QQ.zero)))


def _scalar_value(n: Network) -> RatFunc:
    lab = label_boundary(n)
    srcs = lab.sources(n)
    snks = lab.sinks(n)
    if len(srcs) != 1 or len(snks) != 1:
        raise CompileError("scalar operand expected")
    return boundary_measurement(n, srcs[0], snks[0])


def _set_weight(n: Network, edge_id: str, w) -> Network:
    return n.with_weights({edge_id: w})


def _scale_edge_weight(n: Network, edge_id: str, factor) -> Network:
    return n.with_weights({edge_id: n.edge_map[edge_id].weight * factor})


def _terminal_edge(n: Network, vertex_id: str) -> Edge:
    v = n.vertex_map[vertex_id]
    return (n.out_edges[v.id] + n.in_edges[v.id])[0]


def _check(n: Network, where: str) -> Network:
    bad = validate(n)
    if bad:
        raise CompileError(f"{where}: invalid construction: {bad[:4]}")
    return n


# ---------------------------------------------------------------------------
# scalar atoms


def scalar_monomial(a, d: int, log: Optional[CompileLog] = None) -> Network:
    """Network with one edge measuring a * lam^d (a != 0)."""
    a = rational(a)
    if not a:
        raise CompileError("monomial coefficient must be nonzero")
    r_in, r_out = rational(1), rational(3)
    src = slot_point(r_out, 1, 1)  # (-3, 0)
    snk = slot_point(r_in, 1, 1)  # (-1, 0)
    pts: list[Point] = [src]
    if d == 0:
        pts.append(snk)
    else:
        # polygonal spiral through diagonal points, radius shrinking; each
        # winding crosses the positive x-axis (the cut) once, transversally
        steps = 4 * abs(d)
        hi, lo = rational(12, 5), rational(3, 2)
        diag = [(1, 1), (-1, 1), (-1, -1), (1, -1)]  # ccw quarters
        orient = -1 if d > 0 else 1  # clockwise winding crosses downward (+1 each)
        c = rational(5, 7)
        for k in range(steps + 1):
            rad = (hi + (lo - hi) * k / steps) * c
            dx, dy = diag[(1 + orient * k) % 4]
            pts.append(Point(rad * dx, rad * dy))
        pts.append(snk)
    n = Network(
        AnnulusSpec(r_in, r_out),
        (Vertex("src", "source", src), Vertex("snk", "sink", snk)),
        (Edge("e", "src", "snk", QQ.one, Polyline(tuple(pts))),),
        _radial_cut(r_in, r_out),
    )
    measured = _scalar_value(n)
    target = LAM_FIELD.monomial(a, d)
    correction = target / measured
    if not correction.is_constant():
        raise CompileError(f"monomial winding produced {measured.to_obj()}")
    n = _set_weight(n, "e", correction.num.coeffs[0] if correction.num.coeffs else QQ.zero)
    if log:
        log.note("monomial spiral", f"coefficient {format_rational(a)}, power {d}")
    return n


def constant_network(a, log: Optional[CompileLog] = None) -> Network:
    return scalar_monomial(a, 0, log)


def zero_network(log: Optional[CompileLog] = None) -> Network:
    """Two parallel routes tuned to cancel exactly: measures 0."""
    r_in, r_out = rational(1), rational(3)
    src = slot_point(r_out, 1, 1)
    snk = slot_point(r_in, 1, 1)
    W = Point.of("-23/10", 0)
    B = Point.of("-17/10", 0)
    up = Point.of(-2, "2/5")
    dn = Point.of(-2, "-2/5")
    vs = (
        Vertex("src", "source", src),
        Vertex("snk", "sink", snk),
        Vertex("W", "white", W),
        Vertex("B", "black", B),
    )
    es = (
        Edge("e0", "src", "W", QQ.one, Polyline((src, W))),
        Edge("p1", "W", "B", QQ.one, Polyline((W, up, B))),
        Edge("p2", "W", "B", QQ.one, Polyline((W, dn, B))),
        Edge("e1", "B", "snk", QQ.one, Polyline((B, snk))),
    )
    n = Network(AnnulusSpec(r_in, r_out), vs, es, _radial_cut(r_in, r_out))
    # the measurement is linear in w_p2: M(w) = m_a + w * m_b
    m_at_1 = _scalar_value(n)
    m_at_2 = _scalar_value(_set_weight(n, "p2", rational(2)))
    m_b = m_at_2 - m_at_1
    m_a = m_at_1 - m_b
    if not m_b:
        raise CompileError("zero network: degenerate routes")
    w = -m_a / m_b
    if not w.is_constant():
        raise CompileError("zero network: nonconstant correction")
    n = _set_weight(n, "p2", w.num.coeffs[0])
    if log:
        log.note("cancelling pair", "exact zero function")
    return n


# ---------------------------------------------------------------------------
# concatenation


def concat(n1: Network, n2: Network, log: Optional[CompileLog] = None, check: bool = False) -> Network:
    """Glue n1's inner sinks to n2's outer sources (sink i to source m+1-i).

    Measures M_{n1} W0 M_{n2}; for scalars this is the product.
    """
    lab1 = label_boundary(n1)
    lab2 = label_boundary(n2)
    sinks1 = [lab1.vertex_at(l) for l in range(lab1.n1 + 1, lab1.n + 1)]
    if any(n1.vertex_map[v].kind != "sink" for v in sinks1):
        raise CompileError("first operand must have all its inner vertices be sinks")
    sources2 = [lab2.vertex_at(l) for l in range(1, lab2.n1 + 1)]
    if any(n2.vertex_map[v].kind != "source" for v in sources2):
        raise CompileError("second operand must have all its outer vertices be sources")
    m = len(sinks1)
    if m != len(sources2) or m == 0:
        raise CompileError("arity mismatch")
    s = n1.annulus.inner_radius / n2.annulus.outer_radius
    a = _prefix(n1, "a.")
    b = _prefix(_scale_network(n2, s), "b.")
    pair = {}
    for i, snk in enumerate(sinks1, start=1):
        src = sources2[m - i]
        p1 = n1.vertex_map[snk].pos
        p2 = b.vertex_map["b." + src].pos
        if p1 != p2:
            raise CompileError(f"terminals misaligned at sink {snk} / source {src}")
        pair["a." + snk] = "b." + src
    dead = set(pair) | set(pair.values())
    vertices = [v for v in list(a.vertices) + list(b.vertices) if v.id not in dead]
    edges = []
    fused = {}
    for snk_id, src_id in pair.items():
        e = a.in_edges[snk_id][0]
        f = b.out_edges[src_id][0]
        pts = tuple(list(e.polyline.points) + list(f.polyline.points[1:]))
        edges.append(Edge(f"{e.id}+{f.id}", e.tail, f.head, e.weight * f.weight, Polyline(pts)))
        fused[e.id] = fused[f.id] = True
    for e in list(a.edges) + list(b.edges):
        if e.id not in fused:
            edges.append(e)
    out = Network(
        AnnulusSpec(b.annulus.inner_radius, a.annulus.outer_radius),
        tuple(vertices),
        tuple(edges),
        _radial_cut(b.annulus.inner_radius, a.annulus.outer_radius),
    )
    if log:
        log.note("series concatenation", f"{m} glued terminals")
    return _check(out, "concat") if check else out


# ---------------------------------------------------------------------------
# the direct sum of scalar operands


def _arc_between(radius, p_from: Point, p_to: Point, ccw: bool) -> list[Point]:
    if p_from == p_to:
        return [p_from]
    if ccw:
        return ccw_arc(radius, p_from, p_to)
    return list(reversed(ccw_arc(radius, p_to, p_from)))


def direct_sum_many(ops: Sequence[Network], log: Optional[CompileLog] = None, check: bool = False) -> Network:
    """Nest scalar operands in rings; slot i feeds operand i which exits at
    the inner slot paired with it, measuring the antidiagonal matrix with
    the operands on it (row i, column r+1-i)."""
    r = len(ops)
    if r == 0:
        raise CompileError("empty direct sum")
    gap = rational(21, 20)
    r_in = rational(1)
    inner_zone = rational(13, 10)
    # multiplicative stacking, innermost operand first
    ratios = [op.annulus.inner_radius / op.annulus.outer_radius for op in ops]
    bounds = []
    level = inner_zone
    for rho in reversed(ratios):
        lo = level * gap
        hi = lo / rho
        bounds.append((lo, hi))
        level = hi * gap * gap
    bounds.reverse()
    r_out = level * gap
    vertices: list[Vertex] = []
    edges: list[Edge] = []
    sign_fix_edges: list[str] = []
    delta_in = _fresh_offset()
    delta_out = _fresh_offset()
    for i, op in enumerate(ops, start=1):
        lo, hi = bounds[i - 1]
        scaled = _prefix(_scale_network(op, hi / op.annulus.outer_radius), f"r{i}.")
        lab = label_boundary(op)
        src_id = f"r{i}." + lab.vertex_at(1)
        snk_id = f"r{i}." + lab.vertex_at(2)
        src_edge = scaled.out_edges[src_id][0]
        snk_edge = scaled.in_edges[snk_id][0]
        theta_pt_out = slot_point(r_out, i, r)
        theta_pt_in = slot_point(r_in, i, r)
        rho_in = hi * gap  # sweep band just above this ring
        rho_out = lo / gap  # sweep band just below
        # descents run slightly off the slot ray (only the endpoints sit on
        # it), so junction points of nested assemblies on the same canonical
        # ray are never hit head-on
        unit_in = _offset_unit(i, r, +1, delta_in)
        unit_out = _offset_unit(i, r, -1, delta_out)
        band_in_start = Point(unit_in.x * rho_in, unit_in.y * rho_in)
        band_out_end = Point(unit_out.x * rho_out, unit_out.y * rho_out)
        desc_in = Point(unit_in.x * r_out * rational(49, 50), unit_in.y * r_out * rational(49, 50))
        desc_out = Point(unit_out.x * r_in * rational(51, 50), unit_out.y * r_in * rational(51, 50))
        top_pt = Point(-rho_in, QQ.zero)
        bot_pt = Point(-rho_out, QQ.zero)
        # a slot in the upper half plane reaches the 180-degree ray
        # counterclockwise; a lower one clockwise (and conversely going back)
        ccw_in = not _slot_is_below(i, r)
        sweep_in = _arc_between(rho_in, band_in_start, top_pt, ccw=ccw_in)
        sweep_out = _arc_between(rho_out, bot_pt, band_out_end, ccw=not ccw_in)
        in_pts = [theta_pt_out, desc_in] + sweep_in + [Point(-hi, QQ.zero)]
        out_pts = [Point(-lo, QQ.zero)] + sweep_out + [desc_out, theta_pt_in]
        in_vertex = Vertex(f"in{i}", "source", theta_pt_out)
        out_vertex = Vertex(f"out{i}", "sink", theta_pt_in)
        vertices.extend(v for v in scaled.vertices if v.id not in (src_id, snk_id))
        vertices.extend([in_vertex, out_vertex])
        if src_edge.id == snk_edge.id:
            # single-edge operand: one fused wire carries it end to end
            edges.extend(e for e in scaled.edges if e.id != src_edge.id)
            edges.append(
                Edge(
                    f"win{i}",
                    f"in{i}",
                    f"out{i}",
                    src_edge.weight,
                    Polyline(tuple(_dedup(in_pts + list(src_edge.polyline.points[1:-1]) + out_pts))),
                )
            )
        else:
            wire_in = Edge(
                f"win{i}",
                f"in{i}",
                src_edge.head,
                src_edge.weight,
                Polyline(tuple(_dedup(in_pts + list(src_edge.polyline.points[1:])))),
            )
            wire_out = Edge(
                f"wout{i}",
                snk_edge.tail,
                f"out{i}",
                snk_edge.weight,
                Polyline(tuple(_dedup(list(snk_edge.polyline.points[:-1]) + out_pts))),
            )
            edges.extend(e for e in scaled.edges if e.id not in (src_edge.id, snk_edge.id))
            edges.extend([wire_in, wire_out])
        sign_fix_edges.append(f"in{i}")
    vertices, edges = splice_crossings(vertices, edges, _radial_cut(r_in, r_out))
    out = Network(AnnulusSpec(r_in, r_out), tuple(vertices), tuple(edges), _radial_cut(r_in, r_out))
    if check:
        out = _check(out, "direct sum")
    # exact sign calibration per through line
    lab = label_boundary(out)
    targets = [_scalar_value(op) for op in ops]
    for i in range(1, r + 1):
        src_label = lab.label_of(f"in{i}")
        snk_label = lab.label_of(f"out{i}")
        got = boundary_measurement(out, src_label, snk_label)
        if not targets[i - 1]:
            if got:
                raise CompileError("zero operand leaked a value")
            continue
        corr = targets[i - 1] / got
        if not corr.is_constant():
            raise CompileError(f"direct sum line {i} off by {corr.to_obj()}")
        first = out.out_edges[f"in{i}"][0]
        out = _scale_edge_weight(out, first.id, corr.num.coeffs[0])
    if log:
        log.note("nested direct sum", f"{r} operands on the antidiagonal")
    return out


_OFFSET_SEQ = [0]


def _fresh_offset():
    """A small rational angle offset, distinct for every assembly built."""
    _OFFSET_SEQ[0] += 1
    return rational(1, 64 + 8 * (_OFFSET_SEQ[0] % 997))


def _offset_unit(i: int, count: int, side: int, delta) -> Point:
    """Unit-circle point at a small angular offset from slot i's ray.

    Distinct offsets per assembly keep long radial descents off every other
    assembly's rays, so crossings stay generic.
    """
    t = _slot_t(i, count)
    if t == "inf":
        # the ray at 180 degrees: nudge via a large-magnitude parameter
        big = QQ.one / delta
        return circle_point(QQ.one, -big if side > 0 else big)
    return circle_point(QQ.one, t + (delta if side > 0 else -delta))


def _dedup(points: list[Point]) -> list[Point]:
    out = [points[0]]
    for p in points[1:]:
        if p != out[-1]:
            out.append(p)
    return out


def _slot_is_below(i: int, count: int) -> bool:
    """True when slot i lies in the lower half plane (angle > 180 degrees)."""
    return 2 * i > count + 1


def direct_sum(n1: Network, n2: Network, log: Optional[CompileLog] = None) -> Network:
    """Two scalar operands: measures [[0, F1], [F2, 0]]."""
    return direct_sum_many([n1, n2], log)


# ---------------------------------------------------------------------------
# splitter / merger / sum / feedback


def _splitter(log: Optional[CompileLog] = None) -> Network:
    """One outer source to two inner sinks, both lines measuring 1."""
    r_in, r_out = rational(1), rational(3)
    src = slot_point(r_out, 1, 1)
    W = Point.of(-2, 0)
    s1 = slot_point(r_in, 1, 2)
    s2 = slot_point(r_in, 2, 2)
    mid1 = Point(s1.x * rational(3, 2), s1.y * rational(3, 2))
    mid2 = Point(s2.x * rational(3, 2), s2.y * rational(3, 2))
    vs = (
        Vertex("src", "source", src),
        Vertex("t1", "sink", s1),
        Vertex("t2", "sink", s2),
        Vertex("W", "white", W),
    )
    es = (
        Edge("e0", "src", "W", QQ.one, Polyline((src, W))),
        Edge("b1", "W", "t1", QQ.one, Polyline((W, mid1, s1))),
        Edge("b2", "W", "t2", QQ.one, Polyline((W, mid2, s2))),
    )
    n = Network(AnnulusSpec(r_in, r_out), vs, es, _radial_cut(r_in, r_out))
    for eid, snk in (("b1", 3), ("b2", 2)):
        lab = label_boundary(n)
        got = boundary_measurement(n, 1, lab.label_of("t1" if eid == "b1" else "t2"))
        corr = LAM_FIELD.one / got
        if not corr.is_constant():
            raise CompileError("splitter winding error")
        n = _scale_edge_weight(n, eid, corr.num.coeffs[0])
    return n


def _merger(log: Optional[CompileLog] = None) -> Network:
    """Two outer sources into one inner sink, both lines measuring 1."""
    r_in, r_out = rational(1), rational(3)
    s1 = slot_point(r_out, 1, 2)
    s2 = slot_point(r_out, 2, 2)
    B = Point.of(-2, 0)
    snk = slot_point(r_in, 1, 1)
    mid1 = Point(s1.x * rational(5, 6), s1.y * rational(5, 6))
    mid2 = Point(s2.x * rational(5, 6), s2.y * rational(5, 6))
    vs = (
        Vertex("s1", "source", s1),
        Vertex("s2", "source", s2),
        Vertex("snk", "sink", snk),
        Vertex("B", "black", B),
    )
    es = (
        Edge("a1", "s1", "B", QQ.one, Polyline((s1, mid1, B))),
        Edge("a2", "s2", "B", QQ.one, Polyline((s2, mid2, B))),
        Edge("e1", "B", "snk", QQ.one, Polyline((B, snk))),
    )
    n = Network(AnnulusSpec(r_in, r_out), vs, es, _radial_cut(r_in, r_out))
    for eid, src in (("a1", "s1"), ("a2", "s2")):
        lab = label_boundary(n)
        got = boundary_measurement(n, lab.label_of(src), lab.label_of("snk"))
        corr = LAM_FIELD.one / got
        if not corr.is_constant():
            raise CompileError("merger winding error")
        n = _scale_edge_weight(n, eid, corr.num.coeffs[0])
    return n


def add(n1: Network, n2: Network, log: Optional[CompileLog] = None) -> Network:
    """Scalar sum: split, run through the direct sum, merge."""
    s = direct_sum_many([n1, n2], log)
    out = concat(_splitter(log), concat(s, _merger(log), log), log)
    if log:
        log.note("sum", "splitter + direct sum + merger")
    return out


def feedback(n: Network, negate: bool = False, log: Optional[CompileLog] = None) -> Network:
    """Close a scalar operand through a loop: measures F/(1+F) (or its negative).

    The return weight and input weight are calibrated exactly from two
    measurements, so the result is F/(1+F) on the nose; 1 + F == 0 raises
    "singular feedback".
    """
    F = _scalar_value(n)
    if LAM_FIELD.one + F == LAM_FIELD.zero:
        raise CompileError("singular feedback")
    gap = rational(23, 20)
    hi = rational(2)
    rho = n.annulus.inner_radius / n.annulus.outer_radius
    lo = hi * rho
    r_b = hi * gap
    r_w = lo / gap
    r_out = r_b * gap
    r_in = r_w / gap
    scaled = _prefix(_scale_network(n, hi / n.annulus.outer_radius), "f.")
    lab = label_boundary(n)
    src_id = "f." + lab.vertex_at(1)
    snk_id = "f." + lab.vertex_at(2)
    src_edge = scaled.out_edges[src_id][0]
    snk_edge = scaled.in_edges[snk_id][0]
    src = slot_point(r_out, 1, 1)
    snk = slot_point(r_in, 1, 1)
    Bp = Point(-r_b, QQ.zero)
    Wp = Point(-r_w, QQ.zero)
    top_w = Point(QQ.zero, r_w)
    top_b = Point(QQ.zero, r_b)
    ret_pts = (
        [Wp]
        + _arc_between(r_w, Wp, top_w, ccw=False)[1:]
        + [top_b]
        + ccw_arc(r_b, top_b, Bp)[1:]
    )
    vertices = [v for v in scaled.vertices if v.id not in (src_id, snk_id)]
    vertices += [
        Vertex("src", "source", src),
        Vertex("snk", "sink", snk),
        Vertex("B", "black", Bp),
        Vertex("W", "white", Wp),
    ]
    edges = [e for e in scaled.edges if e.id not in (src_edge.id, snk_edge.id)]
    edges += [
        Edge("ein", "src", "B", QQ.one, Polyline((src, Bp))),
        Edge("eout", "W", "snk", QQ.one, Polyline((Wp, snk))),
        Edge("ret", "W", "B", QQ.one, Polyline(tuple(_dedup(ret_pts)))),
    ]
    if src_edge.id == snk_edge.id:
        # single-edge operand: one through edge from B to W
        edges.append(
            Edge(
                "fwd",
                "B",
                "W",
                src_edge.weight,
                Polyline(
                    tuple(
                        _dedup(
                            [Bp, Point(-hi, QQ.zero)]
                            + list(src_edge.polyline.points[1:-1])
                            + [Point(-lo, QQ.zero), Wp]
                        )
                    )
                ),
            )
        )
    else:
        edges += [
            Edge(
                "fwd",
                "B",
                src_edge.head,
                src_edge.weight,
                Polyline(tuple(_dedup([Bp, Point(-hi, QQ.zero)] + list(src_edge.polyline.points[1:])))),
            ),
            Edge(
                "bwd",
                snk_edge.tail,
                "W",
                snk_edge.weight,
                Polyline(tuple(_dedup(list(snk_edge.polyline.points[:-1]) + [Point(-lo, QQ.zero), Wp]))),
            ),
        ]
    vertices, edges = splice_crossings(vertices, edges, _radial_cut(r_in, r_out))
    out = Network(AnnulusSpec(r_in, r_out), tuple(vertices), tuple(edges), _radial_cut(r_in, r_out))
    ret_edge = out.out_edges["W"]
    ret_first = next(e for e in ret_edge if e.head != "snk")

    def measure(w_r):
        return _scalar_value(out.with_weights({ret_first.id: w_r}))

    if not F:
        result = out.with_weights({ret_first.id: QQ.one})
        got = _scalar_value(result)
        if got:
            raise CompileError("feedback of zero leaked a value")
        return result
    # M(w) = c1 F / (1 - c2 w F): recover c1, c2 from two samples
    samples = []
    for w in (rational(1), rational(2), rational(3), rational(1, 2)):
        try:
            m = measure(w)
        except (MeasurementError, FieldError):
            continue
        if m:
            samples.append((w, m))
        if len(samples) == 2:
            break
    if len(samples) < 2:
        raise CompileError("feedback calibration failed")
    (w1, m1), (w2, m2) = samples
    # 1/M = 1/(c1 F) - (c2/c1) w
    y1 = LAM_FIELD.one / m1
    y2 = LAM_FIELD.one / m2
    slope = (y2 - y1) / LAM_FIELD.coerce(w2 - w1)
    intercept = y1 - slope * LAM_FIELD.coerce(w1)
    c1 = LAM_FIELD.one / (intercept * F)
    c2 = -slope * c1
    if not c1.is_constant() or not c2.is_constant():
        raise CompileError("feedback calibration not constant")
    c1v = c1.num.coeffs[0]
    c2v = c2.num.coeffs[0]
    w_ret = -QQ.one / c2v
    w_in = QQ.one / c1v
    if negate:
        w_in = -w_in
    out = out.with_weights({ret_first.id: w_ret, "ein": w_in})
    if log:
        log.note("feedback loop", "measures F/(1+F)" + (" negated" if negate else ""))
    return out


# ---------------------------------------------------------------------------
# scalar realization


def realize_scalar(f: RatFunc, log: Optional[CompileLog] = None, check: bool = True) -> Network:
    """A network in the one-source/one-sink separated class measuring f."""
    f = LAM_FIELD.coerce(f) if not LAM_FIELD.contains(f) else f
    if not f:
        n = zero_network(log)
    else:
        num, den = f.num, f.den
        v = den.valuation()
        c0 = den.coeffs[v]
        # f = P / Q with Q(0) = 1: P = num / (c0 lam^v), Q = den / (c0 lam^v)
        monos = [(c / c0, k - v) for k, c in enumerate(num.coeffs) if c]
        parts = [scalar_monomial(a, d, log) for a, d in monos]
        n = parts[0]
        for p in parts[1:]:
            n = add(n, p, log)
        q_monos = [(c / c0, k - v) for k, c in enumerate(den.coeffs) if c and k != v]
        if q_monos:
            gparts = [scalar_monomial(a, d, log) for a, d in q_monos]
            g = gparts[0]
            for p in gparts[1:]:
                g = add(g, p, log)
            inv = add(constant_network(1, log), feedback(g, negate=True, log=log), log)
            n = concat(n, inv, log)
    if check:
        got = _scalar_value(n)
        if got != f:
            raise CompileError(f"scalar round trip failed: {got.to_obj()} != {f.to_obj()}")
        _check(n, "realize_scalar")
    if log:
        log.note("scalar realization", "monomial sum over a unit-constant-term denominator")
    return n


# ---------------------------------------------------------------------------
# matrix realization


@dataclass(frozen=True)
class RationalMatrixSpec:
    k: int
    m: int
    entries: tuple[tuple[RatFunc, ...], ...]

    @staticmethod
    def from_obj(obj: dict) -> "RationalMatrixSpec":
        k, m = obj["k"], obj["m"]
        rows = []
        for r in range(k):
            row = []
            for c in range(m):
                num, den = obj["entries"][r][c]
                row.append(LAM_FIELD.from_num_den([rational(x) for x in num], [rational(x) for x in den]))
            rows.append(tuple(row))
        return RationalMatrixSpec(k, m, tuple(rows))

    def to_obj(self) -> dict:
        def coeffs(p):
            return [format_rational(c) for c in p.coeffs]

        return {
            "k": self.k,
            "m": self.m,
            "entries": [[(coeffs(e.num), coeffs(e.den)) for e in row] for row in self.entries],
        }


def _fanout_network(k: int, m: int, log: Optional[CompileLog] = None) -> Network:
    """k sources, k*m sinks; source i feeds sink labels (k-i)m+1 .. (k-i+1)m.

    Inner labels run clockwise, so label q sits at geometric slot km+1-q;
    the blocks then line up angularly with their sources and the fans never
    cross each other or the cut.
    """
    r_in, r_out = rational(1), rational(2)
    band = rational(3, 2)
    km = k * m
    vertices: list[Vertex] = []
    edges: list[Edge] = []
    for i in range(1, k + 1):
        src_pt = slot_point(r_out, i, k)
        vertices.append(Vertex(f"s{i}", "source", src_pt))
        slots = [(i - 1) * m + j for j in range(1, m + 1)]  # labels km+1-slot
        drop = {s: slot_point(r_in, s, km) for s in slots}
        at_band = {s: slot_point(band, s, km) for s in slots}
        for s in slots:
            vertices.append(Vertex(f"t{s}", "sink", drop[s]))
        if m == 1:
            s = slots[0]
            edges.append(Edge(f"w{i}", f"s{i}", f"t{s}", QQ.one, Polyline((src_pt, at_band[s], drop[s]))))
            continue
        for s in slots[:-1]:
            vertices.append(Vertex(f"c{i}.{s}", "white", at_band[s]))
        entry = slots[0]
        # approach along a higher arc so the entry chord cannot dip into the
        # comb band (the source angle is always >= the entry angle)
        high = rational(7, 4)
        src_high = Point(src_pt.x * high / r_out, src_pt.y * high / r_out)
        unit_e = slot_point(QQ.one, entry, km)
        entry_high = Point(unit_e.x * high, unit_e.y * high)
        approach = [src_pt, src_high] + _arc_between(high, src_high, entry_high, ccw=False) + [at_band[entry]]
        edges.append(Edge(f"w{i}", f"s{i}", f"c{i}.{entry}", QQ.one, Polyline(tuple(_dedup(approach)))))
        for idx, s in enumerate(slots[:-1]):
            nxt = slots[idx + 1]
            edges.append(Edge(f"d{i}.{s}", f"c{i}.{s}", f"t{s}", QQ.one, Polyline((at_band[s], drop[s]))))
            if idx < len(slots) - 2:
                edges.append(
                    Edge(f"n{i}.{s}", f"c{i}.{s}", f"c{i}.{nxt}", QQ.one,
                         Polyline(tuple(_dedup(_arc_between(band, at_band[s], at_band[nxt], ccw=True)))))
                )
            else:
                edges.append(
                    Edge(f"d{i}.{nxt}", f"c{i}.{s}", f"t{nxt}", QQ.one,
                         Polyline(tuple(_dedup(_arc_between(band, at_band[s], at_band[nxt], ccw=True) + [drop[nxt]]))))
                )
    n = Network(AnnulusSpec(r_in, r_out), tuple(vertices), tuple(edges), _radial_cut(r_in, r_out))
    n = _fix_unit_lines(n, side="sink")
    if log:
        log.note("broadcast block", f"{k} sources fanned to {km} sinks")
    return n


def _collect_network(k: int, m: int, log: Optional[CompileLog] = None) -> Network:
    """k*m sources, m sinks; source label i feeds sink label ((i-1) mod m) + 1."""
    r_in, r_out = rational(1), rational(2)
    km = k * m
    vertices: list[Vertex] = []
    edges: list[Edge] = []
    for i in range(1, km + 1):
        vertices.append(Vertex(f"s{i}", "source", slot_point(r_out, i, km)))
    sink_slot = {j: m + 1 - j for j in range(1, m + 1)}  # label -> geometric slot
    for j in range(1, m + 1):
        vertices.append(Vertex(f"t{j}", "sink", slot_point(r_in, sink_slot[j], m)))
    for j in range(1, m + 1):
        band = rational(5, 4) + rational(j, 4 * (m + 1))
        members = [j + r_ * m for r_ in range(k)]
        at_band = {i: slot_point(band, i, km) for i in members}
        sink_pt = slot_point(r_in, sink_slot[j], m)
        if k == 1:
            i = members[0]
            edges.append(
                Edge(f"w{j}", f"s{i}", f"t{j}", QQ.one,
                     Polyline(tuple(_dedup([slot_point(r_out, i, km), at_band[i], sink_pt]))))
            )
            continue
        for i in members[1:]:
            vertices.append(Vertex(f"b{j}.{i}", "black", at_band[i]))
        first = members[0]
        edges.append(
            Edge(f"drop{j}.{first}", f"s{first}", f"b{j}.{members[1]}", QQ.one,
                 Polyline(tuple(_dedup([slot_point(r_out, first, km), at_band[first]]
                                        + _arc_between(band, at_band[first], at_band[members[1]], ccw=True)))))
        )
        for idx in range(1, k):
            i = members[idx]
            edges.append(
                Edge(f"drop{j}.{i}", f"s{i}", f"b{j}.{i}", QQ.one,
                     Polyline((slot_point(r_out, i, km), at_band[i])))
            )
            if idx < k - 1:
                nxt = members[idx + 1]
                edges.append(
                    Edge(f"n{j}.{i}", f"b{j}.{i}", f"b{j}.{nxt}", QQ.one,
                         Polyline(tuple(_dedup(_arc_between(band, at_band[i], at_band[nxt], ccw=True)))))
                )
            else:
                # descend to a private sub-band, travel to the sink's angle
                # without wrapping past the cut, then drop in
                sub = rational(21, 20) + rational(j, 8 * (m + 1))
                unit_m = slot_point(QQ.one, i, km)
                unit_s = slot_point(QQ.one, sink_slot[j], m)
                p_m = Point(unit_m.x * sub, unit_m.y * sub)
                p_s = Point(unit_s.x * sub, unit_s.y * sub)
                ccw_dir = rational(i, km + 1) < rational(sink_slot[j], m + 1)
                edges.append(
                    Edge(f"trunk{j}", f"b{j}.{i}", f"t{j}", QQ.one,
                         Polyline(tuple(_dedup([at_band[i], p_m]
                                                + _arc_between(sub, p_m, p_s, ccw=ccw_dir)
                                                + [sink_pt]))))
                )
    vertices, edges = splice_crossings(vertices, edges, _radial_cut(r_in, r_out))
    n = Network(AnnulusSpec(r_in, r_out), tuple(vertices), tuple(edges), _radial_cut(r_in, r_out))
    n = _fix_unit_lines(n, side="source")
    if log:
        log.note("collect block", f"{km} sources merged into {m} sinks")
    return n


def _fix_unit_lines(n: Network, side: str) -> Network:
    """Rescale private terminal edges so every nonzero measurement equals 1.

    side="sink" fixes each sink's unique in-edge (fan-outs: one nonzero per
    column); side="source" fixes each source's out-edge (fan-ins: one
    nonzero per row).
    """
    lab = label_boundary(n)
    mm = measurement_matrix(n)
    fixes = {}
    if side == "sink":
        for q, j in enumerate(mm.J):
            col = [mm.rows[p][q] for p in range(mm.k)]
            nz = [x for x in col if x]
            if not nz:
                continue
            if len(nz) > 1:
                raise CompileError("fan-out column with several sources")
            corr = LAM_FIELD.one / nz[0]
            if not corr.is_constant():
                raise CompileError("unit line has a winding defect")
            e = n.in_edges[lab.vertex_at(j)][0]
            fixes[e.id] = e.weight * corr.num.coeffs[0]
    else:
        for p, i in enumerate(mm.I):
            row = [mm.rows[p][q] for q in range(mm.m)]
            nz = [x for x in row if x]
            if not nz:
                continue
            if len(nz) > 1:
                raise CompileError("fan-in row with several sinks")
            corr = LAM_FIELD.one / nz[0]
            if not corr.is_constant():
                raise CompileError("unit line has a winding defect")
            e = n.out_edges[lab.vertex_at(i)][0]
            fixes[e.id] = e.weight * corr.num.coeffs[0]
    out = n.with_weights(fixes)
    mm2 = measurement_matrix(out)
    for p in range(mm2.k):
        for q in range(mm2.m):
            if mm2.rows[p][q] and mm2.rows[p][q] != LAM_FIELD.one:
                raise CompileError("unit matrix fix failed")
    return out


def realize_matrix(spec: RationalMatrixSpec, log: Optional[CompileLog] = None, check: bool = True) -> Network:
    """A separated network whose measurement matrix equals the given one."""
    k, m = spec.k, spec.m
    if k == 1 and m == 1:
        n = realize_scalar(spec.entries[0][0], log, check=check)
        return n
    diag_ops = [realize_scalar(spec.entries[r][c], log, check=False) for r in range(k) for c in range(m)]
    middle = direct_sum_many(diag_ops, log)
    a_net = _fanout_network(k, m, log)
    b_net = _collect_network(k, m, log)
    out = concat(a_net, concat(middle, b_net, log), log)
    if check:
        mm = measurement_matrix(out)
        if mm.k != k or mm.m != m:
            raise CompileError("realized matrix has wrong shape")
        for r in range(k):
            for c in range(m):
                if mm.rows[r][c] != spec.entries[r][c]:
                    raise CompileError(f"matrix round trip failed at ({r + 1},{c + 1})")
        _check(out, "realize_matrix")
    if log:
        log.note("matrix realization", f"{k}x{m} via broadcast, antidiagonal of scalars, collect")
    return out
