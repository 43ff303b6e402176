"""Cut and orientation transformations.

``move_cut_base`` slides one base point of the cut counterclockwise past
exactly one boundary vertex, rerouting the cut geometrically by a hugging
detour just inside the boundary circle.  Path weights respond by the
factor ((-1)^cross * lam)^(+1/-1) (sink/source at the passed vertex, sign
when its endpoints lie on distinct circles), which at the matrix level is
a cyclic shift with a +-lam weight on the wrapped line:

    moving the outer base past b_1 (a source):  M1 -> L+ M1,  M2 -> L- M2
    moving the outer base past b_1 (a sink):    M1 -> M1 L+^-1, M3 -> M3 L-^-1
    moving the inner base past b_n (a source):  M3 -> L-^T M3, M4 -> L+^T M4
    moving the inner base past b_n (a sink):    M2 -> M2 (L-^-1)^T, M4 -> M4 (L+^-1)^T

with L+/L- the cyclic-shift matrices carrying lam^-1 / -lam^-1 in the
corner.  (In the inner-base rules the +/- placement follows the weight
law for crossing paths; note the worked example w'_P1 = -lam w_P1 for a
cross-circle path into the passed sink.)

``reverse_cut`` conjugates the network by the circle swap
(x, y) -> k (x, -y) / (x^2 + y^2) with k = r_in * r_out and reverses the
cut; ``reverse_orientation`` mirrors across the x-axis.  Both leave the
underlying graph intact, relabel the boundary, and act on every
measurement by t -> 1/t.
"""

from __future__ import annotations

from typing import Any, Optional

from .fields import QQ, rational
from .geometry import (
    GeometryError,
    Point,
    Polyline,
    arc_point_between,
    angle_key,
    ccw_arc,
    circle_param,
    circle_point,
    cross,
    point_on_circle,
)
from .matrixops import Matrix
from .measurement import MeasurementMatrix, measurement_field
from .network import Edge, Network, NetworkError, Vertex, label_boundary, validate
from .ratfunc import FunctionField


# ---------------------------------------------------------------------------
# the shift matrices and the matrix-level transform


def lambda_shift(field: FunctionField, size: int, sign: int) -> Matrix:
    """Cyclic shift with sign * lam^-1 in the lower-left corner."""
    lam = field.gen
    corner = field.coerce(sign) / lam
    ents = []
    for r in range(size):
        for c in range(size):
            if r < size - 1 and c == r + 1:
                ents.append(field.one)
            elif r == size - 1 and c == 0:
                ents.append(corner)
            else:
                ents.append(field.zero)
    return Matrix(field, size, size, ents)


def moved_matrix(mm: MeasurementMatrix, which: str) -> MeasurementMatrix:
    """Predicted measurement matrix after moving the indicated base point.

    Entrywise form of the block rules quoted in the module docstring; the
    result is indexed by the new labels (sorted source/sink sets again).
    """
    n_total = len(mm.I) + len(mm.J)
    field = mm.field
    lam = field.gen

    if which == "outer":
        passed = 1
        if mm.n1 == 0:
            raise NetworkError("no outer boundary vertex to pass")

        def relabel(l: int) -> int:
            if l > mm.n1:
                return l
            return mm.n1 if l == 1 else l - 1

    elif which == "inner":
        passed = n_total
        if mm.n1 == n_total:
            raise NetworkError("no inner boundary vertex to pass")

        def relabel(l: int) -> int:
            if l <= mm.n1:
                return l
            return mm.n1 + 1 if l == n_total else l + 1

    else:
        raise ValueError("which must be 'inner' or 'outer'")

    passed_is_source = passed in mm.I

    def factor(i: int, j: int):
        if passed_is_source and i == passed:
            exp = -1
        elif (not passed_is_source) and j == passed:
            exp = +1
        else:
            return field.one
        other = j if passed_is_source else i
        same_circle = (other <= mm.n1) == (passed <= mm.n1)
        base = lam if same_circle else -lam
        return base ** exp

    new_I = sorted(relabel(i) for i in mm.I)
    new_J = sorted(relabel(j) for j in mm.J)
    inv_I = {relabel(i): i for i in mm.I}
    inv_J = {relabel(j): j for j in mm.J}
    rows = []
    for i_new in new_I:
        i = inv_I[i_new]
        row = []
        for j_new in new_J:
            j = inv_J[j_new]
            row.append(factor(i, j) * mm.by_labels(i, j))
        rows.append(tuple(row))
    return MeasurementMatrix(field, tuple(new_I), tuple(new_J), mm.n1, tuple(rows))


def block_moved_matrix(mm: MeasurementMatrix, which: str) -> MeasurementMatrix:
    """Same prediction via the four explicit block products (cross-check form)."""
    field = mm.field
    k1, m1 = mm.k1, mm.m1
    k2, m2 = mm.k - k1, mm.m - m1
    M = mm.to_matrix()
    rows_idx = list(range(mm.k))
    cols_idx = list(range(mm.m))
    M1 = M.submatrix(rows_idx[:k1], cols_idx[:m1])
    M2 = M.submatrix(rows_idx[:k1], cols_idx[m1:])
    M3 = M.submatrix(rows_idx[k1:], cols_idx[:m1])
    M4 = M.submatrix(rows_idx[k1:], cols_idx[m1:])
    n_total = len(mm.I) + len(mm.J)

    if which == "outer":
        if 1 in mm.I:
            Lp = lambda_shift(field, k1, +1)
            Lm = lambda_shift(field, k1, -1)
            M1, M2 = Lp * M1, Lm * M2
        else:
            Lp = lambda_shift(field, m1, +1)
            Lm = lambda_shift(field, m1, -1)
            M1, M3 = M1 * Lp.inverse(), M3 * Lm.inverse()
    else:
        if n_total in mm.I:
            Lp = lambda_shift(field, k2, +1)
            Lm = lambda_shift(field, k2, -1)
            M3, M4 = Lm.transpose() * M3, Lp.transpose() * M4
        else:
            Lp = lambda_shift(field, m2, +1)
            Lm = lambda_shift(field, m2, -1)
            M2, M4 = M2 * Lm.inverse().transpose(), M4 * Lp.inverse().transpose()

    ref = moved_matrix(mm, which)
    rows = []
    for p in range(mm.k):
        row = []
        for q in range(mm.m):
            if p < k1 and q < m1:
                row.append(M1[p, q])
            elif p < k1:
                row.append(M2[p, q - m1])
            elif q < m1:
                row.append(M3[p - k1, q])
            else:
                row.append(M4[p - k1, q - m1])
        rows.append(tuple(row))
    return MeasurementMatrix(field, ref.I, ref.J, mm.n1, tuple(rows))


# ---------------------------------------------------------------------------
# the geometric move


def _first_ccw_vertex(n: Network, circle: str) -> Vertex:
    base = n.cut.points[-1] if circle == "outer" else n.cut.points[0]
    cands = [v for v in n.boundary_vertices if n.circle_of(v) == circle]
    if not cands:
        raise NetworkError(f"no boundary vertex on the {circle} circle")
    kb = angle_key(base)

    def ccw_dist_key(v: Vertex):
        ka = angle_key(v.pos)
        return (0 if ka > kb else 1, ka)

    return min(cands, key=ccw_dist_key)


def move_cut_base(n: Network, which: str) -> Network:
    """Move the indicated cut base point counterclockwise past one vertex.

    The cut is rerouted by a crossing-free hugging detour just inside the
    relevant circle; the construction is retried with shrinking detour
    depth until the rerouted network validates and the crossing counts
    change exactly as the weight law demands (the passed vertex's edge by
    +1/-1, every other edge unchanged).
    """
    if which not in ("inner", "outer"):
        raise ValueError("which must be 'inner' or 'outer'")
    from .geometry import intersection_index

    radius = n.annulus.outer_radius if which == "outer" else n.annulus.inner_radius
    v = _first_ccw_vertex(n, which)
    circle_vs = sorted(
        (u for u in n.boundary_vertices if n.circle_of(u) == which),
        key=lambda u: angle_key(u.pos),
    )
    base_old = n.cut.points[-1] if which == "outer" else n.cut.points[0]
    # next circle feature counterclockwise past v (another vertex or the old base)
    feats = [u.pos for u in circle_vs if u.pos != v.pos] + [base_old]
    kb = angle_key(v.pos)
    feats.sort(key=lambda p: ((0 if angle_key(p) > kb else 1), angle_key(p)))
    base_new = arc_point_between(radius, v.pos, feats[0])

    old_inds = {e.id: intersection_index(e.polyline, n.cut) for e in n.edges}
    v_edge = (n.out_edges[v.id] + n.in_edges[v.id])[0]
    expected_delta = -1 if v.kind == "source" else +1

    avoid = tuple(u.pos for u in n.vertices)
    errors: list[str] = []
    for denom in (8, 32, 128, 512):
        delta = radius / denom
        s = (radius - delta) / radius if which == "outer" else (radius + delta) / radius
        try:
            hug = [p.scale(s) for p in ccw_arc(radius, base_old, base_new, avoid=avoid)]
            if which == "outer":
                pts = list(n.cut.points[:-1]) + hug + [base_new]
            else:
                pts = [base_new] + list(reversed(hug)) + list(n.cut.points[1:])
            new_cut = Polyline(tuple(pts))
            cand = Network(n.annulus, n.vertices, n.edges, new_cut)
            problems = [msg for msg in validate(cand) if "cut" in msg]
            if problems:
                errors = problems
                continue
            deltas = {e.id: intersection_index(e.polyline, new_cut) - old_inds[e.id] for e in n.edges}
            want = {e.id: (expected_delta if e.id == v_edge.id else 0) for e in n.edges}
            if deltas != want:
                errors = [f"unexpected crossing changes {deltas}"]
                continue
            return cand
        except GeometryError as exc:
            errors = [str(exc)]
            continue
    raise NetworkError(f"cut detour construction failed: {errors}")


# ---------------------------------------------------------------------------
# cut reversal and orientation reversal


def _subdivide(pl: Polyline, levels: int) -> Polyline:
    pts = list(pl.points)
    for _ in range(levels):
        out = []
        for a, b in zip(pts, pts[1:]):
            out.append(a)
            out.append(Point((a.x + b.x) / 2, (a.y + b.y) / 2))
        out.append(pts[-1])
        pts = out
    return Polyline(tuple(pts), pl.closed)


def _map_network(n: Network, f, new_cut_points, subdivide: int) -> Network:
    vertices = tuple(Vertex(v.id, v.kind, f(v.pos)) for v in n.vertices)
    edges = tuple(
        Edge(
            e.id,
            e.tail,
            e.head,
            e.weight,
            Polyline(tuple(f(p) for p in _subdivide(e.polyline, subdivide).points)),
        )
        for e in n.edges
    )
    return Network(n.annulus, vertices, edges, Polyline(tuple(new_cut_points)))


def reverse_cut(n: Network) -> Network:
    """Reverse the direction of the cut (swap the roles of the circles).

    Realized by the conformal involution (x, y) -> k (x, -y)/(x^2+y^2),
    k = r_in * r_out, which exchanges the boundary circles, followed by
    reversing the mapped cut.  Measurements satisfy M'(t) = M(1/t).
    """
    k = n.annulus.inner_radius * n.annulus.outer_radius

    def f(p: Point) -> Point:
        d = p.norm2()
        return Point(k * p.x / d, -k * p.y / d)

    from .geometry import intersection_index

    old_inds = {e.id: intersection_index(e.polyline, n.cut) for e in n.edges}
    for levels in (0, 1, 2, 3):
        cut_m = [f(p) for p in _subdivide(n.cut, levels).points]
        cand = _map_network(n, f, list(reversed(cut_m)), levels)
        if validate(cand):
            continue
        new_inds = {e.id: intersection_index(e.polyline, cand.cut) for e in cand.edges}
        if all(new_inds[eid] == -old_inds[eid] for eid in new_inds):
            return cand
    raise NetworkError("cut reversal mapping failed to validate")


def reverse_orientation(n: Network) -> Network:
    """Mirror the network across the x-axis (reverses both circle orientations).

    Measurements satisfy M'(t) = M(1/t); brackets change sign.
    """

    def f(p: Point) -> Point:
        return Point(p.x, -p.y)

    cand = _map_network(n, f, [f(p) for p in n.cut.points], 0)
    bad = validate(cand)
    if bad:
        raise NetworkError(f"mirror failed to validate: {bad}")
    return cand
