"""Grassmannian loops: extended matrices, Plücker minors, path reversal.

The boundary measurement matrix extends to a k x n matrix: the source
columns form the identity, and the sink column j carries (-1)^s(p, j) M_pq
where s(p, j) counts source labels strictly between i_p and j.  The sign
makes the minor on columns I(i_p -> j) equal M_pq on the nose, so the row
span is a well-defined rational loop in the Grassmannian with Plücker
coordinates normalized by x_I = 1.

Reversing a simple source-to-sink path (flip its edges, invert their
weights) moves the loop between charts: for paths that avoid the cut,
x_K(+-t) * M^P(j, i)(t) = x_K^P(t) with the minus sign exactly when the
endpoints lie on distinct circles.  ``check_pathrev`` verifies the
identity pointwise and ``chart_consistency`` compares chain-rule Poisson
brackets of Plücker ratios computed in the two charts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from .dual import Dual
from .fields import QQ, rational
from .geometry import GeometryError, segment_crossing
from .matrixops import Matrix
from .measurement import SignData, _Elim, measurement_field
from .network import Edge, Network, NetworkError, SINK, SOURCE, label_boundary, validate
from .poisson import BracketEngine, PoissonParams
from .ratfunc import RatFunc


class GrassmannError(ValueError):
    pass


@dataclass(frozen=True)
class ExtendedMatrix:
    """k x n matrix over rational functions whose I-columns are the identity."""

    field: Any
    I: tuple[int, ...]
    n: int
    columns: tuple[tuple[Any, ...], ...]  # n columns of height k

    @property
    def k(self) -> int:
        return len(self.I)

    def minor(self, K: Sequence[int]):
        if len(K) != self.k:
            raise GrassmannError("index set size must equal the source count")
        cols = [self.columns[j - 1] for j in sorted(K)]
        m = Matrix(self.field, self.k, self.k, [cols[c][r] for r in range(self.k) for c in range(self.k)])
        return m.det()


def _sign_between(I: Sequence[int], a: int, b: int) -> int:
    lo, hi = (a, b) if a < b else (b, a)
    count = sum(1 for i in I if lo < i < hi)
    return -1 if count % 2 else 1


def _extended_from_table(field, n: Network, labeling, table) -> ExtendedMatrix:
    I = sorted(labeling.sources(n))
    J = sorted(labeling.sinks(n))
    total = len(I) + len(J)
    cols: list[tuple] = []
    for label in range(1, total + 1):
        if label in I:
            p = I.index(label)
            cols.append(tuple(field.one if r == p else field.zero for r in range(len(I))))
        else:
            col = []
            for r, i in enumerate(I):
                key = (labeling.vertex_at(i), labeling.vertex_at(label))
                val = table.get(key, field.zero)
                sign = _sign_between(I, i, label)
                col.append(val if sign > 0 else -val)
            cols.append(tuple(col))
    return ExtendedMatrix(field, tuple(I), total, tuple(cols))


def extended_matrix(n: Network) -> ExtendedMatrix:
    """Extended boundary matrix; the one-swap minor identity is asserted."""
    field, weights = measurement_field(n)
    sd = SignData(n)
    table = _Elim(field, sd, weights).solve()
    ext = _extended_from_table(field, n, sd.labeling, table)
    I = ext.I
    J = [j for j in range(1, ext.n + 1) if j not in I]
    for p, i in enumerate(I):
        for j in J:
            K = sorted(set(I) - {i} | {j})
            key = (sd.labeling.vertex_at(i), sd.labeling.vertex_at(j))
            expected = table.get(key, field.zero)
            if ext.minor(K) != expected:
                raise GrassmannError(f"minor identity failed at (i={i}, j={j})")
    return ext


def plucker(n: Network, K: Sequence[int]):
    """Exact Plücker coordinate x_K of the network's Grassmannian loop."""
    ext = extended_matrix(n)
    return ext.minor(K)


def plucker_chart(n: Network) -> dict[tuple[int, ...], Any]:
    """All Plücker coordinates, keyed by sorted k-subsets of the labels."""
    ext = extended_matrix(n)
    return {K: ext.minor(K) for K in itertools.combinations(range(1, ext.n + 1), ext.k)}


# ---------------------------------------------------------------------------
# path reversal


@dataclass(frozen=True)
class PathReversalRecord:
    edge_ids: tuple[str, ...]
    source_label: int
    sink_label: int
    t_sign: int  # +1 same circle, -1 distinct circles


def _path_record(n: Network, edge_ids: Sequence[str]) -> PathReversalRecord:
    edges = [n.edge_map[eid] for eid in edge_ids]
    for e1, e2 in zip(edges, edges[1:]):
        if e1.head != e2.tail:
            raise NetworkError("edges are not consecutive")
    visited = [edges[0].tail] + [e.head for e in edges]
    if len(set(visited)) != len(visited):
        raise NetworkError("path must be simple")
    src = n.vertex_map[edges[0].tail]
    snk = n.vertex_map[edges[-1].head]
    if src.kind != SOURCE or snk.kind != SINK:
        raise NetworkError("path must run from a source to a sink")
    lab = label_boundary(n)
    t_sign = 1 if n.circle_of(src) == n.circle_of(snk) else -1
    return PathReversalRecord(tuple(edge_ids), lab.label_of(src.id), lab.label_of(snk.id), t_sign)


def path_avoids_cut(n: Network, edge_ids: Sequence[str]) -> bool:
    """No geometric crossings at all between the path's edges and the cut."""
    for eid in edge_ids:
        for a, b in n.edge_map[eid].polyline.segments():
            for c, d in n.cut.segments():
                try:
                    if segment_crossing(a, b, c, d) is not None:
                        return False
                except GeometryError:
                    return False
    return True


def reverse_path(n: Network, edge_ids: Sequence[str]) -> Network:
    """Reverse a simple source-to-sink path, inverting its edge weights."""
    record = _path_record(n, edge_ids)
    on_path = set(record.edge_ids)
    new_edges = []
    for e in n.edges:
        if e.id not in on_path:
            new_edges.append(e)
            continue
        if not e.weight:
            raise NetworkError(f"edge {e.id}: zero weight cannot be inverted")
        w = e.weight if isinstance(e.weight, str) else QQ.one / e.weight
        new_edges.append(Edge(e.id, e.head, e.tail, w, e.polyline.reversed()))
    # endpoints swap roles
    src_id = n.edge_map[edge_ids[0]].tail
    snk_id = n.edge_map[edge_ids[-1]].head
    new_vertices = []
    for v in n.vertices:
        if v.id == src_id:
            new_vertices.append(type(v)(v.id, SINK, v.pos))
        elif v.id == snk_id:
            new_vertices.append(type(v)(v.id, SOURCE, v.pos))
        else:
            new_vertices.append(v)
    out = Network(n.annulus, tuple(new_vertices), tuple(new_edges), n.cut)
    bad = validate(out)
    if bad:
        raise NetworkError(f"reversal produced an invalid network: {bad}")
    return out


def check_pathrev(n: Network, edge_ids: Sequence[str], K: Sequence[int], t0) -> bool:
    """Verify x_K(t^P t0) * M^P(j, i)(t0) == x_K^P(t0)."""
    record = _path_record(n, edge_ids)
    if not path_avoids_cut(n, edge_ids):
        raise NetworkError("path intersects the cut")
    t0 = rational(t0)
    ext = extended_matrix(n)
    x_k = ext.minor(K)
    if not ext.minor(sorted(ext.I)):
        raise GrassmannError("x_I vanished")
    rev = reverse_path(n, edge_ids)
    ext_rev = extended_matrix(rev)
    x_k_rev = ext_rev.minor(K)
    from .measurement import boundary_measurement

    m_rev = boundary_measurement(rev, record.sink_label, record.source_label)
    if not m_rev:
        raise GrassmannError("M(i, j) vanishes identically")
    lhs = x_k.eval(t0 if record.t_sign > 0 else -t0) * m_rev.eval(t0)
    rhs = x_k_rev.eval(t0)
    return lhs == rhs


# ---------------------------------------------------------------------------
# chart consistency of the induced brackets


def _dual_extended(engine: BracketEngine, flag) -> ExtendedMatrix:
    table = engine._table(flag)
    return _extended_from_table(engine.dual, engine.network, engine.labeling, table)


def plucker_ratio_bracket(
    n: Network,
    params: PoissonParams,
    K1: Sequence[int],
    K2: Sequence[int],
    t,
    s,
    denominator: Optional[Sequence[int]] = None,
    assignment=None,
    engine: Optional[BracketEngine] = None,
) -> Any:
    """{x_K1 / x_D, x_K2 / x_D} by the chain rule over flags, at (t, s).

    The denominator set D defaults to this network's own source set; pass
    another chart's set to express that chart's coordinate functions here.
    """
    eng = engine or BracketEngine(n, assignment)
    t = rational(t)
    s = rational(s)
    field, weights = measurement_field(n)
    sd = eng.sd
    base_table = _Elim(field, sd, weights).solve()
    base_ext = _extended_from_table(field, n, sd.labeling, base_table)
    I = sorted(denominator) if denominator is not None else sorted(base_ext.I)

    def ratio_and_partial(flag, K, point):
        dual_ext = _dual_extended(eng, flag)
        mK = dual_ext.minor(K)
        mI = dual_ext.minor(I)
        # (x_K / x_I)' = (x_K' x_I - x_K x_I') / x_I^2
        vK, dK = mK.a, mK.b
        vI, dI = mI.a, mI.b
        val = vK.eval(point) / vI.eval(point)
        der = (dK.eval(point) * vI.eval(point) - vK.eval(point) * dI.eval(point)) / (vI.eval(point) ** 2)
        return val, der

    total = QQ.zero
    for vid, order in eng.flags.items():
        kind = n.vertex_map[vid].kind
        for a, b in itertools.combinations(range(1, 4), 2):
            coef = params.coeff(kind, a, b)
            if not coef:
                continue
            xa = eng.assignment.value((vid, a))
            xb = eng.assignment.value((vid, b))
            _, da1 = ratio_and_partial((vid, a), K1, t)
            _, db1 = ratio_and_partial((vid, b), K1, t)
            _, da2 = ratio_and_partial((vid, a), K2, s)
            _, db2 = ratio_and_partial((vid, b), K2, s)
            term = da1 * db2 - db1 * da2
            if term:
                total = total + coef * xa * xb * term
    return total


def chart_consistency(
    n: Network,
    edge_ids: Sequence[str],
    params: PoissonParams,
    K1: Sequence[int],
    K2: Sequence[int],
    t,
    s,
) -> bool:
    """Compare the induced bracket of two Plücker ratios across the two charts.

    The bracket of (x_K1/x_I, x_K2/x_I) computed in this network's chart at
    (t, s) must agree with the bracket computed in the path-reversed
    network's chart at (t^P t, t^P s).
    """
    record = _path_record(n, edge_ids)
    if not path_avoids_cut(n, edge_ids):
        raise NetworkError("path intersects the cut")
    t = rational(t)
    s = rational(s)
    lab = label_boundary(n)
    I = sorted(lab.sources(n))
    sgn = record.t_sign
    b_here = plucker_ratio_bracket(n, params, K1, K2, sgn * t, sgn * s, denominator=I)
    rev = reverse_path(n, edge_ids)
    b_there = plucker_ratio_bracket(rev, params, K1, K2, t, s, denominator=I)
    return b_here == b_there
