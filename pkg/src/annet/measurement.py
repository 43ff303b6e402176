"""Boundary measurements: exact path-series resummation and the path-sum oracle.

The weight of a boundary-to-boundary path P is

    w_P = (-1)^(c(C_P) - 1) * lam^(ind(P)) * prod_e w_e,

where c is the mod-2 rotation invariant of the closed curve obtained from P
(``close_path``) and ind is the signed crossing count with the cut.  The
boundary measurement M(i, j) is the sum of w_P over all (generally
infinitely many) paths from source b_i to sink b_j, resummed into a
rational function of lam.

Exact algorithm.  For a fixed generic probe direction, the corner-count
formula for c splits over the consecutive segment pairs of C_P, so the
sign of every path factors into

* a per-edge factor   (-1)^(corner count inside the edge polyline),
* a per-transition factor for each consecutive edge pair at an internal
  vertex, and
* a per-(source, sink) closure factor covering the appended arcs and the
  two junction corners.

With signs factored this way, the infinite path series is resummed by an
elimination recursion on the boundary vertices: repeatedly pick the
lowest-labeled boundary vertex with an internal neighbor and split that
neighbor.  A black neighbor of a source (and symmetrically a white
neighbor of a sink) produces the geometric-series denominator
1 - tau * M(i_u, j_u); a white neighbor of a source (black of a sink)
splits additively.  New boundary vertices land in the removed vertex's
slot, ordered by the rotation system at the split vertex.  Any admissible
split order yields the same canonical rational functions.

``series_oracle`` is the independent check: it enumerates actual paths up
to a length bound and computes every sign and crossing count from the raw
geometry, with no shared machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Optional, Sequence

from .fields import QQ, Field, FieldError
from .geometry import (
    GeometryError,
    Point,
    Polyline,
    concat_polylines,
    close_path,
    concordance,
    cone_contains,
    intersection_index,
    pick_probe,
    ccw_between,
)
from .matrixops import Matrix
from .network import (
    BoundaryLabeling,
    Network,
    NetworkError,
    SINK,
    SOURCE,
    Symbol,
    WHITE,
    label_boundary,
)
from .ratfunc import FunctionField, RatFunc, tower


class MeasurementError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# value field and weight binding


_NUMERIC_FIELD = FunctionField(QQ, "lam")
_TOWER_CACHE: dict[tuple[str, ...], tuple[Field, dict[str, Any]]] = {}


def symbol_field(symbols: Sequence[str]) -> tuple[Field, dict[str, Any]]:
    """QQ(sym_1, ..., sym_k, lam), cached so equal symbol lists share one field.

    Symbol-free networks use the dense canonical-form QQ(lam); symbolic
    ones use the sparse multivariate backend.
    """
    key = tuple(symbols)
    if key not in _TOWER_CACHE:
        if key:
            from .symfield import SymbolicField

            f = SymbolicField(key)
            _TOWER_CACHE[key] = (f, {name: f.generator(name) for name in key})
        else:
            _TOWER_CACHE[key] = (_NUMERIC_FIELD, {})
    return _TOWER_CACHE[key]


def measurement_field(n: Network) -> tuple[FunctionField, dict[str, Any]]:
    """The rational-function field measurements live in, plus per-edge weights.

    Numeric networks use QQ(lam); networks with symbolic weights use the
    iterated function field QQ(sym_1)...(sym_k)(lam) with symbols in sorted
    name order.  Fields are cached by symbol list, so every network with
    the same symbols shares one field instance and values combine freely.
    """
    field, gens = symbol_field(n.symbols())
    weights: dict[str, Any] = {}
    for e in n.edges:
        if isinstance(e.weight, Symbol):
            weights[e.id] = gens[e.weight.name]
        else:
            weights[e.id] = field.coerce(e.weight)
    return field, weights


# ---------------------------------------------------------------------------
# sign data extraction


@dataclass(frozen=True)
class EdgeSign:
    ind: int          # signed crossings with the cut
    corner_par: int   # probe corner count inside the polyline, mod 2
    din: Point        # first segment direction
    dout: Point       # last segment direction


class SignData:
    """Probe-factored sign data for one network (shared by all measurements)."""

    def __init__(self, n: Network):
        self.network = n
        self.labeling = label_boundary(n)
        dirs: list[Point] = []
        for e in n.edges:
            dirs.extend(e.polyline.directions())
        closure_pls: dict[tuple[str, str], Polyline] = {}
        vertex_points = tuple(v.pos for v in n.vertices)
        src_ids = [vid for vid in self.labeling.order if n.vertex_map[vid].kind == SOURCE]
        snk_ids = [vid for vid in self.labeling.order if n.vertex_map[vid].kind == SINK]
        for j in snk_ids:
            for i in src_ids:
                pl = _closure_polyline(n, j, i, vertex_points)
                closure_pls[(i, j)] = pl
                dirs.extend(pl.directions())
        self.probe = pick_probe(dirs)
        self.edge_sign: dict[str, EdgeSign] = {}
        for e in n.edges:
            par = 0
            ds = e.polyline.directions()
            for d1, d2 in zip(ds, ds[1:]):
                par += cone_contains(d1, d2, self.probe)
            self.edge_sign[e.id] = EdgeSign(
                ind=intersection_index(e.polyline, n.cut),
                corner_par=par & 1,
                din=e.polyline.first_dir(),
                dout=e.polyline.last_dir(),
            )
        # closure parity includes the two junction corners, which are fixed by
        # the unique out-edge of the source and in-edge of the sink
        self.closure_par: dict[tuple[str, str], int] = {}
        for (i, j), pl in closure_pls.items():
            out_edge = n.out_edges[i][0]
            in_edge = n.in_edges[j][0]
            ds = pl.directions()
            par = cone_contains(self.edge_sign[in_edge.id].dout, ds[0], self.probe)
            for d1, d2 in zip(ds, ds[1:]):
                par += cone_contains(d1, d2, self.probe)
            par += cone_contains(ds[-1], self.edge_sign[out_edge.id].din, self.probe)
            self.closure_par[(i, j)] = par & 1

    def turn_sign(self, e_in: str, e_out: str) -> int:
        """(-1)^(corner) for the transition from edge e_in into edge e_out."""
        c = cone_contains(self.edge_sign[e_in].dout, self.edge_sign[e_out].din, self.probe)
        return -1 if c else 1

    def kappa(self, i: str, j: str) -> int:
        """Closure sign factor (-1)^(closure corners - 1) for source i, sink j."""
        return 1 if self.closure_par[(i, j)] else -1


def _closure_polyline(n: Network, j: str, i: str, avoid: Sequence[Point]) -> Polyline:
    """Open polyline from sink j's position back to source i's per the closure rule.

    Built by closing a two-point scaffold path from i to j and stripping
    the scaffold, leaving exactly the appended arcs (and cut, when the
    endpoints lie on distinct circles).
    """
    vj = n.vertex_map[j]
    vi = n.vertex_map[i]
    if vi.pos == vj.pos:
        raise NetworkError("source and sink coincide")
    stub = Polyline((vi.pos, vj.pos))
    closed = close_path(stub, n.circle_of(vi), n.circle_of(vj), n.annulus, n.cut, avoid=avoid)
    pts = closed.points[1:] + (closed.points[0],)
    return Polyline(pts)


# ---------------------------------------------------------------------------
# elimination


@dataclass
class _WEdge:
    id: str
    tail: str
    head: str
    a: Any          # sign-absorbed modified weight, element of the value field
    din: Point
    dout: Point


class _Elim:
    """Working structure for the split recursion (iterative, sparse tables)."""

    def __init__(self, field: FunctionField, sd: SignData, weights: dict[str, Any]):
        n = sd.network
        self.field = field
        self.sd = sd
        self.order: list[str] = list(sd.labeling.order)
        self.role: dict[str, str] = {}
        self.edges: dict[str, _WEdge] = {}
        self.out_at: dict[str, list[str]] = {}
        self.in_at: dict[str, list[str]] = {}
        self.color: dict[str, str] = {v.id: v.kind for v in n.internal_vertices}
        self._fresh = 0
        lam = field.gen
        for e in n.edges:
            es = sd.edge_sign[e.id]
            a = weights[e.id] * lam ** es.ind
            if es.corner_par:
                a = -a
            self._add_edge(_WEdge(e.id, e.tail, e.head, a, es.din, es.dout))
        for v in n.boundary_vertices:
            self.role[v.id] = "src" if v.kind == SOURCE else "snk"

    def _add_edge(self, e: _WEdge) -> None:
        self.edges[e.id] = e
        self.out_at.setdefault(e.tail, []).append(e.id)
        self.in_at.setdefault(e.head, []).append(e.id)

    def _del_edge(self, eid: str) -> None:
        e = self.edges.pop(eid)
        self.out_at[e.tail].remove(eid)
        self.in_at[e.head].remove(eid)

    def _port_edge(self, pid: str) -> Optional[_WEdge]:
        eids = self.out_at.get(pid) or self.in_at.get(pid)
        return self.edges[eids[0]] if eids else None

    def _tau(self, e_in: _WEdge, e_out: _WEdge) -> int:
        c = cone_contains(e_in.dout, e_out.din, self.sd.probe)
        return -1 if c else 1

    def _fresh_port(self, base: str, role: str) -> str:
        self._fresh += 1
        return f"{base}~{role}{self._fresh}"

    def _insert_ports(self, slot: str, d0: Point, stub_dirs, ports) -> None:
        """Place two fresh ports in the removed port's slot.

        The port whose stub comes first in ccw order after the boundary
        edge's end direction d0 takes the label-after position (read off
        the rotation system at the split vertex).
        """
        first_is_0 = ccw_between(d0, stub_dirs[0], stub_dirs[1])
        after, before = (ports[0], ports[1]) if first_is_0 else (ports[1], ports[0])
        idx = self.order.index(slot)
        self.order[idx : idx + 1] = [before, after]

    def split_candidates(self) -> list[str]:
        out = []
        for pid in self.order:
            e = self._port_edge(pid)
            if e is None:
                continue
            other = e.head if self.role[pid] == "src" else e.tail
            if other in self.color:
                out.append(pid)
        return out

    def solve(self, pick: Optional[Callable[[list[str]], str]] = None) -> dict[tuple[str, str], Any]:
        ops = []
        while True:
            cands = self.split_candidates()
            if not cands:
                break
            pid = pick(cands) if pick else cands[0]
            ops.append(self._split(pid))
        table = self._base_table()
        for op in reversed(ops):
            table = op(table)
        return table

    def _base_table(self) -> dict[tuple[str, str], Any]:
        table: dict[tuple[str, str], Any] = {}
        one = self.field.one
        for e in self.edges.values():
            if self.role.get(e.tail) == "src" and self.role.get(e.head) == "snk":
                key = (e.tail, e.head)
                kap = self._kappa(e.tail, e.head)
                table[key] = table.get(key, self.field.zero) + kap * e.a
        return {k: v for k, v in table.items() if v}

    def _kappa(self, i: str, j: str):
        k = self.sd.closure_par.get((i, j))
        if k is None:
            return self.field.one  # fresh port pairs carry no closure factor
        return -self.field.one if k == 0 else self.field.one

    # -- the four split rules ---------------------------------------------

    def _split(self, pid: str):
        role = self.role[pid]
        e0 = self._port_edge(pid)
        u = e0.head if role == "src" else e0.tail
        color = self.color[u]
        if role == "src":
            return self._split_source_black(pid, e0, u) if color == "black" else self._split_source_white(pid, e0, u)
        return self._split_sink_white(pid, e0, u) if color == WHITE else self._split_sink_black(pid, e0, u)

    def _remove_port(self, pid: str) -> None:
        self.order.remove(pid)
        del self.role[pid]

    def _drop_dead(self, pid: str, e0: _WEdge, u: str, loop: _WEdge):
        self._del_edge(e0.id)
        self._del_edge(loop.id)
        self._remove_port(pid)
        del self.color[u]
        return lambda table: table

    def _split_source_black(self, pid: str, e0: _WEdge, u: str):
        ins = [self.edges[eid] for eid in self.in_at.get(u, []) if eid != e0.id]
        outs = [self.edges[eid] for eid in self.out_at.get(u, [])]
        e_plus = outs[0]
        if e_plus.tail == e_plus.head:  # self-loop: nothing past u reaches a sink
            return self._drop_dead(pid, e0, u, e_plus)
        e_minus = ins[0]
        tau0 = self._tau(e0, e_plus)
        tau_loop = self._tau(e_minus, e_plus)
        p_src = self._fresh_port(u, "src")
        p_snk = self._fresh_port(u, "snk")
        d0 = -e0.dout
        self._insert_ports(pid, d0, [e_plus.din, -e_minus.dout], [p_src, p_snk])
        del self.role[pid]
        self.role[p_src] = "src"
        self.role[p_snk] = "snk"
        a0 = e0.a
        self._del_edge(e0.id)
        self._del_edge(e_plus.id)
        self._del_edge(e_minus.id)
        del self.color[u]
        self._add_edge(_WEdge(e_plus.id, p_src, e_plus.head, e_plus.a, e_plus.din, e_plus.dout))
        self._add_edge(_WEdge(e_minus.id, e_minus.tail, p_snk, e_minus.a, e_minus.din, e_minus.dout))
        field = self.field
        kappa = self._kappa

        def combine(tab: dict[tuple[str, str], Any]) -> dict[tuple[str, str], Any]:
            loop_val = tab.get((p_src, p_snk), field.zero)
            den = field.one - field.coerce(tau_loop) * loop_val
            if not den:
                raise MeasurementError("non-generic weights")
            row = {j: v for (p, j), v in tab.items() if p == p_src and j != p_snk}
            col = {p: v for (p, j), v in tab.items() if j == p_snk and p != p_src}
            out: dict[tuple[str, str], Any] = {}
            for (p, j), v in tab.items():
                if p != p_src and j != p_snk:
                    out[(p, j)] = v
            for j, viuj in row.items():
                for p, vpj in col.items():
                    add = kappa(p, j) * field.coerce(tau_loop) * vpj * viuj / den
                    out[(p, j)] = out.get((p, j), field.zero) + add
                out[(pid, j)] = kappa(pid, j) * a0 * field.coerce(tau0) * viuj / den
            return {k: v for k, v in out.items() if v}

        return combine

    def _split_source_white(self, pid: str, e0: _WEdge, u: str):
        outs = [self.edges[eid] for eid in self.out_at.get(u, [])]
        e1, e2 = outs
        tau1 = self._tau(e0, e1)
        tau2 = self._tau(e0, e2)
        p1 = self._fresh_port(u, "src")
        p2 = self._fresh_port(u, "src")
        d0 = -e0.dout
        self._insert_ports(pid, d0, [e1.din, e2.din], [p1, p2])
        del self.role[pid]
        self.role[p1] = "src"
        self.role[p2] = "src"
        a0 = e0.a
        self._del_edge(e0.id)
        self._del_edge(e1.id)
        self._del_edge(e2.id)
        del self.color[u]
        self._add_edge(_WEdge(e1.id, p1, e1.head, e1.a, e1.din, e1.dout))
        self._add_edge(_WEdge(e2.id, p2, e2.head, e2.a, e2.din, e2.dout))
        field = self.field
        kappa = self._kappa

        def combine(tab):
            out: dict[tuple[str, str], Any] = {}
            for (p, j), v in tab.items():
                if p == p1:
                    add = kappa(pid, j) * a0 * field.coerce(tau1) * v
                    out[(pid, j)] = out.get((pid, j), field.zero) + add
                elif p == p2:
                    add = kappa(pid, j) * a0 * field.coerce(tau2) * v
                    out[(pid, j)] = out.get((pid, j), field.zero) + add
                else:
                    out[(p, j)] = out.get((p, j), field.zero) + v
            return {k: v for k, v in out.items() if v}

        return combine

    def _split_sink_white(self, pid: str, f0: _WEdge, u: str):
        ins = [self.edges[eid] for eid in self.in_at.get(u, [])]
        e_dag = ins[0]
        if e_dag.tail == e_dag.head:  # self-loop: u is unreachable
            return self._drop_dead(pid, f0, u, e_dag)
        outs = [self.edges[eid] for eid in self.out_at.get(u, []) if eid != f0.id]
        e_o = outs[0]
        tau_f = self._tau(e_dag, f0)
        tau_loop = self._tau(e_dag, e_o)
        p_snk = self._fresh_port(u, "snk")
        p_src = self._fresh_port(u, "src")
        d0 = f0.din
        self._insert_ports(pid, d0, [-e_dag.dout, e_o.din], [p_snk, p_src])
        del self.role[pid]
        self.role[p_snk] = "snk"
        self.role[p_src] = "src"
        a_f = f0.a
        self._del_edge(f0.id)
        self._del_edge(e_dag.id)
        self._del_edge(e_o.id)
        del self.color[u]
        self._add_edge(_WEdge(e_dag.id, e_dag.tail, p_snk, e_dag.a, e_dag.din, e_dag.dout))
        self._add_edge(_WEdge(e_o.id, p_src, e_o.head, e_o.a, e_o.din, e_o.dout))
        field = self.field
        kappa = self._kappa

        def combine(tab):
            loop_val = tab.get((p_src, p_snk), field.zero)
            den = field.one - field.coerce(tau_loop) * loop_val
            if not den:
                raise MeasurementError("non-generic weights")
            row = {j: v for (p, j), v in tab.items() if p == p_src and j != p_snk}
            col = {p: v for (p, j), v in tab.items() if j == p_snk and p != p_src}
            out: dict[tuple[str, str], Any] = {}
            for (p, j), v in tab.items():
                if p != p_src and j != p_snk:
                    out[(p, j)] = v
            for p, vpju in col.items():
                for j, viuj in row.items():
                    add = kappa(p, j) * field.coerce(tau_loop) * vpju * viuj / den
                    out[(p, j)] = out.get((p, j), field.zero) + add
                out[(p, pid)] = kappa(p, pid) * a_f * field.coerce(tau_f) * vpju / den
            return {k: v for k, v in out.items() if v}

        return combine

    def _split_sink_black(self, pid: str, f0: _WEdge, u: str):
        ins = [self.edges[eid] for eid in self.in_at.get(u, [])]
        e_a, e_b = ins
        tau_a = self._tau(e_a, f0)
        tau_b = self._tau(e_b, f0)
        pa = self._fresh_port(u, "snk")
        pb = self._fresh_port(u, "snk")
        d0 = f0.din
        self._insert_ports(pid, d0, [-e_a.dout, -e_b.dout], [pa, pb])
        del self.role[pid]
        self.role[pa] = "snk"
        self.role[pb] = "snk"
        a_f = f0.a
        self._del_edge(f0.id)
        self._del_edge(e_a.id)
        self._del_edge(e_b.id)
        del self.color[u]
        self._add_edge(_WEdge(e_a.id, e_a.tail, pa, e_a.a, e_a.din, e_a.dout))
        self._add_edge(_WEdge(e_b.id, e_b.tail, pb, e_b.a, e_b.din, e_b.dout))
        field = self.field
        kappa = self._kappa

        def combine(tab):
            out: dict[tuple[str, str], Any] = {}
            for (p, j), v in tab.items():
                if j == pa:
                    add = kappa(p, pid) * a_f * field.coerce(tau_a) * v
                    out[(p, pid)] = out.get((p, pid), field.zero) + add
                elif j == pb:
                    add = kappa(p, pid) * a_f * field.coerce(tau_b) * v
                    out[(p, pid)] = out.get((p, pid), field.zero) + add
                else:
                    out[(p, j)] = out.get((p, j), field.zero) + v
            return {k: v for k, v in out.items() if v}

        return combine


# ---------------------------------------------------------------------------
# public measurement API


@dataclass(frozen=True)
class MeasurementMatrix:
    """k x m matrix of boundary measurements with the two-circle block structure.

    Rows are indexed by the sorted source labels I, columns by the sorted
    sink labels J; entry (p, q) is M(i_p, j_q).  The split point n1 (count
    of boundary vertices on the outer circle) partitions rows into
    (k1, k2) and columns into (m1, m2) blocks.
    """

    field: FunctionField
    I: tuple[int, ...]
    J: tuple[int, ...]
    n1: int
    rows: tuple[tuple[Any, ...], ...]

    @property
    def k(self) -> int:
        return len(self.I)

    @property
    def m(self) -> int:
        return len(self.J)

    @property
    def k1(self) -> int:
        return sum(1 for i in self.I if i <= self.n1)

    @property
    def m1(self) -> int:
        return sum(1 for j in self.J if j <= self.n1)

    def entry(self, p: int, q: int):
        """1-based entry M_pq."""
        return self.rows[p - 1][q - 1]

    def by_labels(self, i: int, j: int):
        return self.rows[self.I.index(i)][self.J.index(j)]

    def to_matrix(self) -> Matrix:
        return Matrix.from_rows(self.field, [list(r) for r in self.rows]) if self.rows else Matrix(self.field, 0, 0, [])

    def map_entries(self, fn) -> "MeasurementMatrix":
        return MeasurementMatrix(self.field, self.I, self.J, self.n1, tuple(tuple(fn(x) for x in r) for r in self.rows))


def sign_data(n: Network) -> SignData:
    """Per-network geometric sign data, cached on the instance."""
    sd = n.__dict__.get("_sign_cache")
    if sd is None:
        sd = SignData(n)
        n.__dict__["_sign_cache"] = sd
    return sd


def _solve_tables(n: Network, pick=None) -> tuple[FunctionField, BoundaryLabeling, dict[tuple[str, str], Any]]:
    field, weights = measurement_field(n)
    sd = sign_data(n)
    elim = _Elim(field, sd, weights)
    table = elim.solve(pick=pick)
    return field, sd.labeling, table


def measurement_matrix(n: Network, pick=None) -> MeasurementMatrix:
    field, labeling, table = _solve_tables(n, pick=pick)
    srcs = sorted(labeling.sources(n))
    snks = sorted(labeling.sinks(n))
    rows = []
    for i in srcs:
        vi = labeling.vertex_at(i)
        row = []
        for j in snks:
            vj = labeling.vertex_at(j)
            row.append(table.get((vi, vj), field.zero))
        rows.append(tuple(row))
    return MeasurementMatrix(field, tuple(srcs), tuple(snks), labeling.n1, tuple(rows))


def boundary_measurement(n: Network, i: int, j: int, pick=None):
    """Exact M(i, j) for source label i and sink label j."""
    field, labeling, table = _solve_tables(n, pick=pick)
    vi = labeling.vertex_at(i)
    vj = labeling.vertex_at(j)
    if n.vertex_map[vi].kind != SOURCE or n.vertex_map[vj].kind != SINK:
        raise MeasurementError(f"labels ({i}, {j}) are not a source/sink pair")
    return table.get((vi, vj), field.zero)


# ---------------------------------------------------------------------------
# single paths, cycles, and the series oracle


def path_edges(n: Network, edge_ids: Sequence[str]) -> list:
    edges = [n.edge_map[eid] for eid in edge_ids]
    for e1, e2 in zip(edges, edges[1:]):
        if e1.head != e2.tail:
            raise NetworkError(f"edges {e1.id},{e2.id} are not consecutive")
    return edges


def _path_polyline(edges) -> Polyline:
    return concat_polylines([e.polyline for e in edges])


def path_weight(n: Network, edge_ids: Sequence[str]):
    """Weight of a source-to-sink path, computed two ways and cross-checked.

    The direct route closes the path and takes the curve invariant; the
    per-edge route multiplies modified weights lam^(ind e) * w_e and
    applies the same closed-curve sign.  Both must agree exactly.
    """
    edges = path_edges(n, edge_ids)
    tail = n.vertex_map[edges[0].tail]
    head = n.vertex_map[edges[-1].head]
    if tail.kind != SOURCE or head.kind != SINK:
        raise NetworkError("path must run from a source to a sink")
    field, weights = measurement_field(n)
    pl = _path_polyline(edges)
    closed = close_path(
        pl, n.circle_of(tail), n.circle_of(head), n.annulus, n.cut, avoid=tuple(v.pos for v in n.vertices)
    )
    sign = 1 if concordance(closed) else -1
    ind_total = intersection_index(pl, n.cut)
    lam = field.gen
    value = field.one
    for e in edges:
        value = value * weights[e.id]
    direct = value * lam ** ind_total
    if sign < 0:
        direct = -direct
    via_edges = field.one
    for e in edges:
        via_edges = via_edges * weights[e.id] * lam ** intersection_index(e.polyline, n.cut)
    if sign < 0:
        via_edges = -via_edges
    if direct != via_edges:
        raise MeasurementError("path weight mismatch between the two defining formulas")
    return direct


def cycle_weight(n: Network, edge_ids: Sequence[str]):
    """Weight of a closed cycle of edges (same sign rule, own closed curve)."""
    edges = path_edges(n, edge_ids)
    if edges[0].tail != edges[-1].head:
        raise NetworkError("not a cycle")
    field, weights = measurement_field(n)
    pts: list[Point] = []
    for e in edges:
        pts.extend(e.polyline.points[:-1])
    closed = Polyline(tuple(pts), closed=True)
    sign = 1 if concordance(closed) else -1
    ind_total = sum(intersection_index(e.polyline, n.cut) for e in edges)
    value = field.one
    for e in edges:
        value = value * weights[e.id]
    out = value * field.gen ** ind_total
    return out if sign > 0 else -out


def cycle_decompose_check(n: Network, edge_ids: Sequence[str]) -> bool:
    """Verify w_P = -w_P' * w_C0 at the first repeated edge of P."""
    seen: dict[str, int] = {}
    split = None
    for idx, eid in enumerate(edge_ids):
        if eid in seen:
            split = (seen[eid], idx)
            break
        seen[eid] = idx
    if split is None:
        raise MeasurementError("nothing to decompose")
    i, jdx = split
    reduced = list(edge_ids[:i]) + list(edge_ids[jdx:])
    cycle = list(edge_ids[i:jdx])
    w_p = path_weight(n, edge_ids)
    w_red = path_weight(n, reduced)
    w_cyc = cycle_weight(n, cycle)
    return w_p == -w_red * w_cyc


@dataclass(frozen=True)
class PathTerm:
    edge_ids: tuple[str, ...]
    sign: int
    lam_power: int
    monomial: Any


def enumerate_path_terms(n: Network, i: int, j: int, maxlen: int):
    """All paths b_i -> b_j up to maxlen edges, with geometric signs.

    Purely definitional: every term's sign comes from closing that very
    path and taking the curve invariant, and its lam power from the
    crossing count of the path's own polyline.
    """
    labeling = label_boundary(n)
    vi = labeling.vertex_at(i)
    vj = labeling.vertex_at(j)
    if n.vertex_map[vi].kind != SOURCE or n.vertex_map[vj].kind != SINK:
        raise MeasurementError(f"labels ({i}, {j}) are not a source/sink pair")
    start_circle = n.circle_of(n.vertex_map[vi])
    end_circle = n.circle_of(n.vertex_map[vj])
    avoid = tuple(v.pos for v in n.vertices)

    # shortest remaining distance to the sink, for pruning
    from collections import deque

    dist: dict[str, int] = {vj: 0}
    dq = deque([vj])
    while dq:
        cur = dq.popleft()
        for e in n.in_edges.get(cur, ()):  # walk backwards
            if e.tail not in dist:
                dist[e.tail] = dist[cur] + 1
                dq.append(e.tail)

    terms: list[PathTerm] = []

    def weight_of(eid: str):
        w = n.edge_map[eid].weight
        if isinstance(w, Symbol):
            raise MeasurementError("series oracle needs numeric weights")
        return w

    stack: list[str] = []

    def dfs(vertex: str, length: int):
        if vertex == vj and stack:
            edges = [n.edge_map[eid] for eid in stack]
            pl = _path_polyline(edges)
            closed = close_path(pl, start_circle, end_circle, n.annulus, n.cut, avoid=avoid)
            sign = 1 if concordance(closed) else -1
            power = intersection_index(pl, n.cut)
            mono = QQ.one
            for eid in stack:
                mono = mono * weight_of(eid)
            terms.append(PathTerm(tuple(stack), sign, power, mono))
            return  # sinks have no outgoing edges
        if length == maxlen:
            return
        for e in n.out_edges.get(vertex, ()):  # repeats allowed
            if e.head not in dist or length + 1 + dist[e.head] > maxlen:
                continue
            stack.append(e.id)
            dfs(e.head, length + 1)
            stack.pop()

    dfs(vi, 0)
    return terms


def series_oracle(n: Network, i: int, j: int, maxlen: int, lam0) -> Any:
    """Exact partial sum of the path series at lam = lam0, up to maxlen edges."""
    lam0 = QQ.coerce(lam0)
    total = QQ.zero
    for t in enumerate_path_terms(n, i, j, maxlen):
        if t.lam_power < 0 and not lam0:
            raise MeasurementError("lam = 0 with negative powers present")
        total = total + QQ.coerce(t.sign) * t.monomial * lam0 ** t.lam_power
    return total


def rescale_weights(n: Network, factor=None) -> Network:
    """Scale all numeric weights; default factor 1/(2 |E| max|w|) aids convergence."""
    ws = [e.weight for e in n.edges]
    if any(isinstance(w, Symbol) for w in ws):
        raise MeasurementError("rescale needs numeric weights")
    if factor is None:
        m = max(abs(w) for w in ws)
        factor = QQ.one / (2 * len(ws) * m)
    factor = QQ.coerce(factor)
    return n.with_weights({e.id: e.weight * factor for e in n.edges})
