"""Reference networks with exact embeddings.

``annulus_two_cycles`` is the nine-edge network with one outer source, an
inner source and an inner sink whose path weights and measurement formula
pin down every sign convention in this package; ``annulus_two_cycles_moved``
is the same graph with the inner cut base point moved counterclockwise
past the sink.  ``crossing_identity`` is the eleven-edge acyclic gadget
whose measurement matrix becomes the 2x2 identity at the special weights
w5 = w10 = -1 (the crossing resolver used by the compiler).  The remaining
builders make small parametric test families: sector "theta" graphs with
prescribed boundary patterns and feedback loops.

All coordinates are rational; circles use Pythagorean-style points.
"""

from __future__ import annotations

from typing import Any, Sequence

from .fields import rational
from .geometry import AnnulusSpec, Point, Polyline, circle_point
from .network import Edge, Network, Symbol, Vertex


def _v(vid: str, kind: str, x, y) -> Vertex:
    return Vertex(vid, kind, Point.of(x, y))


def _e(eid: str, tail: str, head: str, weight, pts: Sequence) -> Edge:
    w = weight if isinstance(weight, Symbol) else rational(weight)
    return Edge(eid, tail, head, w, Polyline.of(pts))


def _sym_weights(n: Network, prefix: str = "w") -> Network:
    """Bind weight symbols w1..wE in edge-id order (ids must end in numbers)."""
    return n.with_weights({e.id: Symbol(f"{prefix}{e.id[1:]}") for e in n.edges})


def annulus_two_cycles(symbolic: bool = True, moved_cut: bool = False) -> Network:
    """One outer source, one inner source, one inner sink, a 4-cycle inside.

    The cut runs radially near angle 80 degrees; ``moved_cut`` uses the
    variant cut near 100 degrees, whose inner base point has passed the
    sink counterclockwise.
    """
    ann = AnnulusSpec.of(1, 3)
    cut = Polyline.of([("11/61", "60/61"), (0, 3)])
    if moved_cut:
        cut = Polyline.of([("-11/61", "60/61"), (0, 3)])
    vertices = (
        _v("b", "source", "-420/149", "-153/149"),
        _v("bb", "source", 0, -1),
        _v("bp", "sink", 0, 1),
        _v("a", "white", "-5/2", -1),
        _v("c", "black", "1/2", "3/2"),
        _v("d", "white", "-1/2", "5/4"),
        _v("g", "black", "-5/4", 0),
        _v("f", "black", 0, "-3/2"),
    )
    edges = (
        _e("e1", "b", "a", 1, [("-420/149", "-153/149"), ("-5/2", -1)]),
        _e("e2", "a", "c", 1, [("-5/2", -1), (-2, 0), ("-1/2", 2), ("1/2", "3/2")]),
        _e("e3", "c", "d", 1, [("1/2", "3/2"), ("-1/2", "5/4")]),
        _e("e4", "d", "bp", 1, [("-1/2", "5/4"), (0, 1)]),
        _e("e5", "d", "g", 1, [("-1/2", "5/4"), ("-5/4", 0)]),
        _e("e6", "g", "f", 1, [("-5/4", 0), (-1, -1), (0, "-3/2")]),
        _e("e7", "bb", "f", 1, [(0, -1), (0, "-3/2")]),
        _e("e8", "f", "c", 1, [(0, "-3/2"), ("3/2", "-1/2"), ("3/2", 1), ("1/2", "3/2")]),
        _e("e9", "a", "g", 1, [("-5/2", -1), ("-5/4", 0)]),
    )
    n = Network(ann, vertices, edges, cut)
    return _sym_weights(n) if symbolic else n


def crossing_identity(symbolic: bool = False) -> Network:
    """Acyclic 4-terminal gadget measuring the 2x2 identity matrix.

    Sources b1, b2 and sinks b3, b4 all lie on the outer circle; at the
    special weights w5 = w10 = -1 (all others 1) the two cross measurements
    cancel exactly and the through measurements are 1.
    """
    ann = AnnulusSpec.of(1, 3)
    cut = Polyline.of([("-77/85", "36/85"), ("-231/85", "108/85")])
    b1 = ("-420/149", "153/149")
    b2 = ("-420/149", "-153/149")
    b3 = ("-627/241", "-360/241")
    b4 = ("-627/241", "360/241")
    X = ("-47/20", "11/40")
    A = ("-23/10", "-11/40")
    C = (-2, "11/40")
    B = ("-39/20", "-11/40")
    D = ("-33/20", "11/40")
    F = ("-7/4", "-11/40")
    vertices = (
        _v("b1", "source", *b1),
        _v("b2", "source", *b2),
        _v("b3", "sink", *b3),
        _v("b4", "sink", *b4),
        _v("X", "white", *X),
        _v("A", "black", *A),
        _v("C", "black", *C),
        _v("B", "white", *B),
        _v("D", "white", *D),
        _v("F", "black", *F),
    )
    w = {i: 1 for i in range(1, 12)}
    if not symbolic:
        w[5] = -1
        w[10] = -1
    edges = (
        _e("e1", "b1", "X", w[1], [b1, ("-49/20", "1/2"), X]),
        _e("e2", "X", "C", w[2], [X, C]),
        _e("e3", "C", "D", w[3], [C, D]),
        # b4 sits counterclockwise-past the cut base, so its wire sweeps the
        # long way around the annulus at a safe radius instead of crossing
        _e(
            "e4",
            "D",
            "b4",
            w[4],
            [
                D,
                ("-27/20", "1/10"),
                ("-5/4", "-2/5"),
                ("-9/10", "-9/10"),
                (0, "-5/4"),
                ("9/10", "-9/10"),
                ("5/4", 0),
                ("9/10", "9/10"),
                (0, "5/4"),
                ("-7/10", "21/20"),
                ("-1", "17/20"),
                ("-11/5", "27/20"),
                b4,
            ],
        ),
        _e("e5", "b2", "A", w[5], [b2, ("-49/20", "-1/2"), A]),
        _e("e6", "A", "B", w[6], [A, B]),
        _e("e7", "B", "F", w[7], [B, F]),
        _e("e8", "F", "b3", w[8], [F, ("-29/20", "-3/5"), ("-8/5", -1), b3]),
        _e("e9", "X", "A", w[9], [X, A]),
        _e("e10", "B", "C", w[10], [B, C]),
        _e("e11", "D", "F", w[11], [D, F]),
    )
    n = Network(ann, vertices, edges, cut)
    return _sym_weights(n) if symbolic else n


# ---------------------------------------------------------------------------
# parametric test families for bracket verification
#
# Each family fixes a boundary pattern (which labels are sources/sinks and
# on which circle) and funnels all paths through shared structure so that
# measurement brackets are nontrivial.  ``variant=1`` inserts a two-vertex
# bubble with a return edge on a designated core edge, adding a cycle (and
# a geometric-series denominator) without changing the boundary pattern.


def with_bubble(n: Network, edge_id: str, side: int = 1, shrink: int = 5) -> Network:
    """Insert a black/white pair with a return edge along one edge segment."""
    e = n.edge_map[edge_id]
    pts = list(e.polyline.points)
    # longest segment hosts the bubble
    best = max(range(len(pts) - 1), key=lambda i: float((pts[i + 1] - pts[i]).norm2()))
    a, b = pts[best], pts[best + 1]
    d = b - a
    P = Point(a.x + d.x * rational(2, 5), a.y + d.y * rational(2, 5))
    Qp = Point(a.x + d.x * rational(3, 5), a.y + d.y * rational(3, 5))
    mid = Point(a.x + d.x * rational(1, 2), a.y + d.y * rational(1, 2))
    off = Point(-d.y * rational(side, shrink), d.x * rational(side, shrink))
    bulge = Point(mid.x + off.x, mid.y + off.y)
    vp = Vertex(f"{edge_id}.P", "black", P)
    vq = Vertex(f"{edge_id}.Q", "white", Qp)
    e_a = Edge(f"{edge_id}a", e.tail, vp.id, e.weight, Polyline(tuple(pts[: best + 1] + [P])))
    e_b = Edge(f"{edge_id}b", vp.id, vq.id, rational(1), Polyline((P, Qp)))
    e_c = Edge(f"{edge_id}c", vq.id, e.head, rational(1), Polyline(tuple([Qp] + pts[best + 1 :])))
    e_d = Edge(f"{edge_id}d", vq.id, vp.id, rational(1, 2), Polyline((Qp, bulge, P)))
    edges = [x for x in n.edges if x.id != edge_id] + [e_a, e_b, e_c, e_d]
    return Network(n.annulus, n.vertices + (vp, vq), tuple(edges), n.cut)


_STD_ANN = AnnulusSpec.of(1, 3)
_STD_CUT_PTS = [(1, 0), (3, 0)]

# rational circle points by approximate angle, radius 1
_UNIT = {
    215: ("-4/5", "-3/5"),
    230: ("-209/241", "-120/241"),
    240: ("-33/65", "-56/65"),
    250: ("-51/149", "-140/149"),
    270: (0, -1),
    285: ("69/269", "-260/269"),
    295: ("36/85", "-77/85"),
    307: ("3/5", "-4/5"),
    310: ("161/289", "-240/289"),
    320: ("105/137", "-88/137"),
    160: ("-140/149", "51/149"),
    210: ("-209/241", "-120/241"),
}


def _outer(angle: int):
    x, y = _UNIT[angle]
    return (f"3*{x}" if False else rational(x) * 3, rational(y) * 3)


def _inner(angle: int):
    x, y = _UNIT[angle]
    return (rational(x), rational(y))


def _std(vertices, edges, variant: int = 0, core: str = "c0", bubble_side: int = 1) -> Network:
    n = Network(_STD_ANN, tuple(vertices), tuple(edges), Polyline.of(_STD_CUT_PTS))
    if variant:
        n = with_bubble(n, core, side=bubble_side)
    return n


def separated_funnel(variant: int = 0) -> Network:
    """Two outer sources, two inner sinks (n1 = 2), shared merge/split core."""
    b1 = _outer(240)
    b2 = _outer(285)
    t3 = _inner(307)
    t4 = _inner(250)
    u = Point.of(0, "-23/10")
    v = Point.of(0, "-3/2")
    vs = [
        _v("b1", "source", *b1),
        _v("b2", "source", *b2),
        _v("t3", "sink", *t3),
        _v("t4", "sink", *t4),
        Vertex("u", "black", u),
        Vertex("v", "white", v),
    ]
    es = [
        _e("e1", "b1", "u", 2, [b1, ("-4/5", "-5/2"), (0, "-23/10")]),
        _e("e2", "b2", "u", 3, [b2, ("2/5", "-5/2"), (0, "-23/10")]),
        _e("c0", "u", "v", 5, [(0, "-23/10"), (0, "-3/2")]),
        _e("e3", "v", "t3", 7, [(0, "-3/2"), ("1/4", "-5/4"), t3]),
        _e("e4", "v", "t4", 11, [(0, "-3/2"), ("-1/4", "-5/4"), t4]),
    ]
    return _std(vs, es, variant)


def outer_funnel4(variant: int = 0) -> Network:
    """Sources b1, b2 and sinks b3, b4 all on the outer circle (n1 = 4)."""
    b1 = _outer(240)
    b2 = _outer(270)
    b3 = _outer(295)
    b4 = _outer(320)
    u = Point.of("-1/5", "-11/5")
    v = Point.of("3/4", "-8/5")
    vs = [
        _v("b1", "source", *b1),
        _v("b2", "source", *b2),
        _v("b3", "sink", *b3),
        _v("b4", "sink", *b4),
        Vertex("u", "black", u),
        Vertex("v", "white", v),
    ]
    es = [
        _e("e1", "b1", "u", 2, [b1, ("-3/5", "-12/5"), ("-1/5", "-11/5")]),
        _e("e2", "b2", "u", 3, [b2, ("-1/10", "-13/5"), ("-1/5", "-11/5")]),
        _e("c0", "u", "v", 5, [("-1/5", "-11/5"), ("1/5", -2), ("3/4", "-8/5")]),
        _e("e3", "v", "b3", 7, [("3/4", "-8/5"), b3]),
        _e("e4", "v", "b4", 11, [("3/4", "-8/5"), ("8/5", -1), b4]),
    ]
    return _std(vs, es, variant, bubble_side=-1)


def outer3_inner1(variant: int = 0) -> Network:
    """Sources b1, b2 and sink b3 outer; sink b4 inner (n1 = 3)."""
    n = outer_funnel4()
    t4 = _inner(307)
    vs = [v if v.id != "b4" else Vertex("b4", "sink", Point.of(*t4)) for v in n.vertices]
    es = [
        e
        if e.id != "e4"
        else _e("e4", "v", "b4", 11, [("3/4", "-8/5"), ("4/5", "-6/5"), t4])
        for e in n.edges
    ]
    return _std(vs, es, variant, bubble_side=-1)


def mixed_two_sources(variant: int = 0) -> Network:
    """Source b1 outer; source b2 and sinks b3, b4 inner (n1 = 1)."""
    b1 = _outer(270)
    s2 = _inner(307)
    t3 = _inner(250)
    t4 = _inner(215)
    vs = [
        _v("b1", "source", *b1),
        _v("b2", "source", *s2),
        _v("b3", "sink", *t3),
        _v("b4", "sink", *t4),
        Vertex("u", "black", Point.of(0, "-11/5")),
        Vertex("v", "white", Point.of("-2/5", "-8/5")),
    ]
    es = [
        _e("e1", "b1", "u", 2, [b1, (0, "-11/5")]),
        _e("e2", "b2", "u", 3, [s2, ("9/10", "-3/2"), ("1/2", -2), (0, "-11/5")]),
        _e("c0", "u", "v", 5, [(0, "-11/5"), ("-2/5", "-8/5")]),
        _e("e3", "v", "b3", 7, [("-2/5", "-8/5"), ("-7/20", "-6/5"), t3]),
        _e("e4", "v", "b4", 11, [("-2/5", "-8/5"), (-1, -1), t4]),
    ]
    return _std(vs, es, variant)


def inner_funnel4(variant: int = 0) -> Network:
    """Sources b1, b2 and sinks b3, b4 all on the inner circle (n1 = 0)."""
    s1 = _inner(310)
    s2 = _inner(250)
    t3 = _inner(215)
    t4 = _inner(160)
    vs = [
        _v("b1", "source", *s1),
        _v("b2", "source", *s2),
        _v("b3", "sink", *t3),
        _v("b4", "sink", *t4),
        Vertex("u", "black", Point.of("1/5", "-9/5")),
        Vertex("v", "white", Point.of("-9/8", "-3/2")),
    ]
    es = [
        _e("e1", "b1", "u", 2, [s1, ("7/10", "-3/2"), ("1/5", "-9/5")]),
        _e("e2", "b2", "u", 3, [s2, ("-1/5", "-7/5"), ("-1/10", "-8/5"), ("1/5", "-9/5")][::1]),
        _e("c0", "u", "v", 5, [("1/5", "-9/5"), ("-3/5", -2), ("-9/8", "-3/2")]),
        _e("e3", "v", "b3", 7, [("-9/8", "-3/2"), ("-9/10", "-11/10"), t3]),
        _e("e4", "v", "b4", 11, [("-9/8", "-3/2"), ("-8/5", "-4/5"), ("-13/10", "2/5"), t4]),
    ]
    return _std(vs, es, variant, bubble_side=-1)


def outer_two_terminal(variant: int = 0) -> Network:
    """One outer source, one outer sink, one route winding through the cut."""
    b1 = _outer(240)
    b2 = _outer(295)
    W = Point.of("-3/5", "-12/5")
    K = Point.of("6/5", "-2")
    vs = [
        _v("b1", "source", *b1),
        _v("b2", "sink", *b2),
        Vertex("W", "white", W),
        Vertex("K", "black", K),
    ]
    short = [("-3/5", "-12/5"), ("1/4", "-23/10"), ("6/5", -2)]
    long = [
        ("-3/5", "-12/5"),
        ("-1", "-4/5"),
        ("-13/10", "1/5"),
        ("-3/5", "6/5"),
        ("13/20", "9/8"),
        ("6/5", "1/2"),
        ("6/5", "-1/2"),
        ("8/5", "-13/10"),
        ("6/5", -2),
    ]
    es = [
        _e("e1", "b1", "W", 2, [b1, W]),
        _e("c0", "W", "K", 3, short),
        _e("e2", "W", "K", 5, long),
        _e("e3", "K", "b2", 7, [("6/5", -2), K and ("13/10", "-23/10"), b2]),
    ]
    return _std(vs, es, variant)


def theta_cross(variant: int = 0) -> Network:
    """One outer source, one inner sink, two parallel routes (n1 = 1)."""
    vs = [
        _v("s", "source", 0, 3),
        _v("t", "sink", 0, -1),
        _v("w", "white", 0, 2),
        _v("k", "black", 0, -2),
    ]
    es = [
        _e("e0", "s", "w", 2, [(0, 3), (0, 2)]),
        _e("c0", "w", "k", 3, [(0, 2), (-2, 1), (-2, -1), (0, -2)]),
        _e("eb", "w", "k", 5, [(0, 2), ("-3/2", 1), ("-3/2", -1), (0, -2)]),
        _e("e1", "k", "t", 7, [(0, -2), (0, -1)]),
    ]
    return _std(vs, es, variant, bubble_side=-1)


def interleaved_mixed(variant: int = 0) -> Network:
    """Source b1, sink b2 outer; source b3, sink b4 inner (n1 = 2).

    The inner sink's wire sweeps the long way around the annulus (crossing
    the cut once), which is what makes this boundary pattern drawable.
    """
    b1 = ("-420/149", "-153/149")
    b2 = ("153/149", "-420/149")
    s3 = ("-209/241", "-120/241")
    t4 = ("-88/137", "105/137")
    u = ("-23/20", -2)
    v = (0, "-17/10")
    vs = [
        _v("b1", "source", *b1),
        _v("b2", "sink", *b2),
        _v("b3", "source", *s3),
        _v("b4", "sink", *t4),
        _v("u", "black", *u),
        _v("v", "white", *v),
    ]
    es = [
        _e("e1", "b1", "u", 2, [b1, u]),
        _e("e2", "b3", "u", 3, [s3, u]),
        _e("c0", "u", "v", 5, [u, v]),
        _e("e3", "v", "b2", 7, [v, b2]),
        _e(
            "e4",
            "v",
            "b4",
            11,
            [v, ("1/2", "-13/10"), ("13/10", "-1/2"), ("13/10", "1/2"), ("1/2", "13/10"), ("-2/5", "13/10"), t4],
        ),
    ]
    return _std(vs, es, variant)


def interleaved_outer(variant: int = 0) -> Network:
    """All four terminals outer, pattern source, sink, source, sink (n1 = 4).

    The two "straight" wires share split/merge vertices with the two
    "crossing" wires, and the single unavoidable crossing is resolved by
    the identity gadget.
    """
    from .gadget import splice_crossings

    b1 = _outer(240)
    b2 = _outer(270)
    b3 = _outer(295)
    b4 = _outer(320)
    W1 = Point.of("-7/5", "-2")   # splits b1's flow
    W3 = Point.of("7/5", "-21/10")  # splits b3's flow
    K2 = Point.of("-2/5", "-12/5")  # merges into b2
    K4 = Point.of("2", "-13/10")   # merges into b4
    vs = [
        _v("b1", "source", *b1),
        _v("b2", "sink", *b2),
        _v("b3", "source", *b3),
        _v("b4", "sink", *b4),
        Vertex("W1", "white", W1),
        Vertex("W3", "white", W3),
        Vertex("K2", "black", K2),
        Vertex("K4", "black", K4),
    ]
    es = [
        _e("e1", "b1", "W1", 2, [b1, W1]),
        _e("e3", "b3", "W3", 3, [b3, ("13/10", "-12/5"), W3]),
        _e("a2", "W1", "K2", 5, [W1, ("-4/5", "-23/10"), K2]),
        _e("a4", "W1", "K4", 7, [W1, ("-6/5", "-13/10"), ("-1/2", "-6/5"), ("1/2", "-23/20"), ("29/20", "-23/20"), K4]),
        _e("b2", "W3", "K2", 11, [W3, ("2/5", "-21/10"), ("-1/5", "-23/10"), K2]),
        _e("b4", "W3", "K4", 13, [W3, ("9/5", "-8/5"), K4]),
        _e("o2", "K2", "b2", 17, [K2, ("-1/5", "-27/10"), b2]),
        _e("o4", "K4", "b4", 19, [K4, b4]),
    ]
    nv, ne = splice_crossings(vs, es, Polyline.of(_STD_CUT_PTS))
    n = Network(_STD_ANN, tuple(nv), tuple(ne), Polyline.of(_STD_CUT_PTS))
    if variant:
        n = with_bubble(n, "c0" if "c0" in n.edge_map else "e1", side=-1)
    return n


# ---------------------------------------------------------------------------
# randomized instances


def with_random_weights(n: Network, rng) -> Network:
    """Rebind all edge weights to random nonzero rationals (seeded rng)."""
    def draw():
        num = rng.choice([-3, -2, -1, 1, 2, 3, 4, 5])
        den = rng.choice([1, 1, 1, 2, 3])
        return rational(num, den)

    return n.with_weights({e.id: draw() for e in n.edges})


def all_families() -> dict:
    return {
        "separated": separated_funnel,
        "outer4": outer_funnel4,
        "outer3_inner1": outer3_inner1,
        "mixed_two_sources": mixed_two_sources,
        "inner4": inner_funnel4,
        "outer_two_terminal": outer_two_terminal,
        "theta_cross": theta_cross,
        "interleaved_mixed": interleaved_mixed,
        "interleaved_outer": interleaved_outer,
    }


def random_networks(seed: int, count: int, transforms: bool = True) -> list[Network]:
    """Valid networks with seeded random weights (and random cut transforms)."""
    import random

    from .cutmoves import move_cut_base, reverse_cut, reverse_orientation

    rng = random.Random(seed)
    fams = list(all_families().values()) + [lambda v: annulus_two_cycles(symbolic=False, moved_cut=bool(v))]
    out = []
    while len(out) < count:
        f = rng.choice(fams)
        n = f(rng.choice([0, 1]))
        n = with_random_weights(n, rng)
        if transforms and rng.random() < 0.4:
            op = rng.choice(["move_inner", "move_outer", "reverse", "mirror"])
            try:
                if op == "move_inner":
                    n = move_cut_base(n, "inner")
                elif op == "move_outer":
                    n = move_cut_base(n, "outer")
                elif op == "reverse":
                    n = reverse_cut(n)
                else:
                    n = reverse_orientation(n)
            except Exception:
                pass
        out.append(n)
    return out
