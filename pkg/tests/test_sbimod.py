from fractions import Fraction
from itertools import permutations

import pytest

from properad.exactlin import ONE, ChainComplex, FormalSum
from properad.graphs import DirectedGraph, TwoLevelScheme, VertexShape
from properad.sbimod import (
    Cut,
    EndBimodule,
    SBimodule,
    boxtimes,
    check_action_laws,
    compose_in_end,
    end_bimodule,
    evaluate_graph,
    inf_left,
    inf_right,
    unit_cut,
    unit_iso_from_boxtimes,
)


def one_gen(label, m, n, deg):
    return SBimodule({(m, n): (label,)}, {label: deg})


UNIT = SBimodule({}, {})


def cx_point():
    return ChainComplex.build((("u", 0),), {})


def cx_two():
    # x in degree 0, y in degree 1, d(y) = x (acyclic)
    return ChainComplex.build((("x", 0), ("y", 1)), {"y": FormalSum.lift("x")})


def cx_two_trivial_d():
    return ChainComplex.build((("x", 0), ("y", 1)), {})


def test_action_laws_trivial():
    M = one_gen("nu", 1, 2, 1)
    assert check_action_laws(M) is None


def test_unit_boxtimes_is_isomorphic():
    M = one_gen("nu", 1, 2, 1)
    left = boxtimes(UNIT, M, (2, 3))
    iso = unit_iso_from_boxtimes(left, "left")
    assert sorted(iso.values()) == ["nu"]
    assert sum(left.dim(m, n) for (m, n) in left.components) == 1
    right = boxtimes(M, UNIT, (2, 3))
    iso = unit_iso_from_boxtimes(right, "right")
    assert sorted(iso.values()) == ["nu"]
    assert sum(right.dim(m, n) for (m, n) in right.components) == 1


def test_boxtimes_dimension_one_three():
    M = one_gen("mu", 1, 2, 1)
    N = one_gen("nu", 1, 2, 1)
    prod = boxtimes(M, N, (1, 3))
    assert prod.dim(1, 3) == 3


def test_boxtimes_properadic_connected_only():
    M = one_gen("la", 2, 1, 1)
    N = one_gen("nu", 1, 2, 1)
    prod = boxtimes(M, N, (2, 2))
    cuts = prod.payload["cuts"]
    for label in prod.components.get((2, 2), ()):
        assert cuts[label].graph.weight() == 2


def test_inf_left_one_on_one():
    # a saturated top level must feed every bottom input, so a single
    # one-output generator cannot sit above a two-input generator ...
    M = one_gen("mu", 1, 2, 1)
    N = one_gen("nu", 1, 2, 1)
    sub = inf_left(M, N, 1, (1, 3))
    assert not list(sub.labels())
    # ... but a two-output generator can
    L = one_gen("la", 2, 1, 1)
    sub2 = inf_left(M, L, 1, (1, 3))
    assert list(sub2.labels())
    for cut in sub2.payload["cuts"].values():
        assert len(cut.bottom) == 1
        assert len(cut.top_vertices()) == 1
        assert not cut.top_id_legs()


def test_inf_left_requires_saturated_top():
    M = one_gen("mu", 1, 2, 1)
    N = one_gen("nu", 1, 2, 1)
    sub = inf_left(M, N, 2, (1, 4))
    for cut in sub.payload["cuts"].values():
        assert len(cut.top_vertices()) == 2
        assert not cut.top_id_legs()


def test_inf_left_of_unit_is_empty():
    M = one_gen("mu", 1, 2, 1)
    sub = inf_left(M, UNIT, 1, (1, 3))
    assert not list(sub.labels())


def test_inf_right_mirrors():
    M = one_gen("mu", 1, 2, 1)
    N = one_gen("nu", 1, 2, 1)
    sub = inf_right(M, N, 1, (1, 3))
    for cut in sub.payload["cuts"].values():
        assert len(cut.top_vertices()) == 1
        assert len(cut.bottom) == 1
        assert not cut.bottom_id_legs()


def test_cut_box_counts():
    # trivial bottom cut of a (1,2)-element: 1 bottom box, 2 top id boxes
    g = DirectedGraph.single(VertexShape(1, 2, "c", 0))
    cut = Cut(g, frozenset({0}))
    assert cut.n_bottom_boxes() == 1
    assert cut.n_top_boxes() == 2
    cut2 = Cut(g, frozenset())
    assert cut2.n_top_boxes() == 1
    assert cut2.n_bottom_boxes() == 1
    u = unit_cut()
    assert u.n_top_boxes() == 1 and u.n_bottom_boxes() == 1


def test_end_point_complex():
    A = cx_point()
    E = end_bimodule(A)
    assert len(E.component(1, 1)) == 1
    key = E.component(1, 1)[0]
    assert E.degree(key) == 0
    assert E.diff(key).is_zero()


def test_end_identity_is_cycle():
    A = cx_two()
    E = end_bimodule(A)
    ident = E.identity_value()
    total = FormalSum()
    for key, c in ident.items():
        for k2, c2 in E.diff(key).items():
            total.add_term(k2, c * c2)
    assert total.is_zero()


def test_end_diff_squares_to_zero():
    A = cx_two()
    B = cx_two()
    E = EndBimodule(A, B)
    for n in (1, 2):
        for key in E.component(1, n):
            once = E.diff(key)
            twice = FormalSum()
            for k2, c in once.items():
                for k3, c3 in E.diff(k2).items():
                    twice.add_term(k3, c * c3)
            assert twice.is_zero(), key


def test_end_action_laws():
    A = cx_two()
    E = end_bimodule(A, A, (2, 2))

    class Wrap:
        components = {(2, 2): tuple(E.component(2, 2))}

        def act(self, l, s, t):
            return E.act(l, s, t)

    w = Wrap()
    assert check_action_laws(w, max_size=2) is None


def single_vertex_scheme(m, n):
    return TwoLevelScheme(
        DirectedGraph.single(VertexShape(m, n, "slot", 0)),
        frozenset({0}))


def test_compose_single_vertex_is_identity():
    A = cx_two()
    E = end_bimodule(A)
    key = (("x", "y"), ("y",))
    val = (FormalSum.lift(key), E.degree(key), A, A)
    got = compose_in_end(single_vertex_scheme(1, 2), {0: val})
    assert got == FormalSum.lift(key)


def test_compose_two_maps_plain():
    # psi on the bottom, phi grafted into slot 0: x (x) y |-> psi(phi(x) (x) y)
    A = cx_two_trivial_d()
    E = end_bimodule(A)
    phi = (("x",), ("y",))          # degree 1
    psi = (("y", "y"), ("x",))      # degree -2
    g = DirectedGraph(
        (VertexShape(1, 2, "psi", -2), VertexShape(1, 1, "phi", 1)),
        frozenset({(1, 0, 0, 0)}),
        ((1, 0), (0, 1)),
        ((0, 0),))
    vals = [(FormalSum.lift(psi), -2, A, A), (FormalSum.lift(phi), 1, A, A)]
    got = evaluate_graph(g, vals)
    assert got == FormalSum.lift((("x", "y"), ("x",)))


def test_compose_koszul_sign_odd_past_odd():
    # phi grafted into slot 1: the odd map crosses the odd first argument
    A = cx_two_trivial_d()
    phi = (("x",), ("y",))
    psi = (("y", "y"), ("x",))
    g = DirectedGraph(
        (VertexShape(1, 2, "psi", -2), VertexShape(1, 1, "phi", 1)),
        frozenset({(1, 0, 0, 1)}),
        ((0, 0), (1, 0)),
        ((0, 0),))
    vals = [(FormalSum.lift(psi), -2, A, A), (FormalSum.lift(phi), 1, A, A)]
    got = evaluate_graph(g, vals)
    assert got == FormalSum.lift((("y", "x"), ("x",)), -1)


def test_compose_equivariance_under_input_permutation():
    # permuting the global inputs of the wiring graph equals acting on the
    # composed map, for all permutations with <= 3 total inputs
    A = cx_two()
    E = end_bimodule(A)
    psi = (("y", "x"), ("x",))
    phi = (("x",), ("y",))
    base = DirectedGraph(
        (VertexShape(1, 2, "psi", -1), VertexShape(1, 1, "phi", 1)),
        frozenset({(1, 0, 0, 0)}),
        ((1, 0), (0, 1)),
        ((0, 0),))
    vals = [(FormalSum.lift(psi), -1, A, A), (FormalSum.lift(phi), 1, A, A)]
    F = evaluate_graph(base, vals)
    for tau in permutations(range(2)):
        gins = [None, None]
        for i, ep in enumerate(base.gins):
            gins[tau[i]] = ep
        moved = DirectedGraph(base.verts, base.edges, tuple(gins), base.gouts)
        got = evaluate_graph(moved, vals)
        expected = FormalSum()
        for key, c in F.items():
            c2, key2 = E.act(key, (0,), tau)
            expected.add_term(key2, c * c2)
        assert got == expected


def test_boxtimes_rejects_mixed_reducedness():
    M = one_gen("mu", 1, 2, 1)
    N = SBimodule({(2, 1): ("la",)}, {"la": 1}, reduced="right")
    with pytest.raises(ValueError):
        boxtimes(M, N, (2, 2))
