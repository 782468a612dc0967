from fractions import Fraction

import pytest

from properad.cobar import (
    cobar,
    compose_morphisms,
    cylinder,
    cylinder_inclusion,
    cylinder_projection,
    fold_map,
    free_double,
    gebra_defects,
    resolution_to_strict,
    two_colored_resolution,
    two_colored_strict,
)
from properad.coproperad import ID, cofree_conilpotent, trivial_coproperad
from properad.exactlin import FormalSum
from properad.sbimod import SBimodule


def E_one():
    return SBimodule({(1, 2): ("nu",)}, {"nu": 1})


def E_two():
    return SBimodule({(1, 2): ("nu",), (2, 1): ("la",)}, {"nu": 1, "la": 1})


def E_with_ternary():
    return SBimodule({(1, 2): ("nu",), (1, 3): ("rho",)},
                     {"nu": 1, "rho": 1})


def cofree_w2():
    return cofree_conilpotent(E_one(), 2, (1, 3), name="w2")


def cofree_w2_with_d():
    C0 = cofree_conilpotent(E_with_ternary(), 2, (1, 3))
    rho = [l for l in C0.labels()
           if C0.weight(l) == 1 and C0.arity(l) == (1, 3)][0]
    cores = {c: FormalSum.lift(rho) for c in C0.labels()
             if C0.weight(c) == 2}
    return cofree_conilpotent(E_with_ternary(), 2, (1, 3),
                              corestriction=cores, name="w2d")


def properadic_w2():
    return cofree_conilpotent(E_two(), 2, (3, 3), name="prop-w2")


ALL_FIXTURES = [trivial_coproperad, cofree_w2, cofree_w2_with_d,
                properadic_w2]


def test_cobar_trivial_is_trivial():
    P = cobar(trivial_coproperad())
    assert not P.gens
    assert P.check_d_squared() == []


def test_cobar_weight_two_differential_hits_splitting():
    C = cofree_w2()
    P = cobar(C)
    w2 = [c for c in C.labels() if C.weight(c) == 2][0]
    d = P.differential(P.single("g:" + w2))
    assert len(d) == 1
    graph, coeff = next(iter(d.items()))
    assert graph.weight() == 2
    assert coeff in (Fraction(1), Fraction(-1))
    # both vertices are desuspended weight-one generators
    assert all(v.dec.startswith("g:") and v.deg == 0 for v in graph.verts)


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_cobar_d_squared(fixture):
    C = fixture()
    assert cobar(C).check_d_squared() == []


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_resolution_d_squared(fixture):
    C = fixture()
    assert two_colored_resolution(C).check_d_squared() == []


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_cylinder_d_squared(fixture):
    C = fixture()
    assert cylinder(C).check_d_squared() == []


def test_strict_two_colored_relation_count():
    C = cofree_w2()
    P = two_colored_strict(C)
    assert len(P.relations) == len(C.labels())
    assert P.differential(P.single("i")).is_zero()


def test_strict_two_colored_rewrites_relations_to_zero():
    C = cofree_w2()
    P = two_colored_strict(C)
    for rel in P.relations:
        assert P.normal_form(rel).is_zero()


def test_strict_differential_preserves_ideal():
    # d applied to a relation must reduce to zero modulo the relations
    for C in (cofree_w2(), cofree_w2_with_d()):
        P = two_colored_strict(C)
        for rel in P.relations:
            assert P.differential(rel).is_zero()


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_strict_d_squared_mod_relations(fixture):
    C = fixture()
    assert two_colored_strict(C).check_d_squared() == []


def test_resolution_middle_differential_on_unit_line():
    C = cofree_w2()
    P = two_colored_resolution(C)
    assert P.differential(P.single("01:" + ID)).is_zero()


def test_resolution_middle_differential_on_primitive():
    C = cofree_w2()
    nu = [c for c in C.labels() if C.weight(c) == 1][0]
    P = two_colored_resolution(C)
    d = P.differential(P.single("01:" + nu))
    # internal differential vanishes; only the trivial cuts survive: the
    # desuspended 0-copy under one middle unit box on its single output, and
    # the desuspended 1-copy over two middle unit boxes on its inputs
    kinds = set()
    for graph, coeff in d.items():
        decs = tuple(sorted(v.dec.split(":")[0] for v in graph.verts))
        kinds.add(decs)
        assert coeff in (Fraction(1), Fraction(-1))
    assert kinds == {("0", "01"), ("01", "01", "1")}


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_rho_is_chain_map(fixture):
    C = fixture()
    rho = resolution_to_strict(C)
    assert rho.check_chain_map() == []


def test_rho_images():
    C = cofree_w2()
    rho = resolution_to_strict(C)
    nu = [c for c in C.labels() if C.weight(c) == 1][0]
    assert rho(rho.source.single("01:" + nu)).is_zero()
    assert rho(rho.source.single("01:" + ID)) == rho.target.single("i")


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_cylinder_maps_are_chain_maps(fixture):
    C = fixture()
    assert cylinder_inclusion(C).check_chain_map() == []
    assert cylinder_projection(C).check_chain_map() == []


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_fold_factorization(fixture):
    C = fixture()
    comp = compose_morphisms(cylinder_projection(C), cylinder_inclusion(C))
    fold = fold_map(C)
    for label in comp.source.gens:
        assert comp.images[label] == fold.images[label]


def test_negative_control_sign_corruption_breaks_d_squared():
    # at weight three the splitting terms cancel across different
    # intermediate labels, so flipping the sign of one weight-two splitting
    # breaks d^2 = 0 with a named counterexample
    C = cofree_conilpotent(E_two(), 3, (3, 3), name="prop-w3")
    P = cobar(C)
    assert P.check_d_squared() == []
    from properad.cobar import DgProperad
    for w2 in [c for c in C.labels() if C.weight(c) == 2]:
        bad_diff = dict(P.diff_table)
        bad_diff["g:" + w2] = -bad_diff["g:" + w2]
        Q = DgProperad(P.name, P.colors, P.gens, bad_diff, P.action)
        failures = Q.check_d_squared()
        if failures:
            label, residual = failures[0]
            assert label.startswith("g:")
            assert not residual.is_zero()
            return
    raise AssertionError("no sign flip broke the differential")
