from fractions import Fraction

import pytest

from properad.coproperad import (
    ID,
    Coproperad,
    cofree_conilpotent,
    trivial_coproperad,
    truncation_inclusion,
    _partitions_into_connected,
)
from properad.exactlin import ONE, FormalSum, koszul_sign
from properad.graphs import (
    DirectedGraph,
    VertexShape,
    canonicalize,
    extract_subgraph,
)
from properad.sbimod import SBimodule, unit_cut


def E_one():
    return SBimodule({(1, 2): ("nu",)}, {"nu": 1})


def E_two():
    return SBimodule({(1, 2): ("nu",), (2, 1): ("la",)}, {"nu": 1, "la": 1})


def E_with_ternary():
    return SBimodule({(1, 2): ("nu",), (1, 3): ("rho",)},
                     {"nu": 1, "rho": 1})


def cofree_w2():
    return cofree_conilpotent(E_one(), 2, (1, 3), name="w2")


def cofree_w3():
    return cofree_conilpotent(E_one(), 3, (1, 4), name="w3")


def properadic_w2():
    return cofree_conilpotent(E_two(), 2, (3, 3), name="prop-w2")


def w2_labels(C):
    return [c for c in C.labels() if C.weight(c) == 2]


def test_cofree_w1_is_generators_only():
    C = cofree_conilpotent(E_one(), 1, (1, 2))
    assert len(C.labels()) == 1
    assert C.weight(C.labels()[0]) == 1


def test_cofree_w2_basis_dimension():
    C = cofree_w2()
    w2 = w2_labels(C)
    assert len(w2) == 3
    for c in w2:
        assert C.arity(c) == (1, 3)


def test_delta_of_primitive_is_trivial():
    C = cofree_w2()
    nu = [c for c in C.labels() if C.weight(c) == 1][0]
    assert C.delta_nontrivial(nu).is_zero()
    assert len(C.delta(nu)) == 2


def test_delta_of_weight_two_has_single_genuine_cut():
    C = cofree_w2()
    for c in w2_labels(C):
        nt = C.delta_nontrivial(c)
        assert len(nt) == 1
        cut = next(iter(nt))
        assert len(cut.bottom) == 1 and len(cut.top_vertices()) == 1
        assert nt[cut] in (ONE, -ONE)
        assert C.delta_11(c) == nt


def test_delta_of_id():
    C = cofree_w2()
    assert C.delta(ID) == FormalSum.lift(unit_cut())


def test_delta_left_counts_identity_slots():
    C = cofree_w2()
    nu = [c for c in C.labels() if C.weight(c) == 1][0]
    # the only bottom-coideal cut of a primitive is its bottom trivial cut,
    # whose top row consists of two identity boxes
    assert len(C.delta_left(2, nu)) == 1
    assert C.delta_left(1, nu).is_zero()
    assert C.delta_left(3, nu).is_zero()
    # extension by zero on the counit line
    assert C.delta_right(1, ID).is_zero()


def test_delta_right_on_weight_two():
    C = cofree_w2()
    for c in w2_labels(C):
        # top trivial cut (one bottom identity box) plus the genuine
        # splitting (a single nu box at the bottom)
        assert len(C.delta_right(1, c)) == 2
        assert C.delta_right(2, c).is_zero()
        # genuine splitting seen from the left: top row = nu plus one
        # identity box
        assert len(C.delta_left(2, c)) == 1
        assert len(C.delta_left(3, c)) == 1  # bottom trivial cut


def test_delta_twolevel_counts_boxes():
    C = cofree_w2()
    nu = [c for c in C.labels() if C.weight(c) == 1][0]
    # bottom trivial cut: 1 + 2 boxes; top trivial cut: 1 + 1 boxes
    assert len(C.delta_twolevel(3, nu)) == 1
    assert len(C.delta_twolevel(2, nu)) == 1
    assert C.delta_twolevel(4, nu).is_zero()
    assert len(C.delta_twolevel(2, ID)) == 1


def test_comonadic_primitive():
    C = cofree_w2()
    nu = [c for c in C.labels() if C.weight(c) == 1][0]
    dec = C.comonadic_decomposition(nu)
    assert len(dec) == 1
    g = next(iter(dec))
    assert g.weight() == 1


def test_comonadic_weight_two():
    C = cofree_w2()
    for c in w2_labels(C):
        dec = C.comonadic_decomposition(c)
        weights = sorted(g.weight() for g in dec)
        assert weights == [1, 2]


def clustering_oracle(C, label):
    """Direct comonadic decomposition of a cofree element: sum over all
    partitions into connected clusters with acyclic quotient."""
    g = C.basis_graphs[label]
    gen_action = None
    # generator action of the cofree fixture is trivial
    out = FormalSum()
    for partition in _partitions_into_connected(g):
        # quotient acyclicity
        where = {}
        for i, cl in enumerate(partition):
            for v in cl:
                where[v] = i
        qedges = {(where[u], where[v]) for (u, _, v, _) in g.edges
                  if where[u] != where[v]}
        k = len(partition)
        state = [0] * k
        ok = True

        def visit(i):
            nonlocal ok
            if state[i] == 1:
                ok = False
                return
            if state[i] == 2:
                return
            state[i] = 1
            for (a, b) in qedges:
                if a == i:
                    visit(b)
            state[i] = 2

        for i in range(k):
            visit(i)
        if not ok:
            continue
        term = assemble_quotient(C, g, partition)
        if term is not None:
            q, coeff = term
            out.add_term(q, coeff)
    return out


def assemble_quotient(C, g, partition):
    from properad.graphs import trivial_action
    edge_by_producer = {e[:2]: e for e in g.edges}
    edge_by_consumer = {e[2:]: e for e in g.edges}
    order = sorted(range(len(partition)), key=lambda i: min(partition[i]))
    coeff = ONE
    boxes = []
    wire_in = {}
    wire_out = {}
    label_of = {v: k for k, v in C.basis_graphs.items()}
    for new_idx, i in enumerate(order):
        sub, in_w, out_w = extract_subgraph(g, partition[i])
        csub, s = canonicalize(sub, trivial_action)
        if not s:
            return None
        coeff *= s
        boxes.append(label_of[csub])
        for slot, w in enumerate(in_w):
            key = ("e",) + edge_by_producer[(w[1], w[2])] if w[0] == "edge" else w
            wire_in[key] = (new_idx, slot)
        for slot, w in enumerate(out_w):
            key = ("e",) + edge_by_consumer[(w[1], w[2])] if w[0] == "edge" else w
            wire_out[key] = (new_idx, slot)
    concat = []
    for i in order:
        concat.extend(sorted(partition[i]))
    perm = [0] * len(g.verts)
    for pos, v in enumerate(concat):
        perm[v] = pos
    coeff *= koszul_sign(tuple(perm), [vs.deg for vs in g.verts])
    verts = []
    for new_idx, i in enumerate(order):
        lbl = boxes[new_idx]
        m, n = C.arity(lbl)
        verts.append(VertexShape(m, n, lbl, C.degree(lbl)))
    edges = set()
    for key, (bi, slot) in wire_in.items():
        if key[0] == "e":
            bj, slot2 = wire_out[key]
            edges.add((bj, slot2, bi, slot))
    gins = [None] * len(g.gins)
    gouts = [None] * len(g.gouts)
    for key, (bi, slot) in wire_in.items():
        if key[0] == "gin":
            gins[key[1]] = (bi, slot)
    for key, (bj, slot) in wire_out.items():
        if key[0] == "gout":
            gouts[key[1]] = (bj, slot)
    q = DirectedGraph(tuple(verts), frozenset(edges), tuple(gins),
                      tuple(gouts))
    cq, s2 = canonicalize(q, C.dec_action())
    if not s2:
        return None
    return cq, coeff * s2


def test_comonadic_matches_clustering_oracle_w3():
    C = cofree_w3()
    for c in C.labels():
        assert C.comonadic_decomposition(c) == clustering_oracle(C, c), c


def test_comonadic_matches_clustering_oracle_properadic():
    C = properadic_w2()
    for c in C.labels():
        assert C.comonadic_decomposition(c) == clustering_oracle(C, c), c


def test_coradical_levels():
    C = cofree_w2()
    for c in C.labels():
        assert C.coradical_level(c) == C.weight(c)
    assert C.coradical_level(FormalSum()) == 0


def test_density_levels():
    C = cofree_w2()
    assert C.density_level(ID) == 1
    nu = [c for c in C.labels() if C.weight(c) == 1][0]
    assert C.density_level(nu) == 3  # weight 1 + size 2
    for c in w2_labels(C):
        # the fully split graph has weight 2 and size 3
        assert C.density_level(c) == 5


def test_density_at_least_arity_plus_one():
    C = properadic_w2()
    for c in C.labels():
        m, n = C.arity(c)
        assert C.density_level(c) >= max(m, n) + 1


def test_coradical_subadditive_under_delta11():
    for C in (cofree_w3(), properadic_w2()):
        for c in C.labels():
            k = C.coradical_level(c)
            for cut in C.delta_11(c):
                b = cut.bottom_vertices()[0]
                t = cut.top_vertices()[0]
                kb = C.coradical_level(cut.graph.verts[b].dec)
                kt = C.coradical_level(cut.graph.verts[t].dec)
                assert kb + kt <= k


def test_density_subadditivity_lemma():
    # bottom coideal box + saturated top row: coradical of the bottom plus
    # density of every top box (identity boxes count 1) is bounded by the
    # density of the whole element
    for C in (cofree_w3(), properadic_w2()):
        for c in C.labels():
            dens = C.density_level(c)
            for n in range(1, 7):
                for cut in C.delta_left(n, c):
                    b = cut.bottom_vertices()[0]
                    total = C.coradical_level(cut.graph.verts[b].dec)
                    for t in cut.top_vertices():
                        total += C.density_level(cut.graph.verts[t].dec)
                    total += len(cut.top_id_legs())
                    assert total <= dens
                for cut in C.delta_right(n, c):
                    t = cut.top_vertices()[0]
                    total = C.coradical_level(cut.graph.verts[t].dec)
                    for b in cut.bottom_vertices():
                        total += C.density_level(cut.graph.verts[b].dec)
                    total += len(cut.bottom_id_legs())
                    assert total <= dens


def test_audit_passes_on_cofree():
    assert cofree_w2().audit() == []
    assert properadic_w2().audit() == []


def test_audit_passes_on_cofree_w3():
    assert cofree_w3().audit() == []


def test_audit_flags_corrupted_delta():
    C = cofree_w2()
    c = w2_labels(C)[0]
    table = {l: C.delta(l) for l in C.labels()}
    bad = FormalSum(table[c])
    cut = next(iter(C.delta_nontrivial(c)))
    bad.add_term(cut, ONE)  # corrupt the genuine splitting coefficient
    C2 = Coproperad("bad", C.bimod, C.weights, table | {c: bad})
    failures = C2.audit(check_actions=False)
    assert any("coassociativity" in f for f in failures)


def test_cofree_with_coderivation_passes_audit():
    E = E_with_ternary()
    # send every two-vertex tree to the ternary generator
    C0 = cofree_conilpotent(E, 2, (1, 3))
    cores = {}
    for c in C0.labels():
        if C0.weight(c) == 2:
            cores[c] = FormalSum.lift(
                [l for l in C0.labels()
                 if C0.weight(l) == 1 and C0.arity(l) == (1, 3)][0])
    C = cofree_conilpotent(E, 2, (1, 3), corestriction=cores)
    assert C.diff_table
    assert C.audit() == []


def test_coderivation_violating_coradical_lowering_is_flagged():
    # a differential sending a primitive to a primitive cannot lower the
    # coradical filtration
    E = SBimodule({(1, 2): ("nu", "nu2")}, {"nu": 1, "nu2": 2})
    C0 = cofree_conilpotent(E, 1, (1, 2))
    nu2 = [c for c in C0.labels() if "nu2" in c][0]
    nu = [c for c in C0.labels() if c != nu2][0]
    cores = {nu2: FormalSum.lift(nu)}
    C = cofree_conilpotent(E, 1, (1, 2), corestriction=cores)
    failures = C.audit()
    assert any("lower the coradical" in f for f in failures)


def test_trivial_coproperad():
    C = trivial_coproperad()
    assert C.labels() == []
    assert C.audit() == []
    assert C.delta(ID) == FormalSum.lift(unit_cut())


def test_truncation_inclusion_is_morphism():
    small = cofree_conilpotent(E_one(), 1, (1, 3))
    big = cofree_w2()
    G = truncation_inclusion(small, big)
    assert G.audit() == []
