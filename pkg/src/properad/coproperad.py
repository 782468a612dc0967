"""Conilpotent dg coproperads presented by finite structure constants.

The decomposition table of a coproperad stores, per basis label, the full
two-level decomposition as a combination of collapsed :class:`~properad.sbimod.Cut`
values (identity boxes implicit, recoverable from the legs).  The two trivial
cuts (element at the bottom under identity boxes, and the mirror) are always
present with coefficient one; projections onto infinitesimal shapes drop or
count identity boxes as the shape dictates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct

from .exactlin import ONE, ZERO, FormalSum
from .graphs import (
    DirectedGraph,
    VertexShape,
    act_on_legs,
    canonicalize,
    canonicalize_extra,
    connected_subsets,
    encode_graph,
    extract_subgraph,
    is_convex,
    parse_graph,
    size as graph_size,
    substitute,
)
from .sbimod import Cut, SBimodule, canonical_cut, check_action_laws, unit_cut

ID = "id"


class Coproperad:
    """Weight-graded conilpotent dg coproperad with finite tables."""

    def __init__(self, name, bimod: SBimodule, weights, delta_table,
                 diff_table=None, basis_graphs=None):
        self.name = name
        self.bimod = bimod
        self.weights = dict(weights)
        self.delta_table = {c: FormalSum(v) for c, v in delta_table.items()}
        self.diff_table = {c: FormalSum(v)
                           for c, v in (diff_table or {}).items() if v}
        self.basis_graphs = dict(basis_graphs or {})
        for c in bimod.labels():
            if c == ID:
                raise ValueError("the counit line label is implicit")
            if self.weights.get(c, 0) < 1:
                raise ValueError("coideal label %r needs weight >= 1" % c)
            if c not in self.delta_table:
                raise ValueError("missing decomposition for %r" % c)
        self._comonadic: dict[str, FormalSum] = {}
        self._corad: dict[str, int] = {}
        self._dens: dict[str, int] = {}

    # -- basic lookups ------------------------------------------------------

    def labels(self):
        return list(self.bimod.labels())

    def arity(self, c):
        return (1, 1) if c == ID else self.bimod.arity(c)

    def degree(self, c):
        return 0 if c == ID else self.bimod.degree(c)

    def weight(self, c):
        return 0 if c == ID else self.weights[c]

    def shape(self, c) -> VertexShape:
        m, n = self.arity(c)
        return VertexShape(m, n, c, self.degree(c))

    def dec_action(self):
        def action(dec, out_perm, in_perm):
            return self.bimod.act(dec, out_perm, in_perm)
        return action

    def max_density(self) -> int:
        return max([self.density_level(c) for c in self.labels()] + [1])

    # -- decomposition maps ---------------------------------------------------

    def delta(self, c) -> FormalSum:
        """Full two-level decomposition (table lookup, extended linearly)."""
        if isinstance(c, FormalSum):
            out = FormalSum()
            for l, coeff in c.items():
                for cut, a in self.delta(l).items():
                    out.add_term(cut, coeff * a)
            return out
        if c == ID:
            return FormalSum.lift(unit_cut())
        return FormalSum(self.delta_table[c])

    def delta_nontrivial(self, c) -> FormalSum:
        out = FormalSum()
        for cut, a in self.delta(c).items():
            if cut.graph.is_unit() or cut.is_trivial_bottom() or \
               cut.is_trivial_top():
                continue
            out.add_term(cut, a)
        return out

    def delta_11(self, c) -> FormalSum:
        """Projection onto cuts with one coideal box on each level."""
        if c == ID:
            raise ValueError("the counit line has no infinitesimal splitting")
        out = FormalSum()
        for cut, a in self.delta(c).items():
            if len(cut.bottom) == 1 and len(cut.top_vertices()) == 1:
                out.add_term(cut, a)
        return out

    def delta_left(self, n, c) -> FormalSum:
        """One coideal box at the bottom, a saturated top row of ``n`` boxes
        (identity decorations count); zero on the counit line."""
        if c == ID:
            return FormalSum()
        out = FormalSum()
        for cut, a in self.delta(c).items():
            if cut.graph.is_unit():
                continue
            if len(cut.bottom) == 1 and cut.n_top_boxes() == n:
                out.add_term(cut, a)
        return out

    def delta_right(self, n, c) -> FormalSum:
        """One coideal box at the top, a saturated bottom row of ``n`` boxes
        (identity decorations count); zero on the counit line."""
        if c == ID:
            return FormalSum()
        out = FormalSum()
        for cut, a in self.delta(c).items():
            if cut.graph.is_unit():
                continue
            if len(cut.top_vertices()) == 1 and cut.n_bottom_boxes() == n:
                out.add_term(cut, a)
        return out

    def delta_twolevel(self, n, c) -> FormalSum:
        """Projection onto cuts with ``n`` boxes in total across both levels,
        identity boxes included."""
        out = FormalSum()
        for cut, a in self.delta(c).items():
            if cut.n_top_boxes() + cut.n_bottom_boxes() == n:
                out.add_term(cut, a)
        return out

    def diff(self, c) -> FormalSum:
        if isinstance(c, FormalSum):
            out = FormalSum()
            for l, coeff in c.items():
                for l2, a in self.diff(l).items():
                    out.add_term(l2, coeff * a)
            return out
        if c == ID:
            return FormalSum()
        return FormalSum(self.diff_table.get(c, FormalSum()))

    # -- comonadic decomposition and filtrations -----------------------------

    def comonadic_decomposition(self, c) -> FormalSum:
        """Full decomposition into decorated graphs of all weights.

        Computed by peeling the source level: a graph is produced exactly
        once, through the cut whose top boxes are precisely its source
        vertices; coassociativity makes the coefficients recipe-independent.
        """
        if isinstance(c, FormalSum):
            out = FormalSum()
            for l, coeff in c.items():
                for g, a in self.comonadic_decomposition(l).items():
                    out.add_term(g, coeff * a)
            return out
        if c == ID:
            raise ValueError("comonadic decomposition lives on the coideal")
        if c in self._comonadic:
            return self._comonadic[c]
        action = self.dec_action()
        out = FormalSum.lift(canonicalize(
            DirectedGraph.single(self.shape(c)), action)[0])
        for cut, a in self.delta(c).items():
            if cut.graph.is_unit() or not cut.bottom or not cut.top_vertices():
                continue
            tops = cut.top_vertices()
            bottoms = cut.bottom_vertices()
            expansions = [self.comonadic_decomposition(
                cut.graph.verts[v].dec) for v in bottoms]
            for combo in iproduct(*[list(e.items()) for e in expansions]):
                coeff = a
                g = cut.graph
                marks = set(tops)
                for v, (h, ah) in sorted(zip(bottoms, combo), reverse=True):
                    coeff *= ah
                    g = substitute(g, v, h)
                    marks = {t + len(h.verts) - 1 if t > v else t
                             for t in marks}
                cg, sign, extra = canonicalize_extra(g, action,
                                                     (frozenset(marks),))
                if not sign:
                    continue
                sources = {v for v in range(len(cg.verts))
                           if not any(e[2] == v for e in cg.edges)}
                if sources == set(extra[0]):
                    out.add_term(cg, coeff * sign)
        self._comonadic[c] = out
        return out

    def coradical_level(self, c) -> int:
        """Least k such that the comonadic decomposition is supported on
        graphs with at most k vertices; 0 for the zero combination."""
        if isinstance(c, FormalSum):
            if c.is_zero():
                return 0
            return max(self.coradical_level(l) for l in c)
        if c not in self._corad:
            dec = self.comonadic_decomposition(c)
            self._corad[c] = max(g.weight() for g in dec)
        return self._corad[c]

    def coradical_level_ext(self, c) -> int:
        """Coradical level extended to the whole coproperad, id at level 0."""
        return 0 if c == ID else self.coradical_level(c)

    def density_level(self, c) -> int:
        """Least k bounding weight+size over the comonadic decomposition;
        the identity sits at level 1."""
        if isinstance(c, FormalSum):
            if c.is_zero():
                return 0
            return max(self.density_level(l) for l in c)
        if c == ID:
            return 1
        if c not in self._dens:
            dec = self.comonadic_decomposition(c)
            self._dens[c] = max(g.weight() + graph_size(g) for g in dec)
        return self._dens[c]

    # -- audits ---------------------------------------------------------------

    def audit(self, check_actions=True) -> list[str]:
        """Structural checks; returns failures (empty = pass)."""
        failures = []
        action = self.dec_action()
        if check_actions:
            bad = check_action_laws(self.bimod)
            if bad:
                failures.append("action: " + bad)
        for c in self.labels():
            dd = self.delta(c)
            (triv_b, sb), (triv_t, st) = _trivial_cuts_of(self, c)
            if dd.get(triv_b, ZERO) != sb:
                failures.append("counit: bottom trivial cut of %r has "
                                "coefficient %s" % (c, dd.get(triv_b, ZERO)))
            if dd.get(triv_t, ZERO) != st:
                failures.append("counit: top trivial cut of %r has "
                                "coefficient %s" % (c, dd.get(triv_t, ZERO)))
            for cut, a in dd.items():
                if cut.graph.is_unit():
                    failures.append("counit: unit cut in delta of %r" % c)
                    continue
                w = sum(self.weight(v.dec) for v in cut.graph.verts)
                if w != self.weight(c):
                    failures.append("weight additivity fails on %r" % c)
                if (cut.is_trivial_bottom() or cut.is_trivial_top()) and \
                        cut not in (triv_b, triv_t):
                    failures.append("counit: stray one-level cut in %r" % c)
            bad = self._coassoc_counterexample(c)
            if bad:
                failures.append(bad)
        failures.extend(self._audit_differential())
        return failures

    def _audit_differential(self) -> list[str]:
        failures = []
        if not self.diff_table:
            return failures
        for c in self.labels():
            again = self.diff(self.diff(c))
            if not again.is_zero():
                failures.append("differential does not square to zero on %r" % c)
            k = self.coradical_level(c)
            for l in self.diff(c):
                if self.coradical_level(l) > k - 1:
                    failures.append(
                        "differential does not lower the coradical "
                        "filtration on %r" % c)
                    break
        # coderivation law: delta(d c) = (d on one box) applied to delta(c)
        for c in self.labels():
            lhs = self.delta(self.diff(c))
            rhs = FormalSum()
            for cut, a in self.delta(c).items():
                if cut.graph.is_unit():
                    continue
                for term, coeff in self._apply_diff_to_cut(cut).items():
                    rhs.add_term(term, a * coeff)
            if lhs != rhs:
                failures.append("coderivation law fails on %r" % c)
        return failures

    def _apply_diff_to_cut(self, cut: Cut) -> FormalSum:
        """Derivation extension of the differential over a cut's boxes."""
        action = self.dec_action()
        out = FormalSum()
        g = cut.graph
        sign = 1
        for v in range(len(g.verts)):
            dec = g.verts[v].dec
            for l2, a in self.diff(dec).items():
                sh = g.verts[v]
                verts = g.verts[:v] + (VertexShape(sh.outs, sh.ins, l2,
                                                   sh.deg - 1),) + g.verts[v + 1:]
                moved = DirectedGraph(verts, g.edges, g.gins, g.gouts)
                c2, s2 = canonical_cut(moved, cut.bottom, action)
                if s2:
                    out.add_term(c2, sign * a * s2)
            if g.verts[v].deg % 2:
                sign = -sign
        return out

    def _coassoc_counterexample(self, c) -> str | None:
        lhs = self._expand_level(c, expand_bottom=True)
        rhs = self._expand_level(c, expand_bottom=False)
        if lhs != rhs:
            diff = lhs - rhs
            some = next(iter(diff))
            return ("coassociativity fails on %r (first discrepancy on a "
                    "3-level graph with %d vertices)"
                    % (c, some[0].weight()))
        return None

    def _expand_level(self, c, expand_bottom: bool) -> FormalSum:
        """Iterated decomposition into 3-level objects.

        Keys are (graph, (level1_indices, level2_indices)) with level 1 the
        bottom; level 3 is the complement.  Expanding the bottom level of
        every cut realizes (delta x id) . delta, expanding the top level
        realizes (id x delta) . delta; coassociativity is their equality.
        """
        action = self.dec_action()
        out = FormalSum()
        for cut, a in self.delta(c).items():
            if cut.graph.is_unit():
                out.add_term((DirectedGraph.unit(), (frozenset(), frozenset())),
                             a)
                continue
            row = cut.bottom_vertices() if expand_bottom else cut.top_vertices()
            keep = cut.top_vertices() if expand_bottom else cut.bottom_vertices()
            expansions = [list(self.delta(cut.graph.verts[v].dec).items())
                          for v in row]
            for combo in iproduct(*expansions):
                coeff = a
                g = cut.graph
                lower: set[int] = set()   # bottom parts of expanded boxes
                keep_marks = set(keep)
                valid = True
                for v, (sub, asub) in sorted(zip(row, combo), reverse=True):
                    h = sub.graph
                    if h.is_unit():
                        valid = False
                        break
                    coeff *= asub
                    hb = {v + t for t in sub.bottom}
                    g = substitute(g, v, h)
                    shift = len(h.verts) - 1

                    def bump(s, v=v, shift=shift):
                        return {t + shift if t > v else t for t in s}

                    lower = bump(lower) | hb
                    keep_marks = bump(keep_marks)
                if not valid:
                    continue
                expanded = set(range(len(g.verts))) - keep_marks
                upper = expanded - lower
                if expand_bottom:
                    l1, l2 = lower, upper          # level 3 = keep (old top)
                else:
                    l1, l2 = keep_marks, lower     # level 3 = upper
                cg, sign, extra = canonicalize_extra(
                    g, action, (frozenset(l1), frozenset(l2)))
                if not sign:
                    continue
                out.add_term((cg, extra), coeff * sign)
        return out


def _trivial_cuts_of(C: Coproperad, c):
    action = C.dec_action()
    g = DirectedGraph.single(C.shape(c))
    return canonical_cut(g, {0}, action), canonical_cut(g, set(), action)


# ---------------------------------------------------------------------------
# the cofree conilpotent coproperad on a truncated generator bimodule

def cofree_conilpotent(E: SBimodule, W: int, arity_bound,
                       corestriction=None, name=None) -> Coproperad:
    """Weight-truncated cofree conilpotent coproperad on generators ``E``.

    Basis: canonical connected generator-decorated graphs of weight <= W
    within the arity bound.  The decomposition of a graph sums over all
    partitions of its vertices into connected clusters placed on two levels
    with every inter-cluster edge descending.

    ``corestriction``: optional map {basis label -> FormalSum over labels of
    strictly smaller weight} inducing a coderivation (degree -1); it is the
    projection of the differential onto the cogenerators, extended by
    collapsing convex connected subgraphs.
    """
    from .graphs import enumerate_graphs

    shapes = [E.shape(l) for l in E.labels()]
    action = E.dec_action()
    graphs = enumerate_graphs(shapes, W, arity_bound, E.reduced, action)
    label_of = {g: _graph_label(g) for g in graphs}
    basis_graphs = {label_of[g]: g for g in graphs}

    components = {}
    degrees = {}
    weights = {}
    for g in graphs:
        l = label_of[g]
        m, n = g.arity()
        components.setdefault((m, n), []).append(l)
        degrees[l] = g.degree()
        weights[l] = g.weight()

    def label_action(label, out_perm, in_perm):
        g = basis_graphs[label]
        g2, sign = act_on_legs(g, out_perm, in_perm, action)
        if g2 not in label_of:
            raise ValueError("action leaves the truncation on %r" % label)
        return (sign, label_of[g2])

    bimod = SBimodule(components, degrees, label_action, E.reduced,
                      arity_bound)

    delta_table = {}
    for g in graphs:
        delta_table[label_of[g]] = _cofree_delta(g, basis_graphs, label_of,
                                                 action, label_action)

    diff_table = None
    if corestriction is not None:
        diff_table = _coderivation_from_corestriction(
            graphs, basis_graphs, label_of, corestriction, action,
            label_action)

    C = Coproperad(name or "cofree", bimod, weights, delta_table,
                   diff_table, basis_graphs)
    return C


def _graph_label(g: DirectedGraph) -> str:
    return encode_graph(g).replace("\n", "; ")


def _cofree_delta(g: DirectedGraph, basis_graphs, label_of, gen_action,
                  label_action) -> FormalSum:
    """All two-level clusterings of a generator-decorated graph."""
    out = FormalSum()
    n = len(g.verts)
    for partition in _partitions_into_connected(g):
        for levels in iproduct((0, 1), repeat=len(partition)):
            if not _valid_two_level(g, partition, levels):
                continue
            term = _cluster_cut(g, partition, levels, basis_graphs, label_of,
                                gen_action, label_action)
            if term is not None:
                cut, coeff = term
                out.add_term(cut, coeff)
    return out


def _partitions_into_connected(g: DirectedGraph):
    n = len(g.verts)
    conn = set(connected_subsets(g))

    def rec(remaining):
        if not remaining:
            yield []
            return
        first = min(remaining)
        rest = remaining - {first}
        from itertools import combinations
        others = sorted(rest)
        for r in range(0, len(others) + 1):
            for extra in combinations(others, r):
                cluster = frozenset({first} | set(extra))
                if cluster not in conn:
                    continue
                for tail in rec(remaining - cluster):
                    yield [cluster] + tail

    yield from rec(frozenset(range(n)))


def _valid_two_level(g, partition, levels) -> bool:
    # levels[i] == 0: bottom.  Every inter-cluster edge must go from a top
    # cluster to a bottom cluster.
    where = {}
    for i, cluster in enumerate(partition):
        for v in cluster:
            where[v] = i
    for (u, _, v, _) in g.edges:
        if where[u] == where[v]:
            continue
        if not (levels[where[u]] == 1 and levels[where[v]] == 0):
            return False
    return True


def _cluster_cut(g, partition, levels, basis_graphs, label_of, gen_action,
                 label_action):
    """Assemble the quotient two-level cut for one clustering."""
    from .exactlin import koszul_sign

    edge_by_producer = {(u, a): e for e in g.edges for (u, a) in [e[:2]]}
    edge_by_consumer = {(v, b): e for e in g.edges for (v, b) in [e[2:]]}
    order = sorted(range(len(partition)),
                   key=lambda i: (levels[i], min(partition[i])))
    coeff = ONE
    boxes = []
    wire_in = {}
    wire_out = {}
    for new_idx, i in enumerate(order):
        cluster = partition[i]
        sub, in_wires, out_wires = extract_subgraph(g, cluster)
        csub, sign = canonicalize(sub, gen_action)
        if not sign:
            return None
        coeff *= sign
        if csub not in label_of:
            return None  # cluster leaves the truncation (arity bound)
        label = label_of[csub]
        boxes.append((new_idx, label, csub, levels[i]))
        for slot, w in enumerate(in_wires):
            key = ("e",) + edge_by_producer[(w[1], w[2])] if w[0] == "edge" \
                else w
            wire_in[key] = (new_idx, slot)
        for slot, w in enumerate(out_wires):
            key = ("e",) + edge_by_consumer[(w[1], w[2])] if w[0] == "edge" \
                else w
            wire_out[key] = (new_idx, slot)

    # orientation: reorder g's vertices into concatenated cluster order
    concat = []
    for i in order:
        concat.extend(sorted(partition[i]))
    perm = [0] * len(g.verts)
    for pos, v in enumerate(concat):
        perm[v] = pos
    coeff *= koszul_sign(tuple(perm), [vs.deg for vs in g.verts])

    verts = []
    for new_idx, label, csub, lev in boxes:
        m, n = csub.arity()
        verts.append(VertexShape(m, n, label, csub.degree()))
    edges = set()
    for key, (bi, slot) in wire_in.items():
        if key[0] == "e":
            (bj, slot2) = wire_out[key]
            edges.add((bj, slot2, bi, slot))
    gins = [None] * len(g.gins)
    gouts = [None] * len(g.gouts)
    for key, (bi, slot) in wire_in.items():
        if key[0] == "gin":
            gins[key[1]] = (bi, slot)
    for key, (bj, slot) in wire_out.items():
        if key[0] == "gout":
            gouts[key[1]] = (bj, slot)
    quotient = DirectedGraph(tuple(verts), frozenset(edges),
                             tuple(gins), tuple(gouts))
    bottom = frozenset(i for i, (_, _, _, lev) in enumerate(boxes)
                       if lev == 0)
    cut, s2 = canonical_cut(quotient, bottom, label_action)
    if not s2:
        return None
    return cut, coeff * s2


def _coderivation_from_corestriction(graphs, basis_graphs, label_of,
                                     corestriction, gen_action, label_action):
    """Extend {graphs -> generators-ish} to a coderivation by collapsing
    convex connected subgraphs."""
    from .exactlin import koszul_sign

    table = {}
    for g in graphs:
        label = label_of[g]
        out = FormalSum()
        # collapse every convex connected subgraph S, replacing it by the
        # corestriction of the extracted label
        for S in connected_subsets(g):
            if not is_convex(g, S):
                continue
            sub, _, _ = extract_subgraph(g, S)
            csub, s0 = canonicalize(sub, gen_action)
            if not s0 or csub not in label_of:
                continue
            val = corestriction.get(label_of[csub], FormalSum())
            if val.is_zero():
                continue
            # orientation: gather S at the position of its first vertex, then
            # jump the (odd) differential past the earlier vertices
            first = min(S)
            target = list(range(first)) + sorted(S) + \
                [v for v in range(len(g.verts)) if v not in S and v > first]
            perm = [0] * len(g.verts)
            for pos, v in enumerate(target):
                perm[v] = pos
            gather = koszul_sign(tuple(perm), [vs.deg for vs in g.verts])
            jump = sum(g.verts[v].deg for v in range(first)) % 2
            for tgt, a in val.items():
                collapsed = _collapse(g, S, tgt, basis_graphs, label_of,
                                      gen_action)
                if collapsed is None:
                    continue
                cg, s1 = collapsed
                coeff = a * s0 * s1 * gather * (-1 if jump else 1)
                if cg not in label_of:
                    continue
                out.add_term(label_of[cg], coeff)
        if not out.is_zero():
            table[label] = out
    return table


def _collapse(g, S, target_label, basis_graphs, label_of, gen_action):
    """Replace the convex subgraph S by a single vertex with the given label.

    The target must have the same arity as the extracted subgraph; the legs
    of the collapsed vertex follow the extraction order.
    """
    sub, in_wires, out_wires = extract_subgraph(g, S)
    tgt_graph = basis_graphs[target_label]
    m, n = sub.arity()
    if tgt_graph.arity() != (m, n):
        return None
    order = sorted(S)
    # place a hole at the position of the first S-vertex, splice the target
    # graph into it afterwards
    pos_new = {}
    verts = []
    idx = 0
    for v in range(len(g.verts)):
        if v == order[0]:
            pos_new["S"] = idx
            verts.append(VertexShape(m, n, "?", tgt_graph.degree()))
            idx += 1
        elif v in S:
            continue
        else:
            pos_new[v] = idx
            verts.append(g.verts[v])
            idx += 1
    edges = set()
    for (u, a, v, b) in g.edges:
        if u in S and v in S:
            continue
        if u in S or v in S:
            continue
        edges.add((pos_new[u], a, pos_new[v], b))
    gins = [None] * len(g.gins)
    gouts = [None] * len(g.gouts)
    for i, (v, b) in enumerate(g.gins):
        if v not in S:
            gins[i] = (pos_new[v], b)
    for j, (u, a) in enumerate(g.gouts):
        if u not in S:
            gouts[j] = (pos_new[u], a)
    for slot, w in enumerate(in_wires):
        if w[0] == "edge":
            _, u, a = w
            edges.add((pos_new[u], a, pos_new["S"], slot))
        else:
            gins[w[1]] = (pos_new["S"], slot)
    for slot, w in enumerate(out_wires):
        if w[0] == "edge":
            _, v, b = w
            edges.add((pos_new["S"], slot, pos_new[v], b))
        else:
            gouts[w[1]] = (pos_new["S"], slot)
    g2 = DirectedGraph(tuple(verts), frozenset(edges), tuple(gins),
                       tuple(gouts))
    g3 = substitute(g2, pos_new["S"], tgt_graph)
    return canonicalize(g3, gen_action)


# ---------------------------------------------------------------------------
# morphisms

@dataclass
class CoproperadMorphism:
    """Morphism of coaugmented dg coproperads given on basis labels.

    ``entries`` maps source coideal labels to combinations of target labels;
    the counit line always maps identically.
    """

    source: Coproperad
    target: Coproperad
    entries: dict

    def __call__(self, c):
        if isinstance(c, FormalSum):
            out = FormalSum()
            for l, a in c.items():
                for l2, b in self(l).items():
                    out.add_term(l2, a * b)
            return out
        if c == ID:
            return FormalSum.lift(ID)
        return FormalSum(self.entries.get(c, FormalSum()))

    def audit(self) -> list[str]:
        failures = []
        tgt_action = self.target.dec_action()
        for c in self.source.labels():
            # differential compatibility
            lhs = self(self.source.diff(c))
            rhs = self.target.diff(self(c))
            if lhs != rhs:
                failures.append("morphism does not commute with d on %r" % c)
            # decomposition compatibility: apply entrywise to cut boxes
            lhs2 = FormalSum()
            for cut, a in self.source.delta(c).items():
                for cut2, b in self._push_cut(cut, tgt_action).items():
                    lhs2.add_term(cut2, a * b)
            rhs2 = self.target.delta(self(c))
            if lhs2 != rhs2:
                failures.append("morphism does not commute with delta on %r" % c)
        return failures

    def _push_cut(self, cut: Cut, tgt_action) -> FormalSum:
        if cut.graph.is_unit():
            return FormalSum.lift(cut)
        terms = [(cut.graph, ONE)]
        for v in range(len(cut.graph.verts)):
            new_terms = []
            for (g, coeff) in terms:
                sh = g.verts[v]
                img = self(sh.dec)
                for l2, a in img.items():
                    m, n = self.target.arity(l2)
                    if (m, n) != (sh.outs, sh.ins):
                        continue
                    verts = g.verts[:v] + (VertexShape(m, n, l2, self.target.degree(l2)),) + g.verts[v + 1:]
                    new_terms.append((DirectedGraph(verts, g.edges, g.gins,
                                                    g.gouts), coeff * a))
            terms = new_terms
        out = FormalSum()
        for g, coeff in terms:
            c2, s = canonical_cut(g, cut.bottom, tgt_action)
            if s:
                out.add_term(c2, coeff * s)
        return out


def truncation_inclusion(small: Coproperad, big: Coproperad) -> CoproperadMorphism:
    """Inclusion of a weight truncation (labels shared)."""
    entries = {c: FormalSum.lift(c) for c in small.labels()}
    return CoproperadMorphism(small, big, entries)


# ---------------------------------------------------------------------------
# the trivial coproperad

def trivial_coproperad(reduced="left", arity_bound=(3, 3)) -> Coproperad:
    return Coproperad("trivial",
                      SBimodule({}, {}, None, reduced, arity_bound),
                      {}, {})


# ---------------------------------------------------------------------------
# file format
#
# Sections: [meta] (name, reduced, arity_bound, action), [generators]
# (label : arity=m,n degree=d weight=w [graph={...}]), [delta] (entries
# `label -> coeff * {graph expression; lvl: bottom=...}`, nontrivial cuts
# only; the two trivial cuts are implied by counit normalization), and
# [differential] (entries `label -> coeff * label`).  Graph expressions are
# the line encoding of the graphs module joined by "; ".  Rational
# coefficients are written p/q.  Ingestion runs the audit and refuses on
# failure.

def write_coproperad(C: Coproperad) -> str:
    names = {}
    for i, c in enumerate(sorted(C.labels(),
                                 key=lambda l: (C.weight(l), l))):
        if _safe_label(c):
            names[c] = c
        else:
            names[c] = "w%d_%d" % (C.weight(c), i)
    lines = ["[meta]"]
    lines.append("name = %s" % C.name)
    lines.append("reduced = %s" % C.bimod.reduced)
    lines.append("arity_bound = %d %d" % C.bimod.arity_bound)
    action_kind = "graph-legs" if C.basis_graphs else "trivial"
    if all("[" in c and c.startswith("mu") for c in C.labels()) \
            and C.labels():
        action_kind = "sn-regular"
    lines.append("action = %s" % action_kind)
    lines.append("")
    lines.append("[generators]")
    for c in sorted(C.labels(), key=lambda l: (C.weight(l), names[l])):
        m, n = C.arity(c)
        entry = "%s : arity=%d,%d degree=%d weight=%d" % (
            names[c], m, n, C.degree(c), C.weight(c))
        if c in C.basis_graphs:
            entry += " graph={%s}" % _flat(encode_graph(C.basis_graphs[c]))
        lines.append(entry)
    lines.append("")
    lines.append("[delta]")
    for c in sorted(C.labels(), key=lambda l: (C.weight(l), names[l])):
        for cut, coeff in sorted(C.delta_nontrivial(c).items(),
                                 key=lambda t: t[0].sort_key()):
            lines.append("%s -> %s * {%s}" % (
                names[c], coeff, _encode_cut(cut, names)))
    lines.append("")
    lines.append("[differential]")
    for c in sorted(C.labels(), key=lambda l: (C.weight(l), names[l])):
        for c2, coeff in sorted(C.diff(c).items()):
            lines.append("%s -> %s * %s" % (names[c], coeff, names[c2]))
    return "\n".join(lines) + "\n"


def _safe_label(l: str) -> bool:
    return all(ch.isalnum() or ch in "_[]" for ch in l)


def _flat(text: str) -> str:
    return text.replace("\n", "; ")


def _encode_cut(cut: Cut, names) -> str:
    g = cut.graph
    renamed = DirectedGraph(
        tuple(VertexShape(v.outs, v.ins, names[v.dec], v.deg)
              for v in g.verts),
        g.edges, g.gins, g.gouts)
    body = _flat(encode_graph(renamed))
    lvl = ",".join("v%d" % v for v in sorted(cut.bottom))
    return "%s; lvl: bottom=%s" % (body, lvl)


def parse_coproperad(text: str) -> Coproperad:
    sections = {"meta": [], "generators": [], "delta": [], "differential": []}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            if current not in sections:
                raise ValueError("unknown section %r" % current)
            continue
        if current is None:
            raise ValueError("content before the first section")
        sections[current].append(line)
    meta = {}
    for line in sections["meta"]:
        k, _, v = line.partition("=")
        meta[k.strip()] = v.strip()
    name = meta.get("name", "ingested")
    reduced = meta.get("reduced", "left")
    bound = tuple(int(x) for x in meta.get("arity_bound", "3 3").split())
    action_kind = meta.get("action", "trivial")

    arities = {}
    degrees = {}
    weights = {}
    graphs = {}
    for line in sections["generators"]:
        label, _, rest = line.partition(":")
        label = label.strip()
        rest = rest.strip()
        attrs = {}
        if "graph={" in rest:
            head, _, tail = rest.partition("graph={")
            if not tail.endswith("}"):
                raise ValueError("unterminated graph attribute")
            attrs["graph"] = tail[:-1]
            rest = head.strip()
        for kv in rest.split():
            k, _, v = kv.partition("=")
            attrs[k] = v
        m, n = (int(x) for x in attrs["arity"].split(","))
        arities[label] = (m, n)
        degrees[label] = int(attrs["degree"])
        weights[label] = int(attrs["weight"])
        if "graph" in attrs:
            graphs[label] = parse_graph(attrs["graph"].replace("; ", "\n"))

    if action_kind == "trivial":
        action = None
    elif action_kind == "sn-regular":
        from .fixtures import _assoc_action
        action = _assoc_action
    elif action_kind == "graph-legs":
        def action(label, out_perm, in_perm):
            g = graphs[label]
            g2, sign = act_on_legs(g, out_perm, in_perm)
            match = next((l for l, gg in graphs.items() if gg == g2), None)
            if match is None:
                raise ValueError("action leaves the ingested basis on %r"
                                 % label)
            return (sign, match)
    else:
        raise ValueError("unknown action kind %r" % action_kind)

    components = {}
    for label, mn in arities.items():
        components.setdefault(mn, []).append(label)
    components = {mn: tuple(sorted(ls)) for mn, ls in components.items()}
    bimod = SBimodule(components, degrees, action, reduced, bound)

    shapes = {l: VertexShape(arities[l][0], arities[l][1], l, degrees[l])
              for l in arities}
    delta_table = {l: FormalSum() for l in arities}
    for line in sections["delta"]:
        label, cut, coeff = _parse_cut_entry(line, shapes)
        delta_table[label].add_term(cut, coeff)
    # counit normalization: the two trivial cuts are implicit
    for l in arities:
        g = DirectedGraph.single(shapes[l])
        for bottom in ({0}, set()):
            cut, s = canonical_cut(g, bottom, bimod.dec_action())
            delta_table[l].add_term(cut, s)

    diff_table = {}
    for line in sections["differential"]:
        label, _, rest = line.partition("->")
        coeff_str, _, target = rest.partition("*")
        diff_table.setdefault(label.strip(), FormalSum()).add_term(
            target.strip(), Fraction(coeff_str.strip()))

    C = Coproperad(name, bimod, weights, delta_table, diff_table, graphs)
    failures = C.audit()
    if failures:
        raise ValueError("ingested coproperad fails its audit: %s"
                         % "; ".join(failures[:3]))
    return C


def _parse_cut_entry(line: str, shapes):
    label, _, rest = line.partition("->")
    label = label.strip()
    coeff_str, _, expr = rest.partition("*")
    coeff = Fraction(coeff_str.strip())
    expr = expr.strip()
    if not (expr.startswith("{") and expr.endswith("}")):
        raise ValueError("delta entry needs a braced graph expression")
    body = expr[1:-1]
    pieces = [p.strip() for p in body.split(";")]
    lvl = [p for p in pieces if p.startswith("lvl:")]
    if len(lvl) != 1:
        raise ValueError("delta entry needs one lvl line")
    rest_lines = [p for p in pieces if not p.startswith("lvl:")]
    graph = parse_graph("\n".join(rest_lines))
    # restore shape degrees from the generator table
    graph = DirectedGraph(
        tuple(VertexShape(v.outs, v.ins, v.dec, shapes[v.dec].deg)
              for v in graph.verts),
        graph.edges, graph.gins, graph.gouts)
    spec = lvl[0].partition(":")[2].strip()
    spec = spec.partition("=")[2].strip()
    bottom = frozenset(int(tok[1:]) for tok in spec.split(",") if tok)
    return label, Cut(graph, bottom), coeff
