"""S-bimodules, the connected composition product, infinitesimal products,
and endomorphism S-bimodules.

Two-level objects are stored collapsed: identity boxes are never
materialized as vertices.  A :class:`Cut` records the underlying decorated
graph together with the set of bottom-level vertices; the identity boxes of
each level are recovered from the legs (a global input wired to a bottom
vertex passes through one top identity box, a global output leaving a top
vertex passes through one bottom identity box).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .exactlin import ONE, ZERO, ChainComplex, FormalSum, koszul_sign
from .graphs import (
    THRU,
    DirectedGraph,
    TwoLevelScheme,
    VertexShape,
    canonicalize_extra,
)


class SBimodule:
    """Arity-indexed graded spaces with signed-permutation group actions.

    ``action(label, out_perm, in_perm) -> (coeff, label)`` resolves the rigid
    re-slotting of a basis element; coefficients are always 0 or a ratio of
    units, and the identity permutation must act trivially.
    """

    def __init__(self, components, degrees, action=None, reduced="left",
                 arity_bound=(3, 3), payload=None):
        self.components = {k: tuple(v) for k, v in components.items() if v}
        self.degrees = dict(degrees)
        self._action = action
        self.reduced = reduced
        self.arity_bound = arity_bound
        self.payload = payload or {}
        self._arity = {}
        for (m, n), labels in self.components.items():
            if reduced == "left" and m == 0:
                raise ValueError("left-reduced bimodule with (0,n) component")
            if reduced == "right" and n == 0:
                raise ValueError("right-reduced bimodule with (m,0) component")
            if m > arity_bound[0] or n > arity_bound[1]:
                raise ValueError("component (%d,%d) exceeds arity bound" % (m, n))
            for l in labels:
                if l in self._arity:
                    raise ValueError("duplicate label %r" % l)
                self._arity[l] = (m, n)

    def labels(self):
        for labels in self.components.values():
            yield from labels

    def arity(self, label):
        return self._arity[label]

    def degree(self, label):
        return self.degrees[label]

    def shape(self, label) -> VertexShape:
        m, n = self._arity[label]
        return VertexShape(m, n, label, self.degrees[label])

    def act(self, label, out_perm, in_perm):
        if self._action is None:
            return (ONE, label)
        return self._action(label, out_perm, in_perm)

    def dec_action(self):
        """Decoration action usable by graphs.canonicalize."""
        def action(dec, out_perm, in_perm):
            return self.act(dec, out_perm, in_perm)
        return action

    def dim(self, m, n):
        return len(self.components.get((m, n), ()))


def check_action_laws(M: SBimodule, max_size: int = 4):
    """Verify that the stored actions are group actions on every component.

    Returns the first counterexample as a string, or None.
    """
    for (m, n), labels in M.components.items():
        if m > max_size or n > max_size:
            continue
        for l in labels:
            idm, idn = tuple(range(m)), tuple(range(n))
            c, l2 = M.act(l, idm, idn)
            if (c, l2) != (ONE, l):
                return "identity acts nontrivially on %r" % l
            for s1 in permutations(range(m)):
                for t1 in permutations(range(n)):
                    c1, l1 = M.act(l, s1, t1)
                    if not c1:
                        return "action annihilates %r" % l
                    for s2 in permutations(range(m)):
                        for t2 in permutations(range(n)):
                            # renaming convention: acting by (s1, t1), then by
                            # (s2, t2), renames slot i to s2[s1[i]]
                            c2, l12 = M.act(l1, s2, t2)
                            comp_s = tuple(s2[s1[i]] for i in range(m))
                            comp_t = tuple(t2[t1[i]] for i in range(n))
                            c3, l3 = M.act(l, comp_s, comp_t)
                            if (c1 * c2, l12) != (c3, l3):
                                return ("composition law fails on %r with %r,%r"
                                        % (l, (s1, t1), (s2, t2)))
    return None


# ---------------------------------------------------------------------------
# two-level cuts

@dataclass(frozen=True)
class Cut:
    """Two-level decorated graph, collapsed: ``bottom`` lists the indices of
    bottom-level vertices; identity boxes are implicit in the legs."""

    graph: DirectedGraph
    bottom: frozenset

    def __post_init__(self):
        if not all(0 <= v < len(self.graph.verts) for v in self.bottom):
            raise ValueError("bottom set out of range")
        for (u, a, v, b) in self.graph.edges:
            if u in self.bottom or v not in self.bottom:
                raise ValueError("cut edges must run from the top level down")

    def sort_key(self):
        return (self.graph.encode_key(), tuple(sorted(self.bottom)))

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    # -- box bookkeeping ----------------------------------------------------

    def top_vertices(self):
        return [v for v in range(len(self.graph.verts)) if v not in self.bottom]

    def bottom_vertices(self):
        return sorted(self.bottom)

    def top_id_legs(self):
        """Global input positions passing through a top identity box."""
        if self.graph.is_unit():
            return [0]
        return [i for i, (v, _) in enumerate(self.graph.gins)
                if v in self.bottom]

    def bottom_id_legs(self):
        """Global output positions passing through a bottom identity box."""
        if self.graph.is_unit():
            return [0]
        return [j for j, (u, _) in enumerate(self.graph.gouts)
                if u not in self.bottom]

    def n_top_boxes(self):
        return len(self.top_vertices()) + len(self.top_id_legs())

    def n_bottom_boxes(self):
        return len(self.bottom_vertices()) + len(self.bottom_id_legs())

    def boxes(self):
        """Ordered box list, bottom level first.

        Entries are ("v", vertex_index) for decorated boxes, ("idt", i) for a
        top identity box on global input i, ("idb", j) for a bottom identity
        box on global output j.  Identity boxes have degree 0, so their
        placement within a level never contributes Koszul signs.
        """
        out = [("v", v) for v in self.bottom_vertices()]
        out += [("idb", j) for j in self.bottom_id_legs()]
        out += [("v", v) for v in self.top_vertices()]
        out += [("idt", i) for i in self.top_id_legs()]
        return out

    def box_degree(self, box, degrees) -> int:
        if box[0] == "v":
            return self.graph.verts[box[1]].deg if degrees is None \
                else degrees[box[1]]
        return 0

    def is_trivial_bottom(self):
        """True for the cut (c at the bottom, identity boxes on top)."""
        return not self.graph.is_unit() and \
            len(self.bottom) == len(self.graph.verts)

    def is_trivial_top(self):
        return not self.graph.is_unit() and not self.bottom


def canonical_cut(graph: DirectedGraph, bottom, action) -> tuple[Cut, Fraction]:
    g, coeff, extra = canonicalize_extra(graph, action, (frozenset(bottom),))
    return Cut(g, extra[0]), coeff


def unit_cut() -> Cut:
    return Cut(DirectedGraph.unit(), frozenset())


def trivial_cuts(label_shape: VertexShape):
    """The two trivial cuts of a one-vertex element."""
    g = DirectedGraph.single(label_shape)
    return Cut(g, frozenset({0})), Cut(g, frozenset())


# ---------------------------------------------------------------------------
# connected composition product and infinitesimal products

class CutVector(FormalSum):
    """FormalSum keyed by Cut values."""


def _cut_dec_action(M: SBimodule, N: SBimodule):
    owner = {}
    for l in M.labels():
        owner[l] = M
    for l in N.labels():
        owner.setdefault(l, N)

    def action(dec, out_perm, in_perm):
        return owner[dec].act(dec, out_perm, in_perm)

    return action


def boxtimes(M: SBimodule, N: SBimodule, arity_bound=None) -> SBimodule:
    """Connected composition product: two-level connected graphs with bottom
    boxes from ``M``, top boxes from ``N``, identity wires allowed on both
    levels (collapsed representation).

    The resulting bimodule's labels are stable cut encodings; the cut behind
    a label is stored in ``payload``.
    """
    if M.reduced != N.reduced:
        raise ValueError("mixed reducedness")
    bound = arity_bound or M.arity_bound
    action = _cut_dec_action(M, N)
    cuts = {}
    for cut, _ in _enumerate_cuts(M, N, bound):
        label = _cut_label(cut)
        cuts[label] = cut
    components = {}
    degrees = {}
    for label, cut in sorted(cuts.items()):
        m, n = cut.graph.arity()
        components.setdefault((m, n), []).append(label)
        degrees[label] = cut.graph.degree()

    def cut_action(label, out_perm, in_perm):
        cut = cuts[label]
        g = cut.graph
        gins = [None] * len(g.gins)
        for i, ep in enumerate(g.gins):
            gins[in_perm[i]] = ep
        gouts = [None] * len(g.gouts)
        for j, ep in enumerate(g.gouts):
            gouts[out_perm[j]] = ep
        moved = DirectedGraph(g.verts, g.edges, tuple(gins), tuple(gouts))
        c2, coeff = canonical_cut(moved, cut.bottom, action)
        return (coeff, _cut_label(c2))

    return SBimodule(components, degrees, cut_action, M.reduced, bound,
                     payload={"cuts": cuts, "bottom": M, "top": N})


def _cut_label(cut: Cut) -> str:
    from .graphs import encode_graph
    body = encode_graph(cut.graph).replace("\n", "; ")
    return "{%s; lvl: bottom=%s}" % (
        body, ",".join("v%d" % v for v in sorted(cut.bottom)))


def _enumerate_cuts(M: SBimodule, N: SBimodule, bound):
    """All canonical cuts within the arity bound (connected, nonunit)."""
    action = _cut_dec_action(M, N)
    m_shapes = [M.shape(l) for l in M.labels()]
    n_shapes = [N.shape(l) for l in N.labels()]
    seen = set()
    out = []
    max_per_level = max(bound) + 1
    from itertools import combinations_with_replacement
    for kb in range(0, max_per_level + 1):
        for kt in range(0, max_per_level + 1):
            if kb + kt == 0 or (kb > 1 and kt == 0) or (kt > 1 and kb == 0):
                continue
            for bots in combinations_with_replacement(m_shapes, kb):
                for tops in combinations_with_replacement(n_shapes, kt):
                    for g in _wire_two_level(bots, tops, bound):
                        cut, coeff = canonical_cut(g, frozenset(range(kb)),
                                                   action)
                        if coeff and cut not in seen:
                            seen.add(cut)
                            out.append((cut, coeff))
    out.sort(key=lambda t: t[0].sort_key())
    return out


def _wire_two_level(bots, tops, bound):
    """Graphs on bottom row ``bots`` + top row ``tops``, edges top->bottom."""
    kb, kt = len(bots), len(tops)
    verts = tuple(bots) + tuple(tops)
    outs = [(kb + u, a) for u in range(kt) for a in range(tops[u].outs)]
    ins = [(v, b) for v in range(kb) for b in range(bots[v].ins)]
    results = []

    def rec(i, free_ins, edges):
        if i == len(outs):
            try_build(free_ins, edges)
            return
        u, a = outs[i]
        rec(i + 1, free_ins, edges)  # leave global
        for (v, b) in sorted(free_ins):
            free_ins.discard((v, b))
            edges.append((u, a, v, b))
            rec(i + 1, free_ins, edges)
            edges.pop()
            free_ins.add((v, b))

    def try_build(free_ins, edges):
        # remaining bottom inputs and all top inputs become global inputs;
        # remaining top outputs and all bottom outputs become global outputs
        g_ins = sorted(free_ins) + [(kb + u, b) for u in range(kt)
                                    for b in range(tops[u].ins)]
        used_out = {e[:2] for e in edges}
        g_outs = [(v, a) for v in range(kb) for a in range(bots[v].outs)]
        g_outs += [oa for oa in outs if oa not in used_out]
        if len(g_ins) > bound[1] or len(g_outs) > bound[0]:
            return
        # connectivity check before spending time on leg orders
        adj = {v: set() for v in range(kb + kt)}
        for (u, _, v, _) in edges:
            adj[u].add(v)
            adj[v].add(u)
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != kb + kt:
            return
        for pi in permutations(g_ins):
            for po in permutations(g_outs):
                results.append(DirectedGraph(verts, frozenset(edges),
                                             tuple(pi), tuple(po)))

    rec(0, set(ins), [])
    return results


def inf_left(M: SBimodule, N: SBimodule, n: int,
             arity_bound=None) -> SBimodule:
    """Left infinitesimal product: one ``M`` box at the bottom (plus identity
    wires), a saturated top level of exactly ``n`` ``N`` boxes."""
    if n < 1:
        raise ValueError("n must be at least 1")
    prod = boxtimes(M, N, arity_bound)
    return _filter_product(prod, lambda cut: len(cut.bottom) == 1
                           and not cut.top_id_legs()
                           and len(cut.top_vertices()) == n)


def inf_right(M: SBimodule, N: SBimodule, n: int,
              arity_bound=None) -> SBimodule:
    """Right infinitesimal product: one ``N`` box at the top (plus identity
    wires), a saturated bottom level of exactly ``n`` ``M`` boxes."""
    if n < 1:
        raise ValueError("n must be at least 1")
    prod = boxtimes(M, N, arity_bound)
    return _filter_product(prod, lambda cut: len(cut.top_vertices()) == 1
                           and not cut.bottom_id_legs()
                           and len(cut.bottom) == n)


def _filter_product(prod: SBimodule, keep) -> SBimodule:
    cuts = {l: c for l, c in prod.payload["cuts"].items() if keep(c)}
    components = {}
    for (mn, labels) in prod.components.items():
        kept = [l for l in labels if l in cuts]
        if kept:
            components[mn] = kept
    degrees = {l: prod.degrees[l] for l in cuts}
    payload = dict(prod.payload)
    payload["cuts"] = cuts
    return SBimodule(components, degrees, prod._action, prod.reduced,
                     prod.arity_bound, payload=payload)


def unit_iso_from_boxtimes(prod: SBimodule, side: str):
    """Explicit unit isomorphism I x M -> M (side='left') or M x I -> M."""
    table = {}
    for label, cut in prod.payload["cuts"].items():
        if side == "left" and cut.is_trivial_top():
            table[label] = cut.graph.verts[0].dec
        elif side == "right" and cut.is_trivial_bottom():
            table[label] = cut.graph.verts[0].dec
    return table


# ---------------------------------------------------------------------------
# endomorphism bimodules

def word_degree(cx: ChainComplex, word) -> int:
    return sum(cx.space.degree(l) for l in word)


class EndBimodule:
    """Multilinear maps between tensor powers, on the tensor basis.

    A basis key is ``(win, wout)``: the map sending the input word ``win`` to
    the output word ``wout`` and every other basis word to zero.
    """

    def __init__(self, source: ChainComplex, target: ChainComplex,
                 arity_bound=(3, 3)):
        self.source = source
        self.target = target
        self.arity_bound = arity_bound

    def component(self, m: int, n: int):
        from itertools import product as iproduct
        src = [l for l, _ in self.source.space.basis]
        tgt = [l for l, _ in self.target.space.basis]
        return [(win, wout)
                for win in iproduct(src, repeat=n)
                for wout in iproduct(tgt, repeat=m)]

    def degree(self, key) -> int:
        win, wout = key
        return word_degree(self.target, wout) - word_degree(self.source, win)

    def diff(self, key) -> FormalSum:
        """Mapping-space differential d_B . f - (-1)^{|f|} f . d_A."""
        win, wout = key
        out = FormalSum()
        # post-compose with d_B, Koszul-extended over the output word
        sign = 1
        for i, l in enumerate(wout):
            dl = self.target.differential(l)
            for l2, c in dl.items():
                out.add_term((win, wout[:i] + (l2,) + wout[i + 1:]), sign * c)
            if self.target.space.degree(l) % 2:
                sign = -sign
        # pre-compose with d_A: words w' with d(w') hitting win
        fsign = -1 if self.degree(key) % 2 else 1
        sign = 1
        for i, l in enumerate(win):
            for l0, d0 in self.source.space.basis:
                c = self.source.differential(l0).get(l, ZERO)
                if c:
                    w2 = win[:i] + (l0,) + win[i + 1:]
                    out.add_term((w2, wout), -fsign * sign * c)
            if self.source.space.degree(l) % 2:
                sign = -sign
        return out

    def act(self, key, out_perm, in_perm):
        """Signed permutation action on the tensor basis.

        Renaming convention, matching graphs.act_on_legs: the i-th tensor
        slot of the original becomes slot ``perm[i]`` of the result; the
        Koszul sign is that of moving the graded letters accordingly.
        """
        win, wout = key
        new_win = [None] * len(win)
        for i, l in enumerate(win):
            new_win[in_perm[i]] = l
        new_wout = [None] * len(wout)
        for j, l in enumerate(wout):
            new_wout[out_perm[j]] = l
        s_in = koszul_sign(tuple(in_perm),
                           [self.source.space.degree(l) for l in win])
        s_out = koszul_sign(tuple(out_perm),
                            [self.target.space.degree(l) for l in wout])
        return (Fraction(s_in * s_out), (tuple(new_win), tuple(new_wout)))

    def identity_value(self) -> FormalSum:
        if self.source is not self.target and \
           self.source.space != self.target.space:
            raise ValueError("identity needs equal source and target")
        out = FormalSum()
        for l, _ in self.source.space.basis:
            out.add_term(((l,), (l,)), ONE)
        return out


def end_bimodule(A: ChainComplex, B: ChainComplex | None = None,
                 arity_bound=(3, 3)) -> EndBimodule:
    return EndBimodule(A, B if B is not None else A, arity_bound)


# ---------------------------------------------------------------------------
# graph evaluation in endomorphism bimodules

def evaluate_graph(g: DirectedGraph, values):
    """Compose End-basis values along a decorated graph.

    ``values[v]`` is ``(FormalSum over (win, wout) keys, degree, source_cx,
    target_cx)`` for vertex v.  Returns a FormalSum over composite keys
    ``(global_in_word, global_out_word)``.

    The Koszul sign is accumulated by a symbolic walk: vertices are applied
    level by level (levels = longest path from the inputs), the running state
    is the ordered list of pending wires, and both wire permutations and the
    passage of odd maps across odd arguments contribute signs.
    """
    if g.is_unit():
        raise ValueError("unit graph carries no vertex values")
    n = len(g.verts)
    producers = {}
    for (u, a, v, b) in g.edges:
        producers[(v, b)] = ("e", u, a)
    for i, (v, b) in enumerate(g.gins):
        producers[(v, b)] = ("gin", i)
    consumers = {}
    for (u, a, v, b) in g.edges:
        consumers[(u, a)] = ("e", v, b)
    for j, (u, a) in enumerate(g.gouts):
        consumers[(u, a)] = ("gout", j)

    # longest-path times
    time = [None] * n

    def compute_time(v):
        if time[v] is not None:
            return time[v]
        t = 1
        for b in range(g.verts[v].ins):
            src = producers[(v, b)]
            if src[0] == "e":
                t = max(t, compute_time(src[1]) + 1)
        time[v] = t
        return t

    for v in range(n):
        compute_time(v)
    maxt = max(time) if n else 0

    out = FormalSum()

    def expand(vidx, chosen, coeff):
        if vidx == n:
            term = _propagate(g, chosen, [values[v][1] for v in range(n)],
                              producers, consumers, time, maxt,
                              [values[v][2] for v in range(n)],
                              [values[v][3] for v in range(n)])
            if term is not None:
                key, sign = term
                out.add_term(key, coeff * sign)
            return
        for key, c in values[vidx][0].items():
            expand(vidx + 1, chosen + [key], coeff * c)

    expand(0, [], ONE)
    return out


def _propagate(g, chosen, degrees, producers, consumers, time, maxt,
               src_cxs, tgt_cxs):
    n = len(g.verts)
    # wire labels are forced by the producer side; check the consumer side
    def wire_label(src):
        if src[0] == "gin":
            v, b = g.gins[src[1]]
            return chosen[v][0][b], src_cxs[v].space.degree(chosen[v][0][b])
        _, u, a = src
        return chosen[u][1][a], tgt_cxs[u].space.degree(chosen[u][1][a])

    for (u, a, v, b) in g.edges:
        if chosen[u][1][a] != chosen[v][0][b]:
            return None
        if tgt_cxs[u] is not src_cxs[v] and \
           tgt_cxs[u].space != src_cxs[v].space:
            return None

    # sign walk
    state = []  # list of (wire_id, degree)
    for i in range(len(g.gins)):
        lbl, d = wire_label(("gin", i))
        state.append((("gin", i), d))
    sign = 1
    for t in range(1, maxt + 1):
        row = [v for v in range(n) if time[v] == t]
        # wires consumed by the row, in (vertex, slot) order
        want = []
        for v in row:
            for b in range(g.verts[v].ins):
                src = producers[(v, b)]
                wid = ("gin", src[1]) if src[0] == "gin" else ("e", src[1], src[2])
                want.append(wid)
        pos_of = {w: i for i, (w, _) in enumerate(state)}
        rest = [i for i, (w, _) in enumerate(state) if w not in set(want)]
        order = [pos_of[w] for w in want] + rest
        # permutation moving state[order[k]] to position k
        perm = [0] * len(state)
        for k, i in enumerate(order):
            perm[i] = k
        sign *= koszul_sign(tuple(perm), [d for (_, d) in state])
        state = [state[i] for i in order]
        # apply the row: each map crosses the arguments of the earlier maps
        consumed = 0
        args_before = 0
        new_front = []
        for v in row:
            nin = g.verts[v].ins
            block = state[consumed:consumed + nin]
            if degrees[v] % 2 and args_before % 2:
                sign = -sign
            args_before += sum(d for (_, d) in block)
            consumed += nin
            for a in range(g.verts[v].outs):
                lbl = chosen[v][1][a]
                new_front.append((("e", v, a),
                                  tgt_cxs[v].space.degree(lbl)))
        state = new_front + state[consumed:]

    # final reorder into global output order
    want = []
    for j in range(len(g.gouts)):
        u, a = g.gouts[j]
        want.append(("e", u, a))
    pos_of = {w: i for i, (w, _) in enumerate(state)}
    perm = [0] * len(state)
    for k, w in enumerate(want):
        perm[pos_of[w]] = k
    sign *= koszul_sign(tuple(perm), [d for (_, d) in state])

    win = tuple(chosen[v][0][b] for (v, b) in g.gins)
    wout = tuple(chosen[g.gouts[j][0]][1][g.gouts[j][1]]
                 for j in range(len(g.gouts)))
    return (win, wout), Fraction(sign)


def compose_in_end(scheme: TwoLevelScheme, fillers) -> FormalSum:
    """Wire End-valued fillers along a two-level scheme.

    ``fillers[slot] = (FormalSum over End keys, degree, source_cx, target_cx)``.
    """
    g = scheme.graph
    values = [fillers[v] for v in range(len(g.verts))]
    return evaluate_graph(g, values)
