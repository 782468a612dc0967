"""Reduced directed connected acyclic graphs with decorated vertices.

A graph value carries an ordered vertex list (its orientation); equality of
basis elements is equality of canonical forms, and coefficients absorb the
Koszul signs produced by reordering vertices and re-slotting attachments.

Conventions
-----------
* An edge ``(u, a, v, b)`` wires output slot ``a`` of vertex ``u`` into input
  slot ``b`` of vertex ``v``; operationally ``u`` is applied first.
* Global inputs enter at the top of a drawing, global outputs leave at the
  bottom, so in a level assignment every edge descends strictly.
* The vertex list is ordered bottom-up: a vertex may only be listed once all
  consumers of its outputs are listed.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, permutations, product

from .exactlin import ONE, ZERO, koszul_sign

THRU = -1  # pseudo-vertex index for a global input wired straight to an output


@dataclass(frozen=True, order=True)
class VertexShape:
    """A decorated vertex: ``outs`` outputs, ``ins`` inputs."""

    outs: int
    ins: int
    dec: str
    deg: int

    def __post_init__(self):
        if self.outs < 0 or self.ins < 0 or (self.outs, self.ins) == (0, 0):
            raise ValueError("invalid vertex arity (%d,%d)" % (self.outs, self.ins))


@dataclass(frozen=True)
class DirectedGraph:
    """Connected directed acyclic graph with ordered global legs.

    ``gins[i]`` is the endpoint receiving the graph's i-th input: either a
    vertex input slot ``(v, b)`` or ``(THRU, j)`` meaning the input runs
    straight to global output ``j``.  ``gouts`` mirrors this.  Only the unit
    graph (no vertices, one through wire) may contain through wires.
    """

    verts: tuple[VertexShape, ...]
    edges: frozenset[tuple[int, int, int, int]]
    gins: tuple[tuple[int, int], ...]
    gouts: tuple[tuple[int, int], ...]

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def unit() -> "DirectedGraph":
        return DirectedGraph((), frozenset(), ((THRU, 0),), ((THRU, 0),))

    @staticmethod
    def single(shape: VertexShape) -> "DirectedGraph":
        return DirectedGraph(
            (shape,), frozenset(),
            tuple((0, b) for b in range(shape.ins)),
            tuple((0, a) for a in range(shape.outs)))

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        n = len(self.verts)
        if n == 0:
            if self.gins != ((THRU, 0),) or self.gouts != ((THRU, 0),):
                raise ValueError("the only vertex-free graph is the unit wire")
            return
        in_used: set[tuple[int, int]] = set()
        out_used: set[tuple[int, int]] = set()
        for (u, a, v, b) in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError("edge endpoint out of range")
            if not (0 <= a < self.verts[u].outs and 0 <= b < self.verts[v].ins):
                raise ValueError("edge slot out of range")
            if (u, a) in out_used or (v, b) in in_used:
                raise ValueError("slot used twice")
            out_used.add((u, a))
            in_used.add((v, b))
        for i, (v, b) in enumerate(self.gins):
            if v == THRU:
                raise ValueError("through wire in a graph with vertices")
            if (v, b) in in_used:
                raise ValueError("global input hits a wired slot")
            in_used.add((v, b))
        for j, (u, a) in enumerate(self.gouts):
            if u == THRU:
                raise ValueError("through wire in a graph with vertices")
            if (u, a) in out_used:
                raise ValueError("global output leaves a wired slot")
            out_used.add((u, a))
        want_in = {(v, b) for v in range(n) for b in range(self.verts[v].ins)}
        want_out = {(u, a) for u in range(n) for a in range(self.verts[u].outs)}
        if in_used != want_in or out_used != want_out:
            raise ValueError("unused vertex slots")
        if self._has_cycle():
            raise ValueError("directed cycle")
        if not self._is_connected():
            raise ValueError("disconnected graph")

    def _has_cycle(self) -> bool:
        n = len(self.verts)
        succ = {v: set() for v in range(n)}
        for (u, _, v, _) in self.edges:
            succ[u].add(v)
        state = [0] * n

        def visit(v):
            if state[v] == 1:
                return True
            if state[v] == 2:
                return False
            state[v] = 1
            if any(visit(w) for w in succ[v]):
                return True
            state[v] = 2
            return False

        return any(visit(v) for v in range(n))

    def _is_connected(self) -> bool:
        n = len(self.verts)
        if n <= 1:
            return True
        adj = {v: set() for v in range(n)}
        for (u, _, v, _) in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == n

    # -- basic invariants ------------------------------------------------------

    def weight(self) -> int:
        return len(self.verts)

    def arity(self) -> tuple[int, int]:
        return (len(self.gouts), len(self.gins))

    def degree(self) -> int:
        return sum(v.deg for v in self.verts)

    def is_unit(self) -> bool:
        return not self.verts

    def encode_key(self):
        return (self.verts, tuple(sorted(self.edges)), self.gins, self.gouts)

    def __lt__(self, other: "DirectedGraph"):
        return self.encode_key() < other.encode_key()


def weight(g: DirectedGraph) -> int:
    return g.weight()


def size(g: DirectedGraph) -> int:
    """Minimum over level assignments of the maximal edge count crossing a
    horizontal gap (global legs in transit included)."""
    return _size_cached(g)


@functools.lru_cache(maxsize=None)
def _size_cached(g: DirectedGraph) -> int:
    n = len(g.verts)
    if n == 0:
        return 1
    best = None
    for levels in product(range(n), repeat=n):
        ok = all(levels[u] > levels[v] for (u, _, v, _) in g.edges)
        if not ok:
            continue
        occupied = sorted(set(levels))
        # gaps: below the lowest vertex, between consecutive occupied levels,
        # above the highest vertex
        cuts = []
        lo, hi = occupied[0], occupied[-1]
        cuts.append((lo - 1, lo))
        for y, y2 in zip(occupied, occupied[1:]):
            cuts.append((y, y2))
        cuts.append((hi, hi + 1))
        worst = 0
        for (y, y2) in cuts:
            c = 0
            for (u, _, v, _) in g.edges:
                if levels[v] <= y and levels[u] >= y2:
                    c += 1
            for (v, _) in g.gins:
                if levels[v] <= y:
                    c += 1
            for (u, _) in g.gouts:
                if levels[u] >= y2:
                    c += 1
            worst = max(worst, c)
        if best is None or worst < best:
            best = worst
    assert best is not None, "no valid leveling (cycle?)"
    return best


# ---------------------------------------------------------------------------
# canonical forms

def trivial_action(dec: str, out_perm, in_perm):
    """Fully symmetric decoration: re-slotting is free."""
    return (ONE, dec)


def rigid_action(dec: str, out_perm, in_perm):
    """No re-slotting allowed except the identity."""
    if tuple(out_perm) != tuple(range(len(out_perm))) or \
       tuple(in_perm) != tuple(range(len(in_perm))):
        return (ZERO, dec)
    return (ONE, dec)


def _slot_perms(k: int, limit_identity: bool):
    if limit_identity:
        return [tuple(range(k))]
    return list(permutations(range(k)))


def canonicalize(g: DirectedGraph, action=trivial_action) -> tuple[DirectedGraph, Fraction]:
    """Canonical representative of a decorated graph and the sign relating it
    to the input orientation.

    Minimizes the graph encoding over all bottom-up vertex orderings and all
    per-vertex slot permutations admitted by ``action``; the sign accumulates
    the Koszul reordering sign of the vertex list (using vertex degrees) and
    the coefficients returned by ``action``.  Returns coefficient 0 when the
    orbit identifies the graph with its own negative (odd automorphism), in
    which case the basis element vanishes.
    """
    graph, coeff, _ = canonicalize_extra(g, action, None)
    return graph, coeff


def canonicalize_extra(g: DirectedGraph, action=trivial_action, extra=None):
    """Like :func:`canonicalize` but carrying ``extra`` vertex-index sets
    (e.g. the bottom level of a two-level cut) through the relabeling; the
    sets participate in the minimization.  Returns (graph, coeff, extra)."""
    n = len(g.verts)
    if n == 0:
        return g, ONE, extra

    out_edges = {v: [] for v in range(n)}
    for e in g.edges:
        out_edges[e[0]].append(e)
    consumers = {v: {e[2] for e in out_edges[v]} for v in range(n)}

    results = {}  # full encoding -> {signs}
    store = {}    # full encoding -> extra

    def assemble(order, slots):
        """Relabel by chosen order/slot perms; return (encoding, graph, coeff, extra)."""
        pos = {v: i for i, v in enumerate(order)}
        coeff = ONE
        new_verts = []
        for v in order:
            sh = g.verts[v]
            so, si = slots[v]
            c, dec2 = action(sh.dec, so, si)
            if not c:
                return None
            coeff *= c
            new_verts.append(VertexShape(sh.outs, sh.ins, dec2, sh.deg))
        new_edges = set()
        for (u, a, v, b) in g.edges:
            new_edges.add((pos[u], slots[u][0][a], pos[v], slots[v][1][b]))
        new_gins = tuple((pos[v], slots[v][1][b]) for (v, b) in g.gins)
        new_gouts = tuple((pos[u], slots[u][0][a]) for (u, a) in g.gouts)
        perm = tuple(pos[v] for v in range(n))
        coeff *= koszul_sign(perm, [sh.deg for sh in g.verts])
        enc = (tuple(new_verts), tuple(sorted(new_edges)), new_gins, new_gouts)
        new_extra = None
        if extra is not None:
            new_extra = tuple(frozenset(pos[v] for v in s) for s in extra)
            enc = enc + (tuple(tuple(sorted(s)) for s in new_extra),)
        return enc, coeff, new_extra

    def orders():
        # bottom-up: a vertex can be placed once all consumers are placed
        def rec(placed, acc):
            if len(acc) == n:
                yield tuple(acc)
                return
            for v in range(n):
                if v in placed:
                    continue
                if consumers[v] <= placed:
                    placed.add(v)
                    acc.append(v)
                    yield from rec(placed, acc)
                    acc.pop()
                    placed.remove(v)
        yield from rec(set(), [])

    slot_choices = []
    for v in range(n):
        sh = g.verts[v]
        slot_choices.append([
            (so, si)
            for so in _slot_perms(sh.outs, action is rigid_action)
            for si in _slot_perms(sh.ins, action is rigid_action)])

    for order in orders():
        for combo in product(*slot_choices):
            slots = {v: combo[v] for v in range(n)}
            res = assemble(order, slots)
            if res is None:
                continue
            enc, coeff, new_extra = res
            results.setdefault(enc, set()).add(coeff)
            store[enc] = new_extra

    best = min(results)
    signs = results[best]
    gg = DirectedGraph(best[0], frozenset(best[1]), best[2], best[3])
    if len(signs) > 1:
        return gg, ZERO, store[best]
    return gg, signs.pop(), store[best]


def act_on_legs(g: DirectedGraph, out_perm, in_perm, action=trivial_action):
    """Symmetric-group action renaming global legs, canonical result + sign.

    The i-th input of ``g`` becomes the ``in_perm[i]``-th input of the
    result (and likewise for outputs), matching the slot-renaming convention
    of :func:`canonicalize`: acting by (s, t) and then by (s2, t2) equals
    acting by their covariant composites.
    """
    new_gins = [None] * len(g.gins)
    for i, ep in enumerate(g.gins):
        new_gins[in_perm[i]] = ep
    new_gouts = [None] * len(g.gouts)
    for j, ep in enumerate(g.gouts):
        new_gouts[out_perm[j]] = ep
    if g.is_unit():
        return g, ONE
    moved = DirectedGraph(g.verts, g.edges, tuple(new_gins), tuple(new_gouts))
    return canonicalize(moved, action)


# ---------------------------------------------------------------------------
# substitution and grafting

def substitute(g: DirectedGraph, vidx: int, h: DirectedGraph) -> DirectedGraph:
    """Replace vertex ``vidx`` of ``g`` by the graph ``h`` (raw, no canonical
    form).  ``h`` must have the same arity as the vertex; its vertices are
    spliced into the orientation order at the vertex's position."""
    sh = g.verts[vidx]
    if h.arity() != (sh.outs, sh.ins):
        raise ValueError("filler arity %r does not match slot (%d,%d)"
                         % (h.arity(), sh.outs, sh.ins))
    k = len(h.verts)
    n = len(g.verts)

    def newidx(v):
        if v < vidx:
            return v
        if v == vidx:
            raise AssertionError
        return v + k - 1

    def hidx(v):
        return vidx + v

    # producer endpoint feeding g-input slot (vidx, b) is replaced by h.gins[b];
    # consumer endpoint of (vidx, a) is replaced by h.gouts[a].  Through wires
    # in h splice the outer producer straight onto the outer consumer.
    producers = {}  # (vidx, b) -> ('edge', u, a) | ('gin', i)
    consumers = {}  # (vidx, a) -> ('edge', v, b) | ('gout', j)
    edges = set()
    for (u, a, v, b) in g.edges:
        if u == vidx and v == vidx:
            producers[(vidx, b)] = ("inner", a)
            consumers[(vidx, a)] = ("inner", b)
        elif v == vidx:
            producers[(vidx, b)] = ("edge", u, a)
        elif u == vidx:
            consumers[(vidx, a)] = ("edge", v, b)
        else:
            edges.add((newidx(u), a, newidx(v), b))
    gins = []
    for i, (v, b) in enumerate(g.gins):
        if v == vidx:
            producers[(vidx, b)] = ("gin", i)
            gins.append(None)
        else:
            gins.append((newidx(v), b))
    gouts = []
    for j, (u, a) in enumerate(g.gouts):
        if u == vidx:
            consumers[(vidx, a)] = ("gout", j)
            gouts.append(None)
        else:
            gouts.append((newidx(u), a))

    def resolve_consumer(a):
        """Final consumer endpoint for what used to be output a of the slot."""
        tgt = consumers[(vidx, a)]
        if tgt[0] == "inner":
            return resolve_in(tgt[1])
        return tgt

    def resolve_in(b):
        ep = h.gins[b]
        if ep[0] == THRU:
            return resolve_consumer(ep[1])
        return ("h", hidx(ep[0]), ep[1])

    def resolve_out(a):
        ep = h.gouts[a]
        if ep[0] == THRU:
            src = producers[(vidx, ep[1])]
            if src[0] == "inner":
                return resolve_out(src[1])
            return src
        return ("h", hidx(ep[0]), ep[1])

    for (u, a, v, b) in h.edges:
        edges.add((hidx(u), a, hidx(v), b))

    # wire outer producers into h's inputs
    for b in range(len(h.gins)):
        src = producers[(vidx, b)]
        if src[0] == "inner":
            continue  # handled from the output side
        dst = resolve_in(b)
        if dst[0] == "h":
            _, hv, hb = dst
            if src[0] == "edge":
                edges.add((newidx(src[1]), src[2], hv, hb))
            else:
                gins[src[1]] = (hv, hb)
        else:
            # through wire inside h: outer producer meets outer consumer
            if src[0] == "edge" and dst[0] == "edge":
                edges.add((newidx(src[1]), src[2], newidx(dst[1]), dst[2]))
            elif src[0] == "edge" and dst[0] == "gout":
                gouts[dst[1]] = (newidx(src[1]), src[2])
            elif src[0] == "gin" and dst[0] == "edge":
                gins[src[1]] = (newidx(dst[1]), dst[2])
            else:
                gins[src[1]] = (THRU, dst[1])
                gouts[dst[1]] = (THRU, src[1])

    # wire h's outputs into outer consumers
    for a in range(len(h.gouts)):
        dst = consumers[(vidx, a)]
        if dst[0] == "inner":
            continue
        src = resolve_out(a)
        if src[0] == "h":
            _, hv, ha = src
            if dst[0] == "edge":
                edges.add((hv, ha, newidx(dst[1]), dst[2]))
            else:
                gouts[dst[1]] = (hv, ha)
        # through wires were fully handled from the input side

    verts = g.verts[:vidx] + h.verts + g.verts[vidx + 1:]
    if not verts:
        return DirectedGraph.unit()
    return DirectedGraph(tuple(verts), frozenset(edges),
                         tuple(gins), tuple(gouts))


@dataclass(frozen=True)
class TwoLevelScheme:
    """Two-level wiring diagram with hole slots awaiting graph fillers.

    The underlying graph's vertices are the scheme's slots (identity wires
    are not materialized); ``bottom`` lists the slot indices on the bottom
    level.  Slot decorations are ignored by ``graft``.
    """

    graph: DirectedGraph
    bottom: frozenset[int]

    def __post_init__(self):
        for (u, a, v, b) in self.graph.edges:
            if u in self.bottom or v not in self.bottom:
                raise ValueError("scheme edges must run from top to bottom")


def graft(scheme: TwoLevelScheme, fillers: dict[int, DirectedGraph],
          action=trivial_action) -> tuple[DirectedGraph, Fraction]:
    """Substitute ``fillers[slot]`` into each scheme slot and canonicalize.

    Missing slots keep their vertex as-is (treated as an atomic filler).
    """
    g = scheme.graph
    for slot in sorted(fillers, reverse=True):
        g = substitute(g, slot, fillers[slot])
    return canonicalize(g, action)


# ---------------------------------------------------------------------------
# enumeration

def enumerate_graphs(shapes, max_weight: int, arity_bound: tuple[int, int],
                     reduced: str = "left",
                     action=trivial_action) -> list[DirectedGraph]:
    """All canonical reduced connected DAGs decorated by ``shapes``.

    ``arity_bound = (max_outputs, max_inputs)`` bounds the global arity.
    Deterministic order, no duplicates; graphs whose canonical orbit carries
    an odd automorphism (zero basis elements) are dropped.
    """
    if max_weight < 1 or arity_bound[0] < 1 or arity_bound[1] < 1:
        raise ValueError("bounds must be at least 1")
    shapes = list(shapes)
    for sh in shapes:
        if reduced == "left" and sh.outs == 0:
            raise ValueError("left-reduced session forbids 0-output vertices")
        if reduced == "right" and sh.ins == 0:
            raise ValueError("right-reduced session forbids 0-input vertices")
    found: set[DirectedGraph] = set()
    for k in range(1, max_weight + 1):
        for chosen in combinations_with_replacement(range(len(shapes)), k):
            vv = tuple(shapes[i] for i in chosen)
            for g in _wire_up(vv, arity_bound):
                cg, sign = canonicalize(g, action)
                if sign:
                    found.add(cg)
    return sorted(found, key=lambda g: (g.weight(), g.encode_key()))


def _wire_up(vv, arity_bound):
    """All valid graphs on the fixed vertex tuple ``vv`` within arity bound."""
    n = len(vv)
    outs = [(u, a) for u in range(n) for a in range(vv[u].outs)]
    ins = [(v, b) for v in range(n) for b in range(vv[v].ins)]

    def acyclic(edges):
        succ = {v: set() for v in range(n)}
        for (u, _, v, _) in edges:
            succ[u].add(v)
        state = [0] * n

        def visit(v):
            if state[v] == 1:
                return True
            if state[v] == 2:
                return False
            state[v] = 1
            bad = any(visit(w) for w in succ[v])
            state[v] = 2 if not bad else state[v]
            return bad

        return not any(visit(v) for v in range(n) if state[v] == 0)

    def connected(edges):
        if n <= 1:
            return True
        adj = {v: set() for v in range(n)}
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
        return len(seen) == n

    results = []

    def rec(i, free_ins, edges):
        if i == len(outs):
            if not acyclic(edges) or not connected(edges):
                return
            g_outs = [oa for oa in outs if not any(e[:2] == oa for e in edges)]
            g_ins = sorted(free_ins)
            if len(g_outs) > arity_bound[0] or len(g_ins) > arity_bound[1]:
                return
            for po in permutations(g_outs):
                for pi in permutations(g_ins):
                    try:
                        results.append(DirectedGraph(
                            vv, frozenset(edges), tuple(pi), tuple(po)))
                    except ValueError:
                        pass
            return
        u, a = outs[i]
        # leave (u, a) global
        rec(i + 1, free_ins, edges)
        for (v, b) in list(free_ins):
            if v == u:
                continue
            free_ins.remove((v, b))
            edges.append((u, a, v, b))
            rec(i + 1, free_ins, edges)
            edges.pop()
            free_ins.add((v, b))

    rec(0, set(ins), [])
    return results


# ---------------------------------------------------------------------------
# textual encoding (bit-exact round trip)

def encode_graph(g: DirectedGraph) -> str:
    lines = []
    for i, v in enumerate(g.verts):
        lines.append("v%d: out=%d in=%d dec=%s deg=%d"
                     % (i, v.outs, v.ins, v.dec, v.deg))
    for (u, a, v, b) in sorted(g.edges):
        lines.append("e: v%d.o%d -> v%d.i%d" % (u, a, v, b))
    lines.append("in: " + " ".join(
        "thru%d" % b if v == THRU else "v%d.i%d" % (v, b) for (v, b) in g.gins))
    lines.append("out: " + " ".join(
        "thru%d" % a if u == THRU else "v%d.o%d" % (u, a) for (u, a) in g.gouts))
    return "\n".join(lines)


def parse_graph(text: str) -> DirectedGraph:
    verts = []
    edges = set()
    gins = gouts = None
    for raw in text.strip().splitlines():
        line = raw.strip()
        if not line:
            continue
        head, _, rest = line.partition(":")
        rest = rest.strip()
        if head.startswith("v") and head[1:].isdigit():
            fields = dict(kv.split("=", 1) for kv in rest.split())
            idx = int(head[1:])
            if idx != len(verts):
                raise ValueError("vertex lines out of order")
            verts.append(VertexShape(int(fields["out"]), int(fields["in"]),
                                     fields["dec"], int(fields["deg"])))
        elif head == "e":
            src, _, dst = rest.partition("->")
            u, a = src.strip().split(".")
            v, b = dst.strip().split(".")
            edges.add((int(u[1:]), int(a[1:]), int(v[1:]), int(b[1:])))
        elif head == "in":
            gins = tuple(_parse_leg(tok, "i") for tok in rest.split())
        elif head == "out":
            gouts = tuple(_parse_leg(tok, "o") for tok in rest.split())
        else:
            raise ValueError("unrecognized line %r" % line)
    if gins is None or gouts is None:
        raise ValueError("missing leg lists")
    if not verts:
        return DirectedGraph.unit()
    return DirectedGraph(tuple(verts), frozenset(edges), gins, gouts)


def _parse_leg(tok: str, kind: str):
    if tok.startswith("thru"):
        return (THRU, int(tok[4:]))
    v, s = tok.split(".")
    if not s.startswith(kind):
        raise ValueError("leg token %r on the wrong side" % tok)
    return (int(v[1:]), int(s[1:]))


# ---------------------------------------------------------------------------
# subgraph utilities (used by the coproperad decomposition machinery)

def connected_subsets(g: DirectedGraph):
    """All nonempty connected subsets of vertices."""
    n = len(g.verts)
    adj = {v: set() for v in range(n)}
    for (u, _, v, _) in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    out = []
    for r in range(1, n + 1):
        for sub in combinations(range(n), r):
            s = set(sub)
            seen = {sub[0]}
            stack = [sub[0]]
            while stack:
                for w in adj[stack.pop()]:
                    if w in s and w not in seen:
                        seen.add(w)
                        stack.append(w)
            if seen == s:
                out.append(frozenset(s))
    return out


def is_convex(g: DirectedGraph, subset: frozenset[int]) -> bool:
    """True when no directed path leaves ``subset`` and re-enters it."""
    succ = {v: set() for v in range(len(g.verts))}
    for (u, _, v, _) in g.edges:
        succ[u].add(v)
    outside_reach = set()
    stack = [w for v in subset for w in succ[v] if w not in subset]
    while stack:
        w = stack.pop()
        if w in outside_reach:
            continue
        outside_reach.add(w)
        for x in succ[w]:
            if x in subset:
                return False
            stack.append(x)
    return True


def extract_subgraph(g: DirectedGraph, subset: frozenset[int]):
    """Standalone graph on ``subset`` plus its boundary wiring.

    Returns ``(sub, in_wires, out_wires)`` where ``in_wires[i]`` identifies
    the wire of ``g`` feeding the i-th input of ``sub`` (either
    ``("edge", u, a)`` for an edge from outside or ``("gin", i0)``), and
    ``out_wires`` mirrors this for outputs.  Legs are ordered by (vertex,
    slot) within ``g``; vertex order is inherited from ``g``.
    """
    order = sorted(subset)
    pos = {v: i for i, v in enumerate(order)}
    verts = tuple(g.verts[v] for v in order)
    edges = set()
    in_wires = []
    out_wires = []
    gins = []
    gouts = []
    gin_pos = {ep: i for i, ep in enumerate(g.gins)}
    gout_pos = {ep: j for j, ep in enumerate(g.gouts)}
    incoming = {}
    for (u, a, v, b) in g.edges:
        if u in subset and v in subset:
            edges.add((pos[u], a, pos[v], b))
        elif v in subset:
            incoming[(v, b)] = ("edge", u, a)
        elif u in subset:
            pass
    for v in order:
        for b in range(g.verts[v].ins):
            if (pos[v], b) in {(e[2], e[3]) for e in edges}:
                continue
            gins.append((pos[v], b))
            if (v, b) in incoming:
                in_wires.append(incoming[(v, b)])
            else:
                in_wires.append(("gin", gin_pos[(v, b)]))
    for u in order:
        for a in range(g.verts[u].outs):
            if (pos[u], a) in {(e[0], e[1]) for e in edges}:
                continue
            gouts.append((pos[u], a))
            consumer = next((e for e in g.edges
                             if (e[0], e[1]) == (u, a) and e[2] not in subset),
                            None)
            if consumer is not None:
                out_wires.append(("edge", consumer[2], consumer[3]))
            else:
                out_wires.append(("gout", gout_pos[(u, a)]))
    sub = DirectedGraph(verts, frozenset(edges), tuple(gins), tuple(gouts))
    return sub, in_wires, out_wires
