"""Convolution algebras and the shifted homotopy Lie structures they carry.

Carrier elements are formal sums over tagged keys:

* ``("A", c, e)`` — suspended maps from the coideal to End of the source
  complex (a gebra-structure direction);
* ``("m", c, e)`` — maps from the whole coproperad to the mapping
  endomorphism bimodule (a morphism direction; ``c`` may be the counit);
* ``("B", c, e)`` — suspended maps into End of the target complex.

Here ``e`` is an End basis key (input word, output word).  All operations
are exact; series terminate by the density filtration of the truncated
coproperad.

Sign conventions (one memo, validated end to end by the identity tests):
the differential is minus the mapping-space differential applied
summandwise; the arity-two bracket on a suspended side is
``(-1)^{|x|} s[x,y]`` for the star-commutator; the splitting operations
apply tensor words of maps bottom level first, with Koszul signs from the
label degrees, and extend to mixed argument orders Koszul-symmetrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .coproperad import ID, Coproperad, CoproperadMorphism
from .exactlin import (
    ONE,
    ZERO,
    ChainComplex,
    FormalSum,
    koszul_sign,
    subsets_with_sign,
)
from .graphs import DirectedGraph, VertexShape
from .sbimod import Cut, EndBimodule, evaluate_graph

INF = math.inf


def factorial(n: int) -> Fraction:
    return Fraction(math.factorial(n))


# ---------------------------------------------------------------------------
# the convolution context

class ConvContext:
    """Shared data for the convolution algebras of a coproperad and a pair
    of chain complexes: source ``A`` (color of the inputs) and target ``B``."""

    def __init__(self, C: Coproperad, A: ChainComplex, B: ChainComplex,
                 max_arity: int = 4):
        self.C = C
        self.A = A
        self.B = B
        self.end_A = EndBimodule(A, A)
        self.end_B = EndBimodule(B, B)
        self.end_AB = EndBimodule(A, B)
        self.max_arity = max_arity
        # brackets vanish strictly above the density exhaustion
        self.n_hard = max(C.max_density() + 1, 2)
        self._rev_d = {}
        for c in C.labels():
            for c2, a in C.diff(c).items():
                self._rev_d.setdefault(c2, []).append((c, a))

    # -- degrees and summand bookkeeping ------------------------------------

    def end_of(self, tag) -> EndBimodule:
        return {"A": self.end_A, "B": self.end_B, "m": self.end_AB}[tag]

    def cx_pair(self, tag):
        return {"A": (self.A, self.A), "B": (self.B, self.B),
                "m": (self.A, self.B)}[tag]

    def key_degree(self, key) -> int:
        tag, c, e = key
        base = self.end_of(tag).degree(e) - self.C.degree(c)
        return base + (1 if tag in ("A", "B") else 0)

    def degree(self, x: FormalSum):
        degs = {self.key_degree(k) for k in x}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError("inhomogeneous element")
        return degs.pop()

    def component(self, x: FormalSum, tag) -> FormalSum:
        return FormalSum({k: v for k, v in x.items() if k[0] == tag})

    def value_at(self, x: FormalSum, tag, c) -> FormalSum:
        """End-valued slice of a carrier element at one source label."""
        out = FormalSum()
        for (t, cl, e), v in x.items():
            if t == tag and cl == c:
                out.add_term(e, v)
        return out

    # -- levels ---------------------------------------------------------------

    def level(self, x: FormalSum):
        """Canonical filtration level; infinity for the zero element."""
        if x.is_zero():
            return INF
        lv = INF
        for (tag, c, e) in x:
            if tag in ("A", "B"):
                lv = min(lv, self.C.coradical_level(c))
            else:
                lv = min(lv, self.C.density_level(c))
        return lv

    # -- differential ---------------------------------------------------------

    def hom_diff(self, x: FormalSum) -> FormalSum:
        """Mapping-space differential, summandwise and unsuspended."""
        out = FormalSum()
        for key, v in x.items():
            tag, c, e = key
            E = self.end_of(tag)
            fdeg = E.degree(e) - self.C.degree(c)
            for e2, a in E.diff(e).items():
                out.add_term((tag, c, e2), v * a)
            sgn = -1 if fdeg % 2 else 1
            for (c2, a) in self._rev_d.get(c, ()):
                out.add_term((tag, c2, e), -sgn * v * a)
        return out

    # -- the splitting operations -------------------------------------------

    def _apply_to_cut(self, cut: Cut, slots, values):
        return apply_values_to_cut(cut, slots, values)

    def op_right(self, fs, s_alpha: FormalSum) -> FormalSum:
        """Splitting with the suspended source-side map on the single top
        box and the middle maps on the saturated bottom row.

        Carries the overall factor (-1)^{|s alpha| + sum |f_i|}; together
        with the bottom-first application convention this is the unique
        normalization (up to the global gauge fixing the equation's
        orientation) for which the generalized Jacobi identities hold
        against the differential and the left splitting.
        """
        n = len(fs)
        out = FormalSum()
        if s_alpha.is_zero() or any(f.is_zero() for f in fs):
            return out
        fdegs = [self.degree(f) for f in fs]
        adeg = self.degree(s_alpha) - 1
        total = (self.degree(s_alpha) + sum(fdegs)) % 2
        global_sign = -1 if total else 1
        for c in list(self.C.labels()) + [ID]:
            for cut, a in self.C.delta_right(n, c).items():
                slots = [("v", v) for v in cut.bottom_vertices()]
                slots += [("idb", j) for j in cut.bottom_id_legs()]
                t = cut.top_vertices()[0]
                tlabel = cut.graph.verts[t].dec
                aval = self.value_at(s_alpha, "A", tlabel)
                if aval.is_zero():
                    continue
                for assign, eps in _assignments(fdegs):
                    ok = True
                    vals = []
                    for slot, fi in zip(slots, assign):
                        clabel = ID if slot[0] != "v" else \
                            cut.graph.verts[slot[1]].dec
                        fval = self.value_at(fs[fi], "m", clabel)
                        if fval.is_zero():
                            ok = False
                            break
                        vals.append((fval, fdegs[fi], self.C.degree(clabel),
                                     self.A, self.B))
                    if not ok:
                        continue
                    vals.append((aval, adeg, self.C.degree(tlabel),
                                 self.A, self.A))
                    full_slots = slots + [("v", t)]
                    res = self._apply_to_cut(cut, full_slots, vals)
                    for e, cc in res.items():
                        out.add_term(("m", c, e), a * eps * cc * global_sign)
        return out

    def op_left(self, s_beta: FormalSum, fs) -> FormalSum:
        """Splitting with the suspended target-side map on the single bottom
        box and the middle maps on the saturated top row.

        Carries the overall factor (-1)^{|s beta|}, the mate of the right
        splitting's normalization under the generalized Jacobi identities.
        """
        n = len(fs)
        out = FormalSum()
        if s_beta.is_zero() or any(f.is_zero() for f in fs):
            return out
        fdegs = [self.degree(f) for f in fs]
        bdeg = self.degree(s_beta) - 1
        global_sign = -1 if self.degree(s_beta) % 2 else 1
        for c in list(self.C.labels()) + [ID]:
            for cut, a in self.C.delta_left(n, c).items():
                b = cut.bottom_vertices()[0]
                blabel = cut.graph.verts[b].dec
                bval = self.value_at(s_beta, "B", blabel)
                if bval.is_zero():
                    continue
                slots = [("v", v) for v in cut.top_vertices()]
                slots += [("idt", i) for i in cut.top_id_legs()]
                for assign, eps in _assignments(fdegs):
                    ok = True
                    vals = [(bval, bdeg, self.C.degree(blabel),
                             self.B, self.B)]
                    for slot, fi in zip(slots, assign):
                        clabel = ID if slot[0] != "v" else \
                            cut.graph.verts[slot[1]].dec
                        fval = self.value_at(fs[fi], "m", clabel)
                        if fval.is_zero():
                            ok = False
                            break
                        vals.append((fval, fdegs[fi], self.C.degree(clabel),
                                     self.A, self.B))
                    if not ok:
                        continue
                    full_slots = [("v", b)] + slots
                    res = self._apply_to_cut(cut, full_slots, vals)
                    for e, cc in res.items():
                        out.add_term(("m", c, e), a * eps * cc * global_sign)
        return out

    # -- the star product on a single side -----------------------------------

    def star(self, x: FormalSum, y: FormalSum, tag="A") -> FormalSum:
        """Lie-admissible convolution product on one side; the application
        signs use the underlying (unsuspended) map degrees."""
        E = self.end_of(tag)
        src, tgt = self.cx_pair(tag)
        if x.is_zero() or y.is_zero():
            return FormalSum()
        shift = 1 if tag in ("A", "B") else 0
        xdeg = self.degree(x) - shift
        ydeg = self.degree(y) - shift
        out = FormalSum()
        for c in self.C.labels():
            for cut, a in self.C.delta_11(c).items():
                b = cut.bottom_vertices()[0]
                t = cut.top_vertices()[0]
                bl = cut.graph.verts[b].dec
                tl = cut.graph.verts[t].dec
                xv = self.value_at(x, tag, bl)
                yv = self.value_at(y, tag, tl)
                if xv.is_zero() or yv.is_zero():
                    continue
                vals = [(xv, xdeg, self.C.degree(bl), src, tgt),
                        (yv, ydeg, self.C.degree(tl), src, tgt)]
                res = self._apply_to_cut(cut, [("v", b), ("v", t)], vals)
                for e, cc in res.items():
                    out.add_term((tag, c, e), a * cc)
        return out

    def shifted_bracket(self, sx: FormalSum, sy: FormalSum, tag) -> FormalSum:
        """(-1)^{|x|} s[x, y] for the star-commutator (Koszul-symmetric)."""
        if sx.is_zero() or sy.is_zero():
            return FormalSum()
        dx = self.degree(sx) - 1
        dy = self.degree(sy) - 1
        comm = self.star(sx, sy, tag) - \
            self.star(sy, sx, tag).scaled((-1) ** ((dx * dy) % 2))
        return comm.scaled((-1) ** (dx % 2))

    # -- the full bracket dispatcher ------------------------------------------

    def bracket(self, n: int, args) -> FormalSum:
        """Structure operation of arity n >= 2 on mixed carrier elements."""
        if n < 2:
            raise ValueError("brackets start at arity two")
        if n > self.n_hard:
            return FormalSum()
        out = FormalSum()
        # expand each argument into its homogeneous summand components
        comps = []
        for x in args:
            parts = []
            for tag in ("A", "m", "B"):
                part = self.component(x, tag)
                if not part.is_zero():
                    parts.append((tag, part))
            comps.append(parts)

        def rec(i, chosen):
            nonlocal out
            if i == len(args):
                out = out + self._bracket_pure(n, chosen)
                return
            for part in comps[i]:
                rec(i + 1, chosen + [part])

        rec(0, [])
        return out

    def _bracket_pure(self, n, chosen) -> FormalSum:
        tags = [t for t, _ in chosen]
        parts = [p for _, p in chosen]
        n_A = tags.count("A")
        n_B = tags.count("B")
        n_m = tags.count("m")
        if n == 2 and n_A == 2:
            return self.shifted_bracket(parts[0], parts[1], "A")
        if n == 2 and n_B == 2:
            return self.shifted_bracket(parts[0], parts[1], "B")
        if n_A == 1 and n_m == n - 1:
            # move the suspended source-side argument to the last position
            i = tags.index("A")
            sign = 1
            di = self.degree(parts[i])
            for j in range(i + 1, n):
                if di % 2 and self.degree(parts[j]) % 2:
                    sign = -sign
            fs = [p for t, p in chosen if t == "m"]
            return self.op_right(fs, parts[i]).scaled(sign)
        if n_B == 1 and n_m == n - 1:
            # move the suspended target-side argument to the front
            i = tags.index("B")
            sign = 1
            di = self.degree(parts[i])
            for j in range(0, i):
                if di % 2 and self.degree(parts[j]) % 2:
                    sign = -sign
            fs = [p for t, p in chosen if t == "m"]
            return self.op_left(parts[i], fs).scaled(-sign)
        return FormalSum()

    def ell(self, n: int, args) -> FormalSum:
        if n == 1:
            return -self.hom_diff(args[0])
        return self.bracket(n, args)

    # -- spanning sets ---------------------------------------------------------

    def spanning(self, tags=("A", "m", "B")) -> list[FormalSum]:
        """Equivariant spanning elements (orbit symmetrizations of the
        coordinate directions), deduplicated and normalized."""
        seen = {}
        for tag in tags:
            labels = list(self.C.labels()) + ([ID] if tag == "m" else [])
            E = self.end_of(tag)
            for c in labels:
                m, n = self.C.arity(c)
                for e in E.component(m, n):
                    vec = self.symmetrize((tag, c, e))
                    if vec.is_zero():
                        continue
                    lead = sorted(vec.items())[0][1]
                    norm = FormalSum({k: v / lead for k, v in vec.items()})
                    seen[tuple(sorted(norm.items()))] = norm
        return list(seen.values())

    def symmetrize(self, key) -> FormalSum:
        """Equivariant extension of one coordinate direction."""
        tag, c, e = key
        E = self.end_of(tag)
        m, n = self.C.arity(c)
        out = FormalSum()
        for s in permutations(range(m)):
            for t in permutations(range(n)):
                if c == ID:
                    cc, c2 = ONE, ID
                else:
                    cc, c2 = self.C.bimod.act(c, s, t)
                ce, e2 = E.act(e, s, t)
                out.add_term((tag, c2, e2), cc * ce)
        return out

    def is_equivariant(self, x: FormalSum) -> bool:
        for key, v in x.items():
            tag, c, e = key
            E = self.end_of(tag)
            m, n = self.C.arity(c)
            for s in permutations(range(m)):
                for t in permutations(range(n)):
                    if c == ID:
                        cc, c2 = ONE, ID
                    else:
                        cc, c2 = self.C.bimod.act(c, s, t)
                    ce, e2 = E.act(e, s, t)
                    if x.get((tag, c2, e2), ZERO) != v * cc * ce:
                        return False
        return True


def apply_values_to_cut(cut: Cut, slots, values):
    """Compose End values along a cut.

    ``slots``: ordered box list (bottom level first), entries
    ("v", vertex), ("idb", leg) or ("idt", leg).  ``values[i] =
    (end_sum, map_degree, content_degree, src, tgt)`` aligned with
    slots.  Returns the composed End combination with the Koszul sign of
    applying the word of maps to the word of labels.
    """
    sign = 1
    below = 0
    for (end_sum, mdeg, cdeg, _, _) in values:
        if mdeg % 2 and below % 2:
            sign = -sign
        below += cdeg
    g = cut.graph
    if g.is_unit():
        # one identity box over another: compose the two (1,1) values
        chain = DirectedGraph(
            (VertexShape(1, 1, "b", 0), VertexShape(1, 1, "t", 0)),
            frozenset({(1, 0, 0, 0)}), ((1, 0),), ((0, 0),))
        packed = [(v[0], v[1] + v[2], v[3], v[4]) for v in values]
        out = FormalSum()
        for key, c in evaluate_graph(chain, packed).items():
            out.add_term(key, c)
        return out.scaled(sign)
    vertex_values = {}
    for slot, val in zip(slots, values):
        if slot[0] == "v":
            vertex_values[slot[1]] = val
    order_values = [vertex_values[v] for v in range(len(g.verts))]
    for slot, val in zip(slots, values):
        if slot[0] == "idb":
            g = _splice_out(g, slot[1], len(order_values))
            order_values.append(val)
    for slot, val in zip(slots, values):
        if slot[0] == "idt":
            g = _splice_in(g, slot[1], len(order_values))
            order_values.append(val)
    # the value composed along the graph has End degree map + content
    packed = [(v[0], v[1] + v[2], v[3], v[4]) for v in order_values]
    out = FormalSum()
    for key, c in evaluate_graph(g, packed).items():
        out.add_term(key, c)
    return out.scaled(sign)


def _assignments(degrees):
    """Bijective slot assignments with the Koszul sign of the argument
    permutation (symmetrization included in the operation)."""
    n = len(degrees)
    for perm in permutations(range(n)):
        # argument perm[k] is placed at slot k; sign of reordering the
        # graded arguments into slot order
        target = [0] * n
        for slotk, argi in enumerate(perm):
            target[argi] = slotk
        yield perm, koszul_sign(tuple(target), degrees)


def _splice_out(g: DirectedGraph, leg: int, tag: int) -> DirectedGraph:
    w = len(g.verts)
    u, a = g.gouts[leg]
    verts = g.verts + (VertexShape(1, 1, "idb%d" % tag, 0),)
    edges = set(g.edges)
    edges.add((u, a, w, 0))
    gouts = g.gouts[:leg] + ((w, 0),) + g.gouts[leg + 1:]
    return DirectedGraph(verts, frozenset(edges), g.gins, gouts)


def _splice_in(g: DirectedGraph, leg: int, tag: int) -> DirectedGraph:
    w = len(g.verts)
    v, b = g.gins[leg]
    verts = g.verts + (VertexShape(1, 1, "idt%d" % tag, 0),)
    edges = set(g.edges)
    edges.add((w, 0, v, b))
    gins = g.gins[:leg] + ((w, 0),) + g.gins[leg + 1:]
    return DirectedGraph(verts, frozenset(edges), gins, g.gouts)


# ---------------------------------------------------------------------------
# shifted homotopy Lie algebras

class LInfinity:
    """Complete shifted homotopy Lie algebra with exact evaluators.

    ``ell(n, args)`` evaluates the arity-n operation (n >= 1; the arity-one
    operation is the differential); ``curvature`` is the arity-zero value.
    ``level`` is the filtration level function; brackets vanish strictly
    above ``n_hard``.
    """

    def __init__(self, name, ell, level, degree, n_hard, curvature=None,
                 spanning=None, restrict=None):
        self.name = name
        self._ell = ell
        self.level = level
        self.degree = degree
        self.n_hard = n_hard
        self.curvature = curvature if curvature is not None else FormalSum()
        self._spanning = spanning or (lambda: [])
        self.restrict = restrict

    def ell(self, n: int, args) -> FormalSum:
        if len(args) != n:
            raise ValueError("arity mismatch")
        if n > self.n_hard:
            return FormalSum()
        out = self._ell(n, list(args))
        if self.restrict is not None:
            out = self.restrict(out)
        return out

    def spanning(self):
        return self._spanning()

    # -- Maurer-Cartan theory -------------------------------------------------

    def mc_residual(self, x: FormalSum) -> FormalSum:
        deg = self.degree(x)
        if deg not in (None, 0):
            raise ValueError("Maurer-Cartan candidates have degree 0")
        if self.level(x) < 1:
            raise ValueError("Maurer-Cartan candidates sit in filtration 1")
        out = FormalSum(self.curvature)
        for n in range(1, self.n_hard + 1):
            term = self.ell(n, [x] * n)
            out = out + term.scaled(ONE / factorial(n))
        return out

    def is_mc(self, x: FormalSum) -> bool:
        return self.mc_residual(x).is_zero()

    def jacobi_residual(self, n: int, args) -> FormalSum:
        """Sum over inverse shuffles of nested operations; zero exactly when
        the generalized Jacobi identity holds at this arity on these
        arguments (curvature terms included when present)."""
        degs = [self.degree(x) or 0 for x in args]
        out = FormalSum()
        if not self.curvature.is_zero():
            out = out + self.ell(n + 1, [self.curvature] + list(args))
        for q in range(1, n + 1):
            for sub, comp, eps in subsets_with_sign(n, q, degs):
                inner = self.ell(q, [args[i] for i in sub])
                if inner.is_zero():
                    continue
                rest = [args[i] for i in comp]
                out = out + self.ell(n - q + 1, [inner] + rest).scaled(eps)
        return out

    def twist(self, a: FormalSum, check=True) -> "LInfinity":
        """Re-center at a degree-0, level >= 1 element.

        The twisted curvature is the Maurer-Cartan residual of ``a``; it
        vanishes exactly when ``a`` satisfies the equation.
        """
        if check and not self.is_mc(a):
            raise ValueError("twisting requires a Maurer-Cartan element")
        return twist_raw(self, a)


def twist_raw(L: LInfinity, a: FormalSum) -> LInfinity:
    if L.degree(a) not in (None, 0) or L.level(a) < 1:
        raise ValueError("twisting element must have degree 0, level >= 1")

    def ell(n, args):
        out = FormalSum()
        for k in range(0, L.n_hard - n + 1):
            term = L.ell(n + k, [a] * k + args)
            out = out + term.scaled(ONE / factorial(k))
        return out

    curv = FormalSum(L.curvature)
    for k in range(1, L.n_hard + 1):
        curv = curv + L.ell(k, [a] * k).scaled(ONE / factorial(k))

    return LInfinity("%s^twisted" % L.name, ell, L.level, L.degree,
                     L.n_hard, curvature=curv, spanning=L._spanning,
                     restrict=L.restrict)


# ---------------------------------------------------------------------------
# constructors

def build_pair_algebra(C: Coproperad, A: ChainComplex, B: ChainComplex,
                       max_arity: int = 4):
    """The convolution algebra on suspended source maps, morphism maps and
    suspended target maps, whose Maurer-Cartan elements are pairs of gebra
    structures related by an infinity-morphism."""
    ctx = ConvContext(C, A, B, max_arity)
    L = LInfinity("pair(%s)" % C.name, ctx.ell, ctx.level, ctx.degree,
                  ctx.n_hard, spanning=ctx.spanning)
    L.ctx = ctx
    return L


def build_gebra_algebra(C: Coproperad, A: ChainComplex, max_arity: int = 4):
    """The suspended one-sided convolution algebra (target side tag 'B' is
    unused; elements live in the 'A' summand)."""
    ctx = ConvContext(C, A, A, max_arity)

    def ell(n, args):
        return ctx.ell(n, args)

    def spanning():
        return ctx.spanning(tags=("A",))

    L = LInfinity("gebra(%s)" % C.name, ell, ctx.level, ctx.degree,
                  ctx.n_hard, spanning=spanning)
    L.ctx = ctx
    return L


def suspended_side_algebra(ctx: ConvContext, tag: str) -> LInfinity:
    """The shifted Lie algebra on one suspended summand."""

    def ell(n, args):
        if n == 1:
            return -ctx.hom_diff(args[0])
        if n == 2:
            return ctx.shifted_bracket(args[0], args[1], tag)
        return FormalSum()

    def spanning():
        return ctx.spanning(tags=(tag,))

    return LInfinity("side(%s)" % tag, ell, ctx.level, ctx.degree,
                     ctx.n_hard, spanning=spanning)


def build_morphism_algebra(C: Coproperad, A: ChainComplex, B: ChainComplex,
                           alpha: FormalSum, beta: FormalSum,
                           max_arity: int = 4, ctx: ConvContext = None):
    """Direct-formula deformation algebra on the morphism summand for two
    fixed gebra structures (retagged onto the appropriate summands)."""
    ctx = ctx or ConvContext(C, A, B, max_arity)
    alpha = retag(alpha, "A")
    beta = retag(beta, "B")

    def ell(n, args):
        if n == 1:
            out = -ctx.hom_diff(args[0])
            out = out + ctx.op_right(list(args), alpha)
            out = out - ctx.op_left(beta, list(args))
            return out
        return ctx.op_right(list(args), alpha) - ctx.op_left(beta, list(args))

    def spanning():
        return ctx.spanning(tags=("m",))

    L = LInfinity("morphisms(%s)" % C.name, ell, ctx.level, ctx.degree,
                  ctx.n_hard, spanning=spanning)
    L.ctx = ctx
    return L


def restrict_to_middle(L: LInfinity, ctx: ConvContext) -> LInfinity:
    """Subalgebra supported on the morphism summand (used for the twisted
    construction of the morphism algebra)."""

    def ell(n, args):
        return ctx.component(L.ell(n, args), "m")

    def spanning():
        return ctx.spanning(tags=("m",))

    return LInfinity(L.name + "|m", ell, L.level, L.degree, L.n_hard,
                     curvature=ctx.component(L.curvature, "m"),
                     spanning=spanning)


def suspend_pair(ctx: ConvContext, alpha: FormalSum, beta: FormalSum) -> FormalSum:
    """Carrier element (s alpha, 0, s beta) from one-sided tables."""
    out = FormalSum()
    for k, v in alpha.items():
        out.add_term(k if k[0] == "A" else ("A",) + k[1:], v)
    for k, v in beta.items():
        out.add_term(k if k[0] == "B" else ("B",) + k[1:], v)
    return out


# ---------------------------------------------------------------------------
# gebra structures and residuals

def gebra_residual(ctx: ConvContext, s_alpha: FormalSum, tag="A") -> FormalSum:
    """Maurer-Cartan residual of a gebra-structure candidate.

    The input is a suspended degree-0 carrier element (so the underlying map
    has degree -1); the residual is the mapping differential plus half of
    the Koszul-symmetrized star square, which for an odd map is the plain
    star square.  Returned unsuspended on the same tag.
    """
    s_alpha = retag(s_alpha, tag)
    d = ctx.degree(s_alpha)
    if d is not None and d != 0:
        raise ValueError("gebra structures have degree -1")
    sq = ctx.star(s_alpha, s_alpha, tag)
    return ctx.hom_diff(s_alpha) + sq


def infty_residual(ctx: ConvContext, f: FormalSum, alpha: FormalSum,
                   beta: FormalSum) -> FormalSum:
    """Defect of the infinity-morphism equation for f between two gebra
    structures: mapping differential minus the source action plus the
    target action (all plain sums over splitting shapes)."""
    out = ctx.hom_diff(f)
    for n in range(1, ctx.n_hard + 1):
        out = out - ctx.op_right([f] * n, _as_A(alpha)).scaled(
            ONE / factorial(n))
        out = out + ctx.op_left(_as_B(beta), [f] * n).scaled(
            ONE / factorial(n))
    return out


def retag(x: FormalSum, tag: str) -> FormalSum:
    """Move a one-sided element onto the given summand tag.

    A structure on a fixed complex is context-free data (label, End key);
    the tag records which summand it occupies in a particular pair context.
    """
    out = FormalSum()
    for k, v in x.items():
        out.add_term((tag,) + k[1:], v)
    return out


def _as_A(x: FormalSum) -> FormalSum:
    return retag(x, "A")


def _as_B(x: FormalSum) -> FormalSum:
    return retag(x, "B")


# ---------------------------------------------------------------------------
# functorial restriction and the transfer subalgebra

def restrict_along(G: CoproperadMorphism, ctx_src: ConvContext,
                   ctx_tgt: ConvContext):
    """Pullback of carrier elements along a coproperad morphism.

    ``ctx_src`` is the context of the morphism's target coproperad (where
    elements live); the result lives over the source coproperad.
    """

    def pull(x: FormalSum) -> FormalSum:
        out = FormalSum()
        for d in list(G.source.labels()) + [ID]:
            img = G(d)
            for c, a in img.items():
                for (tag, cl, e), v in x.items():
                    if cl == c:
                        if tag != "m" and d == ID:
                            continue
                        out.add_term((tag, d, e), a * v)
        return out

    return pull


def identity_morphism_element(ctx: ConvContext) -> FormalSum:
    """Strict identity: supported on the counit, value the identity map."""
    out = FormalSum()
    for key, c in ctx.end_AB.identity_value().items():
        out.add_term(("m", ID, key), c)
    return out


def chain_map_element(ctx: ConvContext, table: dict) -> FormalSum:
    """Morphism direction supported on the counit with the given value
    table {source_label -> FormalSum over target labels}."""
    out = FormalSum()
    for l, img in table.items():
        for l2, c in img.items():
            out.add_term(("m", ID, ((l,), (l2,))), c)
    return out


def transfer_subalgebra(C: Coproperad, A: ChainComplex, B: ChainComplex,
                        f0: FormalSum, max_arity: int = 4):
    """Twist the pair algebra at the chain-map direction and restrict to the
    coideal-supported carrier; returns (algebra, projection, context).

    ``f0`` is a middle element supported on the counit line; it must be a
    chain map (equivalently a Maurer-Cartan element of the pair algebra).
    The projection onto the suspended target summand is a strict morphism.
    """
    L = build_pair_algebra(C, A, B, max_arity)
    ctx = L.ctx
    if not L.is_mc(f0):
        raise ValueError("the twisting direction must be a chain map")
    Lt = twist_raw(L, f0)

    def restrict(x: FormalSum) -> FormalSum:
        return FormalSum({k: v for k, v in x.items()
                          if not (k[0] == "m" and k[1] == ID)})

    def spanning():
        return [v for v in ctx.spanning()
                if all(not (k[0] == "m" and k[1] == ID) for k in v)]

    Lbar = LInfinity("transfer(%s)" % C.name, Lt.ell, L.level, L.degree,
                     L.n_hard, curvature=restrict(Lt.curvature),
                     spanning=spanning, restrict=restrict)

    def project_B(x: FormalSum) -> FormalSum:
        return ctx.component(x, "B")

    return Lbar, project_B, ctx
