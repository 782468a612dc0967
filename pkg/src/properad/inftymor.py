"""Infinity-morphisms of cobar gebras and the curved homotopy Lie morphism
calculus: residuals, composition, direct sums, Maurer-Cartan images, the
composition/unit enrichment maps, and pullback/pushout along a morphism.

A gebra infinity-morphism between structures on complexes A and B is a
degree-0 middle element of the pair convolution context; all curved
morphism data is truncated at a stated arity and identities are asserted up
to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

from .convolution import (
    ConvContext,
    LInfinity,
    apply_values_to_cut,
    _assignments,
    factorial,
    identity_morphism_element,
    infty_residual,
)
from .coproperad import ID, Coproperad
from .exactlin import (
    ONE,
    ZERO,
    ChainComplex,
    ChainMapView,
    FormalSum,
    LinMap,
    koszul_sign,
    subsets_with_sign,
)

INF = math.inf


# ---------------------------------------------------------------------------
# three-complex setting

class GebraSetting:
    """Coproperad plus named chain complexes with pairwise contexts."""

    def __init__(self, C: Coproperad, complexes: dict, max_arity: int = 4):
        self.C = C
        self.complexes = dict(complexes)
        self.max_arity = max_arity
        self._ctx = {}

    def ctx(self, src: str, tgt: str) -> ConvContext:
        if (src, tgt) not in self._ctx:
            self._ctx[(src, tgt)] = ConvContext(
                self.C, self.complexes[src], self.complexes[tgt],
                self.max_arity)
        return self._ctx[(src, tgt)]

    def morphism_algebra(self, src, tgt, alpha, beta) -> LInfinity:
        from .convolution import build_morphism_algebra
        ctx = self.ctx(src, tgt)
        return build_morphism_algebra(self.C, ctx.A, ctx.B, alpha, beta,
                                      ctx=ctx)


# ---------------------------------------------------------------------------
# gebra infinity-morphisms

@dataclass
class GebraInftyMorphism:
    """Morphism datum f between gebra structures, with its endpoints."""

    setting: GebraSetting
    src: str
    tgt: str
    alpha: FormalSum
    beta: FormalSum
    f: FormalSum

    def ctx(self) -> ConvContext:
        return self.setting.ctx(self.src, self.tgt)

    def residual(self) -> FormalSum:
        return infty_residual(self.ctx(), self.f, self.alpha, self.beta)

    def first_component(self) -> ChainMapView:
        ctx = self.ctx()
        table = {}
        for (tag, c, e), v in self.f.items():
            if tag == "m" and c == ID:
                win, wout = e
                table.setdefault(win[0], FormalSum()).add_term(wout[0], v)
        return ChainMapView(ctx.A, ctx.B, table)


def compose_gebra(g: GebraInftyMorphism,
                  f: GebraInftyMorphism) -> GebraInftyMorphism:
    """Composite along the full decomposition: g decorates the bottom boxes,
    f the top boxes; infinity-morphisms have degree 0, so no signs beyond
    the inner tensor calculus appear."""
    if f.tgt != g.src or f.setting is not g.setting:
        raise ValueError("endpoint mismatch")
    S = f.setting
    C = S.C
    ctx_f = f.ctx()
    ctx_g = g.ctx()
    out = FormalSum()
    for c in list(C.labels()) + [ID]:
        for cut, a in C.delta(c).items():
            slots = []
            vals = []
            dead = False
            for v in cut.bottom_vertices():
                slots.append(("v", v))
                val = ctx_g.value_at(g.f, "m", cut.graph.verts[v].dec)
                if val.is_zero():
                    dead = True
                    break
                vals.append((val, 0, C.degree(cut.graph.verts[v].dec),
                             ctx_g.A, ctx_g.B))
            if dead:
                continue
            for j in cut.bottom_id_legs():
                slots.append(("idb", j))
                val = ctx_g.value_at(g.f, "m", ID)
                if val.is_zero():
                    dead = True
                    break
                vals.append((val, 0, 0, ctx_g.A, ctx_g.B))
            if dead:
                continue
            for v in cut.top_vertices():
                slots.append(("v", v))
                val = ctx_f.value_at(f.f, "m", cut.graph.verts[v].dec)
                if val.is_zero():
                    dead = True
                    break
                vals.append((val, 0, C.degree(cut.graph.verts[v].dec),
                             ctx_f.A, ctx_f.B))
            if dead:
                continue
            for i in cut.top_id_legs():
                slots.append(("idt", i))
                val = ctx_f.value_at(f.f, "m", ID)
                if val.is_zero():
                    dead = True
                    break
                vals.append((val, 0, 0, ctx_f.A, ctx_f.B))
            if dead:
                continue
            for e, cc in apply_values_to_cut(cut, slots, vals).items():
                out.add_term(("m", c, e), a * cc)
    return GebraInftyMorphism(S, f.src, g.tgt, f.alpha, g.beta, out)


def strict_identity(setting: GebraSetting, name: str,
                    alpha: FormalSum) -> GebraInftyMorphism:
    ctx = setting.ctx(name, name)
    return GebraInftyMorphism(setting, name, name, alpha, alpha,
                              identity_morphism_element(ctx))


def classify(f: GebraInftyMorphism) -> str:
    """isotopy | quasi-iso | mono | epi | generic, by exact ranks."""
    view = f.first_component()
    ctx = f.ctx()
    same = ctx.A.space == ctx.B.space
    if same:
        ident = all(view.map(l) == FormalSum.lift(l)
                    for l in ctx.A.space.labels)
        if ident:
            return "isotopy"
    if view.is_chain_map() and view.is_quasi_iso():
        return "quasi-iso"
    rk = view.rank()
    if rk == ctx.A.space.dim():
        return "mono"
    if rk == ctx.B.space.dim():
        return "epi"
    return "generic"


# ---------------------------------------------------------------------------
# direct sums of homotopy Lie algebras

def tag_vec(side: str, x: FormalSum) -> FormalSum:
    return FormalSum({(side, k): v for k, v in x.items()})


def untag_vec(side: str, x: FormalSum) -> FormalSum:
    return FormalSum({k[1]: v for k, v in x.items() if k[0] == side})


def direct_sum(L1: LInfinity, L2: LInfinity) -> LInfinity:
    """Blockwise sum; mixed brackets vanish, projections are strict."""

    def ell(n, args):
        left = L1.ell(n, [untag_vec("L", a) for a in args])
        right = L2.ell(n, [untag_vec("R", a) for a in args])
        return tag_vec("L", left) + tag_vec("R", right)

    def level(x):
        return min(L1.level(untag_vec("L", x)), L2.level(untag_vec("R", x)))

    def degree(x):
        dl = L1.degree(untag_vec("L", x))
        dr = L2.degree(untag_vec("R", x))
        if dl is None:
            return dr
        if dr is None or dl == dr:
            return dl
        raise ValueError("inhomogeneous element")

    def spanning():
        return [tag_vec("L", v) for v in L1.spanning()] + \
            [tag_vec("R", v) for v in L2.spanning()]

    curv = tag_vec("L", L1.curvature) + tag_vec("R", L2.curvature)
    return LInfinity("(%s)+(%s)" % (L1.name, L2.name), ell, level, degree,
                     max(L1.n_hard, L2.n_hard), curvature=curv,
                     spanning=spanning)


def zero_algebra() -> LInfinity:
    def ell(n, args):
        return FormalSum()

    return LInfinity("0", ell, lambda x: INF, lambda x: None, 2)


# ---------------------------------------------------------------------------
# curved morphisms

class CurvedMorphism:
    """Arity-indexed components of a curved homotopy Lie morphism.

    ``comp0`` is the constant component evaluated at 1; ``comp(n, args)``
    evaluates the arity-n component on a tuple; components vanish above
    ``vanish_above``.
    """

    def __init__(self, name, source: LInfinity, target: LInfinity, comp0,
                 comp, vanish_above: int):
        self.name = name
        self.source = source
        self.target = target
        self.comp0 = comp0
        self._comp = comp
        self.vanish_above = vanish_above

    def comp(self, n: int, args) -> FormalSum:
        if len(args) != n:
            raise ValueError("arity mismatch")
        if n == 0:
            return FormalSum(self.comp0)
        if n > self.vanish_above:
            return FormalSum()
        return self._comp(n, list(args))

    # -- the defining equation -------------------------------------------------

    def residual(self, n: int, args) -> FormalSum:
        """Left minus right side of the morphism equation at arity n."""
        degs = [self.source.degree(x) or 0 for x in args]
        lhs = FormalSum()
        if not self.source.curvature.is_zero():
            lhs = lhs + self.comp(n + 1, [self.source.curvature] + list(args))
        for q in range(1, n + 1):
            for sub, comp_idx, eps in subsets_with_sign(n, q, degs):
                inner = self.source.ell(q, [args[i] for i in sub])
                if inner.is_zero():
                    continue
                rest = [args[i] for i in comp_idx]
                lhs = lhs + self.comp(n - q + 1, [inner] + rest).scaled(eps)
        rhs = FormalSum()
        if n == 0:
            rhs = rhs + self.target.curvature
            for m in range(1, self.target.n_hard + 1):
                rhs = rhs + self.target.ell(
                    m, [self.comp0] * m).scaled(ONE / factorial(m))
        else:
            for blocks, eps in _partitions_with_sign(n, degs):
                pieces = [self.comp(len(b), [args[i] for i in b])
                          for b in blocks]
                if any(p.is_zero() for p in pieces):
                    continue
                j = len(blocks)
                for m in range(0, self.target.n_hard - j + 1):
                    term = self.target.ell(j + m, pieces + [self.comp0] * m)
                    rhs = rhs + term.scaled(eps * ONE / factorial(m))
        return lhs - rhs

    def is_morphism(self, tuples) -> bool:
        for args in tuples:
            if not self.residual(len(args), args).is_zero():
                return False
        return True

    # -- Maurer-Cartan image ----------------------------------------------------

    def mc_image(self, a: FormalSum) -> FormalSum:
        out = FormalSum(self.comp0)
        for n in range(1, self.vanish_above + 1):
            out = out + self.comp(n, [a] * n).scaled(ONE / factorial(n))
        return out

    def continuity_counterexample(self, tuples):
        """First tuple violating filtration additivity, or None."""
        for args in tuples:
            out = self.comp(len(args), args)
            if out.is_zero():
                continue
            need = sum(self.source.level(a) for a in args)
            if self.target.level(out) < need:
                return args
        return None


def _partitions_with_sign(n: int, degs):
    """Unordered partitions of range(n) into nonempty blocks (ordered by
    minimum), with the Koszul sign of reordering the arguments into the
    concatenated block order."""
    def parts(elems):
        if not elems:
            yield []
            return
        first = elems[0]
        rest = elems[1:]
        from itertools import combinations
        for r in range(len(rest) + 1):
            for extra in combinations(rest, r):
                block = (first,) + extra
                remaining = [e for e in rest if e not in extra]
                for tail in parts(remaining):
                    yield [block] + tail

    for blocks in parts(list(range(n))):
        order = [i for b in blocks for i in b]
        perm = [0] * n
        for pos, i in enumerate(order):
            perm[i] = pos
        yield blocks, koszul_sign(tuple(perm), degs)


def identity_curved(L: LInfinity) -> CurvedMorphism:
    def comp(n, args):
        return FormalSum(args[0]) if n == 1 else FormalSum()

    return CurvedMorphism("id", L, L, FormalSum(), comp, 1)


def curved_compose(Psi: CurvedMorphism, Phi: CurvedMorphism) -> CurvedMorphism:
    """Composite of curved morphisms: sum over partitions of the arguments
    into blocks fed to the first morphism, with constant blocks weighted by
    inverse factorials."""
    if Phi.target is not Psi.source and Phi.target.name != Psi.source.name:
        raise ValueError("endpoint mismatch")

    def comp(n, args):
        degs = [Phi.source.degree(x) or 0 for x in args]
        out = FormalSum()
        for blocks, eps in _partitions_with_sign(n, degs):
            pieces = [Phi.comp(len(b), [args[i] for i in b]) for b in blocks]
            if any(p.is_zero() for p in pieces):
                continue
            j = len(blocks)
            for m in range(0, max(Psi.vanish_above - j, 0) + 1):
                term = Psi.comp(j + m, pieces + [Phi.comp0] * m)
                out = out + term.scaled(eps * ONE / factorial(m))
        return out

    comp0 = Psi.mc_image(Phi.comp0)
    bound = max(Psi.vanish_above * max(Phi.vanish_above, 1), 1)
    return CurvedMorphism("%s.%s" % (Psi.name, Phi.name), Phi.source,
                          Psi.target, comp0, comp, bound)


def direct_sum_morphisms(Phi: CurvedMorphism, Psi: CurvedMorphism,
                         source: LInfinity, target: LInfinity) -> CurvedMorphism:
    """Blockwise sum on given (already direct-sum) endpoints."""

    def comp(n, args):
        left = Phi.comp(n, [untag_vec("L", a) for a in args])
        right = Psi.comp(n, [untag_vec("R", a) for a in args])
        return tag_vec("L", left) + tag_vec("R", right)

    comp0 = tag_vec("L", Phi.comp0) + tag_vec("R", Psi.comp0)
    return CurvedMorphism("(%s)+(%s)" % (Phi.name, Psi.name), source, target,
                          comp0, comp, max(Phi.vanish_above,
                                           Psi.vanish_above))


# ---------------------------------------------------------------------------
# the enrichment maps

def max_boxes(C: Coproperad) -> int:
    best = 2
    for c in C.labels():
        for cut in C.delta(c):
            best = max(best, cut.n_top_boxes() + cut.n_bottom_boxes())
    return best


def composition_enrichment(setting: GebraSetting, a: str, b: str, c: str,
                           alpha, beta, gamma,
                           H_bc: LInfinity | None = None,
                           H_ab: LInfinity | None = None,
                           H_ac: LInfinity | None = None) -> CurvedMorphism:
    """The composition morphism from the sum of the two morphism algebras
    to the outer one: arity-n components pair the arguments with the boxes
    of the two-level decompositions with n boxes in total, the left summand
    on the bottom level and the right summand on the top level.

    Not continuous: the identity directions pair on the counit line.
    """
    C = setting.C
    ctx_ab = setting.ctx(a, b)
    ctx_bc = setting.ctx(b, c)
    ctx_ac = setting.ctx(a, c)
    H_bc = H_bc or setting.morphism_algebra(b, c, beta, gamma)
    H_ab = H_ab or setting.morphism_algebra(a, b, alpha, beta)
    H_ac = H_ac or setting.morphism_algebra(a, c, alpha, gamma)
    source = direct_sum(H_bc, H_ab)

    def comp(n, args):
        if n < 2:
            return FormalSum()
        gs = [untag_vec("L", x) for x in args]
        fs = [untag_vec("R", x) for x in args]
        degs = [source.degree(x) or 0 for x in args]
        out = FormalSum()
        for lbl in list(C.labels()) + [ID]:
            for cut, acoeff in C.delta_twolevel(n, lbl).items():
                slots = [("v", v) for v in cut.bottom_vertices()]
                slots += [("idb", j) for j in cut.bottom_id_legs()]
                n_bot = len(slots)
                slots += [("v", v) for v in cut.top_vertices()]
                slots += [("idt", i) for i in cut.top_id_legs()]
                for assign, eps in _assignments(degs):
                    vals = []
                    dead = False
                    for pos, (slot, ai) in enumerate(zip(slots, assign)):
                        content = ID if slot[0] != "v" else \
                            cut.graph.verts[slot[1]].dec
                        if pos < n_bot:
                            val = ctx_bc.value_at(gs[ai], "m", content)
                            pair = (ctx_bc.A, ctx_bc.B)
                        else:
                            val = ctx_ab.value_at(fs[ai], "m", content)
                            pair = (ctx_ab.A, ctx_ab.B)
                        if val.is_zero():
                            dead = True
                            break
                        vals.append((val, degs[ai], C.degree(content),
                                     pair[0], pair[1]))
                    if dead:
                        continue
                    res = apply_values_to_cut(cut, slots, vals)
                    for e, cc in res.items():
                        out.add_term(("m", lbl, e), acoeff * eps * cc)
        return out

    return CurvedMorphism("compose[%s%s%s]" % (a, b, c), source, H_ac,
                          FormalSum(), comp, max_boxes(C))


def unit_enrichment(setting: GebraSetting, a: str, alpha,
                    H_aa: LInfinity | None = None) -> CurvedMorphism:
    """Constant morphism from the zero algebra picking out the strict
    identity."""
    ctx = setting.ctx(a, a)
    H_aa = H_aa or setting.morphism_algebra(a, a, alpha, alpha)

    def comp(n, args):
        return FormalSum()

    return CurvedMorphism("unit[%s]" % a, zero_algebra(), H_aa,
                          identity_morphism_element(ctx), comp, 0)


def pullback_seed(f: FormalSum, H_outer: LInfinity,
                  H_f: LInfinity) -> CurvedMorphism:
    """Pairs the identity of the outer morphism algebra with the constant
    at f sitting in the right-hand summand."""
    source = H_outer
    target = direct_sum(H_outer, H_f)

    def comp(n, args):
        return tag_vec("L", args[0]) if n == 1 else FormalSum()

    return CurvedMorphism("seed^", source, target, tag_vec("R", f), comp, 1)


def pushout_seed(f: FormalSum, H_f: LInfinity,
                 H_outer: LInfinity) -> CurvedMorphism:
    """Pairs the constant at f in the left-hand summand with the identity of
    the outer morphism algebra."""
    source = H_outer
    target = direct_sum(H_f, H_outer)

    def comp(n, args):
        return tag_vec("R", args[0]) if n == 1 else FormalSum()

    return CurvedMorphism("seed_", source, target, tag_vec("L", f), comp, 1)


def pullback(setting: GebraSetting, a: str, b: str, c: str, alpha, beta,
             gamma, f: FormalSum) -> CurvedMorphism:
    """Precomposition morphism of morphism algebras along f."""
    H_bc = setting.morphism_algebra(b, c, beta, gamma)
    H_ab = setting.morphism_algebra(a, b, alpha, beta)
    H_ac = setting.morphism_algebra(a, c, alpha, gamma)
    Phi = composition_enrichment(setting, a, b, c, alpha, beta, gamma,
                                 H_bc=H_bc, H_ab=H_ab, H_ac=H_ac)
    Xi = pullback_seed(f, H_bc, H_ab)
    return curved_compose(Phi, Xi)


def pushout(setting: GebraSetting, c: str, a: str, b: str, gamma, alpha,
            beta, f: FormalSum) -> CurvedMorphism:
    """Postcomposition morphism of morphism algebras along f (which maps
    the a-structure to the b-structure)."""
    H_ca = setting.morphism_algebra(c, a, gamma, alpha)
    H_ab = setting.morphism_algebra(a, b, alpha, beta)
    H_cb = setting.morphism_algebra(c, b, gamma, beta)
    Phi = composition_enrichment(setting, c, a, b, gamma, alpha, beta,
                                 H_bc=H_ab, H_ab=H_ca, H_ac=H_cb)
    Xi = pushout_seed(f, H_ab, H_ca)
    return curved_compose(Phi, Xi)
