"""Fixture corpus: small chain complexes, shipped coproperads, and the
weight-triangular Maurer-Cartan solver used to build nontrivial gebra
structures and infinity-morphisms on them."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import permutations

from .coproperad import ID, Coproperad, cofree_conilpotent, trivial_coproperad
from .exactlin import ONE, ZERO, ChainComplex, FormalSum, nullspace, solve_linear
from .graphs import DirectedGraph, VertexShape
from .sbimod import Cut, SBimodule, canonical_cut
from .convolution import ConvContext, LInfinity, build_pair_algebra

# ---------------------------------------------------------------------------
# chain complexes

def cx_point() -> ChainComplex:
    """The ground field in degree 0."""
    return ChainComplex.build((("u", 0),), {})


def cx_acyclic2(prefix="a") -> ChainComplex:
    """Two-dimensional acyclic complex: d(y) = x."""
    x, y = prefix + "0", prefix + "1"
    return ChainComplex.build(((x, 0), (y, 1)), {y: FormalSum.lift(x)})


def cx_trivial2(prefix="c") -> ChainComplex:
    """Two-dimensional complex with zero differential."""
    return ChainComplex.build(((prefix + "0", 0), (prefix + "1", 1)), {})


def cx_acyclic_plus_point(prefix="b") -> ChainComplex:
    """Three-dimensional: an acyclic pair plus one surviving generator."""
    x, y, z = prefix + "0", prefix + "1", prefix + "h"
    return ChainComplex.build(((x, 0), (y, 1), (z, 0)),
                              {y: FormalSum.lift(x)})


# ---------------------------------------------------------------------------
# shipped coproperads

def E_binary() -> SBimodule:
    return SBimodule({(1, 2): ("nu",)}, {"nu": 1})


def E_binary_ternary() -> SBimodule:
    return SBimodule({(1, 2): ("nu",), (1, 3): ("rho",)},
                     {"nu": 1, "rho": 1})


def E_properadic() -> SBimodule:
    return SBimodule({(1, 2): ("nu",), (2, 1): ("la",)},
                     {"nu": 1, "la": 1})


def coproperad_w2() -> Coproperad:
    return cofree_conilpotent(E_binary(), 2, (1, 3), name="cofree-w2")


def coproperad_w3() -> Coproperad:
    return cofree_conilpotent(E_binary(), 3, (1, 4), name="cofree-w3")


def coproperad_w2d() -> Coproperad:
    """Weight-two cofree with a nonzero coderivation: every two-vertex tree
    maps to the ternary generator."""
    C0 = cofree_conilpotent(E_binary_ternary(), 2, (1, 3))
    rho = [l for l in C0.labels()
           if C0.weight(l) == 1 and C0.arity(l) == (1, 3)][0]
    cores = {c: FormalSum.lift(rho) for c in C0.labels() if C0.weight(c) == 2}
    return cofree_conilpotent(E_binary_ternary(), 2, (1, 3),
                              corestriction=cores, name="cofree-w2d")


def coproperad_properadic() -> Coproperad:
    return cofree_conilpotent(E_properadic(), 2, (3, 3), name="properadic-w2")


def coproperad_properadic_w3() -> Coproperad:
    return cofree_conilpotent(E_properadic(), 3, (3, 3), name="properadic-w3")


# ---------------------------------------------------------------------------
# the associativity-style cooperad (arities (1,n) only, regular actions)

def _perm_label(n: int, perm) -> str:
    return "mu%d[%s]" % (n, "".join(str(i) for i in perm))


def _parse_perm_label(label: str):
    n = int(label[2:label.index("[")])
    perm = tuple(int(ch) for ch in label[label.index("[") + 1:-1])
    return n, perm


def _assoc_action(label, out_perm, in_perm):
    n, rho = _parse_perm_label(label)
    new = tuple(in_perm[rho[i]] for i in range(n))
    return (ONE, _perm_label(n, new))


def _planar_cut_sign(qs) -> int:
    """Suspension reordering sign for a planar splitting into a bottom
    corolla and top blocks of sizes ``qs``; determined by coassociativity
    (solved exhaustively at arities <= 4, gauge-fixed so that the two
    splittings of the ternary generator differ in sign)."""
    total = 0
    for j in range(len(qs)):
        for k in range(j + 1, len(qs)):
            total += qs[j] * (qs[k] - 1)
    return -1 if total % 2 else 1


def assoc_cooperad(max_arity_in: int = 4, name="assoc") -> Coproperad:
    """Hand-entered table in the style of the dual of the associativity
    operad: one orbit generator per arity 2..max, regular symmetric-group
    action, planar decomposition with suspension signs; weight n-1,
    degree n-1."""
    labels = []
    components = {}
    degrees = {}
    weights = {}
    for n in range(2, max_arity_in + 1):
        comp = []
        for perm in permutations(range(n)):
            l = _perm_label(n, perm)
            comp.append(l)
            degrees[l] = n - 1
            weights[l] = n - 1
        components[(1, n)] = tuple(sorted(comp))
        labels.extend(comp)
    bimod = SBimodule(components, degrees, _assoc_action, "left",
                      (1, max_arity_in))

    delta_table = {}
    for n in range(2, max_arity_in + 1):
        base = _planar_delta(n, max_arity_in)
        delta_table[_perm_label(n, tuple(range(n)))] = base
    # extend equivariantly to the whole orbit
    for n in range(2, max_arity_in + 1):
        idl = _perm_label(n, tuple(range(n)))
        for perm in permutations(range(n)):
            l = _perm_label(n, perm)
            if l == idl:
                continue
            delta_table[l] = _act_on_cuts(delta_table[idl], perm,
                                          _assoc_action)
    return Coproperad(name, bimod, weights, delta_table)


def _planar_delta(n: int, max_arity_in: int) -> FormalSum:
    """All planar two-level splittings of the identity-labeled corolla."""
    out = FormalSum()
    for p in range(1, n + 1):
        for qs in _compositions(n, p):
            if p == 1 and qs[0] == n:
                # trivial cut: the corolla on top, one identity box below
                g = DirectedGraph.single(
                    VertexShape(1, n, _perm_label(n, tuple(range(n))), n - 1))
                cut, s = canonical_cut(g, set(), _assoc_action)
                out.add_term(cut, s)
                continue
            if p == n:
                g = DirectedGraph.single(
                    VertexShape(1, n, _perm_label(n, tuple(range(n))), n - 1))
                cut, s = canonical_cut(g, {0}, _assoc_action)
                out.add_term(cut, s)
                continue
            if p < 2 or any(q > max_arity_in for q in qs):
                continue
            if all(q == 1 for q in qs):
                continue
            term = _planar_cut(n, p, qs)
            if term is None:
                continue
            cut, coeff = term
            out.add_term(cut, coeff * _planar_cut_sign(qs))
    return out


def _compositions(n, p):
    if p == 1:
        yield (n,)
        return
    for first in range(1, n - p + 2):
        for rest in _compositions(n - first, p - 1):
            yield (first,) + rest


def _planar_cut(n, p, qs):
    """Bottom corolla of arity p under top blocks of sizes qs (size-one
    blocks are identity boxes)."""
    bottom = VertexShape(1, p, _perm_label(p, tuple(range(p))), p - 1)
    verts = [bottom]
    tops = []
    for q in qs:
        if q > 1:
            tops.append(VertexShape(1, q, _perm_label(q, tuple(range(q))),
                                    q - 1))
    verts.extend(tops)
    edges = set()
    gins = []
    vidx = 1
    leg = 0
    for j, q in enumerate(qs):
        if q == 1:
            gins.append((0, j))
        else:
            edges.add((vidx, 0, 0, j))
            for b in range(q):
                gins.append((vidx, b))
            vidx += 1
        leg += q
    g = DirectedGraph(tuple(verts), frozenset(edges), tuple(gins), ((0, 0),))
    return canonical_cut(g, {0}, _assoc_action)


def _act_on_cuts(cuts: FormalSum, perm, action) -> FormalSum:
    out = FormalSum()
    for cut, a in cuts.items():
        g = cut.graph
        gins = [None] * len(g.gins)
        for i, ep in enumerate(g.gins):
            gins[perm[i]] = ep
        moved = DirectedGraph(g.verts, g.edges, tuple(gins), g.gouts)
        c2, s = canonical_cut(moved, cut.bottom, action)
        if s:
            out.add_term(c2, a * s)
    return out


# ---------------------------------------------------------------------------
# Maurer-Cartan solving, weight by weight

def _directions_by_weight(ctx: ConvContext, tags, degree):
    """Equivariant spanning directions of the given carrier degree, grouped
    by the weight of their supporting labels."""
    groups = {}
    for vec in ctx.spanning(tags=tags):
        if ctx.degree(vec) != degree:
            continue
        w = max(ctx.C.weight(k[1]) for k in vec)
        groups.setdefault(w, []).append(vec)
    return groups


def _coords(ctx: ConvContext, x: FormalSum, keys):
    return [x.get(k, ZERO) for k in keys]


def solve_gebra(ctx: ConvContext, tag="A", rng=None, kernel_boost=True):
    """A gebra structure on one side, solved weight by weight.

    At each weight the residual restricted to that weight is affine in the
    unknown part; a particular solution is completed with a seeded kernel
    vector at weight one so that the structure is nonzero whenever the
    complex allows it.  Raises if some weight step is obstructed.
    """
    rng = rng or random.Random(0)
    sided = "A" if tag == "A" else "B"
    dirs = _directions_by_weight(ctx, (sided,), -1 + 1)  # suspended degree 0
    alpha = FormalSum()
    maxw = max([ctx.C.weight(c) for c in ctx.C.labels()] + [0])

    def residual(x):
        from .convolution import gebra_residual
        return gebra_residual(ctx, x, sided)

    for w in range(1, maxw + 1):
        basis = dirs.get(w, [])
        key_set = sorted({k for c in ctx.C.labels() if ctx.C.weight(c) == w
                          for k in _component_keys(ctx, sided, c)})
        if not key_set:
            continue
        base = residual(alpha)
        b = [-v for v in _coords(ctx, base, key_set)]
        cols = []
        for d in basis:
            col = residual(alpha + d) - base
            cols.append(_coords(ctx, col, key_set))
        A = [[cols[j][i] for j in range(len(basis))]
             for i in range(len(key_set))]
        x = solve_linear(A, b)
        if x is None:
            raise ValueError("gebra solve obstructed at weight %d" % w)
        if kernel_boost and w == 1 and basis:
            null = nullspace(A)
            if null:
                pick = null[rng.randrange(len(null))]
                x = [xi + ki for xi, ki in zip(x, pick)]
            if all(v == 0 for v in x):
                raise ValueError("no nonzero weight-one structure available")
        for xi, d in zip(x, basis):
            alpha = alpha + d.scaled(xi)
    return alpha


def _component_keys(ctx: ConvContext, tag, c):
    E = ctx.end_of(tag)
    m, n = ctx.C.arity(c)
    return [(tag, c, e) for e in E.component(m, n)]


def solve_morphism(ctx: ConvContext, alpha: FormalSum, beta: FormalSum,
                   f0: FormalSum, rng=None, kernel_boost=False):
    """An infinity-morphism between two solved gebra structures extending a
    prescribed chain-map first component (a counit-supported element)."""
    from .convolution import build_morphism_algebra

    rng = rng or random.Random(0)
    H = build_morphism_algebra(ctx.C, ctx.A, ctx.B, alpha, beta, ctx=ctx)
    dirs = _directions_by_weight(ctx, ("m",), 0)
    f = FormalSum(f0)
    maxw = max([ctx.C.weight(c) for c in ctx.C.labels()] + [0])
    for w in range(1, maxw + 1):
        basis = [d for d in dirs.get(w, [])
                 if all(k[1] != ID for k in d)]
        key_set = sorted({k for c in ctx.C.labels() if ctx.C.weight(c) == w
                          for k in _component_keys(ctx, "m", c)})
        if not key_set:
            continue
        base = H.mc_residual(f)
        b = [-v for v in _coords(ctx, base, key_set)]
        cols = []
        for d in basis:
            col = H.mc_residual(f + d) - base
            cols.append(_coords(ctx, col, key_set))
        A = [[cols[j][i] for j in range(len(basis))]
             for i in range(len(key_set))]
        x = solve_linear(A, b)
        if x is None:
            raise ValueError("morphism solve obstructed at weight %d" % w)
        if kernel_boost and basis:
            null = nullspace(A)
            if null:
                pick = null[rng.randrange(len(null))]
                x = [xi + ki for xi, ki in zip(x, pick)]
        for xi, d in zip(x, basis):
            f = f + d.scaled(xi)
    return f


def random_element(ctx: ConvContext, rng, tags=("A", "m", "B"), degree=None,
                   terms=3):
    """Seeded random combination of equivariant spanning directions."""
    pool = [v for v in ctx.spanning(tags=tags)
            if degree is None or ctx.degree(v) == degree]
    out = FormalSum()
    for _ in range(min(terms, len(pool))):
        v = pool[rng.randrange(len(pool))]
        out = out + v.scaled(Fraction(rng.randint(-2, 2)))
    if degree is not None and not out.is_zero() and ctx.degree(out) != degree:
        raise AssertionError
    return out


def solve_homotopy(ctx: ConvContext, alpha: FormalSum, beta: FormalSum,
                   f: FormalSum, cap: int = 4, rng=None, attempts=8):
    """A Maurer-Cartan one-simplex in the form-valued morphism algebra with
    vertex 0 at ``f``: weight-triangular solve of the flow seeded by a
    degree-1 direction on the dt part.

    Returns (forms, H, g) with g the (possibly distinct) vertex-1 endpoint.
    """
    from .convolution import build_morphism_algebra
    from .integration import (evaluate_vertex, include_constant, sullivan,
                              tensor_forms)

    rng = rng or random.Random(0)
    # solution directions stay below ``cap``; residual evaluation multiplies
    # up to n_hard form factors, so the working cap is larger
    forms = sullivan(1, max(cap * ctx.n_hard, cap + 2))
    H_alg = build_morphism_algebra(ctx.C, ctx.A, ctx.B, alpha, beta, ctx=ctx)
    key_level = lambda bk: ctx.level(FormalSum.lift(bk))
    T = tensor_forms(H_alg, forms, ctx.key_degree, key_level)
    pool = [v for v in ctx.spanning(tags=("m",)) if ctx.degree(v) == 1]
    if not pool:
        raise ValueError("no degree-1 directions to seed the flow")
    maxw = max([ctx.C.weight(c) for c in ctx.C.labels()] + [0])
    form_basis = [k for k in forms.basis() if sum(k[0]) <= cap]

    def weight_of_key(bk):
        return ctx.C.weight(bk[1])

    for attempt in range(attempts):
        lam = pool[rng.randrange(len(pool))]
        H = include_constant(f, forms)
        dt = ((0,), (1,))
        for bk, v in lam.items():
            H.add_term((dt, bk), v)
        ok = True
        for w in range(0, maxw + 1):
            dirs = []
            for vec in ctx.spanning(tags=("m",)):
                if max(ctx.C.weight(k[1]) for k in vec) != w:
                    continue
                d = ctx.degree(vec)
                for fk in form_basis:
                    if forms.degree(fk) + d != 0:
                        continue
                    if fk == forms.one():
                        continue  # the constant part is pinned by vertex 0
                    if fk == ((0,), (1,)):
                        continue  # the bare dt slot carries the seed
                    cand = FormalSum({(fk, bk): v for bk, v in vec.items()})
                    dirs.append(cand)
            keys = sorted({(fk, bk) for fk in form_basis
                           for vec in ctx.spanning(tags=("m",))
                           if max(ctx.C.weight(k[1]) for k in vec) == w
                           for bk in vec})
            if not keys:
                continue
            base = T.mc_residual(H)
            b = [-base.get(k, ZERO) for k in keys]
            cols = []
            for d in dirs:
                col = T.mc_residual(H + d) - base
                cols.append([col.get(k, ZERO) for k in keys])
            A = [[cols[j][i] for j in range(len(dirs))]
                 for i in range(len(keys))]
            x = solve_linear(A, b)
            if x is None:
                ok = False
                break
            for xi, d in zip(x, dirs):
                H = H + d.scaled(xi)
        if not ok:
            continue
        if not T.mc_residual(H).is_zero():
            continue
        g = evaluate_vertex(H, 1, forms)
        if evaluate_vertex(H, 0, forms) != f:
            continue
        if g != f:
            return forms, H, g
    raise ValueError("no nontrivial one-simplex found")


# ---------------------------------------------------------------------------
# bundled standard fixtures

def standard_pair(C: Coproperad | None = None, seed=0, max_arity=4):
    """A solved pair: contexts, gebra structures on both sides and an
    infinity-morphism between them extending the identity-shaped chain map."""
    from .convolution import identity_morphism_element

    C = C or coproperad_w2()
    A = cx_acyclic2("a")
    B = cx_acyclic2("b")
    ctx = ConvContext(C, A, B, max_arity)
    rng = random.Random(seed)
    alpha = solve_gebra(ctx, "A", rng)
    beta = solve_gebra(ctx, "B", rng)
    table = {"a0": FormalSum.lift("b0"), "a1": FormalSum.lift("b1")}
    from .convolution import chain_map_element
    f0 = chain_map_element(ctx, table)
    f = solve_morphism(ctx, alpha, beta, f0, rng)
    return ctx, alpha, beta, f
