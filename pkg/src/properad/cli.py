"""Command-line harness: load fixtures, run named verification suites, emit
human-readable and machine-readable reports.

Exit codes: 0 all checks pass, 1 at least one check fails, 2 configuration
or audit error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .cobar import (
    cobar,
    compose_morphisms,
    cylinder,
    cylinder_inclusion,
    cylinder_projection,
    fold_map,
    gebra_defects,
    resolution_to_strict,
    two_colored_resolution,
    two_colored_strict,
)
from .convolution import (
    ConvContext,
    LInfinity,
    build_morphism_algebra,
    chain_map_element,
    gebra_residual,
    identity_morphism_element,
    infty_residual,
    restrict_to_middle,
    suspended_side_algebra,
    transfer_subalgebra,
    twist_raw,
)
from .coproperad import ID, Coproperad, parse_coproperad, trivial_coproperad
from .exactlin import FormalSum
from .graphs import DirectedGraph, VertexShape, size as graph_size
from . import fixtures as fx
from .inftymor import (
    GebraInftyMorphism,
    GebraSetting,
    classify,
    compose_gebra,
    composition_enrichment,
    curved_compose,
    direct_sum,
    direct_sum_morphisms,
    identity_curved,
    pullback,
    pushout,
    strict_identity,
    tag_vec,
    unit_enrichment,
    untag_vec,
    zero_algebra,
)
from .integration import (
    DegreeOverflow,
    evaluate_vertex,
    face_pullback,
    include_constant,
    is_homotopy,
    sullivan,
    tensor_forms,
)

SUITE_NAMES = ["d2", "maps", "jacobi", "filtration", "mc", "twist",
               "enrichment", "pullpush", "integration", "cooperad"]

CORPUS = ["trivial", "cofree-w2", "cofree-w2d", "properadic-w2", "assoc"]


@dataclass
class Config:
    suites: list
    coproperad: str | None = None
    dimA: int = 2
    dimB: int = 2
    max_weight: int = 2
    max_arity: tuple = (3, 3)
    bracket_arity: int = 4
    poly_degree: int = 4
    seed: int = 0
    fmt: str = "text"
    corrupt_sign: bool = False

    def echo(self):
        return {
            "suites": list(self.suites),
            "coproperad": self.coproperad or "",
            "dimA": self.dimA,
            "dimB": self.dimB,
            "max_weight": self.max_weight,
            "max_arity": list(self.max_arity),
            "bracket_arity": self.bracket_arity,
            "poly_degree": self.poly_degree,
            "seed": self.seed,
            "corrupt_sign": self.corrupt_sign,
        }


@dataclass
class CheckResult:
    suite: str
    name: str
    status: str              # pass | fail | skip
    detail: str = ""
    payload: dict = field(default_factory=dict)
    seconds: float = 0.0


@dataclass
class Report:
    config: dict
    checks: list

    def failed(self):
        return [c for c in self.checks if c.status == "fail"]

    def to_text(self) -> str:
        lines = ["properad verification report"]
        for k in sorted(self.config):
            lines.append("  config %s = %s" % (k, self.config[k]))
        for c in sorted(self.checks, key=lambda c: (c.suite, c.name)):
            mark = {"pass": "PASS", "fail": "FAIL", "skip": "SKIP"}[c.status]
            line = "[%s] %s: %s (%.2fs)" % (mark, c.suite, c.name, c.seconds)
            if c.detail:
                line += " -- " + c.detail
            lines.append(line)
            for k in sorted(c.payload):
                lines.append("       %s: %s" % (k, c.payload[k]))
        n_fail = len(self.failed())
        lines.append("%d checks, %d failed" % (len(self.checks), n_fail))
        return "\n".join(lines)

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "checks": [
                {"suite": c.suite, "name": c.name, "status": c.status,
                 "detail": c.detail, "payload": c.payload,
                 "seconds": round(c.seconds, 6)}
                for c in sorted(self.checks, key=lambda c: (c.suite, c.name))
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=1)

    @staticmethod
    def from_json(text: str) -> "Report":
        doc = json.loads(text)
        checks = [CheckResult(c["suite"], c["name"], c["status"],
                              c["detail"], c["payload"], c["seconds"])
                  for c in doc["checks"]]
        return Report(doc["config"], checks)


# ---------------------------------------------------------------------------
# fixture state shared by the suites

class State:
    def __init__(self, config: Config):
        self.config = config
        self._coproperads = {}
        self._pairs = {}
        self._settings = {}

    def corpus(self):
        if self.config.coproperad:
            return ["custom"]
        return CORPUS

    def coproperad(self, name: str) -> Coproperad:
        if name not in self._coproperads:
            if name == "custom":
                with open(self.config.coproperad) as fh:
                    self._coproperads[name] = parse_coproperad(fh.read())
            else:
                text = resources.files("properad").joinpath(
                    "data/%s.coprop" % name).read_text()
                self._coproperads[name] = parse_coproperad(text)
        return self._coproperads[name]

    def complex_of_dim(self, dim: int, prefix: str):
        if dim <= 1:
            return fx.cx_point()
        if dim == 2:
            return fx.cx_acyclic2(prefix)
        return fx.cx_acyclic_plus_point(prefix)

    def pair(self, name: str):
        """(ctx, alpha, beta, f) with solved structures over a fixture."""
        if name not in self._pairs:
            C = self.coproperad(name)
            A = self.complex_of_dim(self.config.dimA, "a")
            B = self.complex_of_dim(self.config.dimB, "b")
            ctx = ConvContext(C, A, B, self.config.bracket_arity)
            rng = random.Random(self.config.seed)
            if C.labels():
                alpha = fx.solve_gebra(ctx, "A", rng)
                beta = fx.solve_gebra(ctx, "B", rng)
            else:
                alpha = FormalSum()
                beta = FormalSum()
            table = {l: FormalSum.lift(l2) for l, l2 in zip(
                A.space.labels, B.space.labels)}
            f0 = chain_map_element(ctx, table)
            f = fx.solve_morphism(ctx, alpha, beta, f0, rng,
                                  kernel_boost=True)
            self._pairs[name] = (ctx, alpha, beta, f)
        return self._pairs[name]

    def pair_algebra(self, ctx) -> LInfinity:
        L = LInfinity("pair", ctx.ell, ctx.level, ctx.degree, ctx.n_hard,
                      spanning=ctx.spanning)
        if self.config.corrupt_sign:
            inner = L.ell

            def bad_ell(n, args, _inner=ctx.ell):
                out = _inner(n, args)
                return -out if n == 2 else out

            L = LInfinity("pair!", bad_ell, ctx.level, ctx.degree,
                          ctx.n_hard, spanning=ctx.spanning)
        return L

    def rng(self, tag: str):
        return random.Random("%s:%s" % (self.config.seed, tag))


def _spanning_by_tag(ctx):
    out = {}
    for v in ctx.spanning():
        out.setdefault(next(iter(v))[0], []).append(v)
    return out


def _check(results, suite, name, fn):
    t0 = time.time()
    try:
        detail, payload = fn()
        results.append(CheckResult(suite, name, "pass", detail or "",
                                   payload or {}, time.time() - t0))
    except AssertionError as exc:
        payload = getattr(exc, "payload", {"counterexample": str(exc)})
        results.append(CheckResult(suite, name, "fail", str(exc), payload,
                                   time.time() - t0))


def _fail(msg, **payload):
    exc = AssertionError(msg)
    exc.payload = {k: str(v) for k, v in payload.items()}
    raise exc


# ---------------------------------------------------------------------------
# suites

def suite_d2(state: State):
    results = []
    for name in state.corpus():
        C = state.coproperad(name)
        for builder, tag in ((cobar, "cobar"),
                             (two_colored_resolution, "resolution"),
                             (cylinder, "cylinder"),
                             (two_colored_strict, "strict")):
            def run(C=C, builder=builder):
                P = builder(C)
                bad = P.check_d_squared()
                if bad:
                    label, residual = bad[0]
                    _fail("d^2 != 0", generator=label,
                          residual_terms=len(residual))
                return ("%d generators" % len(P.gens), {})
            _check(results, "d2", "%s:%s" % (name, tag), run)
    return results


def suite_maps(state: State):
    results = []
    for name in state.corpus():
        C = state.coproperad(name)

        def run_rho(C=C):
            rho = resolution_to_strict(C)
            bad = rho.check_chain_map()
            if bad:
                _fail("projection fails to be a chain map",
                      generator=bad[0][0])
            return ("", {})

        def run_cyl(C=C):
            Phi = cylinder_inclusion(C)
            Psi = cylinder_projection(C)
            bad = Phi.check_chain_map() + Psi.check_chain_map()
            if bad:
                _fail("cylinder map fails to be a chain map",
                      generator=bad[0][0])
            comp = compose_morphisms(Psi, Phi)
            fold = fold_map(C)
            for label in comp.source.gens:
                if comp.images[label] != fold.images[label]:
                    _fail("composite differs from the fold map",
                          generator=label)
            return ("", {})

        _check(results, "maps", "%s:rho" % name, run_rho)
        _check(results, "maps", "%s:cylinder" % name, run_cyl)
    return results


def _jacobi_block(state, results, name, L, ctx, tag, count=4):
    rng = state.rng("jacobi:%s:%s" % (name, tag))
    by_tag = _spanning_by_tag(ctx)
    for n in range(1, state.config.bracket_arity + 1):
        def run(n=n):
            for trial in range(count):
                tags = [rng.choice(sorted(by_tag)) for _ in range(n)]
                args = [by_tag[t][rng.randrange(len(by_tag[t]))]
                        for t in tags]
                r = L.jacobi_residual(n, args)
                if not r.is_zero():
                    _fail("generalized Jacobi fails",
                          arity=n, summands=tags,
                          witness=sorted(map(str, list(r)[:2])))
            return ("%d tuples" % count, {})
        _check(results, "jacobi", "%s:%s:arity%d" % (name, tag, n), run)


def suite_jacobi(state: State):
    results = []
    for name in state.corpus():
        C = state.coproperad(name)
        if not C.labels():
            continue
        ctx, alpha, beta, f = state.pair(name)
        L = state.pair_algebra(ctx)
        _jacobi_block(state, results, name, L, ctx, "pair")
        if name in ("cofree-w2", "custom"):
            H = build_morphism_algebra(C, ctx.A, ctx.B, alpha, beta, ctx=ctx)
            _jacobi_block(state, results, name, H, ctx, "morphisms")
            Lt = twist_raw(L, alpha + beta + f)
            _jacobi_block(state, results, name, Lt, ctx, "twisted")
    return results


def suite_filtration(state: State):
    results = []

    def run_paper_graph():
        g = _paper_example_graph()
        if g.weight() != 4:
            _fail("example graph weight", got=g.weight())
        if graph_size(g) != 5:
            _fail("example graph size", got=graph_size(g))
        return ("weight 4, size 5", {})

    _check(results, "filtration", "paper-example-graph", run_paper_graph)

    for name in state.corpus():
        C = state.coproperad(name)
        if not C.labels():
            continue

        def run_subadd(C=C):
            for c in C.labels():
                k = C.coradical_level(c)
                for cut in C.delta_11(c):
                    kb = C.coradical_level(
                        cut.graph.verts[cut.bottom_vertices()[0]].dec)
                    kt = C.coradical_level(
                        cut.graph.verts[cut.top_vertices()[0]].dec)
                    if kb + kt > k:
                        _fail("coradical subadditivity fails", element=c)
            return ("%d basis elements" % len(C.labels()), {})

        def run_density(C=C):
            for c in C.labels():
                dens = C.density_level(c)
                for n in range(1, 7):
                    for cut in C.delta_left(n, c):
                        b = cut.bottom_vertices()[0]
                        total = C.coradical_level(cut.graph.verts[b].dec)
                        for t in cut.top_vertices():
                            total += C.density_level(cut.graph.verts[t].dec)
                        total += len(cut.top_id_legs())
                        if total > dens:
                            _fail("density subadditivity fails", element=c)
            return ("", {})

        _check(results, "filtration", "%s:coradical-subadditive" % name,
               run_subadd)
        _check(results, "filtration", "%s:density-subadditive" % name,
               run_density)

        if name in ("cofree-w2", "properadic-w2", "custom"):
            ctx, alpha, beta, f = state.pair(name)
            L = state.pair_algebra(ctx)
            rng = state.rng("filtration:%s" % name)
            by_tag = _spanning_by_tag(ctx)

            def run_additivity(L=L, ctx=ctx, by_tag=by_tag, rng=rng):
                for n in (2, 3):
                    for trial in range(6):
                        tags = [rng.choice(sorted(by_tag)) for _ in range(n)]
                        args = [by_tag[t][rng.randrange(len(by_tag[t]))]
                                for t in tags]
                        out = L.ell(n, args)
                        if out.is_zero():
                            continue
                        if ctx.level(out) < sum(ctx.level(a) for a in args):
                            _fail("bracket level below the sum of input "
                                  "levels", arity=n)
                return ("", {})

            _check(results, "filtration", "%s:bracket-additivity" % name,
                   run_additivity)
    return results


def _paper_example_graph() -> DirectedGraph:
    v1 = VertexShape(2, 2, "a", 0)
    v2 = VertexShape(1, 2, "b", 0)
    v3 = VertexShape(2, 3, "c", 0)
    v4 = VertexShape(3, 2, "d", 0)
    edges = {(3, 0, 1, 0), (3, 1, 1, 1), (3, 2, 2, 2), (1, 0, 0, 0),
             (2, 0, 0, 1)}
    return DirectedGraph((v1, v2, v3, v4), frozenset(edges),
                         ((3, 0), (3, 1), (2, 0), (2, 1)),
                         ((0, 0), (0, 1), (2, 1)))


def suite_mc(state: State):
    results = []
    for name in state.corpus():
        C = state.coproperad(name)
        if not C.labels():
            continue
        if name not in ("cofree-w2", "cofree-w2d", "properadic-w2", "custom"):
            continue
        ctx, alpha, beta, f = state.pair(name)
        L = state.pair_algebra(ctx)

        def run_solved(L=L, x=alpha + beta + f):
            if not L.mc_residual(x).is_zero():
                _fail("solved triple is not Maurer-Cartan")
            return ("", {})

        def run_three_way(ctx=ctx, L=L, name=name):
            rng = state.rng("mc:%s" % name)
            for trial in range(3):
                a2 = fx.random_element(ctx, rng, tags=("A",), degree=0,
                                       terms=2)
                b2 = fx.random_element(ctx, rng, tags=("B",), degree=0,
                                       terms=2)
                f2 = fx.random_element(ctx, rng, tags=("m",), degree=0,
                                       terms=2)
                res = L.mc_residual(a2 + b2 + f2)
                if ctx.component(res, "A") != -gebra_residual(ctx, a2, "A"):
                    _fail("source component mismatch", trial=trial)
                if ctx.component(res, "B") != -gebra_residual(ctx, b2, "B"):
                    _fail("target component mismatch", trial=trial)
                if ctx.component(res, "m") != \
                        -infty_residual(ctx, f2, a2, b2):
                    _fail("morphism component mismatch", trial=trial)
            return ("3 random triples", {})

        def run_morphism_algebra(ctx=ctx, C=C, f=f, alpha=alpha, beta=beta,
                                 name=name):
            H = build_morphism_algebra(C, ctx.A, ctx.B, alpha, beta, ctx=ctx)
            if not H.mc_residual(f).is_zero():
                _fail("solved morphism not Maurer-Cartan in the morphism "
                      "algebra")
            rng = state.rng("mc-h:%s" % name)
            g = fx.random_element(ctx, rng, tags=("m",), degree=0, terms=2)
            if H.mc_residual(g) != -infty_residual(ctx, g, alpha, beta):
                _fail("morphism-algebra residual mismatch")
            return ("", {})

        _check(results, "mc", "%s:solved-triple" % name, run_solved)
        _check(results, "mc", "%s:three-way" % name, run_three_way)
        _check(results, "mc", "%s:morphism-algebra" % name,
               run_morphism_algebra)
    return results


def suite_twist(state: State):
    results = []
    name = "custom" if state.config.coproperad else "cofree-w2"
    C = state.coproperad(name)
    if not C.labels():
        return results
    ctx, alpha, beta, f = state.pair(name)
    L = state.pair_algebra(ctx)
    a = alpha + beta + f

    def run_translation():
        rng = state.rng("twist")
        for trial in range(3):
            x = fx.random_element(ctx, rng, degree=0, terms=2)
            b = fx.random_element(ctx, rng, degree=0, terms=2)
            Lt = twist_raw(L, x)
            if Lt.mc_residual(b) != L.mc_residual(x + b):
                _fail("twisted residual differs from translated residual",
                      trial=trial)
        return ("", {})

    def run_correspondence():
        Lt = L.twist(a)
        if not Lt.curvature.is_zero():
            _fail("twist at a Maurer-Cartan element is curved")
        rng = state.rng("twist-mc")
        for trial in range(4):
            b = fx.random_element(ctx, rng, degree=0, terms=2)
            if Lt.is_mc(b) != L.is_mc(a + b):
                _fail("twisted Maurer-Cartan set mismatch", trial=trial)
        return ("", {})

    def run_twisted_jacobi():
        Lt = L.twist(a)
        rng = state.rng("twist-jacobi")
        by_tag = _spanning_by_tag(ctx)
        for n in range(1, min(3, state.config.bracket_arity) + 1):
            for trial in range(3):
                tags = [rng.choice(sorted(by_tag)) for _ in range(n)]
                args = [by_tag[t][rng.randrange(len(by_tag[t]))]
                        for t in tags]
                if not Lt.jacobi_residual(n, args).is_zero():
                    _fail("twisted Jacobi fails", arity=n)
        return ("", {})

    _check(results, "twist", "%s:translation" % name, run_translation)
    _check(results, "twist", "%s:mc-correspondence" % name,
           run_correspondence)
    _check(results, "twist", "%s:twisted-jacobi" % name, run_twisted_jacobi)
    return results


def _enrichment_setting(state: State, name):
    C = state.coproperad(name)
    S = GebraSetting(C, {
        "a": state.complex_of_dim(state.config.dimA, "a"),
        "b": state.complex_of_dim(state.config.dimB, "b"),
        "c": state.complex_of_dim(state.config.dimB, "c"),
    }, state.config.bracket_arity)
    rng = state.rng("enrichment:%s" % name)
    ctx_ab = S.ctx("a", "b")
    ctx_bc = S.ctx("b", "c")
    alpha = fx.solve_gebra(ctx_ab, "A", rng)
    beta = fx.solve_gebra(ctx_ab, "B", rng)
    gamma = fx.solve_gebra(ctx_bc, "B", rng)
    f0 = chain_map_element(ctx_ab, {l: FormalSum.lift(l2) for l, l2 in zip(
        ctx_ab.A.space.labels, ctx_ab.B.space.labels)})
    f = fx.solve_morphism(ctx_ab, alpha, beta, f0, rng, kernel_boost=True)
    g0 = chain_map_element(ctx_bc, {l: FormalSum.lift(l2) for l, l2 in zip(
        ctx_bc.A.space.labels, ctx_bc.B.space.labels)})
    g = fx.solve_morphism(ctx_bc, beta, gamma, g0, rng, kernel_boost=True)
    F = GebraInftyMorphism(S, "a", "b", alpha, beta, f)
    G = GebraInftyMorphism(S, "b", "c", beta, gamma, g)
    return S, F, G


def suite_enrichment(state: State):
    results = []
    name = "custom" if state.config.coproperad else "cofree-w2"
    if not state.coproperad(name).labels():
        return results
    S, F, G = _enrichment_setting(state, name)
    ctx_ab, ctx_bc = S.ctx("a", "b"), S.ctx("b", "c")
    Phi = composition_enrichment(S, "a", "b", "c", F.alpha, F.beta, G.beta)

    def run_l1():
        rng = state.rng("enrich-l1")
        for n in range(0, state.config.bracket_arity + 1):
            for trial in range(2):
                args = []
                for _ in range(n):
                    side = rng.choice(["L", "R"])
                    ctx = ctx_bc if side == "L" else ctx_ab
                    args.append(tag_vec(side, fx.random_element(
                        ctx, rng, tags=("m",),
                        degree=rng.choice([-1, 0, 1]), terms=1)))
                if not Phi.residual(n, args).is_zero():
                    _fail("composition enrichment residual nonzero", arity=n)
        return ("", {})

    def run_mc_image():
        GF = compose_gebra(G, F)
        img = Phi.mc_image(tag_vec("L", G.f) + tag_vec("R", F.f))
        if img != GF.f:
            _fail("Maurer-Cartan image differs from the composite")
        if not GF.residual().is_zero():
            _fail("composite is not a morphism")
        return ("", {})

    def run_units():
        alpha = F.alpha
        ctx_aa = S.ctx("a", "a")
        H_ab = S.morphism_algebra("a", "b", F.alpha, F.beta)
        H_aa = S.morphism_algebra("a", "a", alpha, alpha)
        Ups = unit_enrichment(S, "a", alpha, H_aa=H_aa)
        if Ups.mc_image(FormalSum()) != identity_morphism_element(ctx_aa):
            _fail("unit image is not the identity")
        Phi2 = composition_enrichment(S, "a", "a", "b", alpha, alpha,
                                      F.beta, H_bc=H_ab, H_ab=H_aa,
                                      H_ac=H_ab)
        pairm = direct_sum_morphisms(identity_curved(H_ab), Ups,
                                     direct_sum(H_ab, zero_algebra()),
                                     Phi2.source)
        comp = curved_compose(Phi2, pairm)
        if not comp.comp0.is_zero():
            _fail("unit law: constant term nonzero")
        rng = state.rng("enrich-unit")
        for trial in range(3):
            g = fx.random_element(ctx_ab, rng, tags=("m",),
                                  degree=rng.choice([-1, 0, 1]), terms=1)
            if comp.comp(1, [tag_vec("L", g)]) != g:
                _fail("unit law: arity-one component is not the identity")
        for n in (2, 3):
            args = [tag_vec("L", fx.random_element(ctx_ab, rng, tags=("m",),
                                                   degree=0, terms=1))
                    for _ in range(n)]
            if not comp.comp(n, args).is_zero():
                _fail("unit law: higher component nonzero", arity=n)
        return ("", {})

    def run_associativity():
        alpha = F.alpha
        H = S.morphism_algebra("a", "a", alpha, alpha)
        Phi3 = composition_enrichment(S, "a", "a", "a", alpha, alpha, alpha,
                                      H_bc=H, H_ab=H, H_ac=H)
        DD = direct_sum(Phi3.source, H)
        DD2 = direct_sum(H, Phi3.source)
        lhs = curved_compose(Phi3, direct_sum_morphisms(
            Phi3, identity_curved(H), DD, Phi3.source))
        rhs = curved_compose(Phi3, direct_sum_morphisms(
            identity_curved(H), Phi3, DD2, Phi3.source))
        ctx = S.ctx("a", "a")
        rng = state.rng("enrich-assoc")
        for n in (2, 3):
            for trial in range(2):
                triple = [fx.random_element(ctx, rng, tags=("m",), degree=0,
                                            terms=1) for _ in range(n)]
                sides = [rng.choice(["h", "g", "f"]) for _ in range(n)]
                largs, rargs = [], []
                for x, s in zip(triple, sides):
                    if s == "h":
                        largs.append(tag_vec("L", tag_vec("L", x)))
                        rargs.append(tag_vec("L", x))
                    elif s == "g":
                        largs.append(tag_vec("L", tag_vec("R", x)))
                        rargs.append(tag_vec("R", tag_vec("L", x)))
                    else:
                        largs.append(tag_vec("R", x))
                        rargs.append(tag_vec("R", tag_vec("R", x)))
                if lhs.comp(n, largs) != rhs.comp(n, rargs):
                    _fail("associativity square fails", arity=n)
        return ("", {})

    def run_not_continuous():
        alpha = F.alpha
        ctx_aa = S.ctx("a", "a")
        Phi3 = composition_enrichment(S, "a", "a", "a", alpha, alpha, alpha)
        ida = identity_morphism_element(ctx_aa)
        x = Phi3.comp(2, [tag_vec("L", ida), tag_vec("R", ida)])
        if x.is_zero():
            _fail("negative control vacuous: the pairing of identities "
                  "vanishes")
        if ctx_aa.level(x) != 1:
            _fail("pairing of identities does not sit in filtration one",
                  level=ctx_aa.level(x))
        bad = Phi3.continuity_counterexample(
            [[tag_vec("L", ida), tag_vec("R", ida)]])
        if bad is None:
            _fail("continuity audit unexpectedly passes on the identity "
                  "pairing")
        return ("continuity fails on (id, id) as predicted", {})

    _check(results, "enrichment", "%s:residual" % name, run_l1)
    _check(results, "enrichment", "%s:mc-image-is-composition" % name,
           run_mc_image)
    _check(results, "enrichment", "%s:unit-laws" % name, run_units)
    _check(results, "enrichment", "%s:associativity" % name,
           run_associativity)
    _check(results, "enrichment", "%s:not-continuous-control" % name,
           run_not_continuous)
    return results


def suite_pullpush(state: State):
    results = []
    name = "custom" if state.config.coproperad else "cofree-w2"
    if not state.coproperad(name).labels():
        return results
    S, F, G = _enrichment_setting(state, name)
    ctx_bc = S.ctx("b", "c")
    pb = pullback(S, "a", "b", "c", F.alpha, F.beta, G.beta, F.f)

    def run_uncurved():
        if not pb.comp0.is_zero():
            _fail("pullback morphism is curved")
        return ("", {})

    def run_residual():
        rng = state.rng("pullpush-res")
        for n in range(0, state.config.bracket_arity + 1):
            args = [fx.random_element(ctx_bc, rng, tags=("m",),
                                      degree=rng.choice([-1, 0, 1]), terms=1)
                    for _ in range(n)]
            if not pb.residual(n, args).is_zero():
                _fail("pullback residual nonzero", arity=n)
        return ("", {})

    def run_continuity():
        rng = state.rng("pullpush-cont")
        tuples = []
        for n in (1, 2, 3):
            for trial in range(3):
                tuples.append([fx.random_element(ctx_bc, rng, tags=("m",),
                                                 degree=0, terms=1)
                               for _ in range(n)])
        if pb.continuity_counterexample(tuples) is not None:
            _fail("pullback fails the continuity audit")
        return ("", {})

    def run_mc_image():
        if pb.mc_image(G.f) != compose_gebra(G, F).f:
            _fail("pullback image differs from precomposition")
        return ("", {})

    def run_pushout():
        ctx_ca = S.ctx("c", "a")
        rng = state.rng("pushout")
        delta = fx.solve_gebra(ctx_ca, "A", rng)
        h0 = chain_map_element(ctx_ca, {l: FormalSum.lift(l2)
                                        for l, l2 in zip(
            ctx_ca.A.space.labels, ctx_ca.B.space.labels)})
        h = fx.solve_morphism(ctx_ca, delta, F.alpha, h0, rng,
                              kernel_boost=True)
        H = GebraInftyMorphism(S, "c", "a", delta, F.alpha, h)
        po = pushout(S, "c", "a", "b", delta, F.alpha, F.beta, F.f)
        if not po.comp0.is_zero():
            _fail("pushout morphism is curved")
        for n in range(0, state.config.bracket_arity + 1):
            args = [fx.random_element(ctx_ca, rng, tags=("m",),
                                      degree=rng.choice([-1, 0, 1]), terms=1)
                    for _ in range(n)]
            if not po.residual(n, args).is_zero():
                _fail("pushout residual nonzero", arity=n)
        if po.mc_image(h) != compose_gebra(F, H).f:
            _fail("pushout image differs from postcomposition")
        return ("", {})

    def run_graded():
        C = S.C
        f0 = F.first_component()
        pre = {l: f0.map(l) for l in f0.source.space.labels}
        a_labels = list(f0.source.space.labels)
        from itertools import product as iproduct
        for g in [v for v in ctx_bc.spanning(tags=("m",))
                  if all(k[1] != ID for k in v)][:8]:
            lvl = min(C.coradical_level_ext(k[1]) for k in g)
            for c in list(C.labels()) + [ID]:
                if C.coradical_level_ext(c) > lvl:
                    continue
                val = ctx_bc.value_at(pb.comp(1, [g]), "m", c)
                expected = FormalSum()
                for (win, wout), coeff in ctx_bc.value_at(g, "m", c).items():
                    for word in iproduct(a_labels, repeat=len(win)):
                        cc = coeff
                        for a_lbl, b_lbl in zip(word, win):
                            cc *= pre[a_lbl].get(b_lbl, 0)
                        if cc:
                            expected.add_term((word, wout), cc)
                if val != expected:
                    _fail("associated graded differs from first-component "
                          "pullback", element=c)
        return ("", {})

    _check(results, "pullpush", "%s:uncurved" % name, run_uncurved)
    _check(results, "pullpush", "%s:residual" % name, run_residual)
    _check(results, "pullpush", "%s:continuity" % name, run_continuity)
    _check(results, "pullpush", "%s:mc-image" % name, run_mc_image)
    _check(results, "pullpush", "%s:pushout" % name, run_pushout)
    _check(results, "pullpush", "%s:graded-comparison" % name, run_graded)
    return results


def suite_integration(state: State):
    results = []

    def run_forms():
        O1 = sullivan(1, state.config.poly_degree)
        for k in range(1, state.config.poly_degree + 1):
            dk = O1.diff(((k,), ()))
            if dk != FormalSum.lift(((k - 1,), (1,)), Fraction(k)):
                _fail("one-simplex calculus differs", power=k)
        O2 = sullivan(2, 3)
        for key in O2.basis():
            dd = FormalSum()
            for k2, c in O2.diff(key).items():
                for k3, c3 in O2.diff(k2).items():
                    dd.add_term(k3, c * c3)
            if not dd.is_zero():
                _fail("two-simplex differential does not square to zero",
                      key=key)
        for i in (0, 1, 2):
            tgt, pull = face_pullback(O2, i)
            for key in O2.basis():
                lhs = FormalSum()
                for k, c in O2.diff(key).items():
                    lhs = lhs + pull(k).scaled(c)
                rhs = FormalSum()
                for k, c in pull(key).items():
                    rhs = rhs + tgt.diff(k).scaled(c)
                if lhs != rhs:
                    _fail("face pullback is not a chain map", face=i)
        return ("", {})

    _check(results, "integration", "forms-axioms", run_forms)

    name = "custom" if state.config.coproperad else "cofree-w2"
    if not state.coproperad(name).labels():
        return results
    ctx, alpha, beta, f = state.pair(name)
    H = build_morphism_algebra(ctx.C, ctx.A, ctx.B, alpha, beta, ctx=ctx)
    lvl = lambda bk: ctx.level(FormalSum.lift(bk))

    def run_mc0():
        O0 = sullivan(0, 2)
        x = include_constant(f, O0)
        T = tensor_forms(H, O0, ctx.key_degree, lvl)
        if not T.mc_residual(x).is_zero():
            _fail("constant zero-simplex is not Maurer-Cartan")
        if evaluate_vertex(x, 0, O0) != f:
            _fail("vertex evaluation of a constant differs")
        return ("", {})

    def run_homotopy():
        rng = state.rng("homotopy")
        forms, Hsimp, g = fx.solve_homotopy(ctx, alpha, beta, f,
                                            cap=state.config.poly_degree,
                                            rng=rng)
        if g == f:
            _fail("endpoints coincide")
        if not is_homotopy(H, forms, ctx.key_degree, lvl, Hsimp, f, g):
            _fail("certificate rejected")
        for v in (0, 1):
            if not H.mc_residual(evaluate_vertex(Hsimp, v, forms)).is_zero():
                _fail("vertex image is not Maurer-Cartan", vertex=v)
        return ("distinct endpoints certified", {})

    def run_transfer():
        f0 = FormalSum({k: v for k, v in f.items() if k[1] == ID})
        Lbar, proj_B, ctx2 = transfer_subalgebra(ctx.C, ctx.A, ctx.B, f0)
        rng = state.rng("transfer")
        span = Lbar.spanning()
        Lfull = LInfinity("p", ctx2.ell, ctx2.level, ctx2.degree,
                          ctx2.n_hard)
        Lt = twist_raw(Lfull, f0)
        for n in (1, 2):
            for trial in range(4):
                args = [span[rng.randrange(len(span))] for _ in range(n)]
                full = Lt.ell(n, args)
                if any(k[0] == "m" and k[1] == ID for k in full):
                    _fail("twisted bracket leaves the subcarrier", arity=n)
                if Lbar.ell(n, args) != full:
                    _fail("subalgebra bracket differs", arity=n)
        side = suspended_side_algebra(ctx2, "B")
        for n in (1, 2, 3):
            for trial in range(4):
                args = [span[rng.randrange(len(span))] for _ in range(n)]
                lhs = ctx2.component(Lbar.ell(n, args), "B")
                rhs = side.ell(n, [ctx2.component(a, "B") for a in args])
                if lhs != rhs:
                    _fail("projection is not strict", arity=n)
        G = FormalSum({k: v for k, v in f.items() if k[1] != ID})
        if not Lbar.mc_residual(alpha + beta + G).is_zero():
            _fail("untwisted triple is not Maurer-Cartan in the subalgebra")
        return ("", {})

    _check(results, "integration", "%s:mc0" % name, run_mc0)
    _check(results, "integration", "%s:homotopy-certificate" % name,
           run_homotopy)
    _check(results, "integration", "%s:transfer-subalgebra" % name,
           run_transfer)
    return results


def suite_cooperad(state: State):
    results = []
    name = "custom" if state.config.coproperad else "assoc"
    C = state.coproperad(name)
    if any(m != 1 for (m, n) in C.bimod.components):
        return [CheckResult("cooperad", "%s:specialization" % name, "skip",
                            "not concentrated in arities (1,n)")]

    def run_stasheff():
        A = state.complex_of_dim(state.config.dimA, "a")
        ctx = ConvContext(C, A, A, state.config.bracket_arity)
        rng = state.rng("stasheff")
        a = fx.random_element(ctx, rng, tags=("A",), degree=0, terms=4)
        res = gebra_residual(ctx, a, "A")
        arities = sorted(n for (m, n) in C.bimod.components)
        mu = {n: "mu%d[%s]" % (n, "".join(str(i) for i in range(n)))
              for n in arities if "mu%d[%s]" % (
                  n, "".join(str(i) for i in range(n))) in set(C.labels())}
        if not mu:
            _fail("no identity-shaped generators found")
        m = {n: ctx.value_at(a, "A", mu[n]) for n in mu}

        def dval(n):
            dm = ctx.hom_diff(FormalSum(
                {("A", mu[n], e): v for e, v in m[n].items()}))
            return ctx.value_at(dm, "A", mu[n])

        def comp(outer, inner, slot):
            out = FormalSum()
            deg_inner = None
            for (wi, wo), ci in inner.items():
                deg_inner = sum(A.space.degree(l) for l in wo) - \
                    sum(A.space.degree(l) for l in wi)
                break
            for (win_o, wout_o), co in outer.items():
                for (win_i, wout_i), ci in inner.items():
                    if wout_i[0] != win_o[slot]:
                        continue
                    before = sum(A.space.degree(l) for l in win_o[:slot])
                    sign = -1 if (deg_inner % 2 and before % 2) else 1
                    word = win_o[:slot] + win_i + win_o[slot + 1:]
                    out.add_term((word, wout_o), sign * co * ci)
            return out

        if 2 in mu:
            if ctx.value_at(res, "A", mu[2]) != dval(2):
                _fail("binary relation differs")
        if 3 in mu and 2 in mu:
            r3 = dval(3) - comp(m[2], m[2], 0) + comp(m[2], m[2], 1)
            if ctx.value_at(res, "A", mu[3]) != r3:
                _fail("ternary relation differs from the hand expansion")
        if 4 in mu and 3 in mu and 2 in mu:
            r4 = dval(4) - comp(m[2], m[3], 0) - comp(m[2], m[3], 1) \
                + comp(m[3], m[2], 0) - comp(m[3], m[2], 1) \
                + comp(m[3], m[2], 2)
            if ctx.value_at(res, "A", mu[4]) != r4:
                _fail("arity-four relation differs from the hand expansion")
        return ("relations match the direct expansion", {})

    _check(results, "cooperad", "%s:stasheff" % name, run_stasheff)
    return results


SUITES = {
    "d2": suite_d2,
    "maps": suite_maps,
    "jacobi": suite_jacobi,
    "filtration": suite_filtration,
    "mc": suite_mc,
    "twist": suite_twist,
    "enrichment": suite_enrichment,
    "pullpush": suite_pullpush,
    "integration": suite_integration,
    "cooperad": suite_cooperad,
}


def run(config: Config) -> Report:
    state = State(config)
    checks = []
    for name in config.suites:
        checks.extend(SUITES[name](state))
    return Report(config.echo(), checks)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="properad",
        description="run exact verification suites for the properadic "
                    "homotopical calculus")
    p.add_argument("--suite", action="append", default=None,
                   help="suite name (repeatable); default: all of %s"
                        % ",".join(SUITE_NAMES))
    p.add_argument("--coproperad", default=None, metavar="FILE",
                   help="run on a single coproperad file instead of the "
                        "shipped corpus")
    p.add_argument("--dimA", type=int, default=2)
    p.add_argument("--dimB", type=int, default=2)
    p.add_argument("--max-weight", type=int, default=2)
    p.add_argument("--max-arity", type=int, nargs=2, default=(3, 3),
                   metavar=("M", "N"))
    p.add_argument("--bracket-arity", type=int, default=4)
    p.add_argument("--poly-degree", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--corrupt-sign", action="store_true",
                   help="deliberately corrupt the sign memo (negative "
                        "control; checks must fail)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    suites = args.suite or SUITE_NAMES
    for s in suites:
        if s not in SUITES:
            print("unknown suite %r (known: %s)" % (s, ", ".join(SUITE_NAMES)),
                  file=sys.stderr)
            return 2
    config = Config(suites=suites, coproperad=args.coproperad,
                    dimA=args.dimA, dimB=args.dimB,
                    max_weight=args.max_weight,
                    max_arity=tuple(args.max_arity),
                    bracket_arity=args.bracket_arity,
                    poly_degree=args.poly_degree, seed=args.seed,
                    fmt=args.format, corrupt_sign=args.corrupt_sign)
    try:
        report = run(config)
    except (ValueError, OSError, DegreeOverflow) as exc:
        print("configuration or audit error: %s" % exc, file=sys.stderr)
        return 2
    if config.fmt == "json":
        print(report.to_json())
    else:
        print(report.to_text())
    return 1 if report.failed() else 0


if __name__ == "__main__":
    raise SystemExit(main())
