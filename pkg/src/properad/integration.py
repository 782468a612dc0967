"""Polynomial de Rham forms on low simplices and tensoring homotopy Lie
algebras with them.

Forms on the n-simplex use the reduced coordinates t_1..t_n (the zeroth
barycentric coordinate is eliminated); a basis key is ``(exponents, dts)``
for the monomial t^exponents wedge dt_{i} over the sorted index tuple
``dts``.  Differentials have homological degree -1, so each dt factor sits
in degree -1.  The polynomial degree is capped; any product exceeding the
cap aborts with :class:`DegreeOverflow` rather than truncating silently.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product as iproduct

from .convolution import LInfinity, factorial
from .exactlin import ONE, ZERO, FormalSum

INF = math.inf


class DegreeOverflow(ArithmeticError):
    """A product left the configured polynomial degree cap."""


class PolyForms:
    """Polynomial differential forms on the n-simplex, degree-capped."""

    def __init__(self, n: int, cap: int):
        if n not in (0, 1, 2):
            raise ValueError("supported simplicial degrees: 0, 1, 2")
        if cap < 1:
            raise ValueError("polynomial degree cap must be at least 1")
        self.n = n
        self.cap = cap

    def one(self):
        return ((0,) * self.n, ())

    def basis(self):
        out = []
        exps = [e for e in iproduct(range(self.cap + 1), repeat=self.n)
                if sum(e) <= self.cap]
        dt_sets = []
        for r in range(self.n + 1):
            from itertools import combinations
            dt_sets.extend(combinations(range(1, self.n + 1), r))
        for e in exps:
            for dts in dt_sets:
                out.append((tuple(e), tuple(dts)))
        return sorted(out)

    def degree(self, key) -> int:
        return -len(key[1])

    def product(self, k1, k2) -> FormalSum:
        e1, d1 = k1
        e2, d2 = k2
        if set(d1) & set(d2):
            return FormalSum()
        e = tuple(a + b for a, b in zip(e1, e2))
        if sum(e) > self.cap:
            raise DegreeOverflow(
                "polynomial degree %d exceeds the cap %d" % (sum(e), self.cap))
        merged = list(d1) + list(d2)
        sign = 1
        # sort the odd dt symbols, counting transpositions
        arr = merged[:]
        for i in range(len(arr)):
            for j in range(len(arr) - 1 - i):
                if arr[j] > arr[j + 1]:
                    arr[j], arr[j + 1] = arr[j + 1], arr[j]
                    sign = -sign
        return FormalSum.lift((e, tuple(arr)), sign)

    def multiply(self, x: FormalSum, y: FormalSum) -> FormalSum:
        out = FormalSum()
        for k1, c1 in x.items():
            for k2, c2 in y.items():
                for k, c in self.product(k1, k2).items():
                    out.add_term(k, c1 * c2 * c)
        return out

    def diff(self, key) -> FormalSum:
        e, dts = key
        out = FormalSum()
        for i in range(1, self.n + 1):
            if e[i - 1] == 0 or i in dts:
                continue
            e2 = list(e)
            e2[i - 1] -= 1
            before = sum(1 for j in dts if j < i)
            merged = tuple(sorted(dts + (i,)))
            out.add_term((tuple(e2), merged),
                         Fraction(e[i - 1]) * ((-1) ** before))
        return out

    def vertex_value(self, key, vertex: int) -> Fraction:
        """Evaluation at a geometric vertex (a dg algebra map to the field)."""
        e, dts = key
        if dts:
            return ZERO
        if vertex == 0:
            return ONE if sum(e) == 0 else ZERO
        val = ONE
        for i in range(1, self.n + 1):
            t = ONE if i == vertex else ZERO
            if e[i - 1] and not t:
                return ZERO
        return ONE

    # -- simplicial structure -------------------------------------------------

    def pullback(self, phi, target: "PolyForms"):
        """Pullback of forms along the affine map of simplices induced by a
        monotone map phi: [target.n] -> [self.n] on vertices.

        Barycentric coordinates pull back by x_j -> sum over the fiber.
        Returns a function on basis keys valued in target combinations.
        """
        m = target.n
        # barycentric x_j (j = 0..n) as affine polynomials on the target
        def bary(j):
            const = ZERO
            lin = [ZERO] * m
            for i in range(m + 1):
                if phi(i) != j:
                    continue
                if i == 0:
                    const += ONE
                    for k in range(m):
                        lin[k] -= ONE
                else:
                    lin[i - 1] += ONE
            return const, lin

        t_images = []
        dt_images = []
        for j in range(1, self.n + 1):
            const, lin = bary(j)
            poly = FormalSum()
            if const:
                poly.add_term(target.one(), const)
            for k in range(m):
                if lin[k]:
                    e = [0] * m
                    e[k] = 1
                    poly.add_term((tuple(e), ()), lin[k])
            t_images.append(poly)
            dpoly = FormalSum()
            for k in range(m):
                if lin[k]:
                    dpoly.add_term(((0,) * m, (k + 1,)), lin[k])
            dt_images.append(dpoly)

        def apply(key) -> FormalSum:
            e, dts = key
            acc = FormalSum.lift(target.one())
            for j in range(1, self.n + 1):
                for _ in range(e[j - 1]):
                    acc = target.multiply(acc, t_images[j - 1])
            for j in dts:
                acc = target.multiply(acc, dt_images[j - 1])
            return acc

        return apply


def sullivan(n: int, cap: int) -> PolyForms:
    """Polynomial forms on the n-simplex, truncated at the given cap."""
    return PolyForms(n, cap)


def face_pullback(forms: PolyForms, i: int, cap=None):
    """Restriction to the i-th face (the pullback along the coface map
    skipping vertex i); a map from forms to forms one simplicial degree
    down."""
    target = PolyForms(forms.n - 1, cap or forms.cap)

    def phi(k):
        return k if k < i else k + 1

    return target, forms.pullback(phi, target)


def degeneracy_pullback(forms: PolyForms, i: int, cap=None):
    """Pullback along the codegeneracy collapsing vertices i, i+1; a map
    from forms to forms one simplicial degree up."""
    target = PolyForms(forms.n + 1, cap or forms.cap)

    def phi(k):
        return k if k <= i else k - 1

    return target, forms.pullback(phi, target)


# ---------------------------------------------------------------------------
# tensoring a homotopy Lie algebra with forms

def tensor_forms(L: LInfinity, forms: PolyForms, key_degree,
                 key_level) -> LInfinity:
    """Extension of the brackets over form coefficients, with Koszul signs
    from moving forms past carrier elements; the differential gains the
    form-side derivative, and the level is inherited from the base factor.
    """

    def split(x: FormalSum):
        """Group a tensored element by form key; returns {form: base_vec}."""
        groups = {}
        for (fk, bk), v in x.items():
            groups.setdefault(fk, FormalSum()).add_term(bk, v)
        return groups

    def fuse(fk, base: FormalSum) -> FormalSum:
        return FormalSum({(fk, bk): v for bk, v in base.items()})

    def degree(x: FormalSum):
        degs = {forms.degree(fk) + key_degree(bk) for (fk, bk) in x}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError("inhomogeneous element")
        return degs.pop()

    def level(x: FormalSum):
        if x.is_zero():
            return INF
        return min(key_level(bk) for (_, bk) in x)

    def base_degree_of(base: FormalSum):
        degs = {key_degree(bk) for bk in base}
        return degs.pop() if len(degs) == 1 else None

    def ell(n, args):
        out = FormalSum()
        groups = [split(a) for a in args]
        if n == 1:
            for fk, base in groups[0].items():
                for bk2, v in L.ell(1, [base]).items():
                    out.add_term((fk, bk2), v)
                bdeg = base_degree_of(base)
                sgn = -1 if (bdeg or 0) % 2 else 1
                for fk2, c in forms.diff(fk).items():
                    for bk, v in base.items():
                        out.add_term((fk2, bk), sgn * c * v)
            return out
        for combo in iproduct(*[list(g.items()) for g in groups]):
            fks = [fk for fk, _ in combo]
            bases = [b for _, b in combo]
            bdegs = [base_degree_of(b) or 0 for b in bases]
            sign = 1
            for i in range(n):
                if forms.degree(fks[i]) % 2 and sum(bdegs[i + 1:]) % 2:
                    sign = -sign
            inner = L.ell(n, bases)
            if inner.is_zero():
                continue
            form_prod = FormalSum.lift(forms.one())
            for fk in fks:
                form_prod = forms.multiply(form_prod, FormalSum.lift(fk))
                if form_prod.is_zero():
                    break
            if form_prod.is_zero():
                continue
            for fk, fc in form_prod.items():
                for bk, v in inner.items():
                    out.add_term((fk, bk), sign * fc * v)
        return out

    curv = FormalSum({(forms.one(), bk): v for bk, v in L.curvature.items()})
    return LInfinity("%s(x)forms%d" % (L.name, forms.n), ell, level, degree,
                     L.n_hard, curvature=curv)


def include_constant(x: FormalSum, forms: PolyForms) -> FormalSum:
    """Base element as a constant form-valued element."""
    return FormalSum({(forms.one(), bk): v for bk, v in x.items()})


def evaluate_vertex(x: FormalSum, vertex: int, forms: PolyForms) -> FormalSum:
    """Evaluate the form coefficients at a geometric vertex."""
    out = FormalSum()
    for (fk, bk), v in x.items():
        c = forms.vertex_value(fk, vertex)
        if c:
            out.add_term(bk, c * v)
    return out


def mc_n(L: LInfinity, forms: PolyForms, key_degree, key_level,
         x: FormalSum) -> FormalSum:
    """Maurer-Cartan residual in the form-valued extension."""
    T = tensor_forms(L, forms, key_degree, key_level)
    return T.mc_residual(x)


def is_homotopy(L: LInfinity, forms: PolyForms, key_degree, key_level,
                H: FormalSum, f: FormalSum, g: FormalSum) -> bool:
    """True when H is a one-simplex with endpoints f (vertex 0) and g
    (vertex 1)."""
    if forms.n != 1:
        raise ValueError("homotopies live over the one-simplex")
    if not mc_n(L, forms, key_degree, key_level, H).is_zero():
        return False
    return evaluate_vertex(H, 0, forms) == f and \
        evaluate_vertex(H, 1, forms) == g
