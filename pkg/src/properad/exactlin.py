"""Exact graded linear algebra over the rationals.

Graded spaces with named bases, sparse linear maps, Koszul signs, shuffles,
chain complexes and exact homology ranks.  Coefficients are always
fractions.Fraction; there is no floating point anywhere in the engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations

Q = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


class FormalSum(dict):
    """Finite linear combination ``{key: Fraction}`` with zero terms pruned.

    Keys are opaque hashable tokens.  Operators never mutate their inputs;
    ``add_term`` is the single in-place builder.
    """

    __slots__ = ()

    @classmethod
    def lift(cls, key, coeff=ONE) -> "FormalSum":
        c = Fraction(coeff)
        return cls({key: c}) if c else cls()

    def add_term(self, key, coeff) -> None:
        c = self.get(key, ZERO) + coeff
        if c:
            self[key] = c
        else:
            self.pop(key, None)

    def __add__(self, other: "FormalSum") -> "FormalSum":
        out = FormalSum(self)
        for k, v in other.items():
            out.add_term(k, v)
        return out

    def __sub__(self, other: "FormalSum") -> "FormalSum":
        out = FormalSum(self)
        for k, v in other.items():
            out.add_term(k, -v)
        return out

    def __neg__(self) -> "FormalSum":
        return FormalSum({k: -v for k, v in self.items()})

    def scaled(self, coeff) -> "FormalSum":
        c = Fraction(coeff)
        if not c:
            return FormalSum()
        return FormalSum({k: c * v for k, v in self.items()})

    def map_terms(self, fn) -> "FormalSum":
        """Apply ``fn(key, coeff) -> FormalSum`` to every term and sum."""
        out = FormalSum()
        for k, v in self.items():
            for k2, v2 in fn(k, v).items():
                out.add_term(k2, v2)
        return out

    def is_zero(self) -> bool:
        return not self


# ---------------------------------------------------------------------------
# permutations and shuffles (tuples of images, 0-indexed)

def identity_perm(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def compose_perms(s: tuple[int, ...], t: tuple[int, ...]) -> tuple[int, ...]:
    """(s after t): position i goes to s[t[i]]."""
    if len(s) != len(t):
        raise ValueError("permutation size mismatch")
    return tuple(s[t[i]] for i in range(len(t)))


def invert_perm(s: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(s)
    for i, j in enumerate(s):
        inv[j] = i
    return tuple(inv)


def permute_list(items, perm: tuple[int, ...]) -> list:
    """Move the item at position i to position perm[i]."""
    out = [None] * len(items)
    for i, j in enumerate(perm):
        out[j] = items[i]
    return out


def koszul_sign(perm: tuple[int, ...], degrees) -> int:
    """Sign of rearranging graded symbols by ``perm``.

    The symbol at position i (degree ``degrees[i]``) moves to position
    ``perm[i]``; each crossing of two odd symbols contributes -1.
    """
    if len(perm) != len(degrees):
        raise ValueError("permutation/degree length mismatch")
    if sorted(perm) != list(range(len(perm))):
        raise ValueError("not a permutation: %r" % (perm,))
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j] and degrees[i] % 2 and degrees[j] % 2:
                sign = -sign
    return sign


def sort_sign(positions, degrees) -> int:
    """Koszul sign of sorting symbols currently at ``positions`` into order."""
    order = sorted(range(len(positions)), key=lambda i: positions[i])
    perm = invert_perm(tuple(order))
    return koszul_sign(perm, degrees)


def shuffles(p: int, q: int) -> list[tuple[int, ...]]:
    """All (p,q)-shuffles of size p+q, lexicographic by image tuple.

    A shuffle is increasing on positions 0..p-1 and on positions p..p+q-1.
    """
    if p < 0 or q < 0:
        raise ValueError("block sizes must be nonnegative")
    n = p + q
    out = []
    for first in combinations(range(n), p):
        rest = [i for i in range(n) if i not in first]
        out.append(tuple(first) + tuple(rest))
    out.sort()
    return out


def subsets_with_sign(n: int, k: int, degrees):
    """Yield (subset, complement, sign) over k-subsets of range(n).

    ``sign`` is the Koszul sign of reordering symbols 0..n-1 into
    (subset, complement), both listed increasingly.  This enumerates the
    inverse (k, n-k)-shuffles acting on graded arguments.
    """
    for sub in combinations(range(n), k):
        comp = tuple(i for i in range(n) if i not in sub)
        target = {}
        for pos, i in enumerate(sub + comp):
            target[i] = pos
        perm = tuple(target[i] for i in range(n))
        yield sub, comp, koszul_sign(perm, degrees)


# ---------------------------------------------------------------------------
# graded spaces and linear maps

@dataclass(frozen=True)
class GradedSpace:
    """Finite graded space with an ordered basis of (label, degree) pairs."""

    basis: tuple[tuple[str, int], ...]

    def __post_init__(self):
        labels = [l for l, _ in self.basis]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate basis labels")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.basis)

    def degree(self, label: str) -> int:
        for l, d in self.basis:
            if l == label:
                return d
        raise KeyError(label)

    def degrees(self) -> dict[str, int]:
        return dict(self.basis)

    def dim(self) -> int:
        return len(self.basis)

    def labels_in_degree(self, d: int) -> list[str]:
        return [l for l, dl in self.basis if dl == d]

    def degree_of_sum(self, x: FormalSum) -> int | None:
        """Common degree of a homogeneous combination, None for 0."""
        degs = {self.degree(l) for l in x}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError("inhomogeneous combination: %r" % sorted(degs))
        return degs.pop()


@dataclass(frozen=True)
class LinMap:
    """Sparse degree-homogeneous linear map between graded spaces.

    ``entries`` associates source labels to formal target combinations;
    unlisted labels map to zero.
    """

    source: GradedSpace
    target: GradedSpace
    degree: int
    entries: tuple[tuple[str, tuple[tuple[str, Fraction], ...]], ...]

    @classmethod
    def build(cls, source, target, degree, table) -> "LinMap":
        """table: mapping source label -> FormalSum over target labels."""
        tdeg = target.degrees()
        sdeg = source.degrees()
        rows = []
        for lbl in source.labels:
            val = table.get(lbl)
            if not val:
                continue
            for t, c in val.items():
                if t not in tdeg:
                    raise ValueError("unknown target label %r" % t)
                if tdeg[t] != sdeg[lbl] + degree:
                    raise ValueError(
                        "entry %r -> %r violates degree %d" % (lbl, t, degree))
            rows.append((lbl, tuple(sorted(val.items()))))
        return cls(source, target, degree, tuple(rows))

    def table(self) -> dict[str, FormalSum]:
        return {l: FormalSum(dict(v)) for l, v in self.entries}

    def __call__(self, x) -> FormalSum:
        if isinstance(x, str):
            x = FormalSum.lift(x)
        tab = dict(self.entries)
        out = FormalSum()
        for lbl, c in x.items():
            for t, c2 in tab.get(lbl, ()):
                out.add_term(t, c * c2)
        return out

    def compose(self, other: "LinMap") -> "LinMap":
        """self after other."""
        if other.target is not self.source and other.target != self.source:
            raise ValueError("composition mismatch")
        table = {l: self(FormalSum(dict(v))) for l, v in other.entries}
        return LinMap.build(other.source, self.target,
                            self.degree + other.degree, table)

    def is_zero(self) -> bool:
        return all(not dict(v) for _, v in self.entries)

    def block_matrix(self, src_degree: int):
        """Matrix of the map on the degree-``src_degree`` block (rows=target)."""
        src = self.source.labels_in_degree(src_degree)
        tgt = self.target.labels_in_degree(src_degree + self.degree)
        tab = self.table()
        return [[tab.get(s, FormalSum()).get(t, ZERO) for s in src] for t in tgt]


def identity_map(space: GradedSpace) -> LinMap:
    return LinMap.build(space, space, 0,
                        {l: FormalSum.lift(l) for l in space.labels})


def zero_map(source: GradedSpace, target: GradedSpace, degree: int) -> LinMap:
    return LinMap.build(source, target, degree, {})


@dataclass(frozen=True)
class ChainComplex:
    """Graded space with a square-zero differential of degree -1."""

    space: GradedSpace
    differential: LinMap

    def __post_init__(self):
        d = self.differential
        if d.degree != -1:
            raise ValueError("differential must have degree -1")
        if d.source != self.space or d.target != self.space:
            raise ValueError("differential endpoints must be the space")
        for lbl in self.space.labels:
            if not d(d(FormalSum.lift(lbl))).is_zero():
                raise ValueError("d^2 != 0 on basis label %r" % lbl)

    @classmethod
    def build(cls, basis, dtable) -> "ChainComplex":
        space = GradedSpace(tuple(basis))
        return cls(space, LinMap.build(space, space, -1, dtable))

    def degrees_present(self) -> list[int]:
        return sorted({d for _, d in self.space.basis})


# ---------------------------------------------------------------------------
# exact rank computation

def _clear_denominators(rows):
    out = []
    for row in rows:
        row = [Fraction(x) for x in row]
        lcm = 1
        for x in row:
            if x:
                lcm = lcm * x.denominator // _gcd(lcm, x.denominator)
        out.append([int(x * lcm) for x in row])
    return out


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a) or 1


def rank(matrix) -> int:
    """Exact rank by fraction-free Bareiss elimination."""
    rows = _clear_denominators(matrix)
    if not rows or not rows[0]:
        return 0
    m, n = len(rows), len(rows[0])
    prev = 1
    r = 0
    col = 0
    while r < m and col < n:
        piv = next((i for i in range(r, m) if rows[i][col]), None)
        if piv is None:
            col += 1
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, m):
            for j in range(col + 1, n):
                rows[i][j] = (rows[r][col] * rows[i][j]
                              - rows[i][col] * rows[r][j]) // prev
            rows[i][col] = 0
        prev = rows[r][col]
        r += 1
        col += 1
    return r


def rank_naive(matrix) -> int:
    """Independent oracle: plain Gaussian elimination over Fraction."""
    rows = [[Fraction(x) for x in row] for row in matrix]
    if not rows or not rows[0]:
        return 0
    m, n = len(rows), len(rows[0])
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = ONE / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == m:
            break
    return r


def solve_linear(matrix, rhs) -> list[Fraction] | None:
    """One exact solution of A x = b, or None if inconsistent.

    Free variables are set to zero.
    """
    rows = [[Fraction(x) for x in row] + [Fraction(b)]
            for row, b in zip(matrix, rhs)]
    n = len(matrix[0]) if matrix else 0
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = ONE / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    for i in range(r, len(rows)):
        if rows[i][n]:
            return None
    x = [ZERO] * n
    for i, col in enumerate(pivots):
        x[col] = rows[i][n]
    return x


class ChainMapView:
    """Degree-0 chain map between complexes, wrapping a LinMap table."""

    def __init__(self, source: ChainComplex, target: ChainComplex, table):
        self.source = source
        self.target = target
        self.map = LinMap.build(source.space, target.space, 0, table)

    def is_chain_map(self) -> bool:
        for l in self.source.space.labels:
            lhs = self.target.differential(self.map(l))
            rhs = self.map(self.source.differential(l))
            if lhs != rhs:
                return False
        return True

    def rank(self) -> int:
        rows = []
        tab = self.map.table()
        tlabels = self.target.space.labels
        for t in tlabels:
            rows.append([tab.get(s, FormalSum()).get(t, ZERO)
                         for s in self.source.space.labels])
        return rank(rows)

    def cone(self) -> ChainComplex:
        """Mapping cone; acyclic exactly when the map is a
        quasi-isomorphism."""
        basis = [("t:" + l, d) for l, d in self.target.space.basis]
        basis += [("s:" + l, d + 1) for l, d in self.source.space.basis]
        table = {}
        tab = self.map.table()
        for l, _ in self.target.space.basis:
            img = self.target.differential(l)
            if img:
                table["t:" + l] = FormalSum(
                    {"t:" + k: v for k, v in img.items()})
        for l, _ in self.source.space.basis:
            val = FormalSum()
            for k, v in self.source.differential(l).items():
                val.add_term("s:" + k, -v)
            for k, v in tab.get(l, FormalSum()).items():
                val.add_term("t:" + k, v)
            if val:
                table["s:" + l] = val
        return ChainComplex.build(tuple(basis), table)

    def is_quasi_iso(self) -> bool:
        return all(r == 0 for r in homology_ranks(self.cone()).values())


def nullspace(matrix) -> list[list[Fraction]]:
    """Basis of the kernel of A (columns = unknowns), exact."""
    if not matrix or not matrix[0]:
        n = len(matrix[0]) if matrix else 0
        return [[ONE if i == j else ZERO for j in range(n)]
                for i in range(n)]
    rows = [[Fraction(x) for x in row] for row in matrix]
    m, n = len(rows), len(rows[0])
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = ONE / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * n
        v[fc] = ONE
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fc]
        basis.append(v)
    return basis


def homology_ranks(cc: ChainComplex) -> dict[int, int]:
    """Rank of homology in every degree carrying basis elements."""
    d = cc.differential
    out = {}
    degs = cc.degrees_present()
    for n in degs:
        dim_n = len(cc.space.labels_in_degree(n))
        rk_out = rank(d.block_matrix(n))
        rk_in = rank(d.block_matrix(n + 1))
        out[n] = dim_n - rk_out - rk_in
    return out
