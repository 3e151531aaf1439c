"""Triangle-free regular graph families with small nontrivial eigenvalues."""

from __future__ import annotations

import itertools

from .graph import Graph

__all__ = [
    "petersen_graph",
    "hoffman_singleton_graph",
    "projective_incidence_graph",
    "cayley_graph",
    "prime_power",
    "GF",
]


def petersen_graph() -> Graph:
    """Kneser graph K(5, 2): 2-subsets of a 5-set, adjacent when disjoint."""
    pairs = list(itertools.combinations(range(5), 2))
    edges = [
        (i, j)
        for i, j in itertools.combinations(range(10), 2)
        if not set(pairs[i]) & set(pairs[j])
    ]
    return Graph(10, edges)


def hoffman_singleton_graph() -> Graph:
    """Robertson's pentagon/pentagram construction (50 vertices, 7-regular)."""
    def pent(h, j):
        return 5 * h + j

    def gram(i, j):
        return 25 + 5 * i + j

    edges = []
    for h in range(5):
        for j in range(5):
            edges.append((pent(h, j), pent(h, (j + 1) % 5)))
            edges.append((gram(h, j), gram(h, (j + 2) % 5)))
    for h in range(5):
        for j in range(5):
            for i in range(5):
                edges.append((pent(h, j), gram(i, (h * i + j) % 5)))
    return Graph(50, edges)


def prime_power(q: int) -> tuple[int, int] | None:
    """Return ``(p, k)`` with ``q == p**k`` for prime ``p``, else ``None``."""
    if q < 2:
        return None
    p = next(f for f in range(2, q + 1) if q % f == 0)
    k, r = 0, q
    while r % p == 0:
        r //= p
        k += 1
    return (p, k) if r == 1 else None


class GF:
    """Small finite field GF(p^k), elements encoded as base-p digit integers."""

    def __init__(self, q: int):
        pk = prime_power(q)
        if pk is None:
            raise ValueError(f"{q} is not a prime power")
        self.q = q
        self.p, self.k = pk
        self.modulus = self._irreducible() if self.k > 1 else None
        self._mul = [[self._slow_mul(a, b) for b in range(q)] for a in range(q)]

    def _digits(self, a):
        out = []
        for _ in range(self.k):
            out.append(a % self.p)
            a //= self.p
        return out

    def _from_digits(self, ds):
        v = 0
        for dgt in reversed(ds):
            v = v * self.p + dgt % self.p
        return v

    def add(self, a: int, b: int) -> int:
        return self._from_digits([x + y for x, y in zip(self._digits(a), self._digits(b))])

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def _poly_mul_mod(self, x, y, mod):
        prod = [0] * (len(x) + len(y) - 1)
        for i, xi in enumerate(x):
            for j, yj in enumerate(y):
                prod[i + j] = (prod[i + j] + xi * yj) % self.p
        deg = len(mod) - 1
        for i in range(len(prod) - 1, deg - 1, -1):
            coef = prod[i]
            if coef:
                for j in range(deg + 1):
                    prod[i - deg + j] = (prod[i - deg + j] - coef * mod[j]) % self.p
        return (prod + [0] * deg)[:deg]

    def _irreducible(self):
        p, k = self.p, self.k
        for tail in itertools.product(range(p), repeat=k):
            mod = list(tail) + [1]
            if mod[0] == 0:
                continue
            # monic poly of degree k is irreducible iff it has no factor of degree <= k//2
            reducible = False
            for deg in range(1, k // 2 + 1):
                for ftail in itertools.product(range(p), repeat=deg):
                    f = list(ftail) + [1]
                    if self._poly_divides(f, mod):
                        reducible = True
                        break
                if reducible:
                    break
            if not reducible:
                return mod
        raise RuntimeError("no irreducible polynomial found")

    def _poly_divides(self, f, g):
        r = list(g)
        df = len(f) - 1
        for i in range(len(r) - 1, df - 1, -1):
            coef = r[i]
            if coef:
                for j in range(df + 1):
                    r[i - df + j] = (r[i - df + j] - coef * f[j]) % self.p
        return not any(r[:df])

    def _slow_mul(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        return self._from_digits(self._poly_mul_mod(self._digits(a), self._digits(b), self.modulus))


def projective_incidence_graph(q: int) -> Graph:
    """Point-line incidence graph of PG(2, q): bipartite, (q+1)-regular, girth 6.

    Points take ids ``0..N-1`` and lines ``N..2N-1`` with ``N = q^2+q+1``.
    """
    field = GF(q)
    vecs = []
    for v in itertools.product(range(q), repeat=3):
        lead = next((x for x in v if x), None)
        if lead == 1:
            vecs.append(v)
    n_pts = len(vecs)

    def dot(a, b):
        s = 0
        for x, y in zip(a, b):
            s = field.add(s, field.mul(x, y))
        return s

    edges = [
        (i, n_pts + j)
        for i, pt in enumerate(vecs)
        for j, ln in enumerate(vecs)
        if dot(pt, ln) == 0
    ]
    return Graph(2 * n_pts, edges)


def cayley_graph(n: int, generators) -> Graph:
    """Cayley graph of the cyclic group Z_n for a symmetric generator set."""
    gens = {int(g) % n for g in generators}
    if 0 in gens:
        raise ValueError("generator set may not contain 0")
    if any((-g) % n not in gens for g in gens):
        raise ValueError("generator set must be closed under negation")
    return Graph(n, [(v, (v + g) % n) for v in range(n) for g in gens])
