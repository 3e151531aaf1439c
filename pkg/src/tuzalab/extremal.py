"""Finite checks around Mantel, regular pairs, the counting lemma and Chernoff tails."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .duality import tau3_exact
from .errors import FeasibilityError, InstanceTooLargeError
from .graph import Graph, SidedGraph, complete_graph, crossing_triangles

__all__ = [
    "CrossingMantelResult",
    "max_crossing_triangle_free",
    "multipartite_construction",
    "multipartite_size",
    "random_profile",
    "RegularPairStat",
    "pair_density",
    "check_regular_pair",
    "CountingLemmaResult",
    "counting_lemma_verify",
    "chernoff_tail",
    "binomial_tail",
]

EXACT_MANTEL_CAP = 5
CONSTRUCTION_MANTEL_CAP = 20
EXHAUSTIVE_PART_CAP = 14


# -- crossing Mantel -----------------------------------------------------------

@dataclass
class CrossingMantelResult:
    n: int
    size: int
    witness: SidedGraph
    exact: bool


def _crossing_free(f: SidedGraph) -> bool:
    return len(crossing_triangles(f)) == 0


def multipartite_construction(xs, ys) -> SidedGraph:
    """Complete multipartite on each side plus all ``X_i``-``Y_i`` edges.

    Parts may be empty; ``xs`` and ``ys`` must have equal length.  No crossing
    triangle exists: two adjacent X vertices lie in different parts, and no Y
    vertex is joined to two different X parts.
    """
    xs, ys = list(map(int, xs)), list(map(int, ys))
    if len(xs) != len(ys) or min(xs + ys, default=0) < 0:
        raise ValueError("need two equal-length nonnegative part profiles")
    nx = sum(xs)
    part_x = np.repeat(np.arange(len(xs)), xs)
    part_y = np.repeat(np.arange(len(ys)), ys)
    edges = [(u, v) for u, v in combinations(range(nx), 2) if part_x[u] != part_x[v]]
    ny = len(part_y)
    edges += [(nx + u, nx + v) for u, v in combinations(range(ny), 2) if part_y[u] != part_y[v]]
    edges += [(u, nx + v) for u in range(nx) for v in range(ny) if part_x[u] == part_y[v]]
    return SidedGraph(Graph(nx + ny, edges), nx)


def multipartite_size(xs, ys) -> float:
    """``n^2 - sum (x_i - y_i)^2 / 2`` for profiles of a common total ``n``."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if xs.sum() != ys.sum():
        raise ValueError("profiles must have equal totals")
    return float(xs.sum() ** 2 - 0.5 * np.sum((xs - ys) ** 2))


def random_profile(n: int, rng, max_parts: int | None = None) -> tuple[list[int], list[int]]:
    """Two random compositions of ``n`` over the same number of (possibly empty) parts."""
    r = int(rng.integers(1, (max_parts or n) + 1))

    def comp():
        cuts = np.sort(rng.integers(0, n + 1, r - 1))
        return np.diff(np.concatenate([[0], cuts, [n]])).tolist()

    return comp(), comp()


def max_crossing_triangle_free(n: int) -> CrossingMantelResult:
    """Largest subgraph of ``K_{2n}`` with no triangle meeting both halves.

    Exact for ``n <= 5``: the complement of a minimum edge cover of the crossing
    triangles, solved by the include/exclude branch-and-bound that branches on
    the edge in the most uncovered triangles and bounds with the LP.  For
    ``n <= 20`` only the balanced multipartite witness of size ``n^2`` is returned.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n <= EXACT_MANTEL_CAP:
        k = SidedGraph(complete_graph(2 * n), n)
        cover = tau3_exact(crossing_triangles(k))
        removed = np.zeros(k.graph.m, bool)
        removed[list(cover.support)] = True
        witness = SidedGraph(k.graph.edge_subgraph(~removed), n)
        exact = True
    elif n <= CONSTRUCTION_MANTEL_CAP:
        witness = multipartite_construction([1] * n, [1] * n)
        exact = False
    else:
        raise InstanceTooLargeError(f"n={n} exceeds the cap {CONSTRUCTION_MANTEL_CAP}")
    size = witness.graph.m
    if not _crossing_free(witness):
        raise FeasibilityError("witness contains a crossing triangle")
    if size > n * n:
        raise FeasibilityError(f"found {size} > n^2 = {n * n} edges without crossing triangles")
    return CrossingMantelResult(n, size, witness, exact)


# -- regular pairs -------------------------------------------------------------

@dataclass
class RegularPairStat:
    density: float
    epsilon: float | None = None
    regular: bool | None = None
    witness: tuple[list[int], list[int]] | None = None
    certified: bool = True
    checked: int = 0


def _parts(h: Graph, U, W):
    U, W = sorted(set(map(int, U))), sorted(set(map(int, W)))
    if not U or not W:
        raise ValueError("parts must be nonempty")
    if set(U) & set(W):
        raise ValueError("parts must be disjoint")
    if max(U + W) >= h.n or min(U + W) < 0:
        raise ValueError("vertex out of range")
    return U, W


def _biadjacency(h: Graph, U, W) -> np.ndarray:
    rows = h.rows
    return np.array([[(rows[u] >> w) & 1 for w in W] for u in U], dtype=np.int64)


def _check_scale(s):
    if not 0 < s <= 1:
        raise ValueError("scaling factor must lie in (0, 1]")


def pair_density(h: Graph, U, W, s: float = 1.0) -> RegularPairStat:
    _check_scale(s)
    U, W = _parts(h, U, W)
    count = int(_biadjacency(h, U, W).sum())
    return RegularPairStat(count / (s * len(U) * len(W)))


def _min_size(eps: float, size: int) -> int:
    return max(1, math.ceil(eps * size - 1e-12))


def check_regular_pair(h: Graph, U, W, s: float, eps: float, mode: str = "exhaustive",
                       samples: int = 1000, seed: int = 0) -> RegularPairStat:
    """Test ``|d(U,W) - d(U',W')| <= eps`` over sub-pairs with ``|U'| >= eps|U|``, ``|W'| >= eps|W|``.

    Exhaustive mode enumerates every ``U'``; for each, the extreme densities
    over ``W'`` of a given size come from the top and bottom degrees into
    ``U'``, so the check is complete.  Sampled mode only reports "no violation
    found" and is marked uncertified.
    """
    _check_scale(s)
    if eps <= 0:
        raise ValueError("eps must be positive")
    U, W = _parts(h, U, W)
    adj = _biadjacency(h, U, W)
    nu, nw = adj.shape
    d0 = adj.sum() / (s * nu * nw)
    ku, kw = _min_size(eps, nu), _min_size(eps, nw)

    if mode == "exhaustive":
        if max(nu, nw) > EXHAUSTIVE_PART_CAP:
            raise InstanceTooLargeError(f"exhaustive mode needs parts <= {EXHAUSTIVE_PART_CAP}")
        if nu > nw:
            # enumerate subsets of the smaller side
            stat = check_regular_pair(h, W, U, s, eps, mode)
            if stat.witness:
                stat.witness = (stat.witness[1], stat.witness[0])
            return stat
        masks = np.arange(1 << nu)
        sel = (masks[:, None] >> np.arange(nu)) & 1
        sizes = sel.sum(axis=1)
        keep = sizes >= ku
        sel, sizes = sel[keep], sizes[keep]
        deg = sel @ adj  # edges from U' to each w
        order = np.argsort(deg, axis=1, kind="stable")
        sdeg = np.take_along_axis(deg, order, axis=1)
        low = np.cumsum(sdeg, axis=1)  # k smallest
        high = np.cumsum(sdeg[:, ::-1], axis=1)  # k largest
        k = np.arange(1, nw + 1)
        denom = s * sizes[:, None] * k[None, :]
        dev = np.maximum(high / denom - d0, d0 - low / denom)
        dev[:, : kw - 1] = -np.inf
        checked = int(sel.shape[0] * (nw - kw + 1))
        i, j = np.unravel_index(np.argmax(dev), dev.shape)
        if dev[i, j] <= eps + 1e-12:
            return RegularPairStat(float(d0), eps, True, None, True, checked)
        up = high[i, j] / denom[i, j] - d0 >= d0 - low[i, j] / denom[i, j]
        cols = order[i, ::-1][: j + 1] if up else order[i, : j + 1]
        witness = ([U[a] for a in np.flatnonzero(sel[i])], sorted(W[b] for b in cols))
        return RegularPairStat(float(d0), eps, False, witness, True, checked)

    if mode != "sampled":
        raise ValueError("mode must be 'exhaustive' or 'sampled'")
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        su = rng.choice(nu, int(rng.integers(ku, nu + 1)), replace=False)
        sw = rng.choice(nw, int(rng.integers(kw, nw + 1)), replace=False)
        d = adj[np.ix_(su, sw)].sum() / (s * len(su) * len(sw))
        if abs(d - d0) > eps + 1e-12:
            witness = (sorted(U[a] for a in su), sorted(W[b] for b in sw))
            return RegularPairStat(float(d0), eps, False, witness, True, samples)
    return RegularPairStat(float(d0), eps, True, None, False, samples)


# -- counting lemma ------------------------------------------------------------

@dataclass
class CountingLemmaResult:
    hypotheses_met: bool
    failed: list[str] = field(default_factory=list)
    triangle: tuple[int, int, int] | None = None
    certified: bool = True


def counting_lemma_verify(h: Graph, A, B, Bp, s: float, eps: float, mode: str = "exhaustive",
                          samples: int = 1000, seed: int = 0) -> CountingLemmaResult:
    """Check the hypotheses on (A,B), (A,B') at scale 1 and (B,B') at scale ``s``.

    When they hold, a triangle ``a b b'`` must exist; its absence raises
    :class:`FeasibilityError`.
    """
    A, B, Bp = (sorted(set(map(int, X))) for X in (A, B, Bp))
    if not (len(A) == len(B) == len(Bp)):
        raise ValueError("A, B, B' must have equal size")
    if set(A) & set(B) or set(A) & set(Bp) or set(B) & set(Bp):
        raise ValueError("A, B, B' must be pairwise disjoint")
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    failed = []
    certified = True
    for name, (X, Y, sc) in {"A,B": (A, B, 1.0), "A,B'": (A, Bp, 1.0), "B,B'": (B, Bp, s)}.items():
        stat = check_regular_pair(h, X, Y, sc, eps, mode, samples, seed)
        certified &= stat.certified
        if stat.density < 2 * eps:
            failed.append(f"{name}: density {stat.density:.6g} < 2*eps")
        if not stat.regular:
            failed.append(f"{name}: not ({sc:g};H,{eps:g})-regular")
    if failed:
        return CountingLemmaResult(False, failed, None, certified)
    rows = h.rows
    for a in A:
        for b in B:
            if not (rows[a] >> b) & 1:
                continue
            for bp in Bp:
                if (rows[a] >> bp) & 1 and (rows[b] >> bp) & 1:
                    return CountingLemmaResult(True, [], (a, b, bp), certified)
    if certified:
        raise FeasibilityError("hypotheses hold but no triangle a b b' exists")
    return CountingLemmaResult(True, ["no triangle; regularity only sampled"], None, False)


# -- Chernoff ------------------------------------------------------------------

def chernoff_tail(n: int, p: float, x: float, side: str = "upper") -> float:
    """Bound on ``P(X >= np + x)`` (upper) or ``P(X <= np - x)`` (lower), ``X ~ Bin(n, p)``."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 1.0
    mu = n * p
    if side == "upper":
        return math.exp(-x * x / (2 * (mu + x / 3)))
    if side == "lower":
        return math.exp(-x * x / (2 * mu)) if mu > 0 else 0.0
    raise ValueError("side must be 'upper' or 'lower'")


def binomial_tail(n: int, p: float, x: float, side: str = "upper") -> float:
    """Exact ``P(X >= np + x)`` or ``P(X <= np - x)`` by summation."""
    mu = n * p
    if side == "upper":
        ks = range(max(0, math.ceil(mu + x - 1e-12)), n + 1)
    elif side == "lower":
        ks = range(0, min(n, math.floor(mu - x + 1e-12)) + 1)
    else:
        raise ValueError("side must be 'upper' or 'lower'")
    return math.fsum(math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in ks)
