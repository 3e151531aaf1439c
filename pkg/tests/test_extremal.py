import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from tuzalab.errors import InstanceTooLargeError
from tuzalab.extremal import (
    binomial_tail,
    check_regular_pair,
    chernoff_tail,
    counting_lemma_verify,
    max_crossing_triangle_free,
    multipartite_construction,
    multipartite_size,
    pair_density,
    random_profile,
)
from tuzalab.generators import petersen_graph
from tuzalab.graph import Graph, crossing_triangles


def brute_crossing_mantel(n):
    """Scan every edge subset of K_2n, bitmask triangle test."""
    verts = range(2 * n)
    edges = list(itertools.combinations(verts, 2))
    eid = {e: i for i, e in enumerate(edges)}
    crossing = []
    for a, b, c in itertools.combinations(verts, 3):
        if a < n <= c:
            crossing.append((1 << eid[a, b]) | (1 << eid[a, c]) | (1 << eid[b, c]))
    best = 0
    for mask in range(1 << len(edges)):
        size = bin(mask).count("1")
        if size > best and all(mask & t != t for t in crossing):
            best = size
    return best


def brute_regular(adj, s, eps):
    nu, nw = adj.shape
    d0 = adj.sum() / (s * nu * nw)
    for ku in range(1, nu + 1):
        if ku < eps * nu - 1e-12:
            continue
        for su in itertools.combinations(range(nu), ku):
            for kw in range(1, nw + 1):
                if kw < eps * nw - 1e-12:
                    continue
                for sw in itertools.combinations(range(nw), kw):
                    if abs(adj[np.ix_(su, sw)].sum() / (s * ku * kw) - d0) > eps + 1e-12:
                        return False
    return True


def bipartite_graph(adj):
    nu, nw = adj.shape
    return Graph(nu + nw, [(u, nu + w) for u, w in zip(*np.nonzero(adj))])


class TestCrossingMantel:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_exact_matches_scan(self, n):
        res = max_crossing_triangle_free(n)
        assert res.exact
        assert res.size == n * n == brute_crossing_mantel(n)

    def test_n2_witness_shape(self):
        w = max_crossing_triangle_free(2).witness
        assert w.graph.m == 4 and len(crossing_triangles(w)) == 0

    @pytest.mark.parametrize("n", [4, 5])
    def test_exact_larger(self, n):
        assert max_crossing_triangle_free(n).size == n * n

    @pytest.mark.parametrize("n", range(6, 21))
    def test_construction(self, n):
        res = max_crossing_triangle_free(n)
        assert not res.exact and res.size == n * n
        assert len(crossing_triangles(res.witness)) == 0

    def test_cap(self):
        with pytest.raises(InstanceTooLargeError):
            max_crossing_triangle_free(21)

    def test_size_formula(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(1, 12))
            xs, ys = random_profile(n, rng)
            f = multipartite_construction(xs, ys)
            assert f.graph.m == multipartite_size(xs, ys)
            assert len(crossing_triangles(f)) == 0


class TestDensity:
    def test_empty_and_complete(self):
        assert pair_density(Graph(4), [0, 1], [2, 3]).density == 0
        g = Graph(4, [(0, 2), (0, 3), (1, 2), (1, 3)])
        assert pair_density(g, [0, 1], [2, 3]).density == 1

    def test_petersen(self):
        g = petersen_graph()
        U, W = [0, 1, 2, 3, 4], [5, 6, 7, 8, 9]
        count = sum(1 for u, w in g.edges() if (u in U) != (w in U))
        assert pair_density(g, U, W, 0.3).density == pytest.approx(count / (0.3 * 25))

    @pytest.mark.parametrize("U,W,s", [([0], [0, 1], 1), ([], [1], 1), ([0], [1], 0), ([0], [1], 1.5)])
    def test_errors(self, U, W, s):
        with pytest.raises(ValueError):
            pair_density(Graph(3), U, W, s)


class TestRegularity:
    def test_complete_and_empty(self):
        full = np.ones((6, 6), int)
        for adj in (full, 0 * full):
            assert check_regular_pair(bipartite_graph(adj), range(6), range(6, 12), 1, 0.01).regular

    def test_planted(self):
        adj = np.zeros((8, 8), int)
        adj[:4] = 1
        stat = check_regular_pair(bipartite_graph(adj), range(8), range(8, 16), 1, 0.1)
        assert stat.regular is False and stat.certified
        su, sw = stat.witness
        assert len(su) >= 0.8 and len(sw) >= 0.8
        sub = pair_density(bipartite_graph(adj), su, sw).density
        assert abs(sub - 0.5) > 0.1

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 5), st.integers(1, 5), st.floats(0.05, 0.6), st.sampled_from([1.0, 0.5]),
           st.integers(0, 2**31))
    def test_matches_brute(self, nu, nw, eps, s, seed):
        adj = (np.random.default_rng(seed).random((nu, nw)) < 0.5).astype(int)
        stat = check_regular_pair(bipartite_graph(adj), range(nu), range(nu, nu + nw), s, eps)
        assert stat.regular == brute_regular(adj, s, eps)

    def test_sampled_uncertified(self):
        full = np.ones((20, 20), int)
        stat = check_regular_pair(bipartite_graph(full), range(20), range(20, 40), 1, 0.1, "sampled", 50)
        assert stat.regular and not stat.certified

    def test_cap(self):
        with pytest.raises(InstanceTooLargeError):
            check_regular_pair(Graph(30), range(15), range(15, 30), 1, 0.1)


class TestCountingLemma:
    def test_complete(self):
        g = Graph(9, [(u, w) for u in range(9) for w in range(9) if u < w and u // 3 != w // 3])
        res = counting_lemma_verify(g, [0, 1, 2], [3, 4, 5], [6, 7, 8], 1, 0.1)
        assert res.hypotheses_met and res.triangle is not None

    def test_empty_bb(self):
        g = Graph(9, [(u, w) for u in range(3) for w in range(3, 9)])
        res = counting_lemma_verify(g, [0, 1, 2], [3, 4, 5], [6, 7, 8], 1, 0.1)
        assert not res.hypotheses_met
        assert any(msg.startswith("B,B'") for msg in res.failed)

    def test_random_tripartite_l12(self):
        rng = np.random.default_rng(0)
        A, B, Bp = range(12), range(12, 24), range(24, 36)
        e = [(u, w) for X, Y in ((A, B), (A, Bp), (B, Bp)) for u in X for w in Y if rng.random() < 0.9]
        g = Graph(36, e)
        res = counting_lemma_verify(g, A, B, Bp, 1.0, 0.4)
        assert res.hypotheses_met and res.certified
        a, b, bp = res.triangle
        assert g.has_edge(a, b) and g.has_edge(a, bp) and g.has_edge(b, bp)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 5), st.floats(0.2, 0.49), st.floats(0.3, 1.0), st.integers(0, 2**31))
    def test_never_met_without_triangle(self, l, eps, p, seed):
        rng = np.random.default_rng(seed)
        A, B, Bp = range(l), range(l, 2 * l), range(2 * l, 3 * l)
        e = [(u, w) for X, Y in ((A, B), (A, Bp), (B, Bp)) for u in X for w in Y if rng.random() < p]
        res = counting_lemma_verify(Graph(3 * l, e), A, B, Bp, 1.0, eps)
        assert not res.hypotheses_met or res.triangle is not None

    def test_bad_input(self):
        with pytest.raises(ValueError):
            counting_lemma_verify(Graph(5), [0, 1], [2, 3], [4], 1, 0.1)
        with pytest.raises(ValueError):
            counting_lemma_verify(Graph(6), [0, 1], [2, 3], [4, 5], 1, 0.5)


class TestChernoff:
    def test_x0(self):
        assert chernoff_tail(10, 0.3, 0, "upper") == 1 == chernoff_tail(10, 0.3, 0, "lower")

    def test_formula(self):
        assert chernoff_tail(10**4, 0.5, 500, "lower") == pytest.approx(math.exp(-25), rel=1e-12)

    def test_exact_tail_oracle(self):
        for n, p, k in ((20, 0.3, 9), (15, 0.5, 3)):
            assert binomial_tail(n, p, k - n * p, "upper") == pytest.approx(binom.sf(k - 1, n, p), rel=1e-12)
            assert binomial_tail(n, p, n * p - k, "lower") == pytest.approx(binom.cdf(k, n, p), rel=1e-12)

    def test_n20_p03_all_x(self):
        for x in np.arange(0, 14.5, 0.25):
            for side in ("upper", "lower"):
                assert chernoff_tail(20, 0.3, x, side) >= binomial_tail(20, 0.3, x, side)

    def test_negative_x(self):
        with pytest.raises(ValueError):
            chernoff_tail(10, 0.5, -1)
