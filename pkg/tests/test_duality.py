import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from tuzalab.duality import (
    lp_fractional,
    nu3_exact,
    blowup_fractional_cover,
    tau3_exact,
    tuza_report,
    verify_cover,
    verify_packing,
)
from tuzalab.errors import FeasibilityError, InstanceTooLargeError, LPIterationLimitError
from tuzalab.generators import petersen_graph
from tuzalab.graph import (
    EXTERNAL,
    VERTEX,
    Graph,
    blowup,
    complete_graph,
    cycle_graph,
    double,
    enumerate_triangles,
    random_graph,
    random_subgraph,
)
from tuzalab.lp import solve_packing_lp


def brute_nu3(ts):
    T = len(ts)
    edges = [set(r) for r in ts.tri_edges.tolist()]
    for k in range(T, 0, -1):
        for combo in itertools.combinations(range(T), k):
            used = [e for t in combo for e in edges[t]]
            if len(used) == len(set(used)):
                return k
    return 0


def brute_tau3(ts):
    """Plain search tree: some edge of the first uncovered triangle must be chosen."""
    rows = ts.tri_edges.tolist()
    best = [len(set(e for r in rows for e in r))]

    def go(chosen):
        if len(chosen) >= best[0]:
            return
        for r in rows:
            if not chosen.intersection(r):
                for e in r:
                    go(chosen | {e})
                return
        best[0] = len(chosen)

    go(frozenset())
    return best[0]


def scipy_lp(ts):
    a = ts.incidence_matrix()
    res = linprog(-np.ones(a.shape[1]), A_ub=a, b_ub=np.ones(a.shape[0]), method="highs")
    return -res.fun


def vertex_enumeration_lp(a):
    """Best basic feasible solution of max 1.x, Ax <= 1, x >= 0, over all bases."""
    m, n = a.shape
    full = np.hstack([a, np.eye(m)])
    cost = np.concatenate([np.ones(n), np.zeros(m)])
    best = -np.inf
    combos = np.array(list(itertools.combinations(range(n + m), m)))
    for chunk in np.array_split(combos, max(1, len(combos) // 20000)):
        mats = full[:, chunk].transpose(1, 0, 2)
        ok = np.abs(np.linalg.det(mats)) > 1e-9
        xb = np.linalg.solve(mats[ok], np.ones((ok.sum(), m, 1)))[..., 0]
        feas = np.all(xb >= -1e-9, axis=1)
        if feas.any():
            vals = (cost[chunk[ok][feas]] * xb[feas]).sum(axis=1)
            best = max(best, vals.max())
    return best


@st.composite
def graphs(draw, max_n=8):
    n = draw(st.integers(3, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [e for e, keep in zip(pairs, mask) if keep])


class TestLPCore:
    @pytest.mark.parametrize("seed", range(15))
    def test_against_highs(self, seed):
        g = random_graph(14, 0.2 + 0.04 * seed, seed)
        ts = enumerate_triangles(g)
        if not len(ts):
            return
        sol = solve_packing_lp(ts.incidence_matrix())
        assert sol.primal == pytest.approx(scipy_lp(ts), abs=1e-8)
        assert sol.gap <= 1e-7

    def test_general_rhs(self):
        a = np.array([[1.0, 2.0], [3.0, 1.0]])
        sol = solve_packing_lp(a, c=np.array([1.0, 1.0]), b=np.array([4.0, 6.0]))
        ref = linprog([-1, -1], A_ub=a, b_ub=[4, 6], method="highs")
        assert sol.primal == pytest.approx(-ref.fun)

    def test_iteration_cap(self):
        a = enumerate_triangles(complete_graph(7)).incidence_matrix()
        with pytest.raises(LPIterationLimitError):
            solve_packing_lp(a, max_iter=1)

    def test_unbounded(self):
        with pytest.raises(ValueError):
            solve_packing_lp(np.array([[-1.0]]))

    def test_negative_rhs(self):
        with pytest.raises(ValueError):
            solve_packing_lp(np.eye(2), b=np.array([1.0, -1.0]))


class TestKnownValues:
    def test_k4(self):
        ts = enumerate_triangles(complete_graph(4))
        assert nu3_exact(ts).value == brute_nu3(ts) == 1
        assert tau3_exact(ts).value == brute_tau3(ts) == 2

    def test_k5(self):
        ts = enumerate_triangles(complete_graph(5))
        assert nu3_exact(ts).value == brute_nu3(ts) == 2
        assert tau3_exact(ts).value == brute_tau3(ts) == 4

    def test_single_triangle(self):
        ts = enumerate_triangles(complete_graph(3))
        assert tau3_exact(ts).value == 1 and nu3_exact(ts).value == 1

    def test_triangle_free(self):
        ts = enumerate_triangles(petersen_graph())
        assert nu3_exact(ts).value == 0
        assert tau3_exact(ts).value == 0 and tau3_exact(ts).support == {}
        assert lp_fractional(ts, "cover").value == 0

    def test_k4_fractional(self):
        ts = enumerate_triangles(complete_graph(4))
        pack = lp_fractional(ts, "packing")
        cover = lp_fractional(ts, "cover")
        assert pack.value == pytest.approx(2) and cover.value == pytest.approx(2)
        assert verify_cover(ts, cover.support)

    def test_k4_hand_certificates(self):
        ts = enumerate_triangles(complete_graph(4))
        assert verify_packing(ts, {t: 0.5 for t in range(4)})
        g = complete_graph(4)
        four_cycle = [g.edge_id(0, 1), g.edge_id(1, 2), g.edge_id(2, 3), g.edge_id(0, 3)]
        assert verify_cover(ts, {e: 0.5 for e in four_cycle})

    def test_k5_vertex_enumeration(self):
        ts = enumerate_triangles(complete_graph(5))
        exact = Fraction(vertex_enumeration_lp(ts.incidence_matrix())).limit_denominator(100)
        assert exact == Fraction(10, 3)
        assert lp_fractional(ts).value == pytest.approx(10 / 3, abs=1e-9)
        assert lp_fractional(ts, "cover").value == pytest.approx(10 / 3, abs=1e-9)

    def test_tuza_report_k4_k5(self):
        assert tuza_report(complete_graph(4))["ratio"] == 2
        assert tuza_report(complete_graph(5))["ratio"] == 2

    def test_cap(self):
        ts = enumerate_triangles(complete_graph(6))
        for fn in (nu3_exact, tau3_exact):
            with pytest.raises(InstanceTooLargeError):
                fn(ts, cap=5)
        with pytest.raises(InstanceTooLargeError):
            lp_fractional(ts, cap=5)


class TestAgainstExhaustive:
    @settings(max_examples=60, deadline=None)
    @given(graphs())
    def test_small_graphs(self, g):
        ts = enumerate_triangles(g)
        if len(ts) > 12:
            return
        nu, tau = nu3_exact(ts), tau3_exact(ts)
        assert nu.value == brute_nu3(ts)
        assert tau.value == brute_tau3(ts)
        assert verify_packing(ts, nu.support) and verify_cover(ts, tau.support)

    @pytest.mark.parametrize("seed", range(12))
    def test_random_sandwich(self, seed):
        g = random_graph(13, 0.45, seed)
        rep = tuza_report(g, seed=seed)
        assert rep["nu3"] <= rep["nu3_star"] + 1e-9
        assert abs(rep["nu3_star"] - rep["tau3_star"]) <= 1e-7
        assert rep["tau3_star"] <= rep["tau3"] + 1e-9
        if rep["nu3"]:
            assert rep["ratio"] <= 3

    def test_report_schema(self):
        rep = tuza_report(cycle_graph(5), instance="c5", seed=3)
        assert set(rep) == {"instance", "tau3", "nu3", "tau3_star", "nu3_star", "ratio", "runtime_ms", "seed"}
        assert rep["ratio"] == 0.0


class TestBlowupCover:
    def test_total_weight_formula(self):
        ga = random_subgraph(blowup(double(petersen_graph()), 3), 0.6, 0.6, 2)
        out = blowup_fractional_cover(ga)
        n_vertex = int(np.count_nonzero(ga.edge_type == VERTEX))
        n_ext = int(np.count_nonzero(ga.edge_type == EXTERNAL))
        assert out.value == n_vertex + n_ext / 2
        assert sum(out.support.values()) == out.value

    def test_full_scan_a1(self):
        ga = random_subgraph(blowup(double(petersen_graph()), 1), 1.0, 1.0, 0)
        out = blowup_fractional_cover(ga)
        ts = enumerate_triangles(ga.graph)
        assert verify_cover(ts, out.support)

    def test_h_with_triangle_rejected(self):
        ga = blowup(double(complete_graph(3)), 2)
        with pytest.raises(FeasibilityError):
            blowup_fractional_cover(ga)

    def test_needs_blowup(self):
        with pytest.raises(ValueError):
            blowup_fractional_cover(double(petersen_graph()))
