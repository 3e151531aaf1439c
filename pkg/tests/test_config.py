import itertools

import numpy as np
import pytest

from tuzalab.config import (
    BB,
    BS,
    SB,
    SS,
    CompoundGraph,
    Configuration,
    exhaustive_oracle,
    fairness_monotonicity_check,
    naive_configuration,
    optimize_phi,
    probe_fairness,
    random_configuration,
    validate,
    weight_c,
)
from tuzalab.errors import ConfigurationError, InstanceTooLargeError
from tuzalab.generators import petersen_graph
from tuzalab.gf2 import external_triangle_space, is_orthogonal
from tuzalab.graph import VERTEX, Graph, complete_graph, enumerate_triangles, path_graph


def brute_weight(cfg, c):
    """Three-sum c-weight evaluated directly on the explicit K+ edge set."""
    kp = cfg.kplus
    t, m = kp.t, kp.m_h
    phi = np.empty(2 * kp.n_vertices)
    phi[0::2] = cfg.phi_b
    phi[1::2] = 1 - cfg.phi_b
    side = kp.base.side
    s_int = s_ext = 0.0
    for a, b in cfg.edge_set():
        u, w = a // 2, b // 2
        if u == w:
            continue
        if side[u] != side[w]:
            s_ext += phi[a] * phi[b]
        else:
            s_int += phi[a] * phi[b]
    s_vert = sum(phi[2 * v] * phi[2 * v + 1] for v in range(kp.n_vertices))
    return (1 - c) / (4 * m) * s_int + (1 - c) / (2 * t * t) * s_ext + c / t * s_vert


def brute_etf(cfg):
    """True iff the explicit F graph has no triangle using an external K+ edge."""
    kp = cfg.kplus
    f = Graph(2 * kp.n_vertices, cfg.edge_set())
    side = kp.base.side
    for tri in enumerate_triangles(f).triangle_list():
        sides = {int(side[x // 2]) for x in tri}
        if len(sides) == 2:
            return False
    return True


def brute_common_neighbor_ok(cfg):
    kp = cfg.kplus
    f = Graph(2 * kp.n_vertices, cfg.edge_set())
    return all(not (f.rows[2 * v] & f.rows[2 * v + 1]) for v in range(kp.n_vertices))


@pytest.fixture(scope="module")
def kp_k2():
    return CompoundGraph.from_h(complete_graph(2))


@pytest.fixture(scope="module")
def kp_petersen():
    return CompoundGraph.from_h(petersen_graph())


class TestCompoundGraph:
    def test_shape(self, kp_petersen):
        kp = kp_petersen
        g = kp.graph
        assert g.n == 2 * kp.n_vertices
        assert g.m == 4 * kp.n_edges + kp.n_vertices
        vertex_edges = [tuple(e) for e, ty in zip(g.edge_array().tolist(), kp.edge_type) if ty == VERTEX]
        assert vertex_edges == [(2 * v, 2 * v + 1) for v in range(kp.n_vertices)]

    def test_requires_edges(self):
        with pytest.raises(ConfigurationError):
            CompoundGraph.from_h(Graph(3))


class TestValidate:
    def test_naive_ok(self, kp_petersen):
        cfg = naive_configuration(kp_petersen)
        assert validate(cfg) == []
        assert brute_etf(cfg) and brute_common_neighbor_ok(cfg)

    def test_mass(self, kp_k2):
        cfg = naive_configuration(kp_k2)
        cfg.phi_b[0] = 0.4
        assert [v.kind for v in validate(cfg)] == ["mass"]

    def test_added_bb_lift(self, kp_petersen):
        kp = kp_petersen
        cfg = naive_configuration(kp)
        eid = int(np.flatnonzero(kp.external)[0])
        u, w = int(kp.eu[eid]), int(kp.ev[eid])
        cfg.masks[eid] |= BB
        kinds = {v.kind for v in validate(cfg, limit=100)}
        assert kinds == {"common_neighbor", "etf"}
        etf = [v.witness for v in validate(cfg, limit=100) if v.kind == "etf"]
        assert all(u in tri and w in tri for tri in etf)
        assert not brute_etf(cfg)

    def test_missing_vertex_edge(self, kp_k2):
        cfg = naive_configuration(kp_k2)
        cfg.vertex_edges[2] = False
        assert [v.kind for v in validate(cfg)] == ["vertex_edge"]

    def test_from_edge_set_roundtrip(self, kp_petersen):
        cfg = random_configuration(kp_petersen, np.random.default_rng(0))
        back = Configuration.from_edge_set(kp_petersen, cfg.edge_set(), cfg.phi_b)
        assert np.array_equal(back.masks, cfg.masks)

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_brute_force(self, kp_k2, seed):
        rng = np.random.default_rng(seed)
        masks = rng.integers(0, 16, kp_k2.n_edges)
        cfg = Configuration(kp_k2, masks, np.full(4, 0.5))
        kinds = {v.kind for v in validate(cfg, limit=100)}
        assert ("etf" not in kinds) == brute_etf(cfg)
        assert ("common_neighbor" not in kinds) == brute_common_neighbor_ok(cfg)

    def test_json_roundtrip(self, kp_petersen):
        cfg = random_configuration(kp_petersen, np.random.default_rng(3))
        data = cfg.to_json()
        assert data["t"] == 10 and len(data["patterns"]) == kp_petersen.n_edges
        back = Configuration.from_json(data, kp_petersen)
        assert np.array_equal(back.masks, cfg.masks) and np.allclose(back.phi_b, cfg.phi_b)


class TestWeight:
    @pytest.mark.parametrize("c", [0.0, 0.3, 1.0])
    def test_naive_half(self, kp_petersen, c):
        assert weight_c(naive_configuration(kp_petersen), c).w_c == 0.5

    def test_naive_classes(self, kp_petersen):
        assert set(naive_configuration(kp_petersen).classes().tolist()) == {3}

    @pytest.mark.parametrize("seed", range(20))
    def test_identity_and_brute_force(self, kp_petersen, seed):
        rng = np.random.default_rng(seed)
        cfg = random_configuration(kp_petersen, rng)
        c = float(rng.uniform())
        rep = weight_c(cfg, c)
        assert abs(rep.w_c - rep.identity_w) <= 1e-12
        assert rep.w_c == pytest.approx(brute_weight(cfg, c), abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_zero_delta_is_half(self, kp_petersen, seed):
        rng = np.random.default_rng(seed)
        cfg = random_configuration(kp_petersen, rng, phi_random=False)
        cfg.masks[:] = np.where(np.isin(cfg.masks, [BB | SS, BS | SB]), cfg.masks, 0)
        # drop to classes 1/3/empty; with delta = 0 each kept edge captures 1/2
        kept = cfg.masks > 0
        rep = weight_c(cfg, 0.4)
        assert np.allclose(rep.edge_gains[kept], 0)

    def test_class_fractions(self, kp_k2):
        rng = np.random.default_rng(1)
        phi = rng.uniform(0.5, 1, 4)
        d = phi - 0.5
        for mask, sign in ((BB | SS, 1), (BS | SB, -1)):
            masks = np.zeros(kp_k2.n_edges, np.uint8)
            masks[0] = mask
            rep = weight_c(Configuration(kp_k2, masks, phi), 0.5)
            u, w = kp_k2.eu[0], kp_k2.ev[0]
            assert rep.edge_gains[0] == pytest.approx(sign * 2 * d[u] * d[w], abs=1e-15)
        # vertex fraction 2 phi_b phi_s = 1/2 - 2 delta^2
        assert np.allclose(2 * phi * (1 - phi), 0.5 - 2 * d**2)

    def test_invalid_rejected(self, kp_k2):
        cfg = naive_configuration(kp_k2)
        cfg.masks[0] = BB | BS
        with pytest.raises(ConfigurationError):
            weight_c(cfg, 0.5)


class TestMonotonicity:
    def test_naive(self, kp_petersen):
        cfg = naive_configuration(kp_petersen)
        assert fairness_monotonicity_check(cfg, 0.1, 0.9)

    @pytest.mark.parametrize("seed", range(10))
    def test_random(self, kp_petersen, seed):
        rng = np.random.default_rng(seed)
        cfg = random_configuration(kp_petersen, rng)
        c1, c2 = sorted(rng.uniform(size=2))
        assert fairness_monotonicity_check(cfg, c1, c2)
        if weight_c(cfg, c1).w_c <= 0.5:
            assert weight_c(cfg, c2).w_c <= 0.5 + 1e-12

    def test_bad_order(self, kp_k2):
        with pytest.raises(ValueError):
            fairness_monotonicity_check(naive_configuration(kp_k2), 0.5, 0.2)


class TestPhi:
    def test_closed_form_matches_grid(self, kp_k2):
        rng = np.random.default_rng(0)
        cfg = random_configuration(kp_k2, rng)
        c = 0.3
        phi, val = optimize_phi(kp_k2, cfg.masks, c)
        grid = np.linspace(0.5, 1, 21)
        best = max(
            weight_c(Configuration(kp_k2, cfg.masks, np.array(p)), c, check=False).w_c
            for p in itertools.product(grid, repeat=4)
        )
        assert val >= best - 1e-12


class TestProbe:
    def test_c1_half(self, kp_petersen):
        res = probe_fairness(kp_petersen, 1.0, budget=3000, seed=0)
        assert res.weight == 0.5 and not res.certificate

    def test_c0_certificate(self, kp_petersen):
        res = probe_fairness(kp_petersen, 0.0, budget=3000, seed=0)
        assert res.certificate and res.weight > 0.5
        assert validate(res.config) == []
        assert weight_c(res.config, 0.0).w_c == pytest.approx(brute_weight(res.config, 0.0), abs=1e-12)

    @pytest.mark.parametrize("c", [0.0, 0.2, 0.5])
    def test_never_below_half(self, kp_k2, c):
        res = probe_fairness(kp_k2, c, budget=2000, seed=4)
        assert res.weight >= 0.5
        assert validate(res.config) == []

    def test_gamma_orthogonal(self, kp_petersen):
        for c in (0.0, 0.05):
            cfg = probe_fairness(kp_petersen, c, budget=2000, seed=1).config
            space = external_triangle_space(kp_petersen.base, cfg.g_mask())
            assert is_orthogonal(cfg.gamma_vector(), space)

    @pytest.mark.parametrize("seed", range(10))
    def test_gamma_orthogonal_random(self, kp_petersen, seed):
        cfg = random_configuration(kp_petersen, np.random.default_rng(seed))
        space = external_triangle_space(kp_petersen.base, cfg.g_mask())
        assert is_orthogonal(cfg.gamma_vector(), space)


class TestOracle:
    def test_c1(self, kp_k2):
        assert exhaustive_oracle(kp_k2, 1.0).value == pytest.approx(0.5, abs=1e-12)

    def test_c0_and_witness(self, kp_k2):
        # hand witness: bb lifts of x1x2, y1y2, x1y1, x2y2 with phi = 1 captures 3/4
        kp = kp_k2
        masks = np.zeros(kp.n_edges, np.uint8)
        for u, w in ((0, 1), (2, 3), (0, 2), (1, 3)):
            masks[kp.base.graph.edge_id(u, w)] = BB
        witness = Configuration(kp, masks, np.ones(4))
        assert weight_c(witness, 0.0).w_c == pytest.approx(0.75)
        res = exhaustive_oracle(kp, 0.0)
        assert res.value == pytest.approx(0.75, abs=1e-12)
        assert validate(res.config) == []

    def test_phi_pinned(self, kp_k2):
        assert exhaustive_oracle(kp_k2, 0.0, resolution=None).value == pytest.approx(0.5, abs=1e-12)

    def test_probe_matches(self, kp_k2):
        for c in (0.0, 0.2, 0.35, 1.0):
            ref = exhaustive_oracle(kp_k2, c).value
            got = probe_fairness(kp_k2, c, budget=10000, seed=0).weight
            assert abs(ref - got) <= 1e-3

    def test_cap(self):
        with pytest.raises(InstanceTooLargeError):
            exhaustive_oracle(CompoundGraph.from_h(path_graph(3)), 0.5)
