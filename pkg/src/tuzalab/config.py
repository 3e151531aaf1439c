"""Configurations on the compound graph ``K+ = K . E`` and their c-weight.

A configuration ``(F, phi)`` is stored per edge ``uw`` of ``K`` (``u < w``) as a
4-bit mask over the lifts ``u^b w^b`` (BB), ``u^s w^s`` (SS), ``u^b w^s`` (BS)
and ``u^s w^b`` (SB), plus ``phi_b[v] = phi(v^b)``.  The common-neighbour
condition then reads per edge: the allowed masks are the seven independent
sets of the 4-cycle BB-BS-SS-SB.  In ``K+`` the vertex id of ``v^b`` is ``2v``
and of ``v^s`` is ``2v + 1``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, InstanceTooLargeError
from .gf2 import EdgeVector
from .graph import EXTERNAL, INTERNAL, VERTEX, Graph, SidedGraph, complete_graph, crossing_triangles, double, lex_product

__all__ = [
    "BB", "SS", "BS", "SB", "PATTERNS", "PATTERN_NAMES",
    "CompoundGraph",
    "Configuration",
    "Violation",
    "WeightReport",
    "validate",
    "naive_configuration",
    "weight_c",
    "fairness_monotonicity_check",
    "optimize_phi",
    "ProbeResult",
    "probe_fairness",
    "OracleResult",
    "exhaustive_oracle",
    "random_configuration",
]

BB, SS, BS, SB = 1, 2, 4, 8
PATTERNS = (0, BB, SS, BS, SB, BB | SS, BS | SB)
PATTERN_NAMES = {0: "", BB: "bb", SS: "ss", BS: "bs", SB: "sb", BB | SS: "bb+ss", BS | SB: "bs+sb"}
_NAME_TO_MASK = {v: k for k, v in PATTERN_NAMES.items()}
# refined label per allowed mask and its projection onto the four classes
REFINED_CLASS = {BB | SS: "1", BB: "2", SS: "2'", BS | SB: "3", BS: "3a", SB: "3b", 0: "4"}
COARSE_CLASS = {"1": 1, "2": 2, "2'": 4, "3": 3, "3a": 4, "3b": 4, "4": 4}
_FORBIDDEN_PAIRS = (BB | SB, BS | SS, BB | BS, SB | SS)
IDENTITY_TOL = 1e-12


def _allowed(mask: int) -> bool:
    return all(mask & pair != pair for pair in _FORBIDDEN_PAIRS)


def _lift_bit(x_low: int, x_high: int) -> int:
    """Mask bit of the lift ``u^x w^y`` (0 = b, 1 = s) of an edge ``u < w``."""
    return ((BB, BS), (SB, SS))[x_low][x_high]


def _build_bad_table() -> np.ndarray:
    """``bad[m_uv, m_uw, m_vw]``: some lift of triangle ``u < v < w`` lies in F."""
    bad = np.zeros((16, 16, 16), dtype=bool)
    for xu, xv, xw in itertools.product((0, 1), repeat=3):
        b1, b2, b3 = _lift_bit(xu, xv), _lift_bit(xu, xw), _lift_bit(xv, xw)
        for m1, m2, m3 in itertools.product(range(16), repeat=3):
            if m1 & b1 and m2 & b2 and m3 & b3:
                bad[m1, m2, m3] = True
    return bad


BAD = _build_bad_table()
_BAD_FLAT = BAD.ravel().tolist()


def _frac(mask: int, a: float, b: float) -> float:
    """Captured fraction of edge ``uw`` with ``a = phi(u^b)``, ``b = phi(w^b)``."""
    out = 0.0
    if mask & BB:
        out += a * b
    if mask & SS:
        out += (1 - a) * (1 - b)
    if mask & BS:
        out += a * (1 - b)
    if mask & SB:
        out += (1 - a) * b
    return out


def _frac_vec(masks: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (
        ((masks & BB) > 0) * a * b
        + ((masks & SS) > 0) * (1 - a) * (1 - b)
        + ((masks & BS) > 0) * a * (1 - b)
        + ((masks & SB) > 0) * (1 - a) * b
    )


class CompoundGraph:
    """``K+`` for a double ``K = K_{H,H}``, with the external-triangle index of ``K``."""

    def __init__(self, base: SidedGraph):
        if base.block_of is not None:
            raise ConfigurationError("compound graphs are built on a double, not a blowup")
        if base.n != 2 * base.n_x:
            raise ConfigurationError("base must have two equal sides")
        self.base = base
        self.t = base.n_x
        types = base.edge_type
        self.external = types == EXTERNAL
        n_int = int(np.count_nonzero(types == INTERNAL))
        if n_int == 0:
            raise ConfigurationError("H needs at least one edge (the internal weight is 1/(4m))")
        self.m_h = n_int // 2
        e = base.graph.edge_array()
        self.eu = e[:, 0].copy()
        self.ev = e[:, 1].copy()
        ts = crossing_triangles(base)
        self.tri_vertices = ts.triangles
        self.tri_edges = ts.tri_edges
        buckets: list[list[int]] = [[] for _ in range(base.graph.m)]
        for tid, row in enumerate(ts.tri_edges.tolist()):
            for eid in row:
                buckets[eid].append(tid)
        self.tris_of_edge = [tuple(b) for b in buckets]

    @classmethod
    def from_h(cls, h: Graph) -> "CompoundGraph":
        return cls(double(h))

    @property
    def n_edges(self) -> int:
        return self.base.graph.m

    @property
    def n_vertices(self) -> int:
        return self.base.n

    def coefficients(self, c: float) -> np.ndarray:
        """Per-K-edge weight: ``(1-c)/(4m)`` internal, ``(1-c)/(2t^2)`` external."""
        return np.where(self.external, (1 - c) / (2 * self.t**2), (1 - c) / (4 * self.m_h))

    @cached_property
    def graph(self) -> Graph:
        return lex_product(self.base.graph, complete_graph(2))

    @cached_property
    def edge_type(self) -> np.ndarray:
        """Types of the ``K+`` edges: vertex edges join ``2v`` and ``2v+1``."""
        e = self.graph.edge_array()
        bu, bv = e[:, 0] // 2, e[:, 1] // 2
        side = self.base.side
        return np.where(bu == bv, VERTEX, np.where(side[bu] != side[bv], EXTERNAL, INTERNAL)).astype(np.uint8)

    @cached_property
    def incident(self) -> list[list[tuple[int, bool]]]:
        """Per base vertex: ``(edge id, vertex is the low endpoint)``."""
        out: list[list[tuple[int, bool]]] = [[] for _ in range(self.n_vertices)]
        for eid, (u, w) in enumerate(zip(self.eu.tolist(), self.ev.tolist())):
            out[u].append((eid, True))
            out[w].append((eid, False))
        return out


@dataclass
class Configuration:
    kplus: CompoundGraph
    masks: np.ndarray
    phi_b: np.ndarray
    vertex_edges: np.ndarray | None = None

    def __post_init__(self):
        self.masks = np.asarray(self.masks, dtype=np.uint8).copy()
        self.phi_b = np.asarray(self.phi_b, dtype=float).copy()
        if self.masks.shape != (self.kplus.n_edges,):
            raise ConfigurationError("one mask per edge of K expected")
        if self.phi_b.shape != (self.kplus.n_vertices,):
            raise ConfigurationError("one phi value per vertex of K expected")
        if np.any(self.masks > 15):
            raise ConfigurationError("masks are 4-bit")
        if self.vertex_edges is None:
            self.vertex_edges = np.ones(self.kplus.n_vertices, dtype=bool)
        else:
            self.vertex_edges = np.asarray(self.vertex_edges, dtype=bool).copy()

    @property
    def delta(self) -> np.ndarray:
        return self.phi_b - 0.5

    def refined_classes(self) -> list[str]:
        return [REFINED_CLASS.get(int(m), "invalid") for m in self.masks]

    def classes(self) -> np.ndarray:
        """Coarse classes 1-4; ``ss``-only and single cross lifts fall into class 4."""
        return np.array([COARSE_CLASS.get(lab, 4) for lab in self.refined_classes()], dtype=np.int8)

    def gamma_vector(self) -> EdgeVector:
        """Indicator of class 1 and class 2 edges."""
        cls = self.classes()
        return EdgeVector.from_mask((cls == 1) | (cls == 2))

    def g_mask(self) -> np.ndarray:
        """Edges of class 1, 2 or 3."""
        return self.classes() <= 3

    def edge_set(self) -> list[tuple[int, int]]:
        """``F`` as explicit ``K+`` edges (ids ``2v`` / ``2v+1``)."""
        out = []
        for eid, m in enumerate(self.masks.tolist()):
            u, w = int(self.kplus.eu[eid]), int(self.kplus.ev[eid])
            for bit, (xu, xw) in ((BB, (0, 0)), (SS, (1, 1)), (BS, (0, 1)), (SB, (1, 0))):
                if m & bit:
                    out.append((2 * u + xu, 2 * w + xw))
        out.extend((2 * v, 2 * v + 1) for v in np.flatnonzero(self.vertex_edges).tolist())
        return sorted(out)

    @classmethod
    def from_edge_set(cls, kplus: CompoundGraph, edges, phi_b) -> "Configuration":
        masks = np.zeros(kplus.n_edges, dtype=np.uint8)
        vertex_edges = np.zeros(kplus.n_vertices, dtype=bool)
        for a, b in edges:
            a, b = sorted((int(a), int(b)))
            u, w = a // 2, b // 2
            if u == w:
                vertex_edges[u] = True
                continue
            eid = kplus.base.graph.edge_id(u, w)
            masks[eid] |= _lift_bit(a % 2, b % 2)
        return cls(kplus, masks, phi_b, vertex_edges)

    def to_json(self) -> dict:
        return {
            "t": self.kplus.t,
            "patterns": [PATTERN_NAMES.get(int(m), format(int(m), "04b")) for m in self.masks],
            "phi_b": [float(x) for x in self.phi_b],
        }

    @classmethod
    def from_json(cls, data: dict, kplus: CompoundGraph) -> "Configuration":
        if int(data["t"]) != kplus.t:
            raise ConfigurationError("t does not match the compound graph")
        masks = [_NAME_TO_MASK[p] if p in _NAME_TO_MASK else int(p, 2) for p in data["patterns"]]
        return cls(kplus, masks, data["phi_b"])

    def copy(self) -> "Configuration":
        return Configuration(self.kplus, self.masks, self.phi_b, self.vertex_edges)


@dataclass(frozen=True)
class Violation:
    kind: str  # "vertex_edge" | "common_neighbor" | "etf" | "mass"
    witness: tuple

    def __str__(self):
        return f"{self.kind}: {self.witness}"


def validate(cfg: Configuration, limit: int = 20) -> list[Violation]:
    """All violated configuration conditions (at most ``limit`` per kind)."""
    kp = cfg.kplus
    out: list[Violation] = []
    missing = np.flatnonzero(~cfg.vertex_edges)
    out += [Violation("vertex_edge", (int(v),)) for v in missing[:limit]]
    bad_edges = [eid for eid, m in enumerate(cfg.masks.tolist()) if not _allowed(m)]
    for eid in bad_edges[:limit]:
        u, w = int(kp.eu[eid]), int(kp.ev[eid])
        out.append(Violation("common_neighbor", (u, w, PATTERN_NAMES.get(int(cfg.masks[eid]), int(cfg.masks[eid])))))
    if len(kp.tri_edges):
        m = cfg.masks[kp.tri_edges]
        hits = np.flatnonzero(BAD[m[:, 0], m[:, 1], m[:, 2]])
        for tid in hits[:limit].tolist():
            out.append(Violation("etf", tuple(int(x) for x in kp.tri_vertices[tid])))
    phi = cfg.phi_b
    for v in np.flatnonzero(~np.isfinite(phi) | (phi < 0.5) | (phi > 1.0))[:limit].tolist():
        out.append(Violation("mass", (int(v), float(phi[v]))))
    return out


def naive_configuration(kplus: CompoundGraph) -> Configuration:
    """Both cross lifts ``u^b w^s`` and ``w^b u^s`` of every edge, ``phi = 1/2``."""
    return Configuration(kplus, np.full(kplus.n_edges, BS | SB), np.full(kplus.n_vertices, 0.5))


@dataclass(frozen=True)
class WeightReport:
    w_c: float
    zeta_i: float
    zeta_e: float
    gamma_i: float
    gamma_e: float
    vertex_loss: float
    identity_w: float
    edge_gains: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {
            "w_c": self.w_c, "zeta_i": self.zeta_i, "zeta_e": self.zeta_e,
            "gamma_i": self.gamma_i, "gamma_e": self.gamma_e, "vertex_loss": self.vertex_loss,
        }


def _weight_parts(cfg: Configuration):
    kp = cfg.kplus
    a, b = cfg.phi_b[kp.eu], cfg.phi_b[kp.ev]
    frac = _frac_vec(cfg.masks.astype(np.int64), a, b)
    s_int = float(frac[~kp.external].sum())
    s_ext = float(frac[kp.external].sum())
    s_vert = float((cfg.phi_b * (1 - cfg.phi_b)).sum())
    return frac, s_int, s_ext, s_vert


def weight_c(cfg: Configuration, c: float, check: bool = True) -> WeightReport:
    """The three-sum c-weight, cross-checked against its delta form."""
    if not 0 <= c <= 1:
        raise ConfigurationError("c must lie in [0, 1]")
    if check:
        bad = validate(cfg, limit=1)
        if bad:
            raise ConfigurationError(f"invalid configuration: {bad[0]}")
    kp = cfg.kplus
    t, m = kp.t, kp.m_h
    frac, s_int, s_ext, s_vert = _weight_parts(cfg)
    w = (1 - c) / (4 * m) * s_int + (1 - c) / (2 * t * t) * s_ext + c / t * s_vert
    zeta_i = s_int / (2 * m)
    zeta_e = s_ext / (t * t)
    gamma_i, gamma_e = zeta_i - 0.5, zeta_e - 0.5
    dsq = float((cfg.delta**2).sum())
    ident = 0.5 + (1 - c) / 2 * (gamma_i + gamma_e) - c / t * dsq
    if abs(w - ident) > IDENTITY_TOL:
        raise AssertionError(f"delta identity off by {abs(w - ident):.3e}")
    return WeightReport(w, zeta_i, zeta_e, gamma_i, gamma_e, c * dsq / t, ident, frac - 0.5)


def fairness_monotonicity_check(cfg: Configuration, c1: float, c2: float) -> bool:
    """``w_c`` is the affine combination ``(1-c)/2 Q_i + (1-c)/2 Q_e + c Q_v``
    with ``Q_v <= 1/2``; returns whether ``w_{c2} <= max(w_{c1}, 1/2)``."""
    if not 0 <= c1 < c2 <= 1:
        raise ValueError("need 0 <= c1 < c2 <= 1")
    kp = cfg.kplus
    _, s_int, s_ext, s_vert = _weight_parts(cfg)
    q_i, q_e, q_v = s_int / (2 * kp.m_h), s_ext / kp.t**2, s_vert / kp.t
    if q_v > 0.5 + IDENTITY_TOL:
        raise AssertionError("vertex term exceeds 1/2")
    w1, w2 = weight_c(cfg, c1).w_c, weight_c(cfg, c2).w_c
    for c, w in ((c1, w1), (c2, w2)):
        if abs((1 - c) / 2 * (q_i + q_e) + c * q_v - w) > IDENTITY_TOL:
            raise AssertionError("c-weight is not the expected convex combination")
    return w2 <= max(w1, 0.5) + IDENTITY_TOL


# -- phi optimization ---------------------------------------------------------

def _phi_sweep(kp: CompoundGraph, masks: list[int], coef: list[float], phi: list[float], c: float) -> float:
    """One pass of exact coordinate maximization; returns the largest change."""
    t = kp.t
    eu, ev = kp.eu, kp.ev
    biggest = 0.0
    for v, inc in enumerate(kp.incident):
        slope = 0.0
        for eid, low in inc:
            mk = masks[eid]
            if not mk:
                continue
            if low:
                o = phi[ev[eid]]
                d = (mk & BB and o) - (mk & SS and 1 - o) + (mk & BS and 1 - o) - (mk & SB and o)
            else:
                o = phi[eu[eid]]
                d = (mk & BB and o) - (mk & SS and 1 - o) - (mk & BS and o) + (mk & SB and 1 - o)
            slope += coef[eid] * d
        if c > 0:
            new = min(1.0, max(0.5, 0.5 + slope * t / (2 * c)))
        else:
            new = 1.0 if slope > 1e-15 else (0.5 if slope < -1e-15 else phi[v])
        biggest = max(biggest, abs(new - phi[v]))
        phi[v] = new
    return biggest


def _objective(kp: CompoundGraph, masks: np.ndarray, coef: np.ndarray, phi: np.ndarray, c: float) -> float:
    a, b = phi[kp.eu], phi[kp.ev]
    return float((coef * _frac_vec(masks.astype(np.int64), a, b)).sum() + c / kp.t * (phi * (1 - phi)).sum())


def optimize_phi(kp: CompoundGraph, masks, c: float, starts: int = 8, seed: int = 0,
                 init: np.ndarray | None = None, max_sweeps: int = 500) -> tuple[np.ndarray, float]:
    """Multi-start clipped coordinate ascent for ``phi`` with the pattern fixed.

    Each coordinate enters the weight as ``L a + (c/t) a (1 - a)``, so its
    maximizer over ``[1/2, 1]`` is ``1/2 + L t / (2c)`` clipped.
    """
    masks_arr = np.asarray(masks, dtype=np.uint8)
    masks_l = masks_arr.tolist()
    coef = kp.coefficients(c)
    coef_l = coef.tolist()
    rng = np.random.default_rng(seed)
    n = kp.n_vertices
    inits = [np.full(n, 0.5), np.ones(n)]
    if init is not None:
        inits.insert(0, np.asarray(init, dtype=float))
    while len(inits) < starts:
        inits.append(rng.uniform(0.5, 1.0, n))
    best_phi, best_val = None, -math.inf
    for start in inits[:max(starts, 1)]:
        phi = start.tolist()
        for _ in range(max_sweeps):
            if _phi_sweep(kp, masks_l, coef_l, phi, c) < 1e-13:
                break
        arr = np.array(phi)
        val = _objective(kp, masks_arr, coef, arr, c)
        if val > best_val + 1e-15:
            best_phi, best_val = arr, val
    return best_phi, best_val


# -- probing ------------------------------------------------------------------

@dataclass
class ProbeResult:
    config: Configuration
    weight: float
    certificate: bool  # True: a re-validated configuration with weight above 1/2
    evaluations: int


def _etf_ok(kp: CompoundGraph, masks: list[int], eid: int, new: int) -> bool:
    tri_edges = kp.tri_edges
    for tid in kp.tris_of_edge[eid]:
        e1, e2, e3 = tri_edges[tid]
        m1 = new if e1 == eid else masks[e1]
        m2 = new if e2 == eid else masks[e2]
        m3 = new if e3 == eid else masks[e3]
        if _BAD_FLAT[(m1 << 8) | (m2 << 4) | m3]:
            return False
    return True


def random_configuration(kplus: CompoundGraph, rng, phi_random: bool = True) -> Configuration:
    """Random valid configuration: patterns drawn edge by edge, ETF kept incrementally."""
    masks = [0] * kplus.n_edges
    for eid in rng.permutation(kplus.n_edges).tolist():
        for p in rng.permutation(len(PATTERNS)).tolist():
            if _etf_ok(kplus, masks, eid, PATTERNS[p]):
                masks[eid] = PATTERNS[p]
                break
    phi = rng.uniform(0.5, 1.0, kplus.n_vertices) if phi_random else np.full(kplus.n_vertices, 0.5)
    return Configuration(kplus, masks, phi)


def _matching_start(kplus: CompoundGraph) -> Configuration:
    """``bb`` lifts of all internal edges plus the external matching ``x_i y_i``, ``phi = 1``."""
    t = kplus.t
    masks = np.where(kplus.external, 0, BB).astype(np.uint8)
    match = kplus.external & (kplus.ev - kplus.eu == t)
    masks[match] = BB
    return Configuration(kplus, masks, np.ones(kplus.n_vertices))


def probe_fairness(kplus: CompoundGraph, c: float, budget: int = 20000, seed: int = 0,
                   restarts: int = 8) -> ProbeResult:
    """Simulated-annealing search over edge patterns with interleaved phi ascent.

    Start 0 is the naive configuration, start 1 a structured ``bb`` start
    (internal edges plus an external perfect matching), the rest random
    valid configurations.  The best configuration is re-validated and
    re-weighed from scratch before it is returned.
    """
    if not 0 <= c <= 1:
        raise ConfigurationError("c must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    kp = kplus
    coef = kp.coefficients(c)
    coef_l = coef.tolist()
    eu, ev = kp.eu.tolist(), kp.ev.tolist()
    n_e = kp.n_edges
    starts = [naive_configuration(kp), _matching_start(kp)]
    while len(starts) < restarts:
        starts.append(random_configuration(kp, rng))
    starts = starts[:max(restarts, 1)]
    per_start = max(1, budget // len(starts))
    sweep_every = max(8, n_e)
    scale = float(coef.max()) if n_e else 0.0

    best_cfg = naive_configuration(kp)
    best_val = weight_c(best_cfg, c).w_c
    evaluations = 0
    for start in starts:
        masks = start.masks.astype(int).tolist()
        phi = start.phi_b.tolist()
        for _ in range(3):
            _phi_sweep(kp, masks, coef_l, phi, c)
        cur = _objective(kp, np.array(masks, np.uint8), coef, np.array(phi), c)
        local_best = (cur, list(masks), list(phi))
        temp0 = 0.25 * scale
        for step in range(per_start):
            temp = temp0 * (1 - step / per_start) ** 2
            eid = int(rng.integers(n_e))
            old = masks[eid]
            new = PATTERNS[int(rng.integers(1, len(PATTERNS)))]
            if new == old:
                new = 0
            evaluations += 1
            if not _etf_ok(kp, masks, eid, new):
                continue
            a, b = phi[eu[eid]], phi[ev[eid]]
            gain = coef_l[eid] * (_frac(new, a, b) - _frac(old, a, b))
            if gain >= 0 or (temp > 0 and rng.random() < math.exp(gain / temp)):
                masks[eid] = new
                cur += gain
            if (step + 1) % sweep_every == 0:
                _phi_sweep(kp, masks, coef_l, phi, c)
                cur = _objective(kp, np.array(masks, np.uint8), coef, np.array(phi), c)
            if cur > local_best[0] + 1e-13:
                local_best = (cur, list(masks), list(phi))
        m_arr = np.array(local_best[1], dtype=np.uint8)
        phi_opt, val = optimize_phi(kp, m_arr, c, starts=8, seed=int(rng.integers(2**31)),
                                    init=np.array(local_best[2]))
        if val > best_val + 1e-13:
            cand = Configuration(kp, m_arr, phi_opt)
            if not validate(cand, limit=1):
                best_cfg, best_val = cand, weight_c(cand, c).w_c

    if validate(best_cfg, limit=1):
        raise AssertionError("probe produced an invalid configuration")
    final = weight_c(best_cfg, c).w_c
    return ProbeResult(best_cfg, final, final > 0.5 + 1e-9, evaluations)


# -- exhaustive oracle ----------------------------------------------------------

@dataclass
class OracleResult:
    value: float
    config: Configuration
    candidates: int
    maximal: int


def _grid_refine(kp, masks, coef, phi, c, grid):
    """Lattice hill-climb: move one coordinate to any grid value while it helps."""
    phi = phi.copy()
    best = _objective(kp, masks, coef, phi, c)
    improved = True
    while improved:
        improved = False
        for v in range(len(phi)):
            keep = phi[v]
            for g in grid:
                phi[v] = g
                val = _objective(kp, masks, coef, phi, c)
                if val > best + 1e-15:
                    best, keep, improved = val, g, True
            phi[v] = keep
    return phi, best


def exhaustive_oracle(kplus: CompoundGraph, c: float, resolution: float | None = 1 / 64,
                      max_edges: int = 8, max_t: int = 3) -> OracleResult:
    """Maximum c-weight over all valid ``F`` with ``phi`` optimized per ``F``.

    Only inclusion-maximal ``F`` are optimized (adding a lift never lowers
    the weight).  ``phi`` comes from multi-start coordinate ascent, a hill
    climb on the ``resolution`` lattice and a final ascent.  With
    ``resolution=None`` phi is pinned to 1/2.
    """
    kp = kplus
    if kp.n_edges > max_edges or kp.t > max_t:
        raise InstanceTooLargeError(f"oracle limited to |E(K)| <= {max_edges}, t <= {max_t}")
    n_e = kp.n_edges
    pats = np.array(PATTERNS, dtype=np.uint8)
    combos = np.array(list(itertools.product(range(len(PATTERNS)), repeat=n_e)), dtype=np.int64)
    masks_all = pats[combos]
    ok = np.ones(len(combos), dtype=bool)
    for e1, e2, e3 in kp.tri_edges.tolist():
        ok &= ~BAD[masks_all[:, e1], masks_all[:, e2], masks_all[:, e3]]
    valid = masks_all[ok]
    valid_set = {row.tobytes() for row in valid}
    maximal = []
    for row in valid:
        is_max = True
        for eid in range(n_e):
            for bit in (BB, SS, BS, SB):
                if row[eid] & bit:
                    continue
                bigger = row.copy()
                bigger[eid] |= bit
                if bigger.tobytes() in valid_set:
                    is_max = False
                    break
            if not is_max:
                break
        if is_max:
            maximal.append(row)
    coef = kp.coefficients(c)
    half = np.full(kp.n_vertices, 0.5)
    grid = None if resolution is None else np.arange(0.5, 1.0 + 1e-12, resolution)
    best_val, best_cfg = -math.inf, None
    for masks in maximal:
        if grid is None:
            phi, val = half, _objective(kp, masks, coef, half, c)
        else:
            phi, _ = optimize_phi(kp, masks, c, starts=8, seed=0)
            phi, _ = _grid_refine(kp, masks, coef, phi, c, grid)
            phi, val = optimize_phi(kp, masks, c, starts=1, init=phi)
        if val > best_val + 1e-15:
            best_val, best_cfg = val, Configuration(kp, masks, phi)
    final = weight_c(best_cfg, c).w_c
    return OracleResult(final, best_cfg, int(ok.sum()), len(maximal))
