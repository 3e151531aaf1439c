"""Triangle packing and covering: exact branch-and-bound and the LP pair.

Triangles and edges are addressed by their ids in a ``TriangleSystem``;
search states are Python-int bitsets over those ids.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import FeasibilityError, InstanceTooLargeError
from .graph import EXTERNAL, VERTEX, Graph, SidedGraph, TriangleSystem, enumerate_triangles, iter_bits
from .lp import GAP_TOL, solve_packing_lp

__all__ = [
    "TRIANGLE_CAP",
    "PackingResult",
    "CoverResult",
    "nu3_exact",
    "tau3_exact",
    "lp_fractional",
    "tuza_report",
    "blowup_fractional_cover",
    "verify_packing",
    "verify_cover",
]

TRIANGLE_CAP = 10**5
LOAD_TOL = 1e-9
LP_BOUND_MIN = 6  # below this many live triangles the cheap bounds suffice


@dataclass
class PackingResult:
    """``support`` maps triangle id to weight (1 for the integral packing)."""

    value: float
    support: dict[int, float]
    certificate: dict[int, float] | None = None
    exact: bool = True


@dataclass
class CoverResult:
    """``support`` maps edge id to weight; ``certificate`` is a dual packing."""

    value: float
    support: dict[int, float]
    certificate: dict[int, float] | None = None
    exact: bool = True


def _check_cap(ts: TriangleSystem, cap: int) -> None:
    if len(ts) > cap:
        raise InstanceTooLargeError(f"{len(ts)} triangles exceed cap {cap}")


def verify_packing(ts: TriangleSystem, support: dict[int, float]) -> bool:
    load = np.zeros(ts.n_edges)
    for tid, w in support.items():
        if w < -LOAD_TOL:
            return False
        load[ts.tri_edges[tid]] += w
    return bool(np.all(load <= 1 + LOAD_TOL))


def verify_cover(ts: TriangleSystem, support: dict[int, float]) -> bool:
    w = np.zeros(ts.n_edges)
    for eid, x in support.items():
        w[eid] = x
    if np.any(w < -LOAD_TOL):
        return False
    if not len(ts):
        return True
    return bool(np.all(w[ts.tri_edges].sum(axis=1) >= 1 - LOAD_TOL))


# -- LP ---------------------------------------------------------------------

def _lp_value(ts: TriangleSystem, tri_ids: list[int], edge_mask: int | None = None,
              vertex_cuts: bool = False) -> float:
    """Fractional packing value of the given triangles, using only edges in ``edge_mask``.

    Triangles with an edge outside the mask keep only their remaining rows;
    this is the dual of covering those triangles with allowed edges.  With
    ``vertex_cuts`` the rows ``sum_{T ∋ v} x_T <= floor(d_v / 2)`` are added
    for odd live degree ``d_v`` (valid for integral packings only).
    """
    if not tri_ids:
        return 0.0
    te = ts.tri_edges[tri_ids]
    edges = np.unique(te)
    if edge_mask is not None:
        edges = np.array([e for e in edges.tolist() if (edge_mask >> e) & 1], dtype=np.int64)
    if edges.size == 0:
        return math.inf
    row_of = {int(e): i for i, e in enumerate(edges.tolist())}
    a = np.zeros((edges.size, len(tri_ids)))
    for col, row in enumerate(te.tolist()):
        for e in row:
            i = row_of.get(e)
            if i is not None:
                a[i, col] = 1.0
    if np.any(a.sum(axis=0) == 0):
        return math.inf
    b = np.ones(edges.size)
    if vertex_cuts:
        tri = ts.triangles[tri_ids]
        at_vertex: dict[int, set] = {}
        cols_of: dict[int, list] = {}
        for col, ((x, y, z), (exy, exz, eyz)) in enumerate(zip(tri.tolist(), te.tolist())):
            for v, pair in ((x, (exy, exz)), (y, (exy, eyz)), (z, (exz, eyz))):
                at_vertex.setdefault(v, set()).update(e for e in pair if e in row_of)
                cols_of.setdefault(v, []).append(col)
        cut_rows, rhs = [], []
        for v in sorted(at_vertex):
            deg = len(at_vertex[v])
            if deg % 2:
                row = np.zeros(len(tri_ids))
                row[cols_of[v]] = 1.0
                cut_rows.append(row)
                rhs.append(deg // 2)
        if cut_rows:
            a = np.vstack([a, np.array(cut_rows)])
            b = np.concatenate([b, rhs])
    return solve_packing_lp(a, b=b).primal


def lp_fractional(ts: TriangleSystem, side: str = "packing", cap: int = TRIANGLE_CAP):
    """Solve the packing LP and read the covering LP off its dual.

    Both solutions are checked for feasibility and the objective gap is
    bounded by ``GAP_TOL``; the packing and cover results carry each other
    as certificates.
    """
    if side not in ("packing", "cover"):
        raise ValueError("side must be 'packing' or 'cover'")
    _check_cap(ts, cap)
    if not len(ts):
        return PackingResult(0.0, {}, {}, False) if side == "packing" else CoverResult(0.0, {}, {}, False)
    sol = solve_packing_lp(ts.incidence_matrix())
    packing = {i: float(v) for i, v in enumerate(sol.x) if v > LOAD_TOL}
    cover = {i: float(v) for i, v in enumerate(sol.y) if v > LOAD_TOL}
    if not verify_packing(ts, packing) or not verify_cover(ts, cover):
        raise FeasibilityError("LP certificate failed re-verification")
    if side == "packing":
        return PackingResult(sol.primal, packing, cover, False)
    return CoverResult(sol.dual, cover, packing, False)


# -- nu3 --------------------------------------------------------------------

def _root_lp_order(ts: TriangleSystem) -> tuple[list[int], float]:
    """Triangles by decreasing root LP weight (lowest id on ties), and the LP value."""
    sol = lp_fractional(ts, "packing")
    w = np.zeros(len(ts))
    for t, x in sol.support.items():
        w[t] = x
    return sorted(range(len(ts)), key=lambda t: (-round(w[t], 9), t)), sol.value


def _greedy_pack(order, conflict, live):
    chosen = []
    for t in order:
        if (live >> t) & 1:
            chosen.append(t)
            live &= ~conflict[t]
    return chosen


def _min_degree_fill(live, conflict, rng):
    """Greedy independent set on the live conflict graph, fewest live conflicts first."""
    chosen = []
    while live:
        cands = list(iter_bits(live))
        degs = [(conflict[t] & live).bit_count() for t in cands]
        low = min(degs)
        ties = [t for t, d in zip(cands, degs) if d == low]
        t = ties[int(rng.integers(len(ties)))] if len(ties) > 1 else ties[0]
        chosen.append(t)
        live &= ~conflict[t]
    return chosen


def _packing_local_search(T, conflict, order, rounds=3000, seed=0, target=None):
    """Greedy from the LP order, then ruin-and-recreate.

    Each round drops the packed triangles conflicting with a random
    unpacked triangle (plus one random packed triangle) and refills the
    freed region by min-degree greedy; equal-size moves are accepted.
    """
    full = (1 << T) - 1
    best = _greedy_pack(order, conflict, full)
    rng = np.random.default_rng(seed)
    cur = set(best)
    for _ in range(rounds):
        if not cur or (target is not None and len(best) >= target):
            break
        t = int(rng.integers(T))
        drop = {x for x in cur if (conflict[t] >> x) & 1}
        if rng.random() < 0.5 or not drop:
            drop.add(list(cur)[int(rng.integers(len(cur)))])
        keep = cur - drop
        live = full
        for x in keep:
            live &= ~conflict[x]
        if (live >> t) & 1 and rng.random() < 0.7:
            fill = [t] + _min_degree_fill(live & ~conflict[t], conflict, rng)
        else:
            fill = _min_degree_fill(live, conflict, rng)
        if len(fill) >= len(drop):
            cur = keep | set(fill)
            if len(cur) > len(best):
                best = sorted(cur)
    return list(best)


def nu3_exact(ts: TriangleSystem, cap: int = TRIANGLE_CAP) -> PackingResult:
    """Maximum edge-disjoint triangle packing by branch-and-bound.

    Branches include/exclude on the live triangle with the most live
    conflicts (lowest id on ties).  Bounds: a third of the live edges, then
    the floor of the LP relaxation.
    """
    _check_cap(ts, cap)
    T = len(ts)
    if T == 0:
        return PackingResult(0, {})
    tri_edge_mask = [sum(1 << e for e in row) for row in ts.tri_edges.tolist()]
    edge_tris = [sum(1 << t for t in tids) for tids in ts.edge_to_triangles]
    conflict = [0] * T
    for t, row in enumerate(ts.tri_edges.tolist()):
        conflict[t] = edge_tris[row[0]] | edge_tris[row[1]] | edge_tris[row[2]]

    order, root_lp = _root_lp_order(ts)
    root_bound = math.floor(min(root_lp, _lp_value(ts, list(range(T)), vertex_cuts=True)) + 1e-7)
    best = _packing_local_search(T, conflict, order, target=root_bound)
    best_val = [len(best), list(best)]

    def live_edge_count(live):
        em = 0
        for t in iter_bits(live):
            em |= tri_edge_mask[t]
        return em.bit_count()

    def search(live, chosen):
        cur = len(chosen)
        if live == 0:
            if cur > best_val[0]:
                best_val[0], best_val[1] = cur, list(chosen)
            return
        if cur + live_edge_count(live) // 3 <= best_val[0]:
            return
        n_live = live.bit_count()
        if n_live >= LP_BOUND_MIN:
            lp = _lp_value(ts, list(iter_bits(live)), vertex_cuts=True)
            if cur + math.floor(lp + 1e-7) <= best_val[0]:
                return
        pick, pick_deg = -1, -1
        for t in iter_bits(live):
            deg = (conflict[t] & live).bit_count()
            if deg > pick_deg:
                pick, pick_deg = t, deg
        # exclude first: the dive then behaves like min-conflict greedy
        if pick_deg > 1:
            search(live & ~(1 << pick), chosen)
        chosen.append(pick)
        search(live & ~conflict[pick], chosen)
        chosen.pop()

    if best_val[0] < root_bound:
        search((1 << T) - 1, [])
    support = {t: 1.0 for t in sorted(best_val[1])}
    if not verify_packing(ts, support):
        raise FeasibilityError("packing is not edge-disjoint")
    return PackingResult(best_val[0], support)


# -- tau3 -------------------------------------------------------------------

def _greedy_cover(ts: TriangleSystem, edge_tris: list[int]) -> list[int]:
    uncovered = (1 << len(ts)) - 1
    chosen = []
    while uncovered:
        e = max(range(ts.n_edges), key=lambda e: ((edge_tris[e] & uncovered).bit_count(), -e))
        chosen.append(e)
        uncovered &= ~edge_tris[e]
    return chosen


def tau3_exact(ts: TriangleSystem, cap: int = TRIANGLE_CAP) -> CoverResult:
    """Minimum triangle edge cover by branch-and-bound.

    Branches include/exclude on the allowed edge meeting the most uncovered
    triangles (lowest id on ties), with unit propagation on triangles left
    with a single allowed edge.  Lower bounds: a greedy family of uncovered
    triangles with pairwise disjoint allowed edges, then the LP.
    """
    _check_cap(ts, cap)
    T = len(ts)
    if T == 0:
        return CoverResult(0, {})
    tri_edges = ts.tri_edges.tolist()
    tri_edge_mask = [sum(1 << e for e in row) for row in tri_edges]
    edge_tris = [sum(1 << t for t in tids) for tids in ts.edge_to_triangles]
    greedy = _greedy_cover(ts, edge_tris)
    best = [len(greedy), list(greedy)]

    def propagate(uncovered, allowed, chosen):
        changed = True
        while changed:
            changed = False
            for t in iter_bits(uncovered):
                if not (uncovered >> t) & 1:
                    continue
                avail = tri_edge_mask[t] & allowed
                if avail == 0:
                    return None
                if avail & (avail - 1) == 0:
                    e = avail.bit_length() - 1
                    chosen.append(e)
                    uncovered &= ~edge_tris[e]
                    allowed &= ~(1 << e)
                    changed = True
        return uncovered, allowed

    def disjoint_bound(uncovered, allowed):
        used = 0
        count = 0
        for t in iter_bits(uncovered):
            avail = tri_edge_mask[t] & allowed
            if not avail & used:
                used |= avail
                count += 1
        return count

    def search(uncovered, allowed, chosen):
        mark = len(chosen)
        state = propagate(uncovered, allowed, chosen)
        try:
            if state is None:
                return
            uncovered, allowed = state
            cur = len(chosen)
            if uncovered == 0:
                if cur < best[0]:
                    best[0], best[1] = cur, list(chosen)
                return
            if cur + disjoint_bound(uncovered, allowed) >= best[0]:
                return
            if uncovered.bit_count() >= LP_BOUND_MIN:
                lp = _lp_value(ts, list(iter_bits(uncovered)), allowed)
                if cur + math.ceil(lp - 1e-7) >= best[0]:
                    return
            pick, pick_deg = -1, -1
            for e in iter_bits(allowed):
                deg = (edge_tris[e] & uncovered).bit_count()
                if deg > pick_deg:
                    pick, pick_deg = e, deg
            chosen.append(pick)
            search(uncovered & ~edge_tris[pick], allowed & ~(1 << pick), chosen)
            chosen.pop()
            search(uncovered, allowed & ~(1 << pick), chosen)
        finally:
            del chosen[mark:]

    search((1 << T) - 1, (1 << ts.n_edges) - 1, [])
    support = {e: 1.0 for e in sorted(best[1])}
    if not verify_cover(ts, support):
        raise FeasibilityError("cover misses a triangle")
    return CoverResult(best[0], support)


# -- reports ----------------------------------------------------------------

def tuza_report(g: Graph, cap: int = TRIANGLE_CAP, instance: str = "", seed: int | None = None) -> dict:
    """All four triangle numbers with the sandwich ``nu3 <= nu3* = tau3* <= tau3`` asserted."""
    start = time.perf_counter()
    ts = enumerate_triangles(g)
    nu = nu3_exact(ts, cap)
    tau = tau3_exact(ts, cap)
    pack = lp_fractional(ts, "packing", cap)
    cover_star = sum(pack.certificate.values())
    if abs(pack.value - cover_star) > GAP_TOL:
        raise FeasibilityError("fractional packing and cover values differ")
    if not (nu.value <= pack.value + 1e-7 and cover_star <= tau.value + 1e-7):
        raise FeasibilityError("duality sandwich violated")
    ratio = tau.value / nu.value if nu.value else (0.0 if tau.value == 0 else math.inf)
    return {
        "instance": instance,
        "tau3": int(tau.value),
        "nu3": int(nu.value),
        "tau3_star": float(cover_star),
        "nu3_star": float(pack.value),
        "ratio": ratio,
        "runtime_ms": round(1000 * (time.perf_counter() - start), 3),
        "seed": seed,
    }


def blowup_fractional_cover(ga: SidedGraph, full_scan_limit: int = 2000) -> CoverResult:
    """Weight 1 on vertex edges and 1/2 on external edges.

    A triangle gets weight below 1 only if it has no vertex edge and at most
    one external edge.  A triangle has an even number of external edges, so
    such a triangle is all-internal across three blocks, which means a
    triangle in the internal-edge graph.  That graph is checked to be
    triangle-free by bitset intersection; small inputs also get a full scan.
    """
    if ga.block_of is None:
        raise ValueError("blowup_fractional_cover needs a blowup (block map)")
    types = ga.edge_type
    weights = np.where(types == VERTEX, 1.0, np.where(types == EXTERNAL, 0.5, 0.0))
    support = {int(i): float(weights[i]) for i in np.flatnonzero(weights)}
    e = ga.graph.edge_array()
    internal = e[types == 0]
    rows = [0] * ga.n
    for u, v in internal.tolist():
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    for u, v in internal.tolist():
        if rows[u] & rows[v]:
            raise FeasibilityError(f"internal triangle through edge ({u}, {v}): H is not triangle-free")
    if ga.n <= full_scan_limit:
        ts = enumerate_triangles(ga.graph)
        if len(ts) and np.any(weights[ts.tri_edges].sum(axis=1) < 1 - LOAD_TOL):
            raise FeasibilityError("fractional cover misses a triangle")
    value = float(np.count_nonzero(types == VERTEX) + 0.5 * np.count_nonzero(types == EXTERNAL))
    return CoverResult(value, support, None, False)
