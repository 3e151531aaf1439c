"""Canonicalization of a triangle-free subgraph of a blowup ``K . K_eta``.

Vertices of the blowup are grouped in blocks ``B_v`` (``block_of``).  For each
base vertex ``v`` in ascending order: take the heaviest ``x`` in ``B_v``, split
the block into ``S_v`` (neighbours of ``x``) and ``T_v``, give every other
vertex of ``T_v`` the neighbourhood of ``x``, then give every vertex of ``S_v``
the neighbourhood of the heaviest ``z`` in ``S_v``.  Ties go to the lowest id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import BB, BS, SB, SS, CompoundGraph, Configuration
from .errors import ConfigurationError
from .graph import EXTERNAL, INTERNAL, VERTEX, Graph, SidedGraph, blowup, enumerate_triangles, iter_bits

__all__ = [
    "CanonicalForm",
    "blowup_edge_weights",
    "graph_weight",
    "canonicalize",
    "check_weight_nondecreasing",
    "check_triangle_free",
    "check_blocks_complete_bipartite",
    "check_twins",
    "collapse_to_configuration",
    "random_triangle_free_subgraph",
]

TIE_TOL = 1e-12


def blowup_edge_weights(k: SidedGraph, eta: int, c: float, d: float | None = None) -> dict[int, float]:
    """Weight per edge type: vertex ``c/(t eta^2)``, internal ``(1-c)/(2 t d eta^2)``,
    external ``(1-c)/(2 t^2 eta^2)``."""
    t = k.n_x
    if d is None:
        n_int = int(np.count_nonzero(k.edge_type == INTERNAL))
        d = n_int / t
    if d <= 0:
        raise ConfigurationError("H needs positive degree")
    e2 = eta * eta
    return {
        VERTEX: c / (t * e2),
        INTERNAL: (1 - c) / (2 * t * d * e2),
        EXTERNAL: (1 - c) / (2 * t * t * e2),
    }


def _type_matrix(kb: SidedGraph) -> np.ndarray:
    """Edge-type code for every vertex pair of the blowup (255 off the graph)."""
    n = kb.n
    tm = np.full((n, n), 255, dtype=np.uint8)
    e = kb.graph.edge_array()
    tm[e[:, 0], e[:, 1]] = kb.edge_type
    tm[e[:, 1], e[:, 0]] = kb.edge_type
    return tm


def graph_weight(g: Graph, kb: SidedGraph, weights: dict[int, float]) -> float:
    tm = _type_matrix(kb)
    e = g.edge_array()
    if not e.shape[0]:
        return 0.0
    types = tm[e[:, 0], e[:, 1]]
    if np.any(types == 255):
        raise ConfigurationError("graph is not a subgraph of the blowup")
    return float(sum(weights[int(ty)] for ty in types.tolist()))


@dataclass
class CanonicalForm:
    graph: Graph
    blowup: SidedGraph
    base: SidedGraph
    eta: int
    c: float
    S: list[list[int]]
    T: list[list[int]]
    weight_before: float
    weight_after: float


def canonicalize(f_tilde: Graph, k: SidedGraph, eta: int, c: float, d: float | None = None) -> CanonicalForm:
    kb = blowup(k, eta)
    if f_tilde.n != kb.n:
        raise ConfigurationError("f_tilde must live on the vertex set of the blowup")
    if len(enumerate_triangles(f_tilde)):
        raise ConfigurationError("input is not triangle-free")
    weights = blowup_edge_weights(k, eta, c, d)
    tm = _type_matrix(kb)
    fe = f_tilde.edge_array()
    if np.any(tm[fe[:, 0], fe[:, 1]] == 255):
        raise ConfigurationError("f_tilde is not a subgraph of the blowup")
    w_of = np.zeros((kb.n, kb.n))
    for code, w in weights.items():
        w_of[tm == code] = w
    adj = [set(iter_bits(r)) for r in f_tilde.rows]

    def vw(x):
        return sum(w_of[x, y] for y in adj[x])

    def replace(y, x):
        """``N(y) := N(x)``."""
        for z in adj[y]:
            adj[z].discard(y)
        adj[y] = set(adj[x])
        for z in adj[y]:
            adj[z].add(y)

    def heaviest(candidates):
        scores = [vw(x) for x in candidates]
        top = max(scores)
        return next(x for x, s in zip(candidates, scores) if s >= top - TIE_TOL)

    S_all, T_all = [], []
    for v in range(k.n):
        block = list(range(v * eta, (v + 1) * eta))
        x = heaviest(block)
        S = [y for y in block if y in adj[x]]
        T = [y for y in block if y not in adj[x]]
        for y in T:
            if y != x:
                replace(y, x)
        if S:
            z = heaviest(S)
            for w in S:
                if w != z:
                    replace(w, z)
        S_all.append(S)
        T_all.append(T)

    edges = [(u, w) for u in range(kb.n) for w in adj[u] if u < w]
    out = Graph(kb.n, edges)
    return CanonicalForm(out, kb, k, eta, c, S_all, T_all,
                         graph_weight(f_tilde, kb, weights), graph_weight(out, kb, weights))


# -- observation checkers ------------------------------------------------------

def check_weight_nondecreasing(cf: CanonicalForm, f_tilde: Graph) -> bool:
    weights = blowup_edge_weights(cf.base, cf.eta, cf.c)
    return graph_weight(cf.graph, cf.blowup, weights) >= graph_weight(f_tilde, cf.blowup, weights) - 1e-12


def check_triangle_free(cf: CanonicalForm) -> bool:
    return len(enumerate_triangles(cf.graph)) == 0


def check_blocks_complete_bipartite(cf: CanonicalForm) -> bool:
    g, eta = cf.graph, cf.eta
    for v in range(cf.base.n):
        block = set(range(v * eta, (v + 1) * eta))
        S, T = set(cf.S[v]), set(cf.T[v])
        if S & T or S | T != block:
            return False
        for x in block:
            inside = {y for y in g.neighbors(x) if y in block}
            if inside != (T if x in S else S):
                return False
    return True


def check_twins(cf: CanonicalForm) -> bool:
    rows = cf.graph.rows
    for part in (*cf.S, *cf.T):
        if len({rows[x] for x in part}) > 1:
            return False
    return True


# -- collapse ------------------------------------------------------------------

def collapse_to_configuration(cf: CanonicalForm, kplus: CompoundGraph | None = None) -> Configuration:
    """``R_v`` (larger of ``S_v``, ``T_v``; ``S_v`` on ties) becomes ``v^b``."""
    if not (check_blocks_complete_bipartite(cf) and check_twins(cf)):
        raise ConfigurationError("input is not canonical")
    kp = kplus or CompoundGraph(cf.base)
    eta = cf.eta
    R, P = [], []
    for S, T in zip(cf.S, cf.T):
        big, small = (S, T) if len(S) >= len(T) else (T, S)
        R.append(big)
        P.append(small)
    phi = np.array([len(r) / eta for r in R])
    rows = cf.graph.rows

    def joined(a, b):
        return bool(a) and bool(b) and (rows[a[0]] >> b[0]) & 1 == 1

    masks = np.zeros(kp.n_edges, dtype=np.uint8)
    for eid, (u, w) in enumerate(zip(kp.eu.tolist(), kp.ev.tolist())):
        m = 0
        if joined(R[u], R[w]):
            m |= BB
        if joined(P[u], P[w]):
            m |= SS
        if joined(R[u], P[w]):
            m |= BS
        if joined(P[u], R[w]):
            m |= SB
        masks[eid] = m
    # vertex edges: present via the S-T bipartite block when P_v is nonempty, added otherwise
    return Configuration(kp, masks, phi)


def random_triangle_free_subgraph(kb: SidedGraph, rng, keep: float = 0.7) -> Graph:
    """Random maximal-ish triangle-free subgraph: shuffled greedy insertion."""
    e = kb.graph.edge_array()
    rows = [0] * kb.n
    chosen = []
    for i in rng.permutation(e.shape[0]).tolist():
        if rng.random() > keep:
            continue
        u, v = int(e[i, 0]), int(e[i, 1])
        if rows[u] & rows[v]:
            continue
        rows[u] |= 1 << v
        rows[v] |= 1 << u
        chosen.append((u, v))
    return Graph(kb.n, chosen)
