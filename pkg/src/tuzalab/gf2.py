"""Edge-space linear algebra over GF(2): cycle space, cut space, triangle spans.

Edge vectors are Python ints used as bitsets indexed by edge id, so XOR is
vector addition and ``popcount(a & b) % 2`` is the inner product.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InstanceTooLargeError
from .graph import EXTERNAL, Graph, SidedGraph, crossing_triangles, iter_bits

__all__ = [
    "EdgeVector",
    "F2Basis",
    "cycle_space_basis",
    "cut_space_basis",
    "induced_cycles",
    "induced_cycles_generate",
    "short_cycles",
    "short_cycles_generate",
    "cycle_vector",
    "external_triangle_space",
    "is_orthogonal",
    "GammaDecomposition",
    "decompose_gamma",
]

INDUCED_N_CAP = 16
CYCLE_COUNT_CAP = 10**6
EXACT_T_CAP = 12


@dataclass(frozen=True)
class EdgeVector:
    """A vector of the edge space; bit ``i`` is edge id ``i``."""

    bits: int
    length: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.length:
            raise ValueError("bits exceed vector length")

    @classmethod
    def from_ids(cls, ids: Iterable[int], length: int) -> "EdgeVector":
        bits = 0
        for i in ids:
            bits ^= 1 << int(i)
        return cls(bits, length)

    @classmethod
    def from_mask(cls, mask) -> "EdgeVector":
        mask = np.asarray(mask, dtype=bool)
        return cls.from_ids(np.flatnonzero(mask).tolist(), mask.shape[0])

    @classmethod
    def from_edges(cls, g: Graph, edges: Iterable[Sequence[int]]) -> "EdgeVector":
        edges = list(edges)
        if not edges:
            return cls(0, g.m)
        ids = g.edge_ids([e[0] for e in edges], [e[1] for e in edges])
        return cls.from_ids(ids.tolist(), g.m)

    @classmethod
    def from_hex(cls, text: str, length: int) -> "EdgeVector":
        return cls(int(text, 16) if text else 0, length)

    def to_hex(self) -> str:
        """Hex of the integer whose bit ``i`` is edge id ``i``."""
        return format(self.bits, "x")

    def support(self) -> list[int]:
        return list(iter_bits(self.bits))

    def weight(self) -> int:
        return self.bits.bit_count()

    def dot(self, other: "EdgeVector") -> int:
        self._check(other)
        return (self.bits & other.bits).bit_count() & 1

    def __xor__(self, other: "EdgeVector") -> "EdgeVector":
        self._check(other)
        return EdgeVector(self.bits ^ other.bits, self.length)

    __add__ = __xor__

    def _check(self, other):
        if self.length != other.length:
            raise ValueError(f"length mismatch: {self.length} vs {other.length}")


class F2Basis:
    """Reduced row-echelon basis of a subspace of GF(2)^length.

    The pivot of a row is its lowest set bit (lowest edge id); every pivot
    bit is cleared from all other rows.
    """

    def __init__(self, length: int):
        self.length = length
        self._rows: dict[int, int] = {}

    @classmethod
    def from_vectors(cls, vectors: Iterable[EdgeVector | int], length: int) -> "F2Basis":
        basis = cls(length)
        for v in vectors:
            basis.add(v)
        return basis

    def _bits(self, v: EdgeVector | int) -> int:
        if isinstance(v, EdgeVector):
            if v.length != self.length:
                raise ValueError(f"length mismatch: {v.length} vs {self.length}")
            return v.bits
        return int(v)

    def reduce(self, v: EdgeVector | int) -> int:
        x = self._bits(v)
        rows = self._rows
        y = x
        while y:
            low = y & -y
            piv = low.bit_length() - 1
            row = rows.get(piv)
            if row is not None:
                x ^= row
                y = x & ~((low << 1) - 1)
            else:
                y ^= low
        return x

    def add(self, v: EdgeVector | int) -> bool:
        """Insert ``v``; returns False when it was already in the span."""
        x = self.reduce(v)
        if not x:
            return False
        piv_bit = x & -x
        for p, row in self._rows.items():
            if row & piv_bit:
                self._rows[p] = row ^ x
        self._rows[piv_bit.bit_length() - 1] = x
        return True

    def contains(self, v: EdgeVector | int) -> bool:
        return self.reduce(v) == 0

    @property
    def dim(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> list[int]:
        return sorted(self._rows)

    @property
    def rows(self) -> list[EdgeVector]:
        return [EdgeVector(self._rows[p], self.length) for p in self.pivots]

    def spans(self, other: "F2Basis") -> bool:
        return all(self.contains(r) for r in other.rows)

    def same_span(self, other: "F2Basis") -> bool:
        return self.dim == other.dim and self.spans(other)

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"F2Basis(dim={self.dim}, length={self.length})"


def _spanning_forest(g: Graph):
    parent = [-1] * g.n
    seen = [False] * g.n
    order = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        queue = [s]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for w in iter_bits(g.rows[v]):
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    queue.append(w)
    return parent, order


def cycle_space_basis(g: Graph) -> F2Basis:
    """Fundamental cycles of a BFS spanning forest, row-reduced."""
    parent, order = _spanning_forest(g)
    root_path = [0] * g.n
    for v in order:
        if parent[v] >= 0:
            root_path[v] = root_path[parent[v]] ^ (1 << g.edge_id(v, parent[v]))
    basis = F2Basis(g.m)
    for eid, (u, v) in enumerate(g.edges()):
        if parent[u] == v or parent[v] == u:
            continue
        basis.add(root_path[u] ^ root_path[v] ^ (1 << eid))
    return basis


def cut_space_basis(g: Graph) -> F2Basis:
    """Vertex stars (cuts ``nabla(v, V - v)``), one vertex per component omitted."""
    basis = F2Basis(g.m)
    e = g.edge_array()
    for comp in g.components():
        for v in comp[1:]:
            ids = np.flatnonzero((e[:, 0] == v) | (e[:, 1] == v))
            basis.add(EdgeVector.from_ids(ids.tolist(), g.m))
    return basis


def cycle_vector(g: Graph, cycle: Sequence[int]) -> EdgeVector:
    """Indicator of a closed vertex sequence ``v0 v1 ... vk`` (edge vk v0 implied)."""
    pairs = [(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]
    return EdgeVector.from_edges(g, pairs)


def induced_cycles(g: Graph, count_cap: int = CYCLE_COUNT_CAP) -> list[list[int]]:
    """All chordless cycles, each listed once starting from its smallest vertex.

    DFS over chordless paths whose vertices exceed the start; a path closes
    when the new vertex sees the start, and direction duplicates are cut by
    requiring the second vertex to be smaller than the last.
    """
    rows = g.rows
    out: list[list[int]] = []

    def extend(path, interior_mask, path_mask):
        s, last = path[0], path[-1]
        for w in iter_bits(rows[last] & ~path_mask):
            if w <= s or rows[w] & interior_mask:
                continue
            if len(path) >= 2 and (rows[w] >> s) & 1:
                if path[1] < w:
                    out.append(path + [w])
                    if len(out) > count_cap:
                        raise InstanceTooLargeError(f"more than {count_cap} induced cycles")
                continue
            inner = interior_mask | (1 << last) if len(path) > 1 else interior_mask
            extend(path + [w], inner, path_mask | (1 << w))

    for s in range(g.n):
        extend([s], 0, 1 << s)
    return out


def induced_cycles_generate(g: Graph, n_cap: int = INDUCED_N_CAP) -> tuple[bool, list[list[int]]]:
    """Check that induced cycles span the cycle space.

    Returns ``(spans, certificate)`` where the certificate is an independent
    subset of induced cycles of size ``dim C(G)`` when ``spans`` holds.
    """
    if g.n > n_cap:
        raise InstanceTooLargeError(f"n={g.n} above induced-cycle cap {n_cap}")
    target = cycle_space_basis(g)
    span = F2Basis(g.m)
    chosen = []
    for cyc in induced_cycles(g):
        if span.add(cycle_vector(g, cyc)):
            chosen.append(cyc)
    return span.same_span(target), chosen


def short_cycles(g: Graph, length_cap: int, count_cap: int = CYCLE_COUNT_CAP) -> list[list[int]]:
    """All simple cycles of length ``<= length_cap``, each listed once."""
    rows = g.rows
    out: list[list[int]] = []

    def extend(path, path_mask):
        s, last = path[0], path[-1]
        for w in iter_bits(rows[last] & ~path_mask):
            if w <= s:
                continue
            if (rows[w] >> s) & 1 and len(path) >= 2 and path[1] < w:
                out.append(path + [w])
                if len(out) > count_cap:
                    raise InstanceTooLargeError(f"more than {count_cap} short cycles")
            if len(path) + 1 < length_cap:
                extend(path + [w], path_mask | (1 << w))

    for s in range(g.n):
        extend([s], 1 << s)
    return out


def short_cycles_generate(g: Graph, length_cap: int) -> bool:
    """True iff cycles of length ``<= length_cap`` span the cycle space."""
    if length_cap < 3:
        raise ValueError("length_cap must be at least 3")
    target = cycle_space_basis(g)
    span = F2Basis(g.m)
    for cyc in short_cycles(g, length_cap):
        span.add(cycle_vector(g, cyc))
        if span.dim == target.dim:
            break
    return span.same_span(target)


def _edge_mask(k: SidedGraph, edges) -> np.ndarray:
    """Normalize an edge subset (mask, EdgeVector, id list or pair list) to a mask."""
    m = k.graph.m
    if isinstance(edges, EdgeVector):
        mask = np.zeros(m, dtype=bool)
        mask[edges.support()] = True
        return mask
    arr = np.asarray(edges)
    if arr.dtype == bool:
        if arr.shape != (m,):
            raise ValueError("edge mask length mismatch")
        return arr
    mask = np.zeros(m, dtype=bool)
    if arr.size == 0:
        return mask
    if arr.ndim == 2:
        mask[k.graph.edge_ids(arr[:, 0], arr[:, 1])] = True
    else:
        mask[arr.astype(np.int64)] = True
    return mask


def external_triangle_space(k: SidedGraph, g_sub) -> F2Basis:
    """Span of the external triangles of ``k`` whose three edges lie in ``g_sub``."""
    mask = _edge_mask(k, g_sub)
    ts = crossing_triangles(k)
    basis = F2Basis(k.graph.m)
    for a, b, c in ts.tri_edges.tolist():
        if mask[a] and mask[b] and mask[c]:
            basis.add((1 << a) | (1 << b) | (1 << c))
    return basis


def is_orthogonal(v: EdgeVector, basis: F2Basis) -> bool:
    """True iff ``v`` has even intersection with every basis generator."""
    if v.length != basis.length:
        raise ValueError(f"length mismatch: {v.length} vs {basis.length}")
    return all((v.bits & r.bits).bit_count() % 2 == 0 for r in basis.rows)


@dataclass
class GammaDecomposition:
    ok: bool
    A: list[int] = field(default_factory=list)
    B: list[int] = field(default_factory=list)
    S: list[int] = field(default_factory=list)
    Z: list[tuple[int, int]] = field(default_factory=list)
    exact: bool = True
    reason: str = ""


def _parity_coloring(n, adj_parity, active):
    """2-colour ``active`` vertices so that colours differ exactly on odd edges.

    ``adj_parity[v]`` is a list of ``(w, parity)``.  Returns
    ``(color, comp_of, conflicts)``; ``conflicts`` holds vertices at which an
    inconsistent constraint was found.
    """
    color = [-1] * n
    comp_of = [-1] * n
    conflicts = []
    n_comp = 0
    for s in range(n):
        if not active[s] or color[s] >= 0:
            continue
        color[s] = 0
        comp_of[s] = n_comp
        stack = [s]
        while stack:
            v = stack.pop()
            for w, par in adj_parity[v]:
                if not active[w]:
                    continue
                want = color[v] ^ par
                if color[w] < 0:
                    color[w] = want
                    comp_of[w] = n_comp
                    stack.append(w)
                elif color[w] != want:
                    conflicts.append(w)
        n_comp += 1
    return color, comp_of, n_comp, conflicts


def decompose_gamma(k: SidedGraph, gamma: EdgeVector, g_edges, exact_cap: int = EXACT_T_CAP,
                    max_removed: float = 0.25) -> GammaDecomposition:
    """Search for ``A, B`` with ``Z = Gamma (+) nabla_G(A, B)`` purely external.

    Within each side the internal part of ``Gamma`` must be the cut of a
    2-colouring of that side's internal ``G``-graph; such colourings are
    unique per component up to a flip.  Component flips are then chosen to
    minimize ``|Z|``: exhaustively over X-side flips (Y-side flips decouple
    once X is fixed) when ``t <= exact_cap``, by alternating best response
    otherwise.  Above the cap, parity conflicts are resolved by moving
    conflicting vertices into ``S``; ``Z`` is then reported on ``K - S``.
    """
    g_mask = _edge_mask(k, g_edges)
    gamma_mask = _edge_mask(k, gamma)
    if np.any(gamma_mask & ~g_mask):
        raise ValueError("gamma must be supported on g_edges")
    n, t = k.n, k.n_x
    exact = t <= exact_cap
    e = k.graph.edge_array()
    types = k.edge_type
    internal_ids = np.flatnonzero(g_mask & (types != EXTERNAL)).tolist()
    external_ids = np.flatnonzero(g_mask & (types == EXTERNAL)).tolist()
    adj = [[] for _ in range(n)]
    for i in internal_ids:
        u, v = int(e[i, 0]), int(e[i, 1])
        par = int(gamma_mask[i])
        adj[u].append((v, par))
        adj[v].append((u, par))

    active = [True] * n
    removed: list[int] = []
    while True:
        color, comp_of, n_comp, conflicts = _parity_coloring(n, adj, active)
        if not conflicts:
            break
        if exact:
            return GammaDecomposition(False, exact=True,
                                      reason="internal part of gamma is not a cut of G on its side")
        v = conflicts[0]
        active[v] = False
        removed.append(v)
        if len(removed) > max_removed * n:
            return GammaDecomposition(False, S=sorted(removed), exact=False,
                                      reason="too many parity conflicts")

    comp_side = [0] * n_comp
    for v in range(n):
        if active[v]:
            comp_side[comp_of[v]] = int(k.side[v])
    # cost terms: external G-edge between comps (cx, cy) mismatches when
    # gamma_bit != (col_u ^ col_v ^ f_cx ^ f_cy)
    terms = []
    for i in external_ids:
        u, v = int(e[i, 0]), int(e[i, 1])
        if not (active[u] and active[v]):
            continue
        cu, cv = comp_of[u], comp_of[v]
        if comp_side[cu] == 1:
            cu, cv = cv, cu
        terms.append((cu, cv, int(gamma_mask[i]) ^ color[u] ^ color[v]))
    x_comps = [c for c in range(n_comp) if comp_side[c] == 0]
    y_comps = [c for c in range(n_comp) if comp_side[c] == 1]
    x_pos = {c: i for i, c in enumerate(x_comps)}
    y_pos = {c: i for i, c in enumerate(y_comps)}
    by_y = [[] for _ in y_comps]
    by_x = [[] for _ in x_comps]
    for cx, cy, want in terms:
        by_y[y_pos[cy]].append((x_pos[cx], want))
        by_x[x_pos[cx]].append((y_pos[cy], want))

    def best_y(fx):
        fy, cost = [], 0
        for lst in by_y:
            c0 = sum(1 for xi, want in lst if (fx[xi] ^ 0) != want)
            c1 = len(lst) - c0
            fy.append(0 if c0 <= c1 else 1)
            cost += min(c0, c1)
        return fy, cost

    def best_x(fy):
        fx = []
        for lst in by_x:
            c0 = sum(1 for yi, want in lst if fy[yi] != want)
            fx.append(0 if c0 <= len(lst) - c0 else 1)
        return fx

    if exact:
        best = None
        free = x_comps[1:]  # global flip symmetry: fix the first X component
        for bits in itertools.product((0, 1), repeat=len(free)):
            fx = [0] + list(bits) if x_comps else []
            fy, cost = best_y(fx)
            if best is None or cost < best[0]:
                best = (cost, fx, fy)
        if best is None:
            fy, cost = best_y([])
            best = (cost, [], fy)
        _, fx, fy = best
    else:
        best = None
        rng = np.random.default_rng(0)
        for start in range(8):
            fx = [0] * len(x_comps) if start == 0 else rng.integers(0, 2, len(x_comps)).tolist()
            prev = None
            while True:
                fy, cost = best_y(fx)
                if prev is not None and cost >= prev:
                    break
                prev = cost
                fx = best_x(fy)
            if best is None or prev < best[0]:
                best = (prev, fx, best_y(fx)[0])
        _, fx, fy = best

    flip = [0] * n_comp
    for c, f in zip(x_comps, fx):
        flip[c] = f
    for c, f in zip(y_comps, fy):
        flip[c] = f
    A, B = [], []
    final = [-1] * n
    for v in range(n):
        if active[v]:
            final[v] = color[v] ^ flip[comp_of[v]]
            (A if final[v] == 0 else B).append(v)
    Z = []
    for i in np.flatnonzero(g_mask | gamma_mask).tolist():
        u, v = int(e[i, 0]), int(e[i, 1])
        if not (active[u] and active[v]):
            continue
        in_cut = bool(g_mask[i]) and final[u] != final[v]
        if bool(gamma_mask[i]) != in_cut:
            Z.append((u, v))
    z_ids = k.graph.edge_ids([u for u, _ in Z], [v for _, v in Z]) if Z else np.empty(0, int)
    if np.any(types[z_ids] != EXTERNAL):
        raise AssertionError("decomposition produced an internal Z edge")
    return GammaDecomposition(True, A, B, sorted(removed), Z, exact)
