"""Dense bitset graphs, sided doubles, blowups and triangle systems.

Vertices are ``0..n-1``.  Each adjacency row is a Python ``int`` used as a
bitset, and the edge list is kept in lexicographic ``(u, v)`` order with
``u < v``; the position of an edge in that list is its *edge id*.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import GraphSizeError

__all__ = [
    "MAX_VERTICES",
    "INTERNAL",
    "EXTERNAL",
    "VERTEX",
    "Graph",
    "SidedGraph",
    "TriangleSystem",
    "iter_bits",
    "lex_product",
    "double",
    "blowup",
    "random_subgraph",
    "edge_uniforms",
    "enumerate_triangles",
    "crossing_triangles",
    "complete_graph",
    "empty_graph",
    "path_graph",
    "cycle_graph",
    "complete_bipartite_graph",
    "random_graph",
    "write_graph",
    "read_graph",
]

MAX_VERTICES = 1 << 20

INTERNAL, EXTERNAL, VERTEX = 0, 1, 2
_TYPE_TOKENS = {INTERNAL: "i", EXTERNAL: "e", VERTEX: "x"}
_TOKEN_TYPES = {v: k for k, v in _TYPE_TOKENS.items()}

_ROW_CHUNK = 2048


def iter_bits(x: int) -> Iterator[int]:
    """Yield the positions of the set bits of ``x`` in ascending order."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _rows_from_edges(n: int, eu: np.ndarray, ev: np.ndarray) -> tuple[int, ...]:
    rows: list[int] = []
    if n == 0:
        return ()
    src = np.concatenate([eu, ev])
    dst = np.concatenate([ev, eu])
    order = np.argsort(src, kind="stable")
    src, dst = src[order], dst[order]
    bounds = np.searchsorted(src, np.arange(n + 1))
    if src.size * 64 < n * n:
        # sparse: build each row from its neighbour list
        dst_list = dst.tolist()
        b = bounds.tolist()
        for v in range(n):
            row = 0
            for w in dst_list[b[v] : b[v + 1]]:
                row |= 1 << w
            rows.append(row)
        return tuple(rows)
    for start in range(0, n, _ROW_CHUNK):
        stop = min(n, start + _ROW_CHUNK)
        block = np.zeros((stop - start, n), dtype=bool)
        lo, hi = bounds[start], bounds[stop]
        block[src[lo:hi] - start, dst[lo:hi]] = True
        packed = np.packbits(block, axis=1, bitorder="little")
        rows.extend(int.from_bytes(r.tobytes(), "little") for r in packed)
    return tuple(rows)


class Graph:
    """Simple undirected graph with dense adjacency-bitset rows.

    Instances are immutable.  ``edges`` may be any iterable of vertex pairs
    or an ``(m, 2)`` integer array; duplicates and orientation are
    normalized, self-loops are rejected.
    """

    __slots__ = ("n", "rows", "_eu", "_ev", "_keys", "__weakref__")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] | np.ndarray = ()):
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        if n > MAX_VERTICES:
            raise GraphSizeError(f"{n} vertices exceeds MAX_VERTICES={MAX_VERTICES}")
        if not isinstance(edges, np.ndarray):
            edges = list(edges)
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if arr.size:
            if arr.min() < 0 or arr.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(arr[:, 0] == arr[:, 1]):
                raise ValueError("self-loops are not allowed")
        u = np.minimum(arr[:, 0], arr[:, 1])
        v = np.maximum(arr[:, 0], arr[:, 1])
        keys = np.unique(u * n + v) if n else np.empty(0, dtype=np.int64)
        eu, ev = (keys // n, keys % n) if n else (keys, keys)
        for a in (keys, eu, ev):
            a.setflags(write=False)
        object.__setattr__(self, "_keys", keys)
        object.__setattr__(self, "_eu", eu)
        object.__setattr__(self, "_ev", ev)
        object.__setattr__(self, "rows", _rows_from_edges(n, eu, ev))
        object.__setattr__(self, "n", n)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    def __reduce__(self):
        return (Graph, (self.n, self.edge_array()))

    # -- basic queries -------------------------------------------------
    @property
    def m(self) -> int:
        return int(self._keys.shape[0])

    edge_count = m

    def edge_array(self) -> np.ndarray:
        """Read-only ``(m, 2)`` array of edges in edge-id order."""
        out = np.stack([self._eu, self._ev], axis=1) if self.m else np.empty((0, 2), np.int64)
        out.setflags(write=False)
        return out

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self._eu.tolist(), self._ev.tolist()))

    def edge_keys(self) -> np.ndarray:
        return self._keys

    def edge_ids(self, us, vs) -> np.ndarray:
        """Vectorized edge-id lookup; raises ``KeyError`` for non-edges."""
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        keys = np.minimum(us, vs) * self.n + np.maximum(us, vs)
        idx = np.searchsorted(self._keys, keys)
        ok = idx < self.m
        ok[ok] = self._keys[idx[ok]] == keys[ok]
        if not np.all(ok):
            raise KeyError("pair is not an edge")
        return idx

    def edge_id(self, u: int, v: int) -> int:
        return int(self.edge_ids([u], [v])[0])

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and bool((self.rows[u] >> v) & 1)

    def neighbors(self, v: int) -> list[int]:
        return list(iter_bits(self.rows[v]))

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self._eu, 1)
        np.add.at(deg, self._ev, 1)
        return deg

    def regular_degree(self) -> int | None:
        """Common degree if the graph is regular, else ``None``."""
        deg = self.degrees()
        if self.n == 0 or np.any(deg != deg[0]):
            return None
        return int(deg[0])

    def adjacency_matrix(self, dtype=float) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=dtype)
        a[self._eu, self._ev] = 1
        a[self._ev, self._eu] = 1
        return a

    @classmethod
    def from_adjacency(cls, matrix) -> "Graph":
        a = np.asarray(matrix)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency matrix must be square")
        if not np.array_equal(a != 0, (a != 0).T):
            raise ValueError("adjacency matrix must be symmetric")
        u, v = np.nonzero(np.triu(a != 0, 1))
        return cls(a.shape[0], np.stack([u, v], axis=1))

    def edge_subgraph(self, mask) -> "Graph":
        """Spanning subgraph keeping the edges selected by a boolean mask."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.m,):
            raise ValueError("mask length must equal the edge count")
        return Graph(self.n, self.edge_array()[mask])

    def induced_subgraph(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph relabelled to ``0..k-1``; returns it with the old ids."""
        keep = sorted(set(int(v) for v in vertices))
        mask = np.zeros(self.n, dtype=bool)
        mask[keep] = True
        sel = mask[self._eu] & mask[self._ev]
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        e = np.stack([remap[self._eu[sel]], remap[self._ev[sel]]], axis=1)
        return Graph(len(keep), e), keep

    def components(self) -> list[list[int]]:
        """Connected components, each sorted, ordered by smallest vertex."""
        seen = 0
        comps = []
        for s in range(self.n):
            if (seen >> s) & 1:
                continue
            comp = 1 << s
            frontier = comp
            while frontier:
                nxt = 0
                for v in iter_bits(frontier):
                    nxt |= self.rows[v]
                frontier = nxt & ~comp
                comp |= frontier
            seen |= comp
            comps.append(list(iter_bits(comp)))
        return comps

    def bfs_distances(self, source: int) -> list[int]:
        dist = [-1] * self.n
        dist[source] = 0
        reached = 1 << source
        frontier = reached
        level = 0
        while frontier:
            level += 1
            nxt = 0
            for v in iter_bits(frontier):
                nxt |= self.rows[v]
            frontier = nxt & ~reached
            reached |= frontier
            for v in iter_bits(frontier):
                dist[v] = level
        return dist

    def diameter(self) -> float:
        """Largest finite distance; ``inf`` for disconnected graphs."""
        best = 0
        for s in range(self.n):
            dist = self.bfs_distances(s)
            if min(dist) < 0:
                return float("inf")
            best = max(best, max(dist))
        return best

    # -- dunder --------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._keys, other._keys)

    def __hash__(self):
        return hash((self.n, self._keys.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True, eq=False)
class SidedGraph:
    """A graph whose vertices ``< n_x`` form side X and the rest side Y.

    ``block_of`` maps each vertex to its blowup block when the graph came
    from :func:`blowup`; edges inside a block are *vertex* edges.
    """

    graph: Graph
    n_x: int
    block_of: np.ndarray | None = None
    origin: Mapping | None = field(default=None)

    def __post_init__(self):
        if not 0 <= self.n_x <= self.graph.n:
            raise ValueError("n_x must lie in [0, n]")
        if self.block_of is not None:
            blocks = np.asarray(self.block_of, dtype=np.int64)
            if blocks.shape != (self.graph.n,):
                raise ValueError("block_of must have one entry per vertex")
            side = self.side
            for b in np.unique(blocks):
                if np.unique(side[blocks == b]).size > 1:
                    raise ValueError("a block may not straddle both sides")
            blocks.setflags(write=False)
            object.__setattr__(self, "block_of", blocks)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def t(self) -> int:
        """Side size (number of X vertices)."""
        return self.n_x

    @cached_property
    def side(self) -> np.ndarray:
        """0 for X, 1 for Y."""
        s = (np.arange(self.graph.n) >= self.n_x).astype(np.int8)
        s.setflags(write=False)
        return s

    @cached_property
    def edge_type(self) -> np.ndarray:
        """Per-edge code: ``INTERNAL``, ``EXTERNAL`` or ``VERTEX``."""
        e = self.graph.edge_array()
        side = self.side
        types = np.where(side[e[:, 0]] != side[e[:, 1]], EXTERNAL, INTERNAL).astype(np.uint8)
        if self.block_of is not None and e.shape[0]:
            types[self.block_of[e[:, 0]] == self.block_of[e[:, 1]]] = VERTEX
        types.setflags(write=False)
        return types

    def type_counts(self) -> dict[str, int]:
        counts = np.bincount(self.edge_type, minlength=3)
        return {"internal": int(counts[0]), "external": int(counts[1]), "vertex": int(counts[2])}

    def with_graph(self, graph: Graph, **origin_updates) -> "SidedGraph":
        origin = dict(self.origin or {})
        origin.update(origin_updates)
        return SidedGraph(graph, self.n_x, self.block_of, origin)

    def __repr__(self):
        return f"SidedGraph(n={self.n}, m={self.graph.m}, n_x={self.n_x}, blocks={self.block_of is not None})"


@dataclass(frozen=True, eq=False)
class TriangleSystem:
    """All triangles of a graph with an edge-incidence index.

    ``triangles`` is a ``(T, 3)`` array of ascending vertex triples in
    lexicographic order; ``tri_edges`` holds the three edge ids of each.
    """

    n_edges: int
    triangles: np.ndarray
    tri_edges: np.ndarray

    @cached_property
    def edge_to_triangles(self) -> tuple[tuple[int, ...], ...]:
        buckets: list[list[int]] = [[] for _ in range(self.n_edges)]
        for tid, (a, b, c) in enumerate(self.tri_edges.tolist()):
            buckets[a].append(tid)
            buckets[b].append(tid)
            buckets[c].append(tid)
        return tuple(tuple(b) for b in buckets)

    def __len__(self):
        return int(self.triangles.shape[0])

    def triangle_list(self) -> list[tuple[int, int, int]]:
        return [tuple(t) for t in self.triangles.tolist()]

    def incidence_matrix(self) -> np.ndarray:
        """Dense ``(n_edges, T)`` 0/1 edge-triangle incidence."""
        a = np.zeros((self.n_edges, len(self)), dtype=float)
        if len(self):
            cols = np.repeat(np.arange(len(self)), 3)
            a[self.tri_edges.ravel(), cols] = 1.0
        return a


# -- constructions ------------------------------------------------------

def lex_product(g1: Graph, g2: Graph) -> Graph:
    """Lexicographic product ``g1 . g2``; vertex ``(u1, u2)`` gets id ``u1*n2 + u2``."""
    n1, n2 = g1.n, g2.n
    if n1 == 0 or n2 == 0:
        raise ValueError("lexicographic product needs two nonempty graphs")
    if n1 * n2 > MAX_VERTICES:
        raise GraphSizeError(f"product has {n1 * n2} vertices, above MAX_VERTICES")
    e1, e2 = g1.edge_array(), g2.edge_array()
    ii, jj = np.divmod(np.arange(n2 * n2), n2)
    outer_u = (e1[:, :1] * n2 + ii[None, :]).ravel()
    outer_v = (e1[:, 1:] * n2 + jj[None, :]).ravel()
    base = np.arange(n1, dtype=np.int64)[:, None] * n2
    inner_u = (base + e2[None, :, 0]).ravel()
    inner_v = (base + e2[None, :, 1]).ravel()
    us = np.concatenate([outer_u, inner_u])
    vs = np.concatenate([outer_v, inner_v])
    return Graph(n1 * n2, np.stack([us, vs], axis=1))


def double(h: Graph) -> SidedGraph:
    """The double ``K_{H,H} = K2 . H``: X is ``0..t-1``, Y is ``t..2t-1``."""
    g = lex_product(complete_graph(2), h)
    return SidedGraph(g, h.n, None, {"kind": "double", "t": h.n, "h_edges": h.m})


def blowup(k: SidedGraph, a: int) -> SidedGraph:
    """Replace every vertex of ``k`` by a clique of size ``a`` (``K . K_a``)."""
    if int(a) != a or a < 1:
        raise ValueError("blowup size must be a positive integer")
    a = int(a)
    g = lex_product(k.graph, complete_graph(a))
    origin = dict(k.origin or {})
    origin.update(kind="blowup", a=a)
    block_of = np.arange(g.n, dtype=np.int64) // a
    if k.block_of is not None:
        block_of = np.asarray(k.block_of)[block_of]
    return SidedGraph(g, k.n_x * a, block_of, origin)


_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
        z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
        z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
        return z ^ (z >> np.uint64(31))


def edge_uniforms(seed: int, us, vs) -> np.ndarray:
    """Uniform [0, 1) draw per edge, a pure function of ``(seed, u, v)``.

    Each edge has its own counter-based stream (SplitMix64 over the seed and
    the endpoint pair), so the draws do not depend on iteration order.
    """
    us = np.asarray(us, dtype=np.uint64)
    vs = np.asarray(vs, dtype=np.uint64)
    lo, hi = np.minimum(us, vs), np.maximum(us, vs)
    seed_mix = _splitmix64(np.array([int(seed) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))[0]
    key = (lo << np.uint64(32)) | hi
    h = _splitmix64(_splitmix64(key ^ seed_mix))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def random_subgraph(k_blow: SidedGraph, p: float, q: float, seed: int) -> SidedGraph:
    """Keep internal edges w.p. ``p``, external w.p. ``q``, all vertex edges."""
    if k_blow.block_of is None:
        raise ValueError("random_subgraph needs a blowup (block_of missing)")
    for name, val in (("p", p), ("q", q)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name}={val} is not a probability")
    e = k_blow.graph.edge_array()
    types = k_blow.edge_type
    u = edge_uniforms(seed, e[:, 0], e[:, 1])
    keep = (types == VERTEX) | ((types == INTERNAL) & (u < p)) | ((types == EXTERNAL) & (u < q))
    g = Graph(k_blow.n, e[keep])
    return k_blow.with_graph(g, p=float(p), q=float(q), seed=int(seed))


# -- triangles ------------------------------------------------------------

def _triangle_triples(g: Graph) -> list[tuple[int, int, int]]:
    rows = g.rows
    out = []
    for u in range(g.n):
        ru = rows[u]
        for v in iter_bits(ru >> (u + 1)):
            v += u + 1
            common = (ru & rows[v]) >> (v + 1)
            for w in iter_bits(common):
                out.append((u, v, w + v + 1))
    return out


def _system(g: Graph, triples: list[tuple[int, int, int]]) -> TriangleSystem:
    tri = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    if tri.shape[0]:
        te = np.stack(
            [g.edge_ids(tri[:, 0], tri[:, 1]), g.edge_ids(tri[:, 0], tri[:, 2]), g.edge_ids(tri[:, 1], tri[:, 2])],
            axis=1,
        )
    else:
        te = np.empty((0, 3), dtype=np.int64)
    tri.setflags(write=False)
    te.setflags(write=False)
    return TriangleSystem(g.m, tri, te)


def enumerate_triangles(g: Graph) -> TriangleSystem:
    """Complete, duplicate-free triangle list via row-bitset intersection."""
    return _system(g, _triangle_triples(g))


def crossing_triangles(k: SidedGraph) -> TriangleSystem:
    """Triangles meeting both sides, i.e. those containing an external edge."""
    t = k.n_x
    triples = [tr for tr in _triangle_triples(k.graph) if tr[0] < t <= tr[2]]
    return _system(k.graph, triples)


# -- simple families --------------------------------------------------------

def complete_graph(n: int) -> Graph:
    u, v = np.triu_indices(n, 1)
    return Graph(n, np.stack([u, v], axis=1))


def empty_graph(n: int) -> Graph:
    return Graph(n)


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_bipartite_graph(a: int, b: int) -> Graph:
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def random_graph(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi ``G(n, p)`` from a seeded PCG64 stream."""
    rng = np.random.default_rng(seed)
    u, v = np.triu_indices(n, 1)
    keep = rng.random(u.shape[0]) < p
    return Graph(n, np.stack([u[keep], v[keep]], axis=1))


# -- text format ------------------------------------------------------------

def _format(obj: Graph | SidedGraph) -> str:
    buf = io.StringIO()
    if isinstance(obj, SidedGraph):
        g = obj.graph
        buf.write(f"sides: {obj.n_x}\n")
        if obj.block_of is not None:
            sizes = np.bincount(obj.block_of)
            if sizes.size and np.all(sizes == sizes[0]) and np.array_equal(
                obj.block_of, np.arange(g.n) // sizes[0]
            ):
                buf.write(f"blocks: {int(sizes[0])}\n")
        types = obj.edge_type
    else:
        g, types = obj, None
    buf.write(f"{g.n} {g.m}\n")
    for i, (u, v) in enumerate(g.edges()):
        if types is None:
            buf.write(f"{u} {v}\n")
        else:
            buf.write(f"{u} {v} {_TYPE_TOKENS[int(types[i])]}\n")
    return buf.getvalue()


def write_graph(obj: Graph | SidedGraph, path: str | Path | None = None) -> str:
    """Serialize to the plain ``n m`` / ``u v [i|e|x]`` text format."""
    text = _format(obj)
    if path is not None:
        Path(path).write_text(text)
    return text


def read_graph(source: str | Path) -> Graph | SidedGraph:
    """Parse the text format from a path or a string containing newlines."""
    if isinstance(source, Path) or "\n" not in str(source):
        text = Path(source).read_text()
    else:
        text = str(source)
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    sides = blocks = None
    while lines and ":" in lines[0]:
        key, val = (s.strip() for s in lines.pop(0).split(":", 1))
        if key == "sides":
            sides = int(val)
        elif key == "blocks":
            blocks = int(val)
        else:
            raise ValueError(f"unknown header {key!r}")
    n, m = (int(x) for x in lines[0].split())
    body = [ln.split() for ln in lines[1:]]
    if len(body) != m:
        raise ValueError(f"header promises {m} edges, found {len(body)}")
    edges = [(int(r[0]), int(r[1])) for r in body]
    g = Graph(n, edges)
    if g.m != m:
        raise ValueError("duplicate edges in input")
    if sides is None:
        return g
    block_of = None
    if blocks is not None:
        block_of = np.arange(n) // blocks
    elif any(len(r) > 2 and r[2] == "x" for r in body):
        vertex_edges = [e for e, r in zip(edges, body) if len(r) > 2 and r[2] == "x"]
        comps = Graph(n, vertex_edges).components()
        block_of = np.empty(n, dtype=np.int64)
        for i, comp in enumerate(comps):
            block_of[comp] = i
    sg = SidedGraph(g, sides, block_of)
    declared = {(int(r[0]), int(r[1])) if int(r[0]) < int(r[1]) else (int(r[1]), int(r[0])): r[2]
                for r in body if len(r) > 2}
    if declared:
        for (u, v), ty in zip(g.edges(), sg.edge_type):
            tok = declared.get((u, v))
            if tok is not None and _TOKEN_TYPES[tok] != int(ty):
                raise ValueError(f"edge {u} {v} declared {tok!r} but is {_TYPE_TOKENS[int(ty)]!r}")
    return sg
