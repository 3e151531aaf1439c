"""Graph spectra, expander mixing checks and the weighted matrices N and T.

``N`` is the weighted adjacency matrix of the double ``K = K_{H,H}`` with
internal weight ``p = (1-c)/(2td)`` and external weight ``q = (1-c)/(2t^2)``;
``T`` is the adjacency matrix of an external edge set ``Z``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .eigen import symmetric_eigenvalues
from .errors import InstanceTooLargeError
from .generators import (
    cayley_graph,
    hoffman_singleton_graph,
    petersen_graph,
    prime_power,
    projective_incidence_graph,
)
from .graph import EXTERNAL, Graph, SidedGraph, double, enumerate_triangles, iter_bits

__all__ = [
    "DENSE_CAP",
    "Spectrum",
    "MixingReport",
    "WeightedKMatrix",
    "eigen_spectrum",
    "check_mixing",
    "n_matrix_spectrum_closed_form",
    "t_matrix_row_bound",
    "shifted_min_eigenvalue",
    "FAMILIES",
    "generate_triangle_free_expander",
    "spectrum_to_csv",
]

DENSE_CAP = 4096
EIG_TOL = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order plus the derived expansion data.

    ``lambda_max_nontrivial`` is ``max_{i>1} |lambda_i|``.  For bipartite
    graphs that is always ``d``; ``lambda_bipartite`` additionally drops
    the forced eigenvalue ``-d``.
    """

    eigenvalues: tuple[float, ...]
    degree: int | None = None
    bipartite: bool = False

    @property
    def lambda_max_nontrivial(self) -> float:
        if len(self.eigenvalues) < 2:
            return 0.0
        return max(abs(x) for x in self.eigenvalues[1:])

    @property
    def lambda_bipartite(self) -> float:
        vals = self.eigenvalues[1:-1] if self.bipartite else self.eigenvalues[1:]
        return max((abs(x) for x in vals), default=0.0)

    @property
    def connected(self) -> bool:
        """For a regular graph: top eigenvalue is simple."""
        return len(self.eigenvalues) < 2 or self.eigenvalues[0] - self.eigenvalues[1] > EIG_TOL


def _is_bipartite(g: Graph) -> bool:
    color = [-1] * g.n
    for s in range(g.n):
        if color[s] >= 0:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            v = stack.pop()
            for w in iter_bits(g.rows[v]):
                if color[w] < 0:
                    color[w] = 1 - color[v]
                    stack.append(w)
                elif color[w] == color[v]:
                    return False
    return True


def eigen_spectrum(g: Graph, cap: int = DENSE_CAP) -> Spectrum:
    """Full dense eigensolve of the adjacency matrix of ``g``."""
    if g.n > cap:
        raise InstanceTooLargeError(f"n={g.n} exceeds dense eigensolver cap {cap}")
    vals = symmetric_eigenvalues(g.adjacency_matrix())
    return Spectrum(tuple(float(x) for x in vals), g.regular_degree(), _is_bipartite(g))


@dataclass(frozen=True)
class MixingReport:
    trials: int
    violations: int
    min_slack_cut: float
    min_slack_inside: float
    max_ratio: float
    witnesses: list = field(default_factory=list)


def check_mixing(h: Graph, spectrum: Spectrum, trials: int, seed: int) -> MixingReport:
    """Test both expander-mixing inequalities on random disjoint pairs (A, B).

    ``max_ratio`` is the largest observed ``|deviation| / bound`` over both
    inequalities (0/0 counts as 0); a violation is a ratio above 1 beyond
    floating-point noise.
    """
    d = h.regular_degree()
    if d is None:
        raise ValueError("check_mixing needs a regular graph")
    t = h.n
    lam = spectrum.lambda_max_nontrivial
    rng = np.random.default_rng(seed)
    rows = h.rows
    violations = 0
    min_cut = min_in = math.inf
    max_ratio = 0.0
    witnesses = []
    for _ in range(trials):
        perm = rng.permutation(t)
        a = int(rng.integers(0, t + 1))
        b = int(rng.integers(0, t - a + 1))
        A, B = perm[:a], perm[a : a + b]
        mask_a = sum(1 << int(v) for v in A)
        mask_b = sum(1 << int(v) for v in B)
        cut = sum((rows[int(v)] & mask_b).bit_count() for v in A)
        inside = sum((rows[int(v)] & mask_a).bit_count() for v in A) // 2
        dev_cut = abs(cut - a * b * d / t)
        dev_in = abs(inside - a * a * d / (2 * t))
        bound_cut = lam * math.sqrt(a * b)
        bound_in = lam * a / 2
        slack_cut, slack_in = bound_cut - dev_cut, bound_in - dev_in
        min_cut = min(min_cut, slack_cut)
        min_in = min(min_in, slack_in)
        for dev, bound in ((dev_cut, bound_cut), (dev_in, bound_in)):
            if bound > 0:
                max_ratio = max(max_ratio, dev / bound)
        if slack_cut < -1e-9 or slack_in < -1e-9:
            violations += 1
            witnesses.append((sorted(int(v) for v in A), sorted(int(v) for v in B)))
    return MixingReport(trials, violations, min_cut, min_in, max_ratio, witnesses)


@dataclass(frozen=True)
class WeightedKMatrix:
    """Weights of the matrix ``N`` on ``base = K_{H,H}`` (and optional ``Z``)."""

    t: int
    p: float
    q: float
    base: SidedGraph
    z_edges: tuple[tuple[int, int], ...] | None = None

    @classmethod
    def from_c(cls, h: Graph, c: float, z_edges=None) -> "WeightedKMatrix":
        d = h.regular_degree()
        if d is None or d == 0:
            raise ValueError("H must be regular with positive degree")
        t = h.n
        return cls(t, (1 - c) / (2 * t * d), (1 - c) / (2 * t * t), double(h), z_edges)

    def n_matrix(self) -> np.ndarray:
        """Dense ``[[pC, qJ], [qJ, pC]]``."""
        t = self.t
        a = self.base.graph.adjacency_matrix()
        w = np.where(self.base.side[:, None] == self.base.side[None, :], self.p, self.q)
        out = a * w
        out[np.arange(2 * t), np.arange(2 * t)] = 0.0
        return out

    def t_matrix(self) -> np.ndarray:
        out = np.zeros((2 * self.t, 2 * self.t))
        for u, v in self.z_edges or ():
            out[u, v] = out[v, u] = 1.0
        return out


def n_matrix_spectrum_closed_form(wk: WeightedKMatrix, h_spectrum: Spectrum) -> Spectrum:
    """Eigenvalues of N from those of H via the eigenbasis ``2^{-1/2}(w, +-w)``.

    They are ``pd + qt``, ``pd - qt`` and ``p*lambda_i`` twice for ``i >= 2``.
    """
    d = h_spectrum.degree
    if d is None:
        raise ValueError("closed form requires a regular H")
    if not h_spectrum.connected:
        raise ValueError("closed form requires a connected H")
    vals = [wk.p * d + wk.q * wk.t, wk.p * d - wk.q * wk.t]
    for lam in h_spectrum.eigenvalues[1:]:
        vals.extend([wk.p * lam, wk.p * lam])
    return Spectrum(tuple(sorted(vals, reverse=True)))


def t_matrix_row_bound(k: SidedGraph, z_edges) -> int:
    """Max degree of the external edge set ``Z`` (bounds every eigenvalue of T)."""
    z = [(int(u), int(v)) for u, v in z_edges]
    if not z:
        return 0
    ids = k.graph.edge_ids([u for u, _ in z], [v for _, v in z])
    if np.any(k.edge_type[ids] != EXTERNAL):
        raise ValueError("Z may contain only external edges")
    deg = np.zeros(k.n, dtype=np.int64)
    for u, v in z:
        deg[u] += 1
        deg[v] += 1
    return int(deg.max())


def shifted_min_eigenvalue(h: Graph, c: float, shift: float = 0.33,
                           h_spectrum: Spectrum | None = None) -> dict:
    """Smallest eigenvalue of ``N + (shift*c/t) I`` and the sufficient condition.

    The condition ``(1-c) * lambda / (2td) < shift*c/t`` guarantees
    positivity; the eigenvalue itself is computed from the closed form.
    """
    spec = h_spectrum or eigen_spectrum(h)
    wk = WeightedKMatrix.from_c(h, c)
    closed = n_matrix_spectrum_closed_form(wk, spec)
    t, d = h.n, spec.degree
    lam = spec.lambda_max_nontrivial
    sufficient = (1 - c) * lam / (2 * t * d) < shift * c / t
    min_eig = min(closed.eigenvalues) + shift * c / t
    return {"min_eigenvalue": min_eig, "positive": min_eig > 0, "condition_holds": sufficient}


# -- generator registry -------------------------------------------------------

def _petersen(**_):
    return petersen_graph()


def _hoffman_singleton(**_):
    return hoffman_singleton_graph()


def _projective_incidence(q=None, **_):
    if q is None or prime_power(int(q)) is None:
        raise ValueError(f"projective_incidence needs a prime power q, got {q!r}")
    return projective_incidence_graph(int(q))


def _cayley_custom(n=None, generators=None, **_):
    if n is None or generators is None:
        raise ValueError("cayley_custom needs n and generators")
    if isinstance(generators, str):
        generators = [int(x) for x in generators.replace(",", " ").split()]
    return cayley_graph(int(n), generators)


FAMILIES: dict[str, Callable[..., Graph]] = {
    "petersen": _petersen,
    "hoffman_singleton": _hoffman_singleton,
    "projective_incidence": _projective_incidence,
    "cayley_custom": _cayley_custom,
}


def generate_triangle_free_expander(family: str, **params) -> tuple[Graph, Spectrum]:
    """Build a registered family member and verify it is triangle-free and regular."""
    try:
        builder = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    g = builder(**params)
    if len(enumerate_triangles(g)):
        raise ValueError(f"{family} instance {params} is not triangle-free")
    if g.regular_degree() is None:
        raise ValueError(f"{family} instance {params} is not regular")
    return g, eigen_spectrum(g)


def spectrum_to_csv(spectrum: Spectrum, path: str | Path | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "eigenvalue"])
    for i, x in enumerate(spectrum.eigenvalues):
        writer.writerow([i, repr(float(x))])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
