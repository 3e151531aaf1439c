"""Input coercion for the estimator wrappers."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_scalar
from sklearn.utils.validation import check_array

from .graph import Graph, SidedGraph


def check_graph(X) -> Graph:
    """Accept a ``Graph``, a ``SidedGraph`` or a symmetric 0/1 adjacency matrix."""
    if isinstance(X, SidedGraph):
        return X.graph
    if isinstance(X, Graph):
        return X
    a = check_array(X, dtype=None, ensure_min_samples=1, ensure_min_features=1)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got shape {a.shape}")
    if not np.isin(a, (0, 1)).all():
        raise ValueError("adjacency matrix entries must be 0 or 1")
    if not np.array_equal(a, a.T) or np.any(np.diag(a)):
        raise ValueError("adjacency matrix must be symmetric with a zero diagonal")
    return Graph.from_adjacency(a)


def check_unit(value, name: str, *, closed: str = "both") -> float:
    return float(check_scalar(value, name, numbers.Real, min_val=0.0, max_val=1.0, include_boundaries=closed))


def check_positive_int(value, name: str) -> int:
    return int(check_scalar(value, name, numbers.Integral, min_val=1))


def check_seed(value) -> int:
    return int(check_scalar(value, "seed", numbers.Integral, min_val=0))
