"""Dense symmetric eigenvalues: Householder tridiagonalization + implicit QL."""

from __future__ import annotations

import math

import numpy as np

from .errors import TuzaLabError

__all__ = ["tridiagonalize", "tridiagonal_eigenvalues", "symmetric_eigenvalues"]

_MAX_QL_SWEEPS = 60


def tridiagonalize(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduce a symmetric matrix to tridiagonal form by Householder reflections.

    Returns the diagonal ``d`` (length n) and sub-diagonal ``e`` (length n-1)
    of a tridiagonal matrix orthogonally similar to ``a``.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1 :, k]
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        alpha = -math.copysign(norm, x[0])
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        sub = a[k + 1 :, k + 1 :]
        p = sub @ v
        w = p - (v @ p) * v
        sub -= 2.0 * (np.outer(v, w) + np.outer(w, v))
        a[k + 1, k] = a[k, k + 1] = alpha
        a[k + 2 :, k] = 0.0
        a[k, k + 2 :] = 0.0
    d = np.diag(a).copy()
    e = np.diag(a, -1).copy()
    return d, e


def tridiagonal_eigenvalues(d, e) -> np.ndarray:
    """Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL.

    Wilkinson-style shift, as in the classic ``tqli`` routine.  Output is
    sorted descending.
    """
    d = [float(x) for x in d]
    n = len(d)
    e = [float(x) for x in e] + [0.0]
    if len(e) != n:
        raise ValueError("sub-diagonal must have length n-1")
    eps = np.finfo(float).eps
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > _MAX_QL_SWEEPS:
                raise TuzaLabError("QL iteration failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(np.asarray(d))[::-1]


def symmetric_eigenvalues(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a real symmetric matrix, descending."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if a.shape[0] == 0:
        return np.empty(0)
    if not np.allclose(a, a.T, atol=1e-12):
        raise ValueError("matrix must be symmetric")
    d, e = tridiagonalize(a)
    return tridiagonal_eigenvalues(d, e)
