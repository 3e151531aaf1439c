"""Dense revised simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

The all-slack basis is feasible, so there is no phase one.  The explicit
basis inverse is updated by row operations and refactorized periodically.
Pricing is Dantzig's rule; after a streak of degenerate pivots it switches
to Bland's rule until the objective moves again.  The optimal dual
``y = c_B B^{-1}`` is returned and both solutions are checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FeasibilityError, LPIterationLimitError

__all__ = ["LPSolution", "solve_packing_lp", "PIVOT_TOL", "GAP_TOL"]

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
GAP_TOL = 1e-7
TIE_TOL = 1e-12
REFACTOR_EVERY = 64
DEGENERATE_STREAK = 25


@dataclass(frozen=True)
class LPSolution:
    x: np.ndarray
    y: np.ndarray
    primal: float
    dual: float
    iterations: int

    @property
    def gap(self) -> float:
        return abs(self.primal - self.dual)


def solve_packing_lp(A, c=None, b=None, max_iter: int | None = None) -> LPSolution:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    m, n = A.shape
    c = np.ones(n) if c is None else np.asarray(c, dtype=float)
    b = np.ones(m) if b is None else np.asarray(b, dtype=float)
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("shape mismatch between A, b and c")
    if np.any(b < 0):
        raise ValueError("right-hand side must be nonnegative")
    if m == 0 or n == 0:
        if n and np.any(c > 0):
            raise ValueError("unbounded: positive objective with no constraints")
        return LPSolution(np.zeros(n), np.zeros(m), 0.0, 0.0, 0)
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    full = np.hstack([A, np.eye(m)])
    cost = np.concatenate([c, np.zeros(m)])
    basis = np.arange(n, n + m)
    binv = np.eye(m)
    xb = b.copy()
    streak = 0
    bland = False
    it = 0
    while True:
        y = cost[basis] @ binv
        d = cost - y @ full
        d[basis] = 0.0
        if bland:
            cand = np.flatnonzero(d > PIVOT_TOL)
            if cand.size == 0:
                break
            j = int(cand[0])
        else:
            j = int(np.argmax(d))
            if d[j] <= PIVOT_TOL:
                break
        if it >= max_iter:
            raise LPIterationLimitError(f"simplex exceeded {max_iter} iterations")
        it += 1
        u = binv @ full[:, j]
        pos = np.flatnonzero(u > PIVOT_TOL)
        if pos.size == 0:
            raise ValueError("LP is unbounded")
        ratios = xb[pos] / u[pos]
        theta = ratios.min()
        ties = pos[ratios <= theta + TIE_TOL]
        r = int(ties[np.argmin(basis[ties])])
        xb = np.maximum(xb - theta * u, 0.0)
        xb[r] = theta
        piv = binv[r] / u[r]
        binv -= np.outer(u, piv)
        binv[r] = piv
        basis[r] = j
        if theta <= PIVOT_TOL:
            streak += 1
            bland = bland or streak >= DEGENERATE_STREAK
        else:
            streak = 0
            bland = False
        if it % REFACTOR_EVERY == 0:
            binv = np.linalg.inv(full[:, basis])
            xb = binv @ b

    binv = np.linalg.inv(full[:, basis])
    xb = binv @ b
    x_full = np.zeros(n + m)
    x_full[basis] = xb
    x = np.clip(x_full[:n], 0.0, None)
    y = np.clip(cost[basis] @ binv, 0.0, None)
    sol = LPSolution(x, y, float(c @ x), float(b @ y), it)
    _verify(A, b, c, sol)
    return sol


def _verify(A, b, c, sol: LPSolution) -> None:
    if np.any(A @ sol.x > b + FEAS_TOL):
        raise FeasibilityError("primal solution violates a constraint")
    if np.any(A.T @ sol.y < c - FEAS_TOL):
        raise FeasibilityError("dual solution violates a constraint")
    if sol.gap > GAP_TOL:
        raise FeasibilityError(f"duality gap {sol.gap:.3e} above {GAP_TOL}")
