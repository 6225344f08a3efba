"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``min c @ x  s.t.  A @ x == b, x >= 0``. Small and exact enough for
least-absolute-deviation fits on a few hundred projects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SimplexError(RuntimeError):
    pass


class Infeasible(SimplexError):
    pass


class Unbounded(SimplexError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    fun: float
    reduced_costs: np.ndarray  # all >= -tol at an optimum
    basis: tuple[int, ...]
    iterations: int


def _pivot(t: np.ndarray, row: int, col: int) -> None:
    t[row] /= t[row, col]
    factor = t[:, col].copy()
    factor[row] = 0.0
    t -= np.outer(factor, t[row])


def _iterate(t, basis, n_cols, cost_tol, tol, max_iter, used):
    """Run Bland pivots on tableau ``t`` (last row = reduced costs, last col = rhs)."""
    m = len(basis)
    it = used
    while True:
        costs = t[-1, :n_cols]
        entering = np.flatnonzero(costs < -cost_tol)
        if entering.size == 0:
            return it
        if it >= max_iter:
            raise SimplexError(f"simplex iteration cap {max_iter} exceeded")
        j = int(entering[0])
        col = t[:m, j]
        rows = np.flatnonzero(col > tol * max(1.0, float(np.abs(col).max())))
        if rows.size == 0:
            raise Unbounded("objective is unbounded below")
        ratios = np.maximum(t[rows, -1], 0.0) / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        i = int(min(ties, key=lambda r: basis[r]))
        _pivot(t, i, j)
        basis[i] = j
        it += 1


def solve(c, a_eq, b_eq, max_iter: int = 100_000, tol: float = 1e-9) -> LPResult:
    c = np.asarray(c, dtype=float)
    a = np.array(a_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    m, n = a.shape
    scale = max(1.0, float(np.abs(a).max(initial=0.0)), float(np.abs(b).max(initial=0.0)))
    eps = tol * scale

    neg = b < 0
    a[neg] *= -1
    b[neg] *= -1

    # phase 1: artificials n..n+m-1 start basic
    t = np.zeros((m + 1, n + m + 1))
    t[:m, :n] = a
    t[:m, n : n + m] = np.eye(m)
    t[:m, -1] = b
    t[-1, :n] = -a.sum(axis=0)
    t[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    it = _iterate(t, basis, n + m, eps, tol, max_iter, 0)
    if -t[-1, -1] > eps * max(1, m):
        raise Infeasible(f"no feasible point (phase-1 residual {-t[-1, -1]:.3g})")

    # drive artificials out of the basis; rows that cannot be pivoted are redundant
    keep = []
    for r in range(m):
        if basis[r] >= n:
            cand = np.flatnonzero(np.abs(t[r, :n]) > eps)
            if cand.size == 0:
                continue
            _pivot(t, r, int(cand[0]))
            basis[r] = int(cand[0])
        keep.append(r)
    t = np.vstack([t[keep][:, list(range(n)) + [n + m]], np.zeros((1, n + 1))])
    basis = [basis[r] for r in keep]

    # phase 2
    cb = c[basis]
    t[-1, :n] = c - cb @ t[:-1, :n]
    t[-1, -1] = -cb @ t[:-1, -1]
    it = _iterate(t, basis, n, tol * max(1.0, float(np.abs(c).max(initial=0.0))), tol, max_iter, it)

    x = np.zeros(n)
    x[basis] = t[:-1, -1]
    x[np.abs(x) < eps] = 0.0
    return LPResult(x, float(c @ x), t[-1, :n].copy(), tuple(basis), it)
