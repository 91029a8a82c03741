"""Dense two-phase revised simplex method with Bland's anti-cycling rule.

Solves ``min c @ x  s.t.  A @ x = b, x >= 0`` for the tiny equality
systems that arise as primal envelope oracles (``k_d + 1 <= 8`` rows, a few
thousand columns).  The basic solution and duals are recomputed from the
basis at every pivot, so reduced costs never drift; with so few rows this
costs next to nothing.  Pricing is Dantzig's rule (most negative reduced
cost) until a run of degenerate pivots is seen, after which Bland's rule
(lowest index enters, lowest basic index leaves among ratio ties) takes
over for the rest of the phase, which rules out cycling.  All tolerances
are absolute.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import LPIterationError

TOL = 1e-10
DEGENERATE_RUN = 8


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray]
    objective: float
    basis: list
    iterations: int
    duals: Optional[np.ndarray] = None  # y with A^T y <= c, y @ b = objective


def _phase(A, b, c, basis, allowed, tol, max_iter, counter):
    """Run one simplex phase, updating ``basis`` in place."""
    bland = False
    degenerate = 0
    while True:
        B = A[:, basis]
        xb = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, c[basis])
        reduced = c[:allowed] - A[:, :allowed].T @ y
        reduced[[j for j in basis if j < allowed]] = 0.0
        cand = np.flatnonzero(reduced < -tol)
        if cand.size == 0:
            return "optimal", xb, y
        s = int(cand[0]) if bland else int(cand[np.argmin(reduced[cand])])
        col = np.linalg.solve(B, A[:, s])
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return "unbounded", xb, y
        ratios = np.maximum(xb[rows], 0.0) / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol]
        r = int(min(ties, key=lambda i: basis[i]))
        if counter[0] >= max_iter:
            raise LPIterationError(f"simplex exceeded {max_iter} pivots")
        counter[0] += 1
        basis[r] = s
        if best <= tol:
            degenerate += 1
            bland = bland or degenerate >= DEGENERATE_RUN
        else:
            degenerate = 0


def _independent_rows(B: np.ndarray) -> list:
    """Greedy set of rows on which the columns of ``B`` stay independent."""
    chosen = []
    for i in range(B.shape[0]):
        if np.linalg.matrix_rank(B[chosen + [i]]) == len(chosen) + 1:
            chosen.append(i)
        if len(chosen) == B.shape[1]:
            break
    return chosen


def solve(c, A, b, tol: float = TOL, max_iter: Optional[int] = None) -> LPResult:
    """Minimise ``c @ x`` subject to ``A @ x = b`` and ``x >= 0``.

    Raises
    ------
    LPIterationError
        If the pivot count exceeds ``max_iter``; Bland's rule rules out
        cycling in exact arithmetic, so this flags numerical trouble.
    """
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n)
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase 1: artificial basis, minimise the sum of artificials
    A1 = np.concatenate([A, np.eye(m)], axis=1)
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = list(range(n, n + m))
    counter = [0]
    _, xb, _ = _phase(A1, b, c1, basis, n + m, tol, max_iter, counter)
    if float(c1[basis] @ xb) > tol:
        return LPResult("infeasible", None, np.inf, [], counter[0])

    # pivot zero-level artificials out; the rows where that fails are redundant
    for i in range(m):
        if basis[i] < n:
            continue
        row = np.linalg.solve(A1[:, basis].T, np.eye(m)[i]) @ A
        row[[j for j in basis if j < n]] = 0.0
        cand = np.flatnonzero(np.abs(row) > tol)
        if cand.size:
            basis[i] = int(cand[0])
    basis = [j for j in basis if j < n]
    keep = _independent_rows(A[:, basis]) if len(basis) < m else list(range(m))

    status, xb, y2 = _phase(A[keep], b[keep], c, basis, n, tol, max_iter, counter)
    if status == "unbounded":
        return LPResult("unbounded", None, -np.inf, basis, counter[0])
    x = np.zeros(n)
    x[basis] = np.maximum(xb, 0.0)
    y = np.zeros(m)
    y[keep] = y2
    y[neg] *= -1
    return LPResult("optimal", x, float(c @ x), list(basis), counter[0], y)
