"""Dense two-phase simplex method with Bland's anti-cycling rule.

Solves ``min c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq`` and
``x >= 0``. This is a small self-contained solver meant for desk-scale
problems and for cross-checking the HiGHS backend; it favours clarity over
speed.
"""

from dataclasses import dataclass

import numpy as np

OPTIMAL = 0
INFEASIBLE = 2
UNBOUNDED = 3
ITERATION_LIMIT = 1


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    status: int
    nit: int

    @property
    def success(self):
        return self.status == OPTIMAL


def _pivot(tab, row, col):
    tab[row] /= tab[row, col]
    colvals = tab[:, col].copy()
    colvals[row] = 0.0
    tab -= np.outer(colvals, tab[row])


def _run(tab, basis, ncols, tol, maxiter):
    """Iterate on ``tab`` (last row = reduced costs, last column = rhs).

    Only the first ``ncols`` columns may enter the basis.
    """
    nit = 0
    m = tab.shape[0] - 1
    while nit < maxiter:
        cost = tab[-1, :ncols]
        entering = np.flatnonzero(cost < -tol)
        if entering.size == 0:
            return OPTIMAL, nit
        col = int(entering[0])
        colvals = tab[:m, col]
        positive = np.flatnonzero(colvals > tol)
        if positive.size == 0:
            return UNBOUNDED, nit
        ratios = tab[positive, -1] / colvals[positive]
        best = ratios.min()
        ties = positive[ratios <= best + tol * max(1.0, abs(best))]
        # Bland: among tied rows leave the variable with the smallest index
        row = int(ties[np.argmin(basis[ties])])
        _pivot(tab, row, col)
        basis[row] = col
        nit += 1
    return ITERATION_LIMIT, nit


def linprog_simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
                    tol=1e-9, maxiter=50_000):
    c = np.asarray(c, dtype=float)
    nvar = c.size
    A_ub = np.zeros((0, nvar)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, float).ravel()
    A_eq = np.zeros((0, nvar)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, float).ravel()
    n_ub, n_eq = A_ub.shape[0], A_eq.shape[0]

    # standard form: [A_ub I; A_eq 0] [x; s] = b
    A = np.zeros((n_ub + n_eq, nvar + n_ub))
    A[:n_ub, :nvar] = A_ub
    A[:n_ub, nvar:] = np.eye(n_ub)
    A[n_ub:, :nvar] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    m, n = A.shape

    # phase 1 tableau with one artificial per row
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = A
    tab[:m, n:n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[-1, :n] = -A.sum(axis=0)
    tab[-1, -1] = -b.sum()
    basis = np.arange(n, n + m)

    status, nit1 = _run(tab, basis, n + m, tol, maxiter)
    scale = max(1.0, np.abs(b).max(initial=0.0))
    if status != OPTIMAL or -tab[-1, -1] > tol * scale * max(1, m):
        return SimplexResult(np.full(nvar, np.nan), np.nan,
                             INFEASIBLE if status == OPTIMAL else status, nit1)

    # drive artificials out of the basis; drop redundant rows
    keep = np.ones(m, dtype=bool)
    for row in range(m):
        if basis[row] >= n:
            cand = np.flatnonzero(np.abs(tab[row, :n]) > tol)
            if cand.size:
                _pivot(tab, row, int(cand[0]))
                basis[row] = int(cand[0])
            else:
                keep[row] = False
    rows = np.flatnonzero(keep)
    tab2 = np.zeros((rows.size + 1, n + 1))
    tab2[:-1, :n] = tab[rows, :n]
    tab2[:-1, -1] = tab[rows, -1]
    basis = basis[rows]

    cfull = np.zeros(n)
    cfull[:nvar] = c
    tab2[-1, :n] = cfull
    tab2[-1, -1] = 0.0
    for i, bcol in enumerate(basis):
        if cfull[bcol] != 0:
            tab2[-1] -= cfull[bcol] * tab2[i]

    status, nit2 = _run(tab2, basis, n, tol, maxiter)
    x = np.zeros(n)
    x[basis] = tab2[:-1, -1]
    x = np.maximum(x, 0.0)[:nvar]
    if status != OPTIMAL:
        return SimplexResult(x, np.nan, status, nit1 + nit2)
    return SimplexResult(x, float(c @ x), OPTIMAL, nit1 + nit2)
