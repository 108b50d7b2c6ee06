"""Exact separable NMF: find the loner rows of ``M``, take them as ``W`` and
solve for a nonnegative ``A``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NotNormalizedError, NotSeparableError
from .factorization import Factorization
from .linalg import as_matrix, normalize_rows_l1
from .oracle import DUP_TOL, hull_certificate, l1_dist_to_hull, nnls_row

LONER_TOL = 1e-7
NORMALIZED_TOL = 1e-8
ROW_RESIDUAL_TOL = 1e-7


@dataclass(frozen=True)
class SeparableResult:
    factorization: Factorization
    loner_row_indices: list
    anchor_map: dict

    @property
    def w(self):
        return self.factorization.w

    @property
    def a(self):
        return self.factorization.a


def _pairwise_l1(m):
    return np.abs(m[:, None, :] - m[None, :, :]).sum(axis=2)


def _check_normalized(m):
    norms = np.abs(m).sum(axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > NORMALIZED_TOL)
    if bad.size:
        raise NotNormalizedError(int(bad[0]), float(norms[bad[0]]))


def _loner_distance(m, j, ignore, loner_tol, backend):
    """Hull distance of row ``j`` to rows not in ``ignore`` (``inf`` if none)."""
    keep = np.flatnonzero(~ignore)
    if keep.size == 0:
        return np.inf
    gens = m[keep]
    # an explicit convex combination within tolerance settles the row cheaply
    bound, _ = hull_certificate(m[j], gens)
    if bound <= loner_tol:
        return bound
    return l1_dist_to_hull(m[j], gens, backend=backend)


def loner_distances(m, dup_tol=DUP_TOL, loner_tol=LONER_TOL, backend="highs",
                    n_jobs=1):
    """For each row, its l1 distance to the hull of the rows that are not
    copies of it. Distances at or below ``loner_tol`` may be reported as any
    certified upper bound rather than the exact minimum.
    """
    m = as_matrix(m)
    dist = _pairwise_l1(m)

    def one(j):
        return _loner_distance(m, j, dist[j] <= dup_tol, loner_tol, backend)

    if n_jobs == 1:
        return np.array([one(j) for j in range(m.shape[0])])
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return np.array(list(pool.map(one, range(m.shape[0]))))


def find_loners(m, loner_tol=LONER_TOL, dup_tol=DUP_TOL, backend="highs",
                n_jobs=1):
    """Indices of loner rows of a row-normalized matrix.

    A row is a loner when, after ignoring rows within ``dup_tol`` of it
    (itself included), its l1 distance to the hull of the remaining rows
    exceeds ``loner_tol``. A row with nothing left to compare against is a
    loner.
    """
    m = as_matrix(m)
    _check_normalized(m)
    d = loner_distances(m, dup_tol, loner_tol, backend, n_jobs)
    return [int(j) for j in np.flatnonzero(d > loner_tol)]


def distinct_rows(m, indices, dup_tol=DUP_TOL):
    """First-occurrence representatives of ``indices`` up to ``dup_tol``."""
    reps = []
    for j in sorted(indices):
        if all(np.abs(m[j] - m[k]).sum() > dup_tol for k in reps):
            reps.append(j)
    return reps


def solve_separable(m, r, loner_tol=LONER_TOL, dup_tol=DUP_TOL,
                    backend="highs", n_jobs=1):
    """Separable factorization ``m = a @ w`` with inner dimension ``r``.

    Rows of ``w`` are the distinct loner rows of the l1-normalized input in
    order of first occurrence; each row of ``a`` is an NNLS fit rescaled by
    the original row norm.

    Raises
    ------
    NotSeparableError
        If the number of distinct loners differs from ``r`` or some row is
        not reproduced within ``1e-7`` in l1.
    ZeroRowError
        If ``m`` has a zero row.
    """
    m = as_matrix(m)
    if np.any(m < 0):
        raise ValueError("input matrix has negative entries")
    scales = np.abs(m).sum(axis=1)
    mn = normalize_rows_l1(m)
    loners = find_loners(mn, loner_tol, dup_tol, backend, n_jobs)
    reps = distinct_rows(mn, loners, dup_tol)
    if len(reps) != r:
        raise NotSeparableError(len(reps))
    w = mn[reps]

    a_norm = np.zeros((m.shape[0], r))
    for j in range(m.shape[0]):
        copies = [i for i, k in enumerate(reps) if np.abs(mn[j] - mn[k]).sum() <= dup_tol]
        if copies:
            a_norm[j, copies[0]] = 1.0
        else:
            a_norm[j] = nnls_row(mn[j], w)
    row_err = np.abs(mn - a_norm @ w).sum(axis=1)
    worst = int(np.argmax(row_err))
    if row_err[worst] > ROW_RESIDUAL_TOL:
        raise NotSeparableError(
            len(reps), f"row {worst} misses the cone of W by {row_err[worst]:.3g}")
    a = a_norm * scales[:, None]
    fact = Factorization.from_factors(m, a, w)
    return SeparableResult(factorization=fact, loner_row_indices=reps,
                           anchor_map={i: k for i, k in enumerate(reps)})
