"""Noise-tolerant separable NMF.

Rows of the noisy matrix that are far (in l1) from the hull of all rows not
near them are *robust loners*; they gather around the rows of ``W``. The
robust loners are clustered, one representative per cluster becomes a row
of ``W'`` and every row is then fitted by an l1 regression.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import InfeasibleParamsError, InvalidParamsError, NoRobustLonersError
from .factorization import Factorization
from .linalg import as_matrix
from .oracle import hull_certificate, l1_dist_to_hull, l1_regression_row


@dataclass(frozen=True)
class RobustParams:
    epsilon: float
    alpha: float
    d: float
    cluster_radius: float
    hull_margin: float
    feasible: bool

    @property
    def residual_bound(self):
        """Guaranteed per-row l1 residual ``10 eps / alpha + 7 eps``."""
        return 10 * self.epsilon / self.alpha + 7 * self.epsilon


def derive_params(epsilon, alpha):
    """Derived thresholds for noise level ``epsilon`` and margin ``alpha``."""
    if not epsilon > 0:
        raise InvalidParamsError(f"epsilon must be positive, got {epsilon}")
    if not 0 < alpha <= 2:
        raise InvalidParamsError(f"alpha must lie in (0, 2], got {alpha}")
    d = 5 * epsilon / alpha + 2 * epsilon
    return RobustParams(
        epsilon=float(epsilon),
        alpha=float(alpha),
        d=d,
        cluster_radius=2 * (d + epsilon),
        hull_margin=2 * epsilon,
        feasible=20 * epsilon / alpha + 13 * epsilon < alpha,
    )


def _pairwise_l1(m):
    return np.abs(m[:, None, :] - m[None, :, :]).sum(axis=2)


def _robust_loner(m, j, dist_row, p, backend):
    keep = np.flatnonzero(dist_row >= p.d)
    if keep.size == 0:
        return True
    bound, _ = hull_certificate(m[j], m[keep])
    if bound <= p.hull_margin:
        return False
    return l1_dist_to_hull(m[j], m[keep], backend=backend) > p.hull_margin


def is_robust_loner(m, j, p, backend="highs"):
    """Whether row ``j`` stays more than ``2 eps`` from the hull of all rows
    at l1 distance at least ``d`` from it."""
    m = as_matrix(m)
    dist_row = np.abs(m - m[j]).sum(axis=1)
    return _robust_loner(m, j, dist_row, p, backend)


def find_robust_loners(m, p, backend="highs", n_jobs=1):
    m = as_matrix(m)
    dist = _pairwise_l1(m)

    def one(j):
        return _robust_loner(m, j, dist[j], p, backend)

    if n_jobs == 1:
        flags = [one(j) for j in range(m.shape[0])]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            flags = list(pool.map(one, range(m.shape[0])))
    return [j for j, f in enumerate(flags) if f]


def cluster_rows(m, indices, radius):
    """Single-linkage clusters of ``m[indices]`` at l1 distance ``<= radius``.

    Returns a list of index lists ordered by their smallest member.
    """
    indices = list(indices)
    if not indices:
        return []
    sub = as_matrix(m)[indices]
    adj = _pairwise_l1(sub) <= radius
    _, labels = connected_components(adj, directed=False)
    groups = {}
    for idx, lab in zip(indices, labels):
        groups.setdefault(lab, []).append(idx)
    return sorted(groups.values(), key=min)


def one_center(m, members):
    """Member minimizing the largest l1 distance to the other members."""
    sub = as_matrix(m)[members]
    radius = _pairwise_l1(sub).max(axis=1)
    return members[int(np.argmin(radius))]


@dataclass(frozen=True)
class RobustResult:
    factorization: Factorization
    robust_loners: list
    clusters: list
    representatives: list
    params: RobustParams
    expected_r: int = None

    @property
    def found_r(self):
        return len(self.representatives)

    @property
    def r_mismatch(self):
        return self.expected_r is not None and self.expected_r != self.found_r


def solve_separable_robust(m_noisy, p, expected_r=None, backend="highs", n_jobs=1):
    """Factor a noisy near-separable matrix.

    The inner dimension is the number of robust-loner clusters. If
    ``expected_r`` is given and differs, the result is still returned and
    :attr:`RobustResult.r_mismatch` is set.

    Raises
    ------
    InfeasibleParamsError
        If ``20 eps / alpha + 13 eps >= alpha``.
    NoRobustLonersError
        If no row passes the robust-loner test.
    """
    if not p.feasible:
        raise InfeasibleParamsError(
            f"20*eps/alpha + 13*eps = {20 * p.epsilon / p.alpha + 13 * p.epsilon:.6g}"
            f" is not below alpha = {p.alpha}")
    m = as_matrix(m_noisy)
    loners = find_robust_loners(m, p, backend, n_jobs)
    if not loners:
        raise NoRobustLonersError("no robust-loner rows found")
    clusters = cluster_rows(m, loners, p.cluster_radius)
    reps = [one_center(m, c) for c in clusters]
    w = m[reps]
    a = np.vstack([l1_regression_row(row, w, sum_slack=p.epsilon, backend=backend)
                   for row in m])
    fact = Factorization.from_factors(m, a, w)
    return RobustResult(factorization=fact, robust_loners=loners, clusters=clusters,
                        representatives=reps, params=p, expected_r=expected_r)
