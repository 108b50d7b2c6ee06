"""Dense linear algebra helpers: row normalization, truncated SVD, rank
truncation and thresholded pseudoinverses.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. All functions
return new arrays and never modify their inputs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, ZeroRowError

#: relative singular-value cutoff used for numeric rank decisions
RANK_RTOL = 1e-9
#: relative cutoff applied by :func:`pseudoinverse` when ``threshold == 0``
PINV_RTOL = 1e-10


def as_matrix(m):
    """Return ``m`` as a 2-d float64 array (copying only when needed)."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {arr.shape}")
    return arr


def normalize_rows_l1(m):
    """Scale every row to unit l1 norm.

    Raises
    ------
    ZeroRowError
        If some row is identically zero.
    """
    m = as_matrix(m)
    norms = np.abs(m).sum(axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroRowError(int(zero[0]))
    return m / norms[:, None]


def _svd(m):
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc


@dataclass(frozen=True)
class SvdTruncation:
    """Thin SVD ``m = u @ diag(s) @ v.T`` plus the cutoff index ``t0``.

    ``t0`` is the number of singular values that are ``>= threshold``.
    """

    singular_values: np.ndarray
    u: np.ndarray
    v: np.ndarray
    t0: int
    threshold: float

    def reconstruct(self, k=None):
        k = len(self.singular_values) if k is None else k
        return (self.u[:, :k] * self.singular_values[:k]) @ self.v[:, :k].T


def truncated_svd(m, threshold=0.0):
    """Thin SVD of ``m`` together with the cutoff ``t0``.

    ``threshold`` is an absolute value; callers wanting the rule
    ``sigma_t >= delta * ||M||_F`` pass ``delta * np.linalg.norm(M)``.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    m = as_matrix(m)
    u, s, vt = _svd(m)
    t0 = int(np.count_nonzero(s >= threshold))
    return SvdTruncation(singular_values=s, u=u, v=vt.T, t0=t0,
                         threshold=float(threshold))


def numeric_rank(m, rtol=RANK_RTOL):
    m = as_matrix(m)
    if m.size == 0:
        return 0
    s = _svd(m)[1]
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def rank_truncate(m, r):
    """Best Frobenius-norm approximation of ``m`` with rank at most ``r``."""
    m = as_matrix(m)
    if not 1 <= r <= min(m.shape):
        raise ValueError(f"r must lie in [1, {min(m.shape)}], got {r}")
    u, s, vt = _svd(m)
    return (u[:, :r] * s[:r]) @ vt[:r]


def pseudoinverse(m, threshold=0.0):
    """Moore-Penrose pseudoinverse keeping singular values ``>= threshold``.

    With ``threshold == 0`` every singular value above ``1e-10 * sigma_max``
    is inverted.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    m = as_matrix(m)
    u, s, vt = _svd(m)
    if s.size == 0 or s[0] == 0:
        return np.zeros(m.T.shape)
    if threshold == 0:
        keep = s > PINV_RTOL * s[0]
    else:
        keep = s >= threshold
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (vt.T * inv) @ u.T


def orthonormal_basis(m, rtol=RANK_RTOL):
    """Orthonormal basis (as columns) of the column space of ``m``."""
    m = as_matrix(m)
    u, s, _ = _svd(m)
    if s.size == 0 or s[0] == 0:
        return np.zeros((m.shape[0], 0))
    k = int(np.count_nonzero(s > rtol * s[0]))
    return u[:, :k]


def l1_row_residuals(m, a, w):
    """l1 norm of each row of ``m - a @ w``."""
    return np.abs(as_matrix(m) - as_matrix(a) @ as_matrix(w)).sum(axis=1)
