"""Linear-programming oracles: l1 distance to a convex hull, cone membership
and row-wise nonnegative least squares.
"""

import numpy as np
from scipy.optimize import linprog, nnls

from .errors import DimensionMismatch, LPError
from .simplex import linprog_simplex

#: LP feasibility tolerance handed to the backends
LP_TOL = 1e-9
#: rows within this l1 distance are treated as copies of one another
DUP_TOL = 1e-9

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, backend="highs"):
    """Minimize ``c @ x`` over ``x >= 0``; return ``(x, fun)``.

    ``backend`` is ``"highs"`` (scipy) or ``"simplex"`` (the bundled
    two-phase simplex).
    """
    if backend == "highs":
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                      bounds=(0, None), method="highs", options=_HIGHS_OPTIONS)
        if res.status != 0:
            raise LPError(f"HiGHS status {res.status}: {res.message}")
        return res.x, float(res.fun)
    if backend == "simplex":
        res = linprog_simplex(c, A_ub, b_ub, A_eq, b_eq, tol=LP_TOL)
        if not res.success:
            raise LPError(f"simplex status {res.status}")
        return res.x, res.fun
    raise ValueError(f"unknown LP backend {backend!r}")


def _generators(target, generators, excluded=()):
    target = np.asarray(target, dtype=float).ravel()
    gens = np.asarray(generators, dtype=float)
    if gens.ndim == 1:
        gens = gens[None, :] if gens.size else gens.reshape(0, target.size)
    if gens.ndim != 2 or gens.shape[1] != target.size:
        raise DimensionMismatch(
            f"target has dimension {target.size}, generators have shape {gens.shape}")
    excluded = set(int(i) for i in excluded)
    if any(i < 0 or i >= gens.shape[0] for i in excluded):
        raise DimensionMismatch("excluded index outside the generator list")
    if excluded:
        keep = [i for i in range(gens.shape[0]) if i not in excluded]
        gens = gens[keep]
    return target, gens


def convex_l1_error(target, generators, weights):
    """l1 error of the convex combination given by ``weights``.

    The weights are clipped at zero and renormalized first, so the value is
    always an upper bound on the l1 distance to the hull.
    """
    lam = np.clip(np.asarray(weights, dtype=float), 0, None)
    total = lam.sum()
    if total <= 0:
        lam = np.full(lam.size, 1.0 / lam.size)
    else:
        lam = lam / total
    return float(np.abs(target - lam @ generators).sum()), lam


def hull_certificate(target, generators, excluded=()):
    """Cheap upper bound on the l1 distance from ``target`` to the hull.

    Solves an NNLS problem with a heavily weighted sum-to-one row and
    evaluates the resulting convex combination exactly. Returns
    ``(upper_bound, weights)``.
    """
    target, gens = _generators(target, generators, excluded)
    if gens.shape[0] == 0:
        raise ValueError("no generators left after exclusion")
    rho = 1e3 * max(1.0, np.abs(gens).max())
    design = np.vstack([gens.T, np.full((1, gens.shape[0]), rho)])
    rhs = np.concatenate([target, [rho]])
    lam, _ = nnls(design, rhs, maxiter=50 * design.shape[1])
    return convex_l1_error(target, gens, lam)


def l1_dist_to_hull(target, generators, excluded=(), backend="highs",
                    return_weights=False):
    """Minimum l1 distance from ``target`` to the convex hull of the
    non-excluded generator rows.

    The LP minimizes ``sum(s)`` subject to ``-s <= target - lam @ G <= s``,
    ``lam >= 0`` and ``sum(lam) == 1``. The returned value is re-evaluated
    from the LP weights, so it is always attained by an explicit convex
    combination.
    """
    target, gens = _generators(target, generators, excluded)
    k, d = gens.shape
    if k == 0:
        raise ValueError("no generators left after exclusion")
    c = np.concatenate([np.zeros(k), np.ones(d)])
    eye = np.eye(d)
    A_ub = np.block([[-gens.T, -eye], [gens.T, -eye]])
    b_ub = np.concatenate([-target, target])
    A_eq = np.concatenate([np.ones(k), np.zeros(d)])[None, :]
    x, _ = solve_lp(c, A_ub, b_ub, A_eq, [1.0], backend=backend)
    dist, lam = convex_l1_error(target, gens, x[:k])
    if return_weights:
        return dist, lam
    return dist


def _cone_tol(target):
    return LP_TOL * (1.0 + np.abs(target).max(initial=0.0))


def in_cone(target, generators, backend="highs"):
    """Nonnegative weights ``lam`` with ``lam @ generators ~= target``.

    Returns ``None`` when no such weights reproduce the target within
    ``1e-9 * (1 + max|target|)`` in the max norm.
    """
    target, gens = _generators(target, generators)
    if gens.shape[0] == 0:
        return np.zeros(0) if not np.any(target) else None
    tol = _cone_tol(target)
    lam, _ = nnls(gens.T, target, maxiter=50 * gens.shape[0])
    if np.abs(target - lam @ gens).max(initial=0.0) <= tol:
        return lam
    # NNLS can stall on degenerate inputs; fall back to an l1 fit
    k, d = gens.shape
    eye = np.eye(d)
    c = np.concatenate([np.zeros(k), np.ones(d)])
    A_ub = np.block([[-gens.T, -eye], [gens.T, -eye]])
    b_ub = np.concatenate([-target, target])
    x, _ = solve_lp(c, A_ub, b_ub, backend=backend)
    lam = np.clip(x[:k], 0, None)
    if np.abs(target - lam @ gens).max(initial=0.0) <= tol:
        return lam
    return None


def nnls_row(target, basis):
    """Weights ``w >= 0`` minimizing ``||target - w @ basis||_2``."""
    target = np.asarray(target, dtype=float).ravel()
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[1] != target.size:
        raise DimensionMismatch(
            f"target has dimension {target.size}, basis has shape {basis.shape}")
    w, _ = nnls(basis.T, target, maxiter=50 * max(1, basis.shape[0]))
    return w


def l1_regression_row(target, basis, sum_slack=None, backend="highs"):
    """Weights ``w >= 0`` minimizing ``||target - w @ basis||_1``.

    With ``sum_slack`` set, the weights are also constrained to
    ``|sum(w) - 1| <= sum_slack``.
    """
    target = np.asarray(target, dtype=float).ravel()
    basis = np.asarray(basis, dtype=float)
    k, d = basis.shape
    eye = np.eye(d)
    c = np.concatenate([np.zeros(k), np.ones(d)])
    A_ub = np.block([[-basis.T, -eye], [basis.T, -eye]])
    b_ub = np.concatenate([-target, target])
    if sum_slack is not None:
        ones = np.concatenate([np.ones(k), np.zeros(d)])
        A_ub = np.vstack([A_ub, ones, -ones])
        b_ub = np.concatenate([b_ub, [1.0 + sum_slack, -(1.0 - sum_slack)]])
    x, _ = solve_lp(c, A_ub, b_ub, backend=backend)
    return np.clip(x[:k], 0, None)
