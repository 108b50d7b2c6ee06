"""Exact nonnegative factorization by bounded search with exact verification.

Both solvers fix a column basis and a row basis of ``M`` and search for small
linear transforms that send the basis coordinates of the columns (rows) of
``M`` to the columns of ``W`` (rows of ``A``):

* simplicial factorization: one transform on each side, ``W = T_C M_C`` and
  ``A = M_R T_R`` with ``M_R T_R T_C M_C = M``;
* general factorization: the columns (rows) are split into parts and each
  part gets its own transform, following the proper-chain construction.

The search is multi-start local minimization of a penalty (squared
negativity plus squared reconstruction error) by a trust-region
Gauss-Newton method. Any candidate is accepted only
after :func:`verify_factorization` passes, so the solvers are sound but not
complete: ``Unresolved`` is not a proof that no factorization exists.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from math import comb

import numpy as np
from scipy.optimize import least_squares, nnls

from .errors import (BudgetExceededError, DimensionMismatch, InvalidPartitionError,
                     RankMismatchError)
from .factorization import Factorization
from .linalg import as_matrix, numeric_rank, truncated_svd
from .partitions import PartitionSpec, enumerate_simplicial_partitions

VERIFY_TOL = 1e-8
INDEPENDENCE_RTOL = 1e-9
CONE_TOL = 1e-10


class Status(str, Enum):
    SUCCESS = "Success"
    UNRESOLVED = "Unresolved"
    PROVABLY_INFEASIBLE = "ProvablyInfeasible"


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    min_entry: float
    residual_fro: float
    relative_residual: float
    tol: float

    def to_dict(self):
        return {"ok": self.ok, "min_entry": self.min_entry,
                "residual_fro": self.residual_fro,
                "relative_residual": self.relative_residual, "tol": self.tol}


def verify_factorization(m, a, w=None, tol=VERIFY_TOL):
    """Check ``min(A, W) >= -tol`` and ``||M - AW||_F <= tol ||M||_F``.

    ``a`` may be a :class:`Factorization`, in which case ``w`` is omitted.
    """
    if isinstance(a, Factorization):
        a, w = a.a, a.w
    m, a, w = as_matrix(m), as_matrix(a), as_matrix(w)
    if a.shape[0] != m.shape[0] or w.shape[1] != m.shape[1] or a.shape[1] != w.shape[0]:
        raise DimensionMismatch(
            f"M {m.shape} does not match A {a.shape} times W {w.shape}")
    min_entry = float(min(a.min(initial=np.inf), w.min(initial=np.inf)))
    res = float(np.linalg.norm(m - a @ w))
    norm = float(np.linalg.norm(m))
    rel = res / norm if norm > 0 else res
    ok = min_entry >= -tol and res <= tol * norm
    return VerificationReport(ok=bool(ok), min_entry=min_entry, residual_fro=res,
                              relative_residual=rel, tol=tol)


@dataclass(frozen=True)
class ExactResult:
    status: Status
    factorization: Factorization = None
    reason: str = ""
    restarts_used: int = 0
    candidates_tried: int = 0
    budget_exceeded: bool = False
    t_c: np.ndarray = None
    t_r: np.ndarray = None

    @property
    def ok(self):
        return self.status is Status.SUCCESS


# ---------------------------------------------------------------------------
# bases and the simplicial system


@dataclass(frozen=True)
class SimplicialSystem:
    """Basis data for the simplicial factorization system.

    ``column_basis @ m_c`` and ``m_r @ row_basis.T`` both reproduce ``M``.
    The unknowns are the ``r x r`` transforms ``T_C`` and ``T_R``.
    """

    m: np.ndarray
    column_basis: np.ndarray
    row_basis: np.ndarray
    m_c: np.ndarray
    m_r: np.ndarray

    @property
    def r(self):
        return self.m_c.shape[0]

    @property
    def x0(self):
        """The product ``T_R T_C`` forced by exact reconstruction."""
        return np.linalg.pinv(self.m_r) @ self.m @ np.linalg.pinv(self.m_c)

    def factors(self, t_c, t_r):
        return self.m_r @ t_r, t_c @ self.m_c


def _bases(m, rho, basis_seed=None):
    svd = truncated_svd(m, 0.0)
    c = svd.u[:, :rho]
    r_basis = svd.v[:, :rho]
    if basis_seed is not None:
        rng = np.random.default_rng(basis_seed)
        c = c @ _random_invertible(rng, rho)
        r_basis = r_basis @ _random_invertible(rng, rho)
    m_c = np.linalg.lstsq(c, m, rcond=None)[0]
    m_r = np.linalg.lstsq(r_basis, m.T, rcond=None)[0].T
    return c, r_basis, m_c, m_r


def _random_invertible(rng, k):
    while True:
        q = rng.standard_normal((k, k))
        s = np.linalg.svd(q, compute_uv=False)
        if s[-1] > 0.1 * s[0]:
            return q


def build_simplicial_system(m, r, basis_seed=None):
    """Column/row bases of ``M`` (from the SVD, optionally mixed by random
    invertible maps) and the coordinates of ``M`` in them."""
    m = as_matrix(m)
    c, rb, m_c, m_r = _bases(m, r, basis_seed)
    return SimplicialSystem(m=m, column_basis=c, row_basis=rb, m_c=m_c, m_r=m_r)


# ---------------------------------------------------------------------------
# block search shared by both solvers


@dataclass
class _BlockProblem:
    """``W'_i = T[col_assign[i]] @ m_c[:, i]`` and
    ``A'_j = m_r[j] @ S[row_assign[j]]`` with ``A' W' = M``."""

    m: np.ndarray
    m_c: np.ndarray
    m_r: np.ndarray
    r: int
    col_assign: np.ndarray
    row_assign: np.ndarray
    n_t: int = field(init=False)
    n_s: int = field(init=False)

    def __post_init__(self):
        self.n_t = int(self.col_assign.max()) + 1
        self.n_s = int(self.row_assign.max()) + 1

    @property
    def rho(self):
        return self.m_c.shape[0]

    def split(self, z):
        nt = self.n_t * self.r * self.rho
        t = z[:nt].reshape(self.n_t, self.r, self.rho)
        s = z[nt:].reshape(self.n_s, self.rho, self.r)
        return t, s

    def factors(self, t, s):
        wp = np.einsum("irk,ki->ri", t[self.col_assign], self.m_c)
        ap = np.einsum("jk,jkr->jr", self.m_r, s[self.row_assign])
        return ap, wp

    def penalty(self, z, margin=0.0):
        """Squared negativity of both factors plus squared reconstruction
        error."""
        return float((self.residuals(z, margin) ** 2).sum())

    def residuals(self, z, margin=0.0):
        """Stacked residual vector whose squared norm is :meth:`penalty`."""
        ap, wp = self.factors(*self.split(z))
        return np.concatenate([np.minimum(wp - margin, 0.0).ravel(),
                               np.minimum(ap - margin, 0.0).ravel(),
                               (ap @ wp - self.m).ravel()])

    def jacobian(self, z, margin=0.0):
        """Dense Jacobian of :meth:`residuals`."""
        ap, wp = self.factors(*self.split(z))
        r, rho = self.r, self.rho
        n, m = self.m.shape
        nt = self.n_t * r * rho
        nvar = nt + self.n_s * rho * r
        # d wp[a, i] / d T[p_i][a, b] = m_c[b, i]
        d_wp = np.zeros((r, m, nvar))
        d_ap = np.zeros((n, r, nvar))
        ii = np.arange(m)
        for a in range(r):
            for b in range(rho):
                d_wp[a, ii, self.col_assign * r * rho + a * rho + b] = self.m_c[b]
        jj = np.arange(n)
        for k in range(rho):
            for a in range(r):
                d_ap[jj, a, nt + self.row_assign * rho * r + k * r + a] = self.m_r[:, k]
        act_w = (wp - margin < 0)[:, :, None]
        act_a = (ap - margin < 0)[:, :, None]
        # d (ap @ wp)[j, i] = sum_a d_ap[j, a] wp[a, i] + ap[j, a] d_wp[a, i]
        d_e = (np.einsum("jav,ai->jiv", d_ap, wp) + np.einsum("ja,aiv->jiv", ap, d_wp))
        return np.concatenate([(d_wp * act_w).reshape(-1, nvar),
                               (d_ap * act_a).reshape(-1, nvar),
                               d_e.reshape(-1, nvar)])


def _initial_point(prob, rng, restart):
    """Alternate between rows of ``M`` as ``W`` (nonnegative from the
    start), columns of ``M`` as ``A``, and Gaussian transforms."""
    r, rho = prob.r, prob.rho
    x0 = np.linalg.pinv(prob.m_r) @ prob.m @ np.linalg.pinv(prob.m_c)
    mode = restart % 3
    n, m = prob.m.shape
    if mode == 0:
        rows = rng.choice(n, size=r, replace=n < r)
        w0 = prob.m[rows] + 0.05 * np.abs(rng.standard_normal((r, m))) * prob.m.max()
        t_one = w0 @ np.linalg.pinv(prob.m_c)
        s_one = x0 @ np.linalg.pinv(t_one)
    elif mode == 1:
        cols = rng.choice(m, size=r, replace=m < r)
        a0 = prob.m[:, cols] + 0.05 * np.abs(rng.standard_normal((n, r))) * prob.m.max()
        s_one = np.linalg.pinv(prob.m_r) @ a0
        t_one = np.linalg.pinv(s_one) @ x0
    else:
        t_one = rng.standard_normal((r, rho))
        s_one = x0 @ np.linalg.pinv(t_one)
    t = np.repeat(t_one[None], prob.n_t, axis=0)
    s = np.repeat(s_one[None], prob.n_s, axis=0)
    t = t + 0.01 * np.abs(t).max() * rng.standard_normal(t.shape)
    s = s + 0.01 * np.abs(s).max() * rng.standard_normal(s.shape)
    return np.concatenate([t.ravel(), s.ravel()])


def _nnls_rows(m, w):
    return np.vstack([nnls(w.T, row, maxiter=50 * max(1, w.shape[0]))[0] for row in m])


def _polish(m, ap, wp, tol, sweeps=10):
    """Turn approximate factors into verified ones if possible.

    Starts from the clamped pair and runs alternating NNLS sweeps (``A``
    given ``W``, then ``W`` given ``A``), checking the verifier after every
    half step.
    """
    a = np.clip(ap, 0, None)
    w = np.clip(wp, 0, None)
    if verify_factorization(m, a, w, tol).ok:
        return a, w
    for _ in range(sweeps):
        a = _nnls_rows(m, w)
        if verify_factorization(m, a, w, tol).ok:
            return a, w
        w = _nnls_rows(m.T, a.T).T
        if verify_factorization(m, a, w, tol).ok:
            return a, w
    return None


def _search(prob, restarts, seed, tol, margin=0.0, max_nfev=500):
    """Multi-start trust-region least squares on the block penalty; the
    first verified pair wins."""
    scale = np.linalg.norm(prob.m)
    if scale == 0:
        return None, 0
    unit = _BlockProblem(prob.m / scale, prob.m_c / scale, prob.m_r, prob.r,
                         prob.col_assign, prob.row_assign)
    rng = np.random.default_rng(seed)
    for k in range(restarts):
        z0 = _initial_point(unit, rng, k)
        res = least_squares(unit.residuals, z0, jac=unit.jacobian, args=(margin,),
                            method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=max_nfev)
        ap, wp = unit.factors(*unit.split(res.x))
        got = _polish(unit.m, ap, wp, tol)
        if got is not None:
            return (got[0] * scale, got[1]), k + 1
    return None, restarts


# ---------------------------------------------------------------------------
# simplicial factorization


def solve_sf(m, r, restarts=200, seed=0, tol=VERIFY_TOL, basis_seed=None):
    """Simplicial factorization of inner dimension ``r`` for a rank-``r``
    nonnegative matrix.

    Returns an :class:`ExactResult`; a ``Success`` always carries a
    factorization that passed :func:`verify_factorization` at ``tol``.

    Raises
    ------
    RankMismatchError
        If the numeric rank of ``m`` is not ``r``.
    """
    m = as_matrix(m)
    rank = numeric_rank(m)
    if rank != r:
        raise RankMismatchError(rank, r)
    system = build_simplicial_system(m, r, basis_seed)
    prob = _BlockProblem(m, system.m_c, system.m_r, r,
                         np.zeros(m.shape[1], dtype=int), np.zeros(m.shape[0], dtype=int))
    got, used = _search(prob, restarts, seed, tol)
    if got is None:
        return ExactResult(Status.UNRESOLVED, reason="budget_exhausted",
                           restarts_used=used)
    a, w = got
    t_c = w @ np.linalg.pinv(system.m_c)
    t_r = np.linalg.pinv(system.m_r) @ a
    return ExactResult(Status.SUCCESS, Factorization.from_factors(m, a, w),
                       restarts_used=used, t_c=t_c, t_r=t_r)


# ---------------------------------------------------------------------------
# proper chains


def maximal_independent_sets(a, rtol=INDEPENDENCE_RTOL):
    """Maximal independent column sets of ``a`` in lexicographic order."""
    a = as_matrix(a)
    rank = numeric_rank(a, rtol)
    if rank == 0:
        return [()]
    smax = np.linalg.svd(a, compute_uv=False)[0]
    out = []
    for u in combinations(range(a.shape[1]), rank):
        s = np.linalg.svd(a[:, u], compute_uv=False)
        if s[-1] > rtol * smax:
            out.append(u)
    return out


def restricted_pinv(a, u):
    """The ``r x n`` map that is ``pinv(a[:, u])`` on rows ``u`` and zero
    elsewhere."""
    a = as_matrix(a)
    out = np.zeros((a.shape[1], a.shape[0]))
    if u:
        out[list(u)] = np.linalg.pinv(a[:, list(u)])
    return out


def cone_coefficients(a, u, x, tol=CONE_TOL):
    """Coefficients of ``x`` in the cone of the independent columns ``a[:, u]``
    or None if ``x`` is outside that cone."""
    a = as_matrix(a)
    x = np.asarray(x, dtype=float)
    if not u:
        return np.zeros(0) if np.linalg.norm(x) <= tol else None
    sub = a[:, list(u)]
    coef, _ = nnls(sub, x, maxiter=50 * len(u))
    scale = tol * (1.0 + np.abs(x).max(initial=0.0))
    if np.abs(sub @ coef - x).max(initial=0.0) <= scale:
        return coef
    return None


def minimal_basis(a, x, sets=None):
    """First set (lexicographically) whose cone contains ``x``, with the
    coefficients, or ``(None, None)`` if ``x`` is in none of them."""
    sets = maximal_independent_sets(a) if sets is None else sets
    for u in sets:
        coef = cone_coefficients(a, u, x)
        if coef is not None:
            return u, coef
    return None, None


@dataclass(frozen=True)
class ChainConfig:
    """A proper chain ``(A, W, A', W')`` with its choice functions.

    ``sigma_w[i]`` indexes ``col_sets`` (maximal independent column sets of
    ``A``) and ``sigma_a[j]`` indexes ``row_sets`` (of the rows of ``W'``).
    """

    a: np.ndarray
    w: np.ndarray
    a_prime: np.ndarray
    w_prime: np.ndarray
    col_sets: list
    row_sets: list
    sigma_w: tuple
    sigma_a: tuple

    @property
    def m(self):
        return self.a @ self.w

    def column_transform(self, i):
        return restricted_pinv(self.a, self.col_sets[self.sigma_w[i]])

    def row_transform(self, j):
        return restricted_pinv(self.w_prime.T, self.row_sets[self.sigma_a[j]])

    def reconstruct_w_prime(self):
        m = self.m
        return np.column_stack([self.column_transform(i) @ m[:, i]
                                for i in range(m.shape[1])])

    def reconstruct_a_prime(self):
        m = self.m
        return np.vstack([m[j] @ self.row_transform(j).T for j in range(m.shape[0])])

    def partitions(self):
        """Column and row partitions induced by the choice functions."""
        n, m = self.m.shape
        col_q = [{i for i in range(m) if self.sigma_w[i] == p}
                 for p in range(len(self.col_sets))]
        row_q = [{j for j in range(n) if self.sigma_a[j] == q}
                 for q in range(len(self.row_sets))]
        return (PartitionSpec.from_q_sets(m, col_q, len(self.col_sets[0])),
                PartitionSpec.from_q_sets(n, row_q, len(self.row_sets[0])))


def build_proper_chain(a, w):
    """Proper chain for the nonnegative pair ``(a, w)``.

    ``W'`` is fitted column by column inside the minimal basis of each
    column of ``M = a @ w``; ``A'`` likewise inside minimal bases of the rows
    of ``W'``.
    """
    a, w = as_matrix(a), as_matrix(w)
    m = a @ w
    r = a.shape[1]
    col_sets = maximal_independent_sets(a)
    w_prime = np.zeros((r, m.shape[1]))
    sigma_w = []
    for i in range(m.shape[1]):
        u, coef = minimal_basis(a, m[:, i], col_sets)
        if u is None:
            raise ValueError(f"column {i} is outside the cone of A")
        w_prime[list(u), i] = coef
        sigma_w.append(col_sets.index(u))
    row_sets = maximal_independent_sets(w_prime.T)
    a_prime = np.zeros((m.shape[0], r))
    sigma_a = []
    for j in range(m.shape[0]):
        v, coef = minimal_basis(w_prime.T, m[j], row_sets)
        if v is None:
            raise ValueError(f"row {j} is outside the cone of W'")
        a_prime[j, list(v)] = coef
        sigma_a.append(row_sets.index(v))
    return ChainConfig(a=a, w=w, a_prime=a_prime, w_prime=w_prime,
                       col_sets=col_sets, row_sets=row_sets,
                       sigma_w=tuple(sigma_w), sigma_a=tuple(sigma_a))


# ---------------------------------------------------------------------------
# polynomial system over partition pairs


def _part_assignment(spec, n_items, r, what):
    if spec.n_cols != n_items:
        raise InvalidPartitionError(
            f"{what} partition covers {spec.n_cols} items, matrix has {n_items}")
    if len(spec.parts) > 2 ** r:
        raise InvalidPartitionError(
            f"{what} partition has {len(spec.parts)} parts, at most 2**{r} transforms exist")
    raw = spec.assignment()
    used = sorted(set(raw))
    relabel = {p: k for k, p in enumerate(used)}
    return np.array([relabel[p] for p in raw], dtype=int), used


@dataclass(frozen=True)
class ProperChainSystem:
    """Bilinear system in the transforms ``T_p`` (``r x rho``) and ``S_q``
    (``rho x r``).

    Constraints: ``T_{sigma(i)} @ m_c[:, i] >= 0`` for each column,
    ``m_r[j] @ S_{tau(j)} >= 0`` for each row and
    ``m_r[j] @ S_{tau(j)} @ T_{sigma(i)} @ m_c[:, i] == M[j, i]``.
    """

    m: np.ndarray
    r: int
    m_c: np.ndarray
    m_r: np.ndarray
    column_basis: np.ndarray
    row_basis: np.ndarray
    col_assign: np.ndarray
    row_assign: np.ndarray
    col_part_ids: list
    row_part_ids: list

    @property
    def rho(self):
        return self.m_c.shape[0]

    @property
    def n_t(self):
        return len(self.col_part_ids)

    @property
    def n_s(self):
        return len(self.row_part_ids)

    @property
    def n_variables(self):
        return (self.n_t + self.n_s) * self.r * self.rho

    @property
    def n_linear_constraints(self):
        return self.m.shape[0] + self.m.shape[1]

    @property
    def n_equations(self):
        return self.m.size

    def variables(self):
        names = [f"T{p}[{a},{b}]" for p in self.col_part_ids
                 for a in range(self.r) for b in range(self.rho)]
        names += [f"S{q}[{a},{b}]" for q in self.row_part_ids
                  for a in range(self.rho) for b in range(self.r)]
        return names

    def problem(self):
        return _BlockProblem(self.m, self.m_c, self.m_r, self.r,
                             self.col_assign, self.row_assign)

    def pack(self, t, s):
        return np.concatenate([np.asarray(t, float).ravel(), np.asarray(s, float).ravel()])

    def evaluate(self, t, s):
        """Largest violation of the linear and bilinear constraints at
        transforms ``t`` (``n_t x r x rho``) and ``s`` (``n_s x rho x r``)."""
        ap, wp = self.problem().factors(np.asarray(t, float), np.asarray(s, float))
        return {"linear_violation": float(max(0.0, -wp.min(), -ap.min())),
                "equation_residual": float(np.abs(ap @ wp - self.m).max())}

    def to_dict(self):
        lin = [{"kind": "column", "index": i, "transform": f"T{self.col_part_ids[p]}",
                "vector": self.m_c[:, i].tolist()}
               for i, p in enumerate(self.col_assign)]
        lin += [{"kind": "row", "index": j, "transform": f"S{self.row_part_ids[q]}",
                 "vector": self.m_r[j].tolist()}
                for j, q in enumerate(self.row_assign)]
        eqs = [{"row": j, "col": i,
                "S": f"S{self.row_part_ids[self.row_assign[j]]}",
                "T": f"T{self.col_part_ids[self.col_assign[i]]}",
                "rhs": float(self.m[j, i])}
               for j in range(self.m.shape[0]) for i in range(self.m.shape[1])]
        return {
            "r": self.r, "rho": self.rho,
            "variables": self.variables(),
            "transform_shapes": {"T": [self.r, self.rho], "S": [self.rho, self.r]},
            "linear_constraints": lin,
            "linear_semantics": "column: T @ vector >= 0; row: vector @ S >= 0",
            "bilinear_equations": eqs,
            "equation_semantics": "m_r[row] @ S @ T @ m_c[:, col] == rhs",
            "m_c": self.m_c.tolist(), "m_r": self.m_r.tolist(),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def build_proper_chain_system(m, r, col_partition, row_partition, basis_seed=None):
    """Explicit system for one pair of column and row partitions.

    Only transforms for nonempty parts are instantiated.

    Raises
    ------
    InvalidPartitionError
        If a partition does not match ``m`` or has more than ``2**r`` parts.
    """
    m = as_matrix(m)
    rho = max(numeric_rank(m), 1)
    col_assign, col_ids = _part_assignment(col_partition, m.shape[1], r, "column")
    row_assign, row_ids = _part_assignment(row_partition, m.shape[0], r, "row")
    c, rb, m_c, m_r = _bases(m, rho, basis_seed)
    return ProperChainSystem(m=m, r=r, m_c=m_c, m_r=m_r, column_basis=c, row_basis=rb,
                             col_assign=col_assign, row_assign=row_assign,
                             col_part_ids=col_ids, row_part_ids=row_ids)


def chain_transforms(chain, system):
    """Transforms ``(T, S)`` of ``system`` realized by a proper chain.

    ``system`` must be built from ``chain.partitions()``; part ``p`` of the
    column partition uses ``Pi(A, U_p)`` expressed in the column basis, and
    likewise for rows.
    """
    t = np.stack([restricted_pinv(chain.a, chain.col_sets[p]) @ system.column_basis
                  for p in system.col_part_ids])
    s = np.stack([system.row_basis.T @ restricted_pinv(chain.w_prime.T, chain.row_sets[q]).T
                  for q in system.row_part_ids])
    return t, s


# ---------------------------------------------------------------------------
# general exact NMF


def _pad(a, w, r):
    k = a.shape[1]
    a_pad = np.hstack([a, np.zeros((a.shape[0], r - k))])
    w_pad = np.vstack([w, np.zeros((r - k, w.shape[1]))])
    return a_pad, w_pad


def _partition_candidates(m, r, rank, cap, max_pairs):
    """Partition pairs in ascending total part count; trivial pair first."""
    n, mc = m.shape
    cols = {PartitionSpec.trivial(mc).assignment(): PartitionSpec.trivial(mc)}
    rows = {PartitionSpec.trivial(n).assignment(): PartitionSpec.trivial(n)}
    exceeded = False
    for s in range(max(rank, 1), r + 1):
        k = comb(r, s)
        for target, mat in ((cols, m), (rows, m.T)):
            try:
                found = enumerate_simplicial_partitions(mat, k, s, cap=cap)
            except BudgetExceededError:
                exceeded = True
                continue
            for spec in found:
                if len(spec.parts) <= 2 ** r:
                    target.setdefault(spec.assignment(), spec)
    pairs = [(cp, rp) for cp in cols.values() for rp in rows.values()]
    pairs.sort(key=lambda pr: (pr[0].n_nonempty() + pr[1].n_nonempty(),
                               pr[0].assignment(), pr[1].assignment()))
    if len(pairs) > max_pairs:
        exceeded = True
        pairs = pairs[:max_pairs]
    return pairs, exceeded


def solve_general_nmf(m, r, restarts_sf=200, restarts_per_pair=50, max_pairs=20,
                      partition_cap=10**4, seed=0, tol=VERIFY_TOL):
    """Search for a nonnegative factorization of inner dimension ``r``.

    ``ProvablyInfeasible`` is returned only when ``r < rank(M)``. Otherwise
    the identity witnesses, the simplicial system at inner dimension
    ``rank(M)`` (padded with zeros up to ``r``) and then partition-pair
    systems are tried in a fixed order; the first verified factorization is
    returned.
    """
    m = as_matrix(m)
    if np.any(m < 0):
        raise ValueError("input matrix has negative entries")
    n, mc = m.shape
    rank = numeric_rank(m)
    if r < rank:
        return ExactResult(Status.PROVABLY_INFEASIBLE,
                           reason=f"r = {r} is below rank(M) = {rank}")
    if rank == 0:
        return ExactResult(Status.SUCCESS, Factorization.from_factors(
            m, np.zeros((n, r)), np.zeros((r, mc))))
    if r >= mc:
        a, w = _pad(m, np.eye(mc), r)
        return ExactResult(Status.SUCCESS, Factorization.from_factors(m, a, w))
    if r >= n:
        a, w = _pad(np.eye(n), m, r)
        return ExactResult(Status.SUCCESS, Factorization.from_factors(m, a, w))

    # the simplicial system needs inner dimension rank(M); pad its answer to r
    res = solve_sf(m, rank, restarts=restarts_sf, seed=seed, tol=tol)
    used = res.restarts_used
    if res.ok:
        a, w = _pad(res.factorization.a, res.factorization.w, r)
        return ExactResult(Status.SUCCESS, Factorization.from_factors(m, a, w),
                           restarts_used=used, candidates_tried=1)

    pairs, exceeded = _partition_candidates(m, r, rank, partition_cap, max_pairs)
    for idx, (cp, rp) in enumerate(pairs):
        system = build_proper_chain_system(m, r, cp, rp)
        got, k = _search(system.problem(), restarts_per_pair, seed + idx + 1, tol)
        used += k
        if got is not None:
            return ExactResult(Status.SUCCESS, Factorization.from_factors(m, *got),
                               restarts_used=used, candidates_tried=idx + 2,
                               budget_exceeded=exceeded)
    return ExactResult(Status.UNRESOLVED, reason="budget_exhausted", restarts_used=used,
                       candidates_tried=len(pairs) + 1, budget_exceeded=exceeded)
