"""Approximate nonnegative factorization by net enumeration.

Outline, for a target inner dimension ``r`` and accuracy ``epsilon``:

1. replace ``M`` by its best rank-``r`` approximation;
2. enumerate candidates ``W0''`` (the part of ``W`` on the dominant right
   singular directions of ``A``) on a grid in the row span of ``M``;
3. enumerate orthonormal frames ``{v_t}`` of ``R^r``, cutoffs ``t0`` and
   guesses of ``||A||_F``;
4. for each combination solve, column by column, the convex program
   ``min ||A||^2 sum_{t<=t0} |v_t.z|^2 + delta^2 ||M||^2 sum_{t>t0} |v_t.z|^2``
   subject to ``W0'' + z >= 0`` and set ``W' = W0'' + Z``;
5. fit ``A' >= 0`` by NNLS and keep the candidate with the smallest
   Frobenius residual.

The full enumeration is exponential in ``r``; the nets are coarsened until
the candidate count fits the configured cap, and the result says so.
"""

from dataclasses import dataclass, replace
from itertools import combinations, combinations_with_replacement, product

import numpy as np
from scipy.optimize import nnls

from .errors import DimensionMismatch, ZeroRowError
from .factorization import Factorization
from .linalg import as_matrix, pseudoinverse, rank_truncate, truncated_svd

DEFAULT_MAX_CANDIDATES = 10**6
BATCH = 2048
FACE_ENUM_MAX_R = 8


@dataclass(frozen=True)
class ApproxConfig:
    """Net parameters. Use :meth:`default` to derive them from ``epsilon``."""

    epsilon: float
    r: int
    delta: float
    net_eps1: float
    net_eps2: float
    norm_guess_factor: float = 1.01
    guess_span: float = 10.0
    max_candidates: int = DEFAULT_MAX_CANDIDATES

    @classmethod
    def default(cls, epsilon, r, **overrides):
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        if r < 1:
            raise ValueError("r must be at least 1")
        delta = overrides.pop("delta", np.sqrt(epsilon) / r ** 0.25)
        return cls(epsilon=float(epsilon), r=int(r), delta=float(delta),
                   net_eps1=overrides.pop("net_eps1", epsilon / delta),
                   net_eps2=overrides.pop("net_eps2", min(epsilon / (delta * r), 0.1)),
                   **overrides)

    def ratio_ladder(self):
        """Values of ``delta^2 ||M||^2 / g^2`` over the ``||A||_F`` guesses
        ``g`` in ``[||M||/span, span ||M||]`` spaced by ``norm_guess_factor``."""
        steps = int(np.floor(np.log(self.guess_span ** 2) / np.log(self.norm_guess_factor)))
        c = self.guess_span ** -1 * self.norm_guess_factor ** np.arange(steps + 1)
        return self.delta ** 2 / c ** 2


@dataclass(frozen=True)
class ApproxResult:
    factorization: Factorization
    config: ApproxConfig
    n_candidates: int
    budget_exceeded: bool
    t0: int


def normalize_factor_pair(a, w, m_norm=None, epsilon=None):
    """Rescale so every row of ``w`` has Euclidean norm 1, keeping ``a @ w``.

    When ``m_norm`` and ``epsilon`` are both given the pair is assumed to be
    a nonnegative ``epsilon``-approximation of a matrix with Frobenius norm
    ``m_norm``; then ``||a||_F <= (1 + epsilon) m_norm`` must hold and a
    ``ValueError`` is raised otherwise.

    Raises
    ------
    ZeroRowError
        If ``w`` has a zero row.
    """
    a, w = as_matrix(a), as_matrix(w)
    if a.shape[1] != w.shape[0]:
        raise DimensionMismatch(f"A {a.shape} and W {w.shape} do not chain")
    norms = np.linalg.norm(w, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroRowError(int(zero[0]))
    a_n, w_n = a * norms, w / norms[:, None]
    if m_norm is not None and epsilon is not None:
        bound = (1 + epsilon) * m_norm
        if np.linalg.norm(a_n) > bound * (1 + 1e-12):
            raise ValueError(f"||A||_F = {np.linalg.norm(a_n):.6g} exceeds (1+eps)||M||_F"
                             f" = {bound:.6g}")
    return a_n, w_n


def split_w(w, svd_of_a):
    """Split ``w`` into its parts on the first ``t0`` right singular
    directions of ``A`` and on the rest; the parts sum to ``w``."""
    w = as_matrix(w)
    v = svd_of_a.v
    if v.shape[0] != w.shape[0]:
        raise DimensionMismatch(f"W has {w.shape[0]} rows, A has {v.shape[0]} columns")
    t0 = svd_of_a.t0
    if t0 >= v.shape[0]:
        return w.copy(), np.zeros_like(w)
    if t0 == 0:
        return np.zeros_like(w), w.copy()
    top = v[:, :t0]
    w0 = top @ (top.T @ w)
    return w0, w - w0


def w0_diagnostics(m, a, w, delta):
    """Quantities behind the ``W0`` approximation bounds for a normalized
    nonnegative pair ``(a, w)`` approximating ``m``.

    Returns a dict with ``||M - A W0||_F``, ``||A^+ M - W0||_F`` (``A^+``
    truncated at ``delta ||M||_F``), ``||M - AW||_F`` and ``t0``.
    """
    m, a, w = as_matrix(m), as_matrix(a), as_matrix(w)
    m_norm = np.linalg.norm(m)
    svd = truncated_svd(a, delta * m_norm)
    w0, _ = split_w(w, svd)
    w0p = pseudoinverse(a, delta * m_norm) @ m if svd.t0 else np.zeros_like(w)
    return {"m_norm": m_norm, "t0": svd.t0,
            "fit": float(np.linalg.norm(m - a @ w)),
            "w0_residual": float(np.linalg.norm(m - a @ w0)),
            "w0_prime_gap": float(np.linalg.norm(w0p - w0))}


# ---------------------------------------------------------------------------
# small exact solvers


def _subsets(r):
    return [s for k in range(r + 1) for s in combinations(range(r), k)]


def _qp_face_maps(q):
    """Linear maps ``w0 -> z`` for every active set of ``min z.Qz, z >= -w0``."""
    r = q.shape[0]
    maps = []
    for act in _subsets(r):
        free = [i for i in range(r) if i not in act]
        k = np.zeros((r, r))
        if act:
            k[list(act), list(act)] = -1.0
            if free:
                qff = q[np.ix_(free, free)]
                qfs = q[np.ix_(free, list(act))]
                k[np.ix_(free, list(act))] = np.linalg.solve(qff, qfs)
        maps.append(k)
    return np.stack(maps)


def _qp_batch(q, w0, maps=None):
    """Exact minimizer of ``sum_i z_i.Q z_i`` s.t. ``w0 + Z >= 0`` for a batch
    ``w0`` of shape ``(B, r, m)``.

    Every face minimizer is formed and the best feasible one kept; the face
    with every constraint active (``Z = -w0``) is always feasible.
    """
    maps = _qp_face_maps(q) if maps is None else maps
    z = np.einsum("sab,kbm->skam", maps, w0)
    scale = 1e-12 * (1.0 + np.abs(w0).max(initial=0.0))
    feas = np.all(z >= -w0[None] - scale, axis=2)
    obj = np.einsum("skam,ab,skbm->skm", z, q, z)
    obj = np.where(feas, obj, np.inf)
    best = np.argmin(obj, axis=0)
    return np.take_along_axis(z, best[None, :, None, :], axis=0)[0]


def _qp_projected_gradient(q, w0, iters=5000, tol=1e-12):
    z = np.maximum(-w0, 0.0)
    step = 1.0 / (2 * np.linalg.eigvalsh(q)[-1])
    for _ in range(iters):
        nxt = np.maximum(z - step * 2 * (q @ z), -w0)
        if np.abs(nxt - z).max(initial=0.0) <= tol:
            return nxt
        z = nxt
    return z


def solve_column_qp(q, w0):
    """Solve ``min sum_i Z_i.Q Z_i`` subject to ``w0 + Z >= 0`` exactly.

    ``q`` is ``r x r`` positive definite and ``w0`` is ``r x m``. The problem
    separates over columns. Active sets are enumerated for ``r <= 8``;
    larger ``r`` uses projected gradient.
    """
    q = np.asarray(q, dtype=float)
    w0 = as_matrix(w0)
    if q.shape != (w0.shape[0], w0.shape[0]):
        raise DimensionMismatch(f"Q {q.shape} does not match W0 {w0.shape}")
    if q.shape[0] > FACE_ENUM_MAX_R:
        return _qp_projected_gradient(q, w0)
    return _qp_batch(q, w0[None])[0]


def qp_objective(q, z):
    return float(np.einsum("am,ab,bm->", z, q, z))


def _nnls_batch(wp, m, faces):
    """Per-row NNLS ``min ||m_j - a W'|| , a >= 0`` by face enumeration.

    Returns the minimal residual squared (up to the constant ``||M||^2``)
    for each candidate in the batch ``wp`` of shape ``(B, r, m)``.
    """
    g = np.einsum("brm,bsm->brs", wp, wp)
    b = np.einsum("jm,brm->bjr", m, wp)
    best = np.zeros(b.shape[:2])
    for face in faces:
        f = list(face)
        gff = g[:, f][:, :, f]
        inv = np.linalg.pinv(gff, hermitian=True)
        bf = b[:, :, f]
        af = np.einsum("bfg,bjg->bjf", inv, bf)
        obj = np.einsum("bjf,bfg,bjg->bj", af, gff, af) - 2 * np.einsum("bjf,bjf->bj", af, bf)
        ok = np.all(af >= -1e-12, axis=2)
        best = np.where(ok & (obj < best), obj, best)
    return best.sum(axis=1)


def _nnls_factor(m, w):
    return np.vstack([nnls(w.T, row, maxiter=50 * max(1, w.shape[0]))[0] for row in m])


# ---------------------------------------------------------------------------
# nets


def grid_points(r, step, radius):
    """Points of ``step * Z^r`` inside the closed ball of ``radius``."""
    k = int(np.floor(radius / step + 1e-12))
    axis = step * np.arange(-k, k + 1)
    pts = np.array(list(product(axis, repeat=r))).reshape(-1, r)
    return pts[np.linalg.norm(pts, axis=1) <= radius * (1 + 1e-12)]


def frame_net(r, step):
    """Orthonormal frames of ``R^r`` (as matrices with frame vectors in
    columns) from an entrywise grid repaired by Gram-Schmidt.

    For ``r == 2`` frames are rotations by angles in ``[0, pi)``.
    """
    if r == 1:
        return np.ones((1, 1, 1))
    if r == 2:
        th = np.arange(0.0, np.pi, step)
        c, s = np.cos(th), np.sin(th)
        return np.stack([np.stack([c, s], 1), np.stack([-s, c], 1)], 2)
    axis = np.arange(-1.0, 1.0 + 1e-12, step)
    frames, seen = [], set()
    for entries in product(axis, repeat=r * r):
        mat = np.array(entries).reshape(r, r)
        if abs(np.linalg.det(mat)) < 1e-6:
            continue
        qm, rm = np.linalg.qr(mat)
        qm = qm * np.sign(np.diag(rm))
        key = tuple(np.round(qm, 9).ravel())
        if key not in seen:
            seen.add(key)
            frames.append(qm)
    return np.stack(frames)


def _n_multisets(n_pts, r):
    out = 1
    for i in range(r):
        out = out * (n_pts + i) // (i + 1)
    return out


def _plan(cfg, r):
    """Coarsen ladder, then frame net, then grid until the count fits."""
    exceeded = False
    while True:
        pts = grid_points(r, 2 * cfg.net_eps1 / r, np.sqrt(r))
        n_w = _n_multisets(len(pts), r)
        frames = frame_net(r, cfg.net_eps2) if r > 1 else np.ones((1, 1, 1))
        ladder = cfg.ratio_ladder()
        per_w = 1 + (r - 1) * len(frames) * len(ladder)
        total = n_w * per_w
        if total <= cfg.max_candidates:
            return cfg, pts, frames, ladder, total, exceeded
        exceeded = True
        if len(ladder) > 1:
            cfg = replace(cfg, norm_guess_factor=cfg.norm_guess_factor ** 2)
        elif r > 1 and len(frames) > 1 and cfg.net_eps2 < np.pi:
            cfg = replace(cfg, net_eps2=min(2 * cfg.net_eps2, np.pi))
        elif len(pts) > 1:
            cfg = replace(cfg, net_eps1=cfg.net_eps1 * 1.25)
        else:
            return cfg, pts, frames, ladder, total, exceeded


def _identity_witness(m, r):
    n, mc = m.shape
    if r >= mc:
        a = np.hstack([m, np.zeros((n, r - mc))])
        w = np.vstack([np.eye(mc), np.zeros((r - mc, mc))])
    else:
        a = np.hstack([np.eye(n), np.zeros((n, r - n))])
        w = np.vstack([m, np.zeros((r - n, mc))])
    return a, w


def approx_nmf(m, r, epsilon, cfg=None):
    """Nonnegative ``A' W'`` of inner dimension ``r`` approximating ``m``.

    Returns an :class:`ApproxResult`; ``budget_exceeded`` is set when the
    nets had to be coarsened to respect ``cfg.max_candidates``.
    """
    m = as_matrix(m)
    if np.any(m < 0):
        raise ValueError("input matrix has negative entries")
    if r < 1:
        raise ValueError("r must be at least 1")
    cfg = ApproxConfig.default(epsilon, r) if cfg is None else cfg
    n, mc = m.shape
    m_norm = np.linalg.norm(m)
    if m_norm == 0:
        return ApproxResult(Factorization.from_factors(m, np.zeros((n, r)), np.zeros((r, mc))),
                            cfg, 1, False, 0)
    if r >= min(n, mc):
        a, w = _identity_witness(m, r)
        return ApproxResult(Factorization.from_factors(m, a, w), cfg, 1, False, r)

    mt = rank_truncate(m, r)
    basis = truncated_svd(mt).v[:, :r]          # m x r, orthonormal row-span basis
    cfg, pts, frames, ladder, total, exceeded = _plan(cfg, r)
    faces = [f for f in _subsets(r) if f]

    options = [(r, None, None)]
    for t0 in range(1, r):
        for fr in frames:
            for rho in ladder:
                diag = np.where(np.arange(r) < t0, 1.0, rho)
                q = (fr * diag) @ fr.T
                options.append((t0, q, _qp_face_maps(q)))

    best = (np.inf, -1, -1)
    best_w = None
    m2 = m_norm ** 2
    combos = combinations_with_replacement(range(len(pts)), r)
    w_index = 0
    while True:
        chunk = [c for _, c in zip(range(BATCH), combos)]
        if not chunk:
            break
        coords = pts[np.array(chunk)]             # B x r x r
        w0 = np.einsum("bij,mj->bim", coords, basis)
        for k, (t0, q, maps) in enumerate(options):
            if q is None:
                wp = np.maximum(w0, 0.0)
            else:
                wp = np.maximum(w0 + _qp_batch(q, w0, maps), 0.0)
            res2 = m2 + _nnls_batch(wp, m, faces)
            i = int(np.argmin(res2))
            cand = (float(res2[i]), w_index + i, k)
            if cand < best:
                best = cand
                best_w = (wp[i].copy(), t0)
        w_index += len(chunk)

    w_best, t0 = best_w
    a_best = _nnls_factor(m, w_best)
    fact = Factorization.from_factors(m, a_best, w_best)
    return ApproxResult(fact, cfg, total, exceeded, t0)
