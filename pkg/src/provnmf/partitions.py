"""Enumeration of hyperplane partitions and simplicial partitions of the
columns of a matrix.

A hyperplane through the origin with normal ``h`` labels column ``x`` by the
sign of ``h @ x``. Every strict labeling can be written lexicographically:
a hyperplane ``g1`` spanned by ``k - 1`` independent columns fixes the signs
of the columns off it, the columns on it are labeled recursively inside
their own span, and so on. Enumerating those nested choices (both signs at
every level) yields exactly the realizable labelings; each one is then
confirmed by a small LP that returns a witness normal.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np
from scipy.optimize import linprog

from .errors import BudgetExceededError, RankTooHighError
from .linalg import as_matrix, numeric_rank, orthonormal_basis

ZERO_BAND = 1e-10
DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class HyperplaneSeparation:
    normal: np.ndarray
    labels: tuple


def hyperplane_separation(m, h, band=ZERO_BAND):
    """Labels ``sign(h @ M_i)`` in {-1, 0, 1} with a relative zero band."""
    m = as_matrix(m)
    h = np.asarray(h, dtype=float).ravel()
    vals = h @ m
    scale = band * np.linalg.norm(h) * np.linalg.norm(m, axis=0)
    labels = np.where(np.abs(vals) <= scale, 0, np.sign(vals)).astype(int)
    return HyperplaneSeparation(normal=h, labels=tuple(int(v) for v in labels))


def closed_labels(m, h, band=ZERO_BAND):
    """Partition labels with the convention ``h @ M_i >= 0  ->  +1``."""
    sep = hyperplane_separation(m, h, band)
    return tuple(1 if v >= 0 else -1 for v in sep.labels)


def _zero_columns(x):
    norms = np.linalg.norm(x, axis=0)
    top = norms.max(initial=0.0)
    return norms <= 1e-14 * max(top, 1e-300)


class _Enumerator:
    """Nested-hyperplane enumeration over column subsets, memoized by subset."""

    def __init__(self, x, closed, band):
        self.x = x
        self.closed = closed
        self.band = band
        self.labelings = lru_cache(maxsize=None)(self._labelings)

    def _labelings(self, idx):
        """Set of label tuples (aligned with ``idx``) realizable on ``idx``."""
        if not idx:
            return frozenset({()})
        cols = self.x[:, idx]
        basis = orthonormal_basis(cols)
        c = basis.T @ cols
        k = c.shape[0]
        out = set()
        if self.closed:
            out.add((1,) * len(idx))
        if k == 1:
            s = tuple(int(v) for v in np.sign(c[0]))
            out.add(s)
            out.add(tuple(-v for v in s))
            return frozenset(out)
        norms = np.linalg.norm(c, axis=0)
        seen = set()
        for comb in combinations(range(len(idx)), k - 1):
            sub = c[:, comb]
            _, sv, vt = np.linalg.svd(sub.T)
            if sv.size < k - 1 or sv[-1] <= 1e-9 * sv[0]:
                continue
            g = vt[-1]
            vals = g @ c
            on = np.abs(vals) <= self.band * norms
            key = tuple(np.flatnonzero(on))
            if key in seen:
                continue
            seen.add(key)
            signs = np.sign(vals).astype(int)
            on_idx = tuple(idx[i] for i in key)
            inner = self.labelings(on_idx)
            pos = {i: p for p, i in enumerate(key)}
            for sgn in (1, -1):
                for lab in inner:
                    out.add(tuple(lab[pos[i]] if on[i] else sgn * int(signs[i])
                                  for i in range(len(idx))))
        return frozenset(out)


def _witness_normal(x, labels, closed):
    """LP witness ``h`` realizing ``labels`` on the columns of ``x``, or None.

    Strict labels need ``label * (h @ x) >= 1``; in closed mode ``+1`` only
    needs ``h @ x >= 0``.
    """
    lab = np.asarray(labels, dtype=float)
    a_ub = -(lab[:, None] * x.T)
    if closed:
        b_ub = np.where(lab > 0, 0.0, -1.0)
    else:
        b_ub = -np.ones(lab.size)
    res = linprog(np.zeros(x.shape[0]), A_ub=a_ub, b_ub=b_ub,
                  bounds=(None, None), method="highs")
    if res.status != 0:
        return None
    return res.x


def _labelings_with_normals(m, closed, validate=True, band=ZERO_BAND):
    m = as_matrix(m)
    basis = orthonormal_basis(m)
    x = basis.T @ m
    zero = _zero_columns(m)
    live = tuple(int(i) for i in np.flatnonzero(~zero))
    enum = _Enumerator(x, closed, band)
    labs = enum.labelings(live)
    out = {}
    for lab in labs:
        full = np.ones(m.shape[1], dtype=int)
        full[list(live)] = lab
        key = tuple(int(v) for v in full)
        if validate:
            live_lab = [key[i] for i in live]
            h = (_witness_normal(x[:, list(live)], live_lab, closed)
                 if x.shape[0] else np.zeros(0))
            if h is None:
                continue
            out[key] = basis @ h
        else:
            out[key] = None
    return out


def enumerate_hyperplane_partitions(m, s, validate=True, return_normals=False):
    """All distinct ``{-1, +1}`` labelings of the columns of ``m`` realizable
    as ``sign(h @ M_i)`` with no column on the hyperplane.

    Zero columns cannot be separated and are always labeled ``+1``.

    Raises
    ------
    RankTooHighError
        If the numeric rank of ``m`` exceeds ``s``.
    """
    m = as_matrix(m)
    if m.shape[1] < 1:
        raise ValueError("matrix needs at least one column")
    rank = numeric_rank(m)
    if rank > s:
        raise RankTooHighError(rank, s)
    labs = _labelings_with_normals(m, closed=False, validate=validate)
    if return_normals:
        return labs
    return set(labs)


def brute_force_partitions(m):
    """Reference enumeration: every strict labeling of the nonzero columns
    checked by LP. Exponential in the number of columns."""
    m = as_matrix(m)
    basis = orthonormal_basis(m)
    x = basis.T @ m
    zero = _zero_columns(m)
    live = np.flatnonzero(~zero)
    out = set()
    for signs in product((1, -1), repeat=live.size):
        full = np.ones(m.shape[1], dtype=int)
        full[live] = signs
        key = tuple(int(v) for v in full)
        if x.shape[0] and _witness_normal(x[:, live], signs, closed=False) is not None:
            out.add(key)
    return out


@dataclass(frozen=True)
class PartitionSpec:
    """Columns split as ``P_1 .. P_{k+1}`` by peeling ``Q_1 .. Q_k``.

    ``Q_i`` holds the columns on the nonnegative side of every hyperplane in
    the ``i``-th set; ``P_i = Q_i`` minus earlier parts and ``P_{k+1}`` is the
    rest.
    """

    k: int
    s: int
    parts: tuple
    q_sets: tuple
    hyperplane_sets: tuple = None

    @property
    def n_cols(self):
        return sum(len(p) for p in self.parts)

    def assignment(self):
        """Part index (0-based) of each column."""
        out = [0] * self.n_cols
        for p, cols in enumerate(self.parts):
            for c in cols:
                out[c] = p
        return tuple(out)

    def n_nonempty(self):
        return sum(1 for p in self.parts if p)

    @classmethod
    def from_q_sets(cls, n_cols, q_sets, s, hyperplane_sets=None):
        parts, used = [], set()
        for q in q_sets:
            part = frozenset(q) - used
            parts.append(part)
            used |= part
        parts.append(frozenset(range(n_cols)) - used)
        return cls(k=len(q_sets), s=s, parts=tuple(parts),
                   q_sets=tuple(frozenset(q) for q in q_sets),
                   hyperplane_sets=hyperplane_sets)

    @classmethod
    def from_hyperplanes(cls, m, hyperplane_sets, band=ZERO_BAND):
        """Partition generated by explicit hyperplane normals."""
        m = as_matrix(m)
        q_sets = []
        s = len(hyperplane_sets[0]) if hyperplane_sets else 0
        for hs in hyperplane_sets:
            inside = np.ones(m.shape[1], dtype=bool)
            for h in hs:
                inside &= np.asarray(closed_labels(m, h, band)) > 0
            q_sets.append(set(np.flatnonzero(inside).tolist()))
        return cls.from_q_sets(m.shape[1], q_sets, s,
                               tuple(tuple(np.asarray(h) for h in hs)
                                     for hs in hyperplane_sets))

    @classmethod
    def trivial(cls, n_cols, s=1):
        """Single part holding every column."""
        return cls.from_q_sets(n_cols, [set(range(n_cols))], s)


def _mask(labels):
    return sum(1 << i for i, v in enumerate(labels) if v > 0)


def _cols(mask, n):
    return frozenset(i for i in range(n) if mask >> i & 1)


def enumerate_simplicial_partitions(m, k, s, cap=DEFAULT_CAP):
    """A set of ``(k, s)`` partitions containing every ``(k, s)``-simplicial
    partition of the columns of ``m``, ordered by number of nonempty parts
    and then by assignment.

    Raises
    ------
    BudgetExceededError
        If more than ``cap`` candidate partitions would be composed.
    """
    if k < 1 or s < 1:
        raise ValueError("k and s must be positive")
    m = as_matrix(m)
    n = m.shape[1]
    labs = _labelings_with_normals(m, closed=True)
    # q-set mask -> s witness normals
    single = {}
    for lab, h in sorted(labs.items()):
        single.setdefault(_mask(lab), h)
    level = {mask: (h,) for mask, h in single.items()}
    for _ in range(s - 1):
        nxt = dict(level)
        for mask, hs in level.items():
            for m2, h2 in single.items():
                key = mask & m2
                if key not in nxt:
                    nxt[key] = hs + (h2,)
                    if len(nxt) > cap:
                        raise BudgetExceededError(f"more than {cap} Q-sets")
        level = {msk: hs + (hs[-1],) * (s - len(hs)) for msk, hs in nxt.items()}
    options = sorted(level.items())
    if len(options) ** k > cap:
        raise BudgetExceededError(
            f"{len(options)}**{k} candidate partitions exceed the cap {cap}")
    seen = {}
    for combo in product(options, repeat=k):
        q_sets = [_cols(msk, n) for msk, _ in combo]
        spec = PartitionSpec.from_q_sets(n, q_sets, s,
                                         tuple(hs for _, hs in combo))
        seen.setdefault(spec.assignment(), spec)
    return sorted(seen.values(), key=lambda p: (p.n_nonempty(), p.assignment()))
