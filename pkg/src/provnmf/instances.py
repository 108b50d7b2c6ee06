"""Instance generators.

* planted separable / robust-simplicial factorizations,
* planted full-rank products for the exact solvers,
* the planar d-SUM gadget and the Intermediate Simplex instance built from
  ``d`` copies of it, with a completeness check.

All randomness goes through ``numpy.random.default_rng(seed)`` (PCG64), so a
seed reproduces an instance exactly.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateValuesError,
    EpsTooLargeError,
    GenerationFailure,
    IndexOutOfRangeError,
)
from .oracle import l1_dist_to_hull

MAX_ATTEMPTS = 1000
#: vertex-count regime of the gadget
GADGET_EPS_VERTEX = 1 / 50
#: rigidity regime of the gadget (only triangles A_i C_i E_i are solutions)
GADGET_EPS_RIGID = 1 / 1000


def simplicial_margin(w):
    """Smallest l1 distance from a row of ``w`` to the hull of the others.

    A single row has nothing to compare against and gets the largest
    possible l1 distance between distributions, 2.
    """
    w = np.asarray(w, dtype=float)
    if w.shape[0] < 2:
        return 2.0
    return min(l1_dist_to_hull(w[i], w, excluded=[i]) for i in range(w.shape[0]))


@dataclass
class PlantedInstance:
    m: np.ndarray
    a_true: np.ndarray
    w_true: np.ndarray
    r: int
    alpha: float
    noise_eps: float
    seed: int
    anchor_rows: list = field(default_factory=list)
    m_clean: np.ndarray = None

    def to_json(self):
        return {
            "kind": "separable",
            "r": self.r,
            "alpha": self.alpha,
            "noise_eps": self.noise_eps,
            "seed": self.seed,
            "anchor_rows": list(map(int, self.anchor_rows)),
            "m": self.m.tolist(),
            "a_true": self.a_true.tolist(),
            "w_true": self.w_true.tolist(),
        }


def gen_separable(n, m, r, alpha_min=0.1, noise_eps=0.0, seed=0,
                  concentration=None):
    """Planted separable instance with an ``alpha``-robust simplicial ``W``.

    ``W`` rows are Dirichlet(``concentration``) draws, resampled until their
    simplicial margin reaches ``alpha_min``. ``A`` holds one identity row per
    column of ``W`` (the anchors) and Dirichlet(1) convex-combination rows,
    in shuffled order. With ``noise_eps > 0`` each row is moved towards a
    random distribution by an l1 amount drawn from ``[noise_eps/2,
    noise_eps)``, which keeps rows nonnegative and l1-normalized.
    """
    if n < r or m < r or r < 1:
        raise ValueError("need 1 <= r <= min(n, m)")
    if not 0 < alpha_min < 2:
        raise ValueError("alpha_min must lie in (0, 2)")
    rng = np.random.default_rng(seed)
    if concentration is None:
        concentration = 0.5
    for _ in range(MAX_ATTEMPTS):
        w = rng.dirichlet(np.full(m, concentration), size=r)
        alpha = simplicial_margin(w)
        if alpha >= alpha_min:
            break
    else:
        raise GenerationFailure(
            f"no W with margin >= {alpha_min} after {MAX_ATTEMPTS} draws")

    mixed = rng.dirichlet(np.ones(r), size=n - r) if n > r else np.zeros((0, r))
    a = np.vstack([np.eye(r), mixed])
    order = rng.permutation(n)
    a = a[order]
    anchor_rows = [int(np.flatnonzero(order == i)[0]) for i in range(r)]
    clean = a @ w

    noisy = clean
    if noise_eps > 0:
        q = rng.dirichlet(np.ones(m), size=n)
        gap = np.abs(q - clean).sum(axis=1)
        target = noise_eps * rng.uniform(0.5, 1.0, size=n)
        eta = np.minimum(target / np.maximum(gap, 1e-300), 1.0)
        noisy = (1 - eta)[:, None] * clean + eta[:, None] * q
    return PlantedInstance(m=noisy, a_true=a, w_true=w, r=r, alpha=float(alpha),
                           noise_eps=float(noise_eps), seed=int(seed),
                           anchor_rows=anchor_rows, m_clean=clean)


def gen_planted_product(n, m, r, seed=0, rank=None):
    """Nonnegative ``(a, w, a @ w)`` with uniform entries.

    With ``rank < r`` the extra columns of ``a`` are nonnegative combinations
    of the first ``rank`` ones, so ``a @ w`` has rank at most ``rank``.
    """
    rng = np.random.default_rng(seed)
    a = rng.uniform(size=(n, r))
    if rank is not None and rank < r:
        mix = rng.uniform(size=(rank, r - rank))
        a[:, rank:] = a[:, :rank] @ mix
    w = rng.uniform(size=(r, m))
    return a, w, a @ w


def gen_noisy_product(n, m, r, epsilon, seed=0, noise_fraction=0.5):
    """Nonnegative ``(a, w, m)`` with ``||m - a w||_F <= epsilon ||m||_F``.

    ``w`` rows have unit Euclidean norm. The noise is a nonnegative matrix of
    Frobenius norm ``noise_fraction * epsilon * ||a w||_F`` added to
    ``a @ w``; adding a nonnegative matrix cannot shrink the norm, so the
    bound holds relative to ``||m||_F``.
    """
    if not 0 <= noise_fraction <= 1:
        raise ValueError("noise_fraction must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    a = rng.uniform(size=(n, r))
    w = rng.uniform(size=(r, m))
    norms = np.linalg.norm(w, axis=1)
    a, w = a * norms, w / norms[:, None]
    clean = a @ w
    noise = rng.uniform(size=clean.shape)
    noise *= noise_fraction * epsilon * np.linalg.norm(clean) / np.linalg.norm(noise)
    return a, w, clean + noise


# --------------------------------------------------------------------------
# planar gadget


def _hexagon(eps):
    """Hexagon ABCDEF as (y, z) points.

    It is an equilateral triangle of side ``2/sqrt(3) + eps`` with its corners
    cut ``eps`` deep: cut edges AB, CD, EF have length ``eps``, the remaining
    sides ``2/sqrt(3) - eps``. AB lies on ``y = 0`` with z increasing from A
    to B, DE on ``y = 1``. The center sits at ``z = 1`` so the whole
    hexagon has ``z`` in ``[0, 2]``.
    """
    s3 = np.sqrt(3.0)
    side = 2 / s3 - eps
    zc = 1.0
    a = (0.0, zc - eps / 2)
    b = (0.0, zc + eps / 2)
    c = (side * s3 / 2, zc + eps / 2 + side / 2)
    d = (1.0, zc + 1 / s3 - eps / 2)
    e = (1.0, zc - 1 / s3 + eps / 2)
    f = (side * s3 / 2, zc - eps / 2 - side / 2)
    center = (2 / 3 - s3 * eps / 2 + eps / s3, zc)
    return np.array([a, b, c, d, e, f]), np.array(center)


def _halfplanes(poly, interior):
    """Inequalities ``n @ p >= c`` for the edges of a convex polygon."""
    rows = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        normal = np.array([-(q[1] - p[1]), q[0] - p[0]])
        c = normal @ p
        if normal @ interior < c:
            normal, c = -normal, -c
        rows.append((normal, c))
    return rows


def _clip(poly, normal, c):
    """Sutherland-Hodgman clip of ``poly`` by ``normal @ p >= c``."""
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        fp, fq = normal @ p - c, normal @ q - c
        if fp >= 0:
            out.append(p)
        if (fp >= 0) != (fq >= 0):
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return out


def _dedupe(poly, tol=1e-13):
    out = []
    for p in poly:
        if not out or np.abs(p - out[-1]).max() > tol:
            out.append(p)
    while len(out) > 1 and np.abs(out[0] - out[-1]).max() <= tol:
        out.pop()
    return out


def halfplane_polygon(halfplanes, start):
    """Intersection of half-planes ``n @ p >= c`` with the polygon ``start``."""
    poly = [np.asarray(p, dtype=float) for p in start]
    for normal, c in halfplanes:
        poly = _dedupe(_clip(poly, np.asarray(normal, float), float(c)))
        if not poly:
            break
    return np.array(poly)


@dataclass
class Gadget2D:
    values: np.ndarray
    eps: float
    hexagon: np.ndarray
    center: np.ndarray
    a_pts: np.ndarray
    c_pts: np.ndarray
    e_pts: np.ndarray
    vertices: np.ndarray

    @property
    def n_values(self):
        return len(self.values)

    @property
    def rigid(self):
        return self.eps < GADGET_EPS_RIGID

    def triangle(self, k):
        return np.array([self.a_pts[k], self.c_pts[k], self.e_pts[k]])

    def to_json(self):
        return {
            "values": self.values.tolist(),
            "eps": self.eps,
            "hexagon": self.hexagon.tolist(),
            "center": self.center.tolist(),
            "a_pts": self.a_pts.tolist(),
            "c_pts": self.c_pts.tolist(),
            "e_pts": self.e_pts.tolist(),
            "vertices": self.vertices.tolist(),
            "rigid_regime": self.rigid,
        }


def build_gadget_2d(values, eps_g):
    """Hexagon, the ``N`` triangles ``A_i C_i E_i`` and the ``3N`` vertices of
    their intersection (coordinates are ``(y, z)``)."""
    values = np.asarray(values, dtype=float).ravel()
    if not 0 < eps_g < GADGET_EPS_VERTEX:
        raise EpsTooLargeError(f"eps_g must lie in (0, 1/50), got {eps_g}")
    if values.size == 0 or np.any(values < 0) or np.any(values > 1):
        raise ValueError("values must be a nonempty list inside [0, 1]")
    if np.unique(values).size != values.size:
        raise DuplicateValuesError("gadget values must be distinct")
    hexagon, center = _hexagon(eps_g)
    a, b, c, d, e, f = hexagon
    s = values[:, None]
    a_pts = a + s * (b - a)
    c_pts = c + s * (d - c)
    e_pts = e + s * (f - e)
    planes = []
    for k in range(values.size):
        planes.extend(_halfplanes([a_pts[k], c_pts[k], e_pts[k]], center))
    verts = halfplane_polygon(planes, hexagon)
    return Gadget2D(values=values, eps=float(eps_g), hexagon=hexagon, center=center,
                    a_pts=a_pts, c_pts=c_pts, e_pts=e_pts, vertices=verts)


# --------------------------------------------------------------------------
# Intermediate Simplex instance


@dataclass
class IntermediateSimplexInstance:
    """Polyhedron ``{x : h_mat @ x >= b_vec}`` and point set ``points``.

    Coordinates are ordered ``(x_1, y_1, z_1, ..., x_d, y_d, z_d, w)``.
    """

    d: int
    h_mat: np.ndarray
    b_vec: np.ndarray
    points: np.ndarray
    point_labels: list
    gadget: Gadget2D
    source_values: np.ndarray
    eps_g: float
    families: dict
    # soundness needs eps < N**(-C d) for an unspecified constant C
    soundness_constant_c: object = None

    @property
    def dim(self):
        return 3 * self.d + 1

    def feasible(self, x, tol=1e-9):
        return bool(np.all(self.h_mat @ x >= self.b_vec - tol))

    def to_json(self):
        return {
            "kind": "intermediate-simplex",
            "d": self.d,
            "dim": self.dim,
            "eps_g": self.eps_g,
            "source_values": self.source_values.tolist(),
            "H": self.h_mat.tolist(),
            "b": self.b_vec.tolist(),
            "families": {k: list(v) for k, v in self.families.items()},
            "points": self.points.tolist(),
            "point_labels": self.point_labels,
            "soundness_regime": {"eps_bound": "N**(-C*d)", "C": None},
            "gadget_rigid_regime": self.gadget.rigid,
        }


def _cone_rows(gadget):
    """7x3 system ``R (x, y, z) >= b`` for the cone over the hexagon at x=1."""
    rows, rhs = [], []
    for normal, c in _halfplanes(gadget.hexagon, gadget.center):
        rows.append([-c, normal[0], normal[1]])
        rhs.append(0.0)
    rows.append([-1.0, 0.0, 0.0])
    rhs.append(-1.0)
    return np.array(rows), np.array(rhs)


def _w_max(h_mat, b_vec, x, w_col):
    """Largest ``w`` with ``x`` (w entry ignored) inside the polyhedron."""
    base = h_mat @ x - h_mat[:, w_col] * x[w_col]
    coef = h_mat[:, w_col]
    upper = [(base[i] - b_vec[i]) / -coef[i] for i in np.flatnonzero(coef < 0)]
    return min(upper)


def build_intermediate_simplex(values, d, eps_g):
    """Intermediate Simplex instance in dimension ``3d + 1`` built from ``d``
    copies of the gadget for ``values``."""
    gadget = build_gadget_2d(values, eps_g)
    if d < 1:
        raise ValueError("d must be positive")
    dim = 3 * d + 1
    wc = dim - 1
    z_a = gadget.hexagon[0][1]
    rows, rhs = [], []
    families = {"box": [], "gadget": [], "ce": [], "ab": []}

    def add(family, coeffs, bound):
        row = np.zeros(dim)
        for idx, val in coeffs.items():
            row[idx] += val
        families[family].append(len(rows))
        rows.append(row)
        rhs.append(bound)

    for i in range(d):
        x, y, z = 3 * i, 3 * i + 1, 3 * i + 2
        add("box", {x: 1.0}, 0.0)
        add("box", {x: -1.0}, -1.0)
        add("box", {y: 1.0}, 0.0)
        add("box", {y: -1.0}, -1.0)
        add("box", {z: 1.0}, 0.0)
        add("box", {z: -1.0}, -2.0)
    add("box", {wc: 1.0}, 0.0)
    add("box", {wc: -1.0}, -1.0)

    r_mat, r_rhs = _cone_rows(gadget)
    for i in range(d):
        for coeff, bound in zip(r_mat, r_rhs):
            add("gadget", {3 * i: coeff[0], 3 * i + 1: coeff[1], 3 * i + 2: coeff[2]}, bound)
    for i in range(d):
        x, y = 3 * i, 3 * i + 1
        # w <= 1 - y + (1 - x)
        add("ce", {wc: -1.0, y: -1.0, x: -1.0}, -2.0)
    for i in range(d):
        x, y, z = 3 * i, 3 * i + 1, 3 * i + 2
        # w <= (z - z(A) x)/eps + 10 y/eps + (1 - x)
        add("ab", {wc: -1.0, z: 1 / eps_g, x: -z_a / eps_g - 1.0, y: 10 / eps_g}, -1.0)
        # w >= (z - z(A) x)/eps - 10 y/eps - (1 - x)
        add("ab", {wc: 1.0, z: -1 / eps_g, x: z_a / eps_g - 1.0, y: 10 / eps_g}, -1.0)
    h_mat, b_vec = np.array(rows), np.array(rhs)

    points, labels = [np.zeros(dim)], ["O"]
    wpt = np.zeros(dim)
    wpt[wc] = 1.0
    points.append(wpt)
    labels.append("W")
    for i in range(d):
        for k, (yk, zk) in enumerate(gadget.vertices):
            full = np.zeros(dim)
            full[3 * i:3 * i + 3] = (1.0, yk, zk)
            wmax = _w_max(h_mat, b_vec, full, wc)
            p = full / 4
            p[wc] = wmax / 4
            points.append(p)
            labels.append(f"I[{i}][{k}]")
    q = np.zeros(dim)
    for i in range(d):
        q[3 * i:3 * i + 3] = (1 / d, gadget.center[0] / d, gadget.center[1] / d)
    q[wc] = 1 / 6
    points.append(q)
    labels.append("Q")
    inst = IntermediateSimplexInstance(
        d=d, h_mat=h_mat, b_vec=b_vec, points=np.array(points), point_labels=labels,
        gadget=gadget, source_values=gadget.values.copy(), eps_g=float(eps_g),
        families=families)
    bad = [lab for lab, p in zip(labels, inst.points) if not inst.feasible(p)]
    if bad:
        raise GenerationFailure(f"points outside the polyhedron: {bad[:5]}")
    return inst


def completeness_witness(inst, chosen_indices):
    """The ``3d + 2`` simplex vertices for a choice of one value per gadget."""
    chosen = list(chosen_indices)
    if len(chosen) != inst.d:
        raise IndexOutOfRangeError(f"need {inst.d} indices, got {len(chosen)}")
    n_vals = inst.gadget.n_values
    if any(k < 0 or k >= n_vals for k in chosen):
        raise IndexOutOfRangeError(f"indices must lie in [0, {n_vals})")
    dim, wc = inst.dim, inst.dim - 1
    pts = [np.zeros(dim)]
    wpt = np.zeros(dim)
    wpt[wc] = 1.0
    pts.append(wpt)
    g = inst.gadget
    for i, k in enumerate(chosen):
        for planar, wval in ((g.a_pts[k], g.values[k]), (g.c_pts[k], 0.0), (g.e_pts[k], 0.0)):
            p = np.zeros(dim)
            p[3 * i:3 * i + 3] = (1.0, planar[0], planar[1])
            p[wc] = wval
            pts.append(p)
    return np.array(pts)


def verify_completeness(inst, chosen_indices, tol=1e-8):
    """Whether the witness simplex for ``chosen_indices`` is feasible and
    contains every point of the instance."""
    t = completeness_witness(inst, chosen_indices)
    if not all(inst.feasible(p) for p in t):
        return False
    return all(l1_dist_to_hull(p, t) <= tol for p in inst.points)
