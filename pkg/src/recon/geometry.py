"""Geometric primitives on points, simplices, flats and spheres in R^N.

All operations are pure functions on immutable inputs.  Floating point is
handled with one scale-aware tolerance policy: an absolute tolerance of
``1e-9 * (1 + magnitude of the coordinates involved)``.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DegenerateSimplex, InvalidInput, NotInAffineHull

BASE_TOL = 1e-9
DEGENERATE_REL = 1e-9  # height below this fraction of the diameter => degenerate


def scale_tol(*arrays, base=BASE_TOL):
    """Absolute tolerance adapted to the magnitude of the participating coordinates."""
    m = 0.0
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if a.size:
            m = max(m, float(np.max(np.abs(a))))
    return base * (1.0 + m)


@dataclass(frozen=True, eq=False)
class Sphere:
    """A circumsphere: center ``Z`` and radius ``R``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius < 0:
            raise InvalidInput(f"sphere radius must be >= 0, got {self.radius}")

    def contains(self, x, tol=None):
        x = np.asarray(x, dtype=float)
        if tol is None:
            tol = scale_tol(self.center, x, self.radius)
        return np.linalg.norm(x - self.center) <= self.radius + tol


@dataclass(frozen=True, eq=False)
class Flat:
    """Affine subspace given by a base point and orthonormal basis rows (k, N)."""

    base: np.ndarray
    basis: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
        object.__setattr__(self, "basis", basis)
        if self.validate:
            gram = basis @ basis.T
            if not np.allclose(gram, np.eye(basis.shape[0]), atol=1e-10):
                raise InvalidInput("flat basis rows are not orthonormal within 1e-10")

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def ambient_dim(self):
        return self.base.shape[0]

    def coords(self, x):
        """Coordinates of the orthogonal projection of ``x`` in the basis (batchable)."""
        return (np.asarray(x, dtype=float) - self.base) @ self.basis.T

    def from_coords(self, u):
        return self.base + np.asarray(u, dtype=float) @ self.basis

    def project(self, x):
        return self.from_coords(self.coords(x))


def project_onto_flat(flat, x):
    """Orthogonal projection of ``x`` onto ``flat``."""
    return flat.project(x)


def orthonormal_rows(vectors, rank_tol=1e-12):
    """Orthonormal basis (rows) of the row span of ``vectors``."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vectors.shape[0] == 0:
        return vectors.reshape(0, vectors.shape[1])
    u, s, vt = np.linalg.svd(vectors, full_matrices=False)
    cutoff = rank_tol * (s[0] if s.size else 0.0) + 1e-300
    return vt[s > cutoff]


def simplex_diameter(vertices):
    vertices = np.asarray(vertices, dtype=float)
    if len(vertices) < 2:
        return 0.0
    diff = vertices[:, None, :] - vertices[None, :, :]
    return float(np.sqrt((diff ** 2).sum(-1).max()))


def affine_hull(vertices, expected_dim=None):
    """The flat spanned by a vertex array (k, N); checks non-degeneracy if asked."""
    vertices = np.asarray(vertices, dtype=float)
    basis = orthonormal_rows(vertices[1:] - vertices[0])
    if expected_dim is not None and basis.shape[0] != expected_dim:
        raise DegenerateSimplex(
            f"affine hull has dimension {basis.shape[0]}, expected {expected_dim}"
        )
    return Flat(vertices[0], basis, validate=False)


def is_degenerate(vertices):
    vertices = np.asarray(vertices, dtype=float)
    if len(vertices) < 2:
        return False
    diam = simplex_diameter(vertices)
    return simplex_height(vertices) <= DEGENERATE_REL * diam


# ---------------------------------------------------------------------------
# Smallest enclosing ball (move-to-front Welzl with a seeded shuffle)
# ---------------------------------------------------------------------------


def _sphere_through(points):
    """Smallest sphere with all of ``points`` on its boundary (they support it)."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return None
    if len(points) == 1:
        return Sphere(points[0], 0.0)
    u = points[1:] - points[0]
    gram = u @ u.T
    rhs = 0.5 * np.einsum("ij,ij->i", u, u)
    try:
        y = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        y, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    center = points[0] + y @ u
    return Sphere(center, float(np.linalg.norm(center - points[0])))


def _miniball_tiny(points, tol):
    """Closed forms / subset enumeration for up to a handful of points."""
    k = len(points)
    if k == 1:
        return Sphere(points[0], 0.0)
    if k == 2:
        center = 0.5 * (points[0] + points[1])
        return Sphere(center, float(np.linalg.norm(points[0] - center)))
    best = None
    for size in range(2, min(k, points.shape[1] + 1) + 1):
        for subset in combinations(range(k), size):
            sph = _sphere_through(points[list(subset)])
            if sph is None:
                continue
            if best is not None and sph.radius >= best.radius - 1e-15:
                continue
            dmax = float(np.max(np.linalg.norm(points - sph.center, axis=1)))
            if dmax <= sph.radius + tol:
                best = sph
    return best


def miniball(points, seed=0):
    """Smallest enclosing ball of a point set.

    Small inputs (simplices) use exact subset enumeration; larger sets use
    Welzl's randomized move-to-front recursion with a seeded shuffle, so the
    result (and runtime) is reproducible.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or len(points) == 0:
        raise InvalidInput("miniball needs a non-empty (k, N) array of points")
    n_dim = points.shape[1]
    tol = scale_tol(points)
    if len(points) <= max(4, n_dim + 2):
        ball = _miniball_tiny(points, tol)
        if ball is not None:
            return ball
    order = np.arange(len(points))
    np.random.default_rng(seed).shuffle(order)
    pts = [points[i] for i in order]

    def welzl(idx, support):
        ball = _sphere_through(support)
        if len(support) == n_dim + 1:
            return ball
        for k in range(idx):
            p = pts[k]
            if ball is None or np.linalg.norm(p - ball.center) > ball.radius + tol:
                ball = welzl(k, support + [p])
                pts.insert(0, pts.pop(k))  # move to front
        return ball

    ball = welzl(len(pts), [])
    return ball if ball is not None else Sphere(points[0], 0.0)


def circumsphere(vertices):
    """Smallest sphere through all vertices of a non-degenerate simplex.

    Solved in local coordinates of the affine hull, so the center lies in
    ``Aff(vertices)`` by construction.  Degeneracy shows up as a singular (or
    wildly ill-conditioned) system: the equidistance residual is checked.
    """
    vertices = np.asarray(vertices, dtype=float)
    if len(vertices) == 1:
        return Sphere(vertices[0], 0.0)
    e = vertices[1:] - vertices[0]
    gram = e @ e.T
    rhs = 0.5 * np.einsum("ij,ij->i", e, e)
    try:
        y = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSimplex("circumsphere of a degenerate simplex") from exc
    center = vertices[0] + y @ e
    dists = np.linalg.norm(vertices - center, axis=1)
    radius = float(dists.mean())
    diam = simplex_diameter(vertices)
    if radius > 0 and float(np.abs(dists - radius).max()) > 1e-8 * max(diam, radius):
        raise DegenerateSimplex("circumsphere equidistance failed (degenerate simplex)")
    return Sphere(center, radius)


def power_distance(sphere, x):
    """``||x - Z||^2 - R^2`` with respect to a sphere ``(Z, R)``."""
    x = np.asarray(x, dtype=float)
    d2 = float(((x - sphere.center) ** 2).sum())
    return d2 - sphere.radius ** 2


def barycentric(vertices, x):
    """Normalized barycentric coordinates of ``x`` in a non-degenerate simplex.

    ``x`` must lie in the affine hull (within ``1e-8 * diam``).
    """
    vertices = np.asarray(vertices, dtype=float)
    x = np.asarray(x, dtype=float)
    if is_degenerate(vertices):
        raise DegenerateSimplex("barycentric coordinates of a degenerate simplex")
    diam = max(simplex_diameter(vertices), scale_tol(vertices))
    e = vertices[1:] - vertices[0]
    mu, *_ = np.linalg.lstsq(e.T, x - vertices[0], rcond=None)
    recon = vertices[0] + mu @ e
    if np.linalg.norm(recon - x) > 1e-8 * diam:
        raise NotInAffineHull(
            f"point is {np.linalg.norm(recon - x):.3e} away from the affine hull"
        )
    return np.concatenate([[1.0 - mu.sum()], mu])


def power_via_affine_combination(vertices, lam, z):
    """Power distance of ``x = sum lam_a a`` written against an arbitrary point z:
    ``||x - z||^2 - sum_a lam_a ||a - z||^2``.
    """
    vertices = np.asarray(vertices, dtype=float)
    lam = np.asarray(lam, dtype=float)
    z = np.asarray(z, dtype=float)
    if is_degenerate(vertices):
        raise DegenerateSimplex("power expression needs a non-degenerate simplex")
    x = lam @ vertices
    return float(((x - z) ** 2).sum() - lam @ ((vertices - z) ** 2).sum(axis=1))


def simplex_volume(vertices):
    """d-dimensional volume via the Gram determinant; 0 for degenerate input."""
    vertices = np.asarray(vertices, dtype=float)
    d = len(vertices) - 1
    if d == 0:
        return 0.0
    e = vertices[1:] - vertices[0]
    det = np.linalg.det(e @ e.T)
    if det <= 0:
        return 0.0
    return float(np.sqrt(det) / math.factorial(d))


def simplex_height(vertices):
    """Min over vertices of the distance to the opposite facet's affine hull."""
    vertices = np.asarray(vertices, dtype=float)
    if len(vertices) < 2:
        raise InvalidInput("height needs at least 2 vertices")
    best = np.inf
    for i in range(len(vertices)):
        rest = np.delete(vertices, i, axis=0)
        v = vertices[i] - rest[0]
        basis = orthonormal_rows(rest[1:] - rest[0])
        resid = v - (v @ basis.T) @ basis if len(basis) else v
        best = min(best, float(np.linalg.norm(resid)))
    return best


def principal_angle(flat0, flat1):
    """Largest principal angle between two flats, in [0, pi/2].

    Uses ``arccos`` of the smallest singular value of ``B0 B1^T``.  The
    asymmetric max-min definition requires ``dim(flat0) <= dim(flat1)``.
    """
    if flat0.dim > flat1.dim:
        raise InvalidInput("principal_angle requires dim(flat0) <= dim(flat1)")
    if flat0.dim == 0:
        return 0.0
    s = np.linalg.svd(flat0.basis @ flat1.basis.T, compute_uv=False)
    smin = float(np.clip(s.min(), -1.0, 1.0))
    return float(np.arccos(np.clip(smin, 0.0, 1.0)))


# ---------------------------------------------------------------------------
# Distances to convex hulls
# ---------------------------------------------------------------------------


def nearest_point_in_simplex(x, vertices):
    """Nearest point of ``Conv(vertices)`` to ``x`` (exact facet recursion)."""
    x = np.asarray(x, dtype=float)
    vertices = np.asarray(vertices, dtype=float)
    k = len(vertices)
    if k == 1:
        return vertices[0].copy()
    e = vertices[1:] - vertices[0]
    mu, *_ = np.linalg.lstsq(e.T, x - vertices[0], rcond=None)
    lam = np.concatenate([[1.0 - mu.sum()], mu])
    if np.all(lam >= -1e-12):
        return vertices[0] + mu @ e
    best, best_d2 = None, np.inf
    for i in range(k):
        if lam[i] < 0:
            cand = nearest_point_in_simplex(x, np.delete(vertices, i, axis=0))
            d2 = float(((cand - x) ** 2).sum())
            if d2 < best_d2:
                best, best_d2 = cand, d2
    return best


def dist_point_to_simplex(x, vertices):
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(nearest_point_in_simplex(x, vertices) - x))


def _nearest_in_small_hull(points, x):
    """Exact nearest point in conv(points) by Caratheodory subset enumeration.

    Returns ``(point, subset)`` with the achieving vertex subset.
    """
    best, best_d2, best_subset = None, np.inf, ()
    n = len(points)
    for size in range(1, min(n, points.shape[1] + 1) + 1):
        for subset in combinations(range(n), size):
            cand = nearest_point_in_simplex(x, points[list(subset)])
            d2 = float(((cand - x) ** 2).sum())
            if d2 < best_d2 - 1e-18:
                best, best_d2, best_subset = cand, d2, subset
    return best, best_subset


def dist_point_to_hull(x, points):
    """Distance from ``x`` to the convex hull of a finite point set.

    Exact subset enumeration for small sets, Gilbert's iteration (with exact
    sub-problems and support pruning) beyond.
    """
    points = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float)
    if len(points) <= points.shape[1] + 2 or len(points) <= 6:
        nearest, _ = _nearest_in_small_hull(points, x)
        return float(np.linalg.norm(nearest - x))
    q = points - x
    j = int(np.argmin((q ** 2).sum(axis=1)))
    active = [j]
    v = q[j]
    for _ in range(200):
        if float(v @ v) <= 1e-24:
            break
        w = int(np.argmin(q @ v))
        vv = float(v @ v)
        if vv - float(q[w] @ v) <= 1e-12 * max(1.0, vv):
            break
        if w not in active:
            active.append(w)
        v, subset = _nearest_in_small_hull(q[active], np.zeros_like(v))
        active = [active[i] for i in subset]
    return float(np.linalg.norm(v))


def hull_distance(vertices_a, vertices_b):
    """Min distance between the convex hulls of two small vertex arrays."""
    a = np.asarray(vertices_a, dtype=float)
    b = np.asarray(vertices_b, dtype=float)
    minkowski = (a[:, None, :] - b[None, :, :]).reshape(-1, a.shape[1])
    return dist_point_to_hull(np.zeros(a.shape[1]), minkowski)
