"""Analytic test manifolds, samplers, density verification and tangent estimation.

Each manifold knows its reach, a closest-point projection and an oriented
tangent frame field.  The frame orientation is globally consistent even where
the frame itself cannot be continuous (e.g. on the 2-sphere): circles use the
counterclockwise tangent, spheres the outward-normal right-hand rule, tori the
(toroidal, poloidal) ordering.
"""

import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import (
    DegenerateSimplex,
    DegenerateSpectrumWarning,
    InfeasibleSpec,
    InsufficientNeighbors,
    InvalidInput,
    OrientationUndefined,
)
from .geometry import Flat, affine_hull, is_degenerate, orthonormal_rows, principal_angle


class AnalyticManifold:
    """Base class: subclasses fill in kind, dims, reach, project, tangent_at."""

    kind = "abstract"
    ambient_dim = None
    dim = None
    reach = None

    def project(self, x):
        raise NotImplementedError

    def tangent_at(self, m):
        raise NotImplementedError

    def normal_basis_at(self, m):
        """Orthonormal rows spanning the normal space at an on-manifold point."""
        tangent = self.tangent_at(m).basis
        full = np.eye(self.ambient_dim)
        resid = full - full @ tangent.T @ tangent
        return orthonormal_rows(resid)

    def grid(self, n):
        """About ``n`` probe points spread over the manifold, plus their spacing."""
        raise NotImplementedError

    def random_point(self, rng):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(d={self.dim}, N={self.ambient_dim}, reach={self.reach})"


class _Circle(AnalyticManifold):
    kind = "circle"
    ambient_dim = 2
    dim = 1

    def __init__(self, radius=1.0):
        if radius <= 0:
            raise InvalidInput("circle radius must be positive")
        self.radius = float(radius)
        self.reach = self.radius

    def project(self, x):
        x = np.asarray(x, dtype=float)
        norm = np.linalg.norm(x, axis=-1, keepdims=True)
        if np.any(norm == 0):
            raise InvalidInput("projection undefined at the circle center")
        return self.radius * x / norm

    def tangent_at(self, m):
        m = np.asarray(m, dtype=float)
        u = m / np.linalg.norm(m)
        return Flat(self.project(m), np.array([[-u[1], u[0]]]), validate=False)

    def grid(self, n):
        angles = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        pts = self.radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        return pts, 2.0 * self.radius * math.sin(math.pi / n)

    def random_point(self, rng):
        a = rng.uniform(0.0, 2.0 * np.pi)
        return self.radius * np.array([math.cos(a), math.sin(a)])


class _Sphere(AnalyticManifold):
    kind = "sphere"
    ambient_dim = 3
    dim = 2

    def __init__(self, radius=1.0):
        if radius <= 0:
            raise InvalidInput("sphere radius must be positive")
        self.radius = float(radius)
        self.reach = self.radius

    def project(self, x):
        x = np.asarray(x, dtype=float)
        norm = np.linalg.norm(x, axis=-1, keepdims=True)
        if np.any(norm == 0):
            raise InvalidInput("projection undefined at the sphere center")
        return self.radius * x / norm

    def tangent_at(self, m):
        m = np.asarray(m, dtype=float)
        n = m / np.linalg.norm(m)
        helper = np.eye(3)[int(np.argmin(np.abs(n)))]
        t1 = np.cross(n, helper)
        t1 /= np.linalg.norm(t1)
        t2 = np.cross(n, t1)  # (t1, t2, n) is right-handed: t1 x t2 = n
        return Flat(self.project(m), np.stack([t1, t2]), validate=False)

    def grid(self, n):
        pts = _fibonacci_sphere(n) * self.radius
        spacing = 2.0 * self.radius * math.sqrt(math.pi / n)
        return pts, spacing

    def random_point(self, rng):
        v = rng.normal(size=3)
        return self.radius * v / np.linalg.norm(v)


class _Torus(AnalyticManifold):
    """Torus of revolution around the z axis: major radius R, tube radius r."""

    kind = "torus"
    ambient_dim = 3
    dim = 2

    def __init__(self, major_radius=1.0, minor_radius=0.375):
        if not 0 < minor_radius < major_radius:
            raise InvalidInput("torus needs 0 < minor_radius < major_radius")
        self.major_radius = float(major_radius)
        self.minor_radius = float(minor_radius)
        self.reach = min(self.minor_radius, self.major_radius - self.minor_radius)

    def _ring_point(self, x):
        rho = math.hypot(x[0], x[1])
        if rho == 0:
            raise InvalidInput("projection undefined on the torus axis")
        return self.major_radius * np.array([x[0] / rho, x[1] / rho, 0.0])

    def project(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            c = self._ring_point(x)
            v = x - c
            norm = np.linalg.norm(v)
            if norm == 0:
                raise InvalidInput("projection undefined on the core circle")
            return c + self.minor_radius * v / norm
        return np.stack([self.project(row) for row in x])

    def parametrize(self, u, v):
        """Point at toroidal angle u, poloidal angle v."""
        w = self.major_radius + self.minor_radius * np.cos(v)
        return np.stack(
            [w * np.cos(u), w * np.sin(u), self.minor_radius * np.sin(v)], axis=-1
        )

    def tangent_at(self, m):
        m = np.asarray(m, dtype=float)
        m = self.project(m)
        c = self._ring_point(m)
        u_dir = np.array([-c[1], c[0], 0.0])
        u_dir /= np.linalg.norm(u_dir)  # toroidal direction
        radial = m - c
        radial /= np.linalg.norm(radial)
        v_dir = np.cross(radial, u_dir)  # poloidal; u x v = outward tube normal
        v_dir /= np.linalg.norm(v_dir)
        return Flat(m, np.stack([u_dir, v_dir]), validate=False)

    def _area_uniform_v(self, t):
        """Inverse CDF of the poloidal density (R + r cos v) / (2 pi R)."""
        t = np.asarray(t, dtype=float)
        v = 2.0 * np.pi * t
        k = self.minor_radius / self.major_radius
        for _ in range(30):  # Newton; contraction since k < 1
            f = v + k * np.sin(v) - 2.0 * np.pi * t
            v = v - f / (1.0 + k * np.cos(v))
        return v

    def grid(self, n):
        """Golden-ratio spiral, area-uniform in the poloidal angle."""
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        i = np.arange(n)
        u = 2.0 * np.pi * np.mod(i / golden, 1.0)
        v = self._area_uniform_v((i + 0.5) / n)
        pts = self.parametrize(u, v)
        area = 4.0 * np.pi ** 2 * self.major_radius * self.minor_radius
        spacing = 2.0 * math.sqrt(area / n)
        return pts, spacing

    def random_point(self, rng):
        # rejection in v for the area element (R + r cos v)
        while True:
            v = rng.uniform(0.0, 2.0 * np.pi)
            w = self.major_radius + self.minor_radius * math.cos(v)
            if rng.uniform(0.0, self.major_radius + self.minor_radius) <= w:
                break
        u = rng.uniform(0.0, 2.0 * np.pi)
        return self.parametrize(u, v)


class _FlatDisk(AnalyticManifold):
    """A flat d-dimensional disk spanned by the first d coordinate axes."""

    kind = "flat_disk"

    def __init__(self, dim=2, ambient_dim=3, radius=1.0):
        if not 1 <= dim <= ambient_dim:
            raise InvalidInput("flat_disk needs 1 <= dim <= ambient_dim")
        self.dim = int(dim)
        self.ambient_dim = int(ambient_dim)
        self.radius = float(radius)
        self.reach = math.inf

    def project(self, x):
        x = np.asarray(x, dtype=float)
        out = np.array(x, copy=True)
        out[..., self.dim:] = 0.0
        return out

    def tangent_at(self, m):
        basis = np.eye(self.ambient_dim)[: self.dim]
        return Flat(self.project(m), basis, validate=False)

    def grid(self, n):
        per_axis = max(2, int(round(n ** (1.0 / self.dim))))
        axes = [np.linspace(-self.radius, self.radius, per_axis) for _ in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts_d = np.stack([m.ravel() for m in mesh], axis=1)
        pts_d = pts_d[np.linalg.norm(pts_d, axis=1) <= self.radius + 1e-12]
        pts = np.zeros((len(pts_d), self.ambient_dim))
        pts[:, : self.dim] = pts_d
        spacing = 2.0 * self.radius / (per_axis - 1) * math.sqrt(self.dim)
        return pts, spacing

    def random_point(self, rng):
        while True:
            u = rng.uniform(-self.radius, self.radius, size=self.dim)
            if np.linalg.norm(u) <= self.radius:
                break
        out = np.zeros(self.ambient_dim)
        out[: self.dim] = u
        return out


def _fibonacci_sphere(n):
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, 1.0))
    phi = 2.0 * np.pi * i / golden
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def circle(radius=1.0):
    return _Circle(radius)


def sphere(radius=1.0):
    return _Sphere(radius)


def torus(major_radius=1.0, minor_radius=0.375):
    return _Torus(major_radius, minor_radius)


def flat_disk(dim=2, ambient_dim=3, radius=1.0):
    return _FlatDisk(dim, ambient_dim, radius)


MANIFOLD_FACTORIES = {
    "circle": circle,
    "sphere": sphere,
    "torus": torus,
    "flat_disk": flat_disk,
}


@dataclass
class SampleSpec:
    """Sampling request: target density, noise bound, seed and point count."""

    count: int
    delta: float = 0.0
    epsilon: float | None = None
    seed: int = 0
    jitter: float = 0.0  # tangential jitter as a fraction of the grid spacing

    def __post_init__(self):
        if self.delta < 0:
            raise InvalidInput("delta must be >= 0")
        if self.epsilon is not None and self.delta > self.epsilon:
            raise InvalidInput("need delta <= epsilon")
        if self.count < 1:
            raise InvalidInput("count must be >= 1")


def sample(manifold, spec):
    """On-manifold grid sample with optional tangential jitter plus normal noise.

    Noise is uniform in the normal disk of radius ``delta``, so the output is
    ``delta``-accurate by construction.  If ``spec.epsilon`` is set, the
    realized density is verified and :class:`InfeasibleSpec` raised when the
    target is not met.
    """
    rng = np.random.default_rng(spec.seed)
    base, spacing = manifold.grid(spec.count)
    pts = np.array(base, copy=True)
    if spec.jitter > 0:
        for i in range(len(pts)):
            t = manifold.tangent_at(pts[i])
            shift = rng.uniform(-1.0, 1.0, size=t.dim) * spec.jitter * spacing
            pts[i] = manifold.project(t.from_coords(shift))
    if spec.delta > 0:
        for i in range(len(pts)):
            nb = manifold.normal_basis_at(pts[i])
            if len(nb) == 0:
                continue
            u = _uniform_ball(rng, len(nb)) * spec.delta
            pts[i] = pts[i] + u @ nb
    if spec.epsilon is not None:
        measured = verify_density(manifold, pts).epsilon
        if measured > spec.epsilon:
            raise InfeasibleSpec(
                f"{spec.count} points give density {measured:.4g} > target {spec.epsilon:.4g}"
            )
    return pts


def _uniform_ball(rng, dim):
    while True:
        u = rng.uniform(-1.0, 1.0, size=dim)
        if u @ u <= 1.0:
            return u


@dataclass(frozen=True)
class DensityEstimate:
    """Covering-radius estimate over a probe grid.

    ``epsilon`` is an upper estimate: the probe sup plus the probe set's own
    covering slack; ``probe_sup`` is the raw maximum over probes.
    """

    epsilon: float
    probe_sup: float
    probe_resolution: float
    n_probes: int

    def __float__(self):
        return self.epsilon


def verify_density(manifold, cloud, n_probes=None):
    """Sup over a dense probe grid of the distance to the nearest sample,
    padded by the probe covering slack so the result upper-bounds the true sup."""
    cloud = np.asarray(cloud, dtype=float)
    if n_probes is None:
        n_probes = max(4096, 32 * max(len(cloud), 1))
    probes, spacing = manifold.grid(n_probes)
    if len(cloud) == 0:
        return DensityEstimate(math.inf, math.inf, spacing, len(probes))
    worst = 0.0
    for start in range(0, len(probes), 2048):
        block = probes[start:start + 2048]
        d2 = ((block[:, None, :] - cloud[None, :, :]) ** 2).sum(-1)
        worst = max(worst, float(np.sqrt(d2.min(axis=1).max())))
    return DensityEstimate(worst + 0.75 * spacing, worst, spacing, len(probes))


def accuracy(manifold, cloud):
    """Max distance from a sample point to the manifold."""
    cloud = np.asarray(cloud, dtype=float)
    proj = manifold.project(cloud)
    return float(np.linalg.norm(cloud - proj, axis=1).max()) if len(cloud) else 0.0


def pca_tangent(cloud, p0, rho, d):
    """Tangent flat at sample ``p0`` from the inertia tensor of the rho-neighborhood.

    The flat passes through the sample point and is parallel to the span of the
    top-d eigenvectors of the centered inertia tensor of ``P ∩ B(p0, rho)``.
    Eigenvector signs follow a deterministic convention (first nonzero
    coordinate positive).  A vanishing eigengap between the d-th and (d+1)-th
    eigenvalues is reported as :class:`DegenerateSpectrumWarning`.
    """
    cloud = np.asarray(cloud, dtype=float)
    base = cloud[int(p0)]
    mask = ((cloud - base) ** 2).sum(axis=1) <= rho * rho * (1.0 + 1e-12)
    nbhd = cloud[mask]
    if len(nbhd) < d + 1:
        raise InsufficientNeighbors(
            f"only {len(nbhd)} points in B(p0, {rho}); need at least {d + 1}"
        )
    centered = nbhd - nbhd.mean(axis=0)
    inertia = centered.T @ centered / len(nbhd)
    eigvals, eigvecs = np.linalg.eigh(inertia)
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]
    if len(eigvals) > d and eigvals[d - 1] - eigvals[d] < 1e-12:
        warnings.warn(
            f"eigengap {eigvals[d - 1] - eigvals[d]:.3e} below 1e-12 at p0={p0}",
            DegenerateSpectrumWarning,
        )
    basis = eigvecs[:, :d].T.copy()
    for row in basis:
        nz = np.nonzero(np.abs(row) > 1e-12)[0]
        if len(nz) and row[nz[0]] < 0:
            row *= -1.0
    return Flat(base, basis, validate=False)


def _probe_barycentric(k, n_random, rng):
    """Probe coordinates on a (k-1)-simplex: vertices, barycenter, edge midpoints,
    plus random interior points."""
    probes = [np.eye(k)[i] for i in range(k)]
    probes.append(np.full(k, 1.0 / k))
    for i, j in combinations(range(k), 2):
        lam = np.zeros(k)
        lam[i] = lam[j] = 0.5
        probes.append(lam)
    if n_random > 0:
        probes.extend(rng.dirichlet(np.ones(k), size=n_random))
    return np.asarray(probes)


def angular_deviation(simplex, manifold, cloud, n_random=20, seed=0):
    """Max angle between the simplex's span and tangent spaces along its projection.

    Probes the convex hull at vertices, barycenter, edge midpoints and
    ``n_random`` random interior points; a lower estimate of the true sup.
    """
    cloud = np.asarray(cloud, dtype=float)
    vertices = cloud[list(simplex)]
    if is_degenerate(vertices):
        raise DegenerateSimplex(f"angular deviation of degenerate simplex {tuple(simplex)}")
    hull_flat = affine_hull(vertices)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for lam in _probe_barycentric(len(vertices), n_random, rng):
        try:
            m = manifold.project(lam @ vertices)
        except InvalidInput:
            continue  # probe on the medial axis: projection undefined there
        worst = max(worst, principal_angle(hull_flat, manifold.tangent_at(m)))
    return worst


def simplex_sign(vertices_in_order, reference):
    """Orientation of an ordered simplex against an oriented reference flat.

    Sign of the determinant of the reference-basis coordinates of the
    projected edge vectors.  Undefined when the simplex is (numerically)
    orthogonal to the flat.
    """
    vertices = np.asarray(vertices_in_order, dtype=float)
    d = len(vertices) - 1
    if reference.dim != d:
        raise InvalidInput("reference flat dimension must match the simplex dimension")
    proj = (vertices[1:] - vertices[0]) @ reference.basis.T
    det = float(np.linalg.det(proj))
    edge_scale = max(np.linalg.norm(vertices[1:] - vertices[0], axis=1).max(), 1e-300)
    if abs(det) <= 1e-12 * edge_scale ** d:
        raise OrientationUndefined("simplex is orthogonal to the reference flat")
    if principal_angle(affine_hull(vertices, expected_dim=d), reference) >= math.pi / 2 - 1e-9:
        raise OrientationUndefined("angle to reference flat reaches pi/2")
    return 1 if det > 0 else -1
