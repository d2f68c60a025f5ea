"""Abstract simplicial complexes, oriented simplices, sparse chains, boundary operator.

Simplices are tuples of strictly increasing vertex indices into a point cloud.
Chain coefficients are always stored in that sorted-vertex gauge; permutation
signs are applied at the API boundary (see :func:`canonical_orientation`).
"""

from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateSimplex, InvalidInput, NotFound
from .geometry import dist_point_to_simplex, miniball, scale_tol

PRUNE_TOL = 1e-12  # chain coefficients below this are dropped


def canonical_orientation(vertices):
    """Sorted tuple plus the parity sign of the permutation taking it there."""
    vertices = tuple(int(v) for v in vertices)
    if len(set(vertices)) != len(vertices):
        raise InvalidInput(f"repeated vertex in simplex {vertices}")
    order = sorted(range(len(vertices)), key=vertices.__getitem__)
    sign, seen = 1, [False] * len(order)
    for start in range(len(order)):
        if seen[start]:
            continue
        length, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return tuple(sorted(vertices)), sign


class Chain:
    """Sparse real d-chain: map from sorted simplex tuples to coefficients."""

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim, coeffs=None):
        self.dim = int(dim)
        self.coeffs = {}
        if coeffs:
            for simplex, value in coeffs.items():
                self[simplex] = self.coeffs.get(tuple(simplex), 0.0) + float(value)

    def __setitem__(self, simplex, value):
        simplex = tuple(simplex)
        if len(simplex) != self.dim + 1:
            raise InvalidInput(f"simplex {simplex} has wrong dimension for a {self.dim}-chain")
        if abs(value) < PRUNE_TOL:
            self.coeffs.pop(simplex, None)
        else:
            self.coeffs[simplex] = float(value)

    def __getitem__(self, simplex):
        return self.coeffs.get(tuple(simplex), 0.0)

    def items(self):
        return self.coeffs.items()

    @property
    def support(self):
        return set(self.coeffs)

    def copy(self):
        out = Chain(self.dim)
        out.coeffs = dict(self.coeffs)
        return out

    def __add__(self, other):
        if self.dim != other.dim:
            raise InvalidInput("cannot add chains of different dimension")
        out = self.copy()
        for simplex, value in other.items():
            out[simplex] = out[simplex] + value
        return out

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        out = Chain(self.dim)
        for simplex, value in self.items():
            out[simplex] = scalar * value
        return out

    def __neg__(self):
        return -1.0 * self

    def __eq__(self, other):
        return isinstance(other, Chain) and self.dim == other.dim and self.coeffs == other.coeffs

    def __len__(self):
        return len(self.coeffs)

    def __repr__(self):
        return f"Chain(dim={self.dim}, nnz={len(self.coeffs)})"

    def max_abs(self):
        return max((abs(v) for v in self.coeffs.values()), default=0.0)


def oriented_coefficient(chain, vertices):
    """Coefficient of an arbitrarily ordered oriented simplex."""
    simplex, sign = canonical_orientation(vertices)
    return sign * chain[simplex]


def boundary(chain):
    """Boundary operator: alternating sum of vertex deletions, sorted gauge."""
    if chain.dim < 1:
        raise InvalidInput("boundary needs chain dimension >= 1")
    out = Chain(chain.dim - 1)
    for simplex, value in chain.items():
        for i in range(len(simplex)):
            face = simplex[:i] + simplex[i + 1:]
            out[face] = out[face] + ((-1) ** i) * value
    return out


class SimplicialComplex:
    """Dimension-bucketed simplex sets over a point cloud, closed under faces."""

    def __init__(self, cloud, simplices=()):
        self.cloud = np.asarray(cloud, dtype=float)
        self.buckets = {}
        self._sorted_cache = {}
        self._coface_cache = {}
        for simplex in simplices:
            self.add(simplex)

    def add(self, simplex):
        simplex = tuple(sorted(int(v) for v in simplex))
        if len(set(simplex)) != len(simplex):
            raise InvalidInput(f"repeated vertex in simplex {simplex}")
        for size in range(1, len(simplex) + 1):
            bucket = self.buckets.setdefault(size - 1, set())
            for face in combinations(simplex, size):
                bucket.add(face)
        self._sorted_cache.clear()
        self._coface_cache.clear()

    def __contains__(self, simplex):
        simplex = tuple(sorted(simplex))
        return simplex in self.buckets.get(len(simplex) - 1, ())

    @property
    def dims(self):
        return sorted(d for d, bucket in self.buckets.items() if bucket)

    def simplices(self, dim):
        return self.buckets.get(dim, set())

    def simplex_list(self, dim):
        """Simplices of one dimension in a fixed (lexicographic) order."""
        if dim not in self._sorted_cache:
            self._sorted_cache[dim] = sorted(self.buckets.get(dim, ()))
        return self._sorted_cache[dim]

    def n_simplices(self, dim):
        return len(self.buckets.get(dim, ()))

    def coface_index(self, dim):
        """Map (dim-1)-simplex -> sorted list of dim-cofaces."""
        if dim not in self._coface_cache:
            index = {}
            for simplex in self.simplex_list(dim):
                for i in range(len(simplex)):
                    face = simplex[:i] + simplex[i + 1:]
                    index.setdefault(face, []).append(simplex)
            self._coface_cache[dim] = index
        return self._coface_cache[dim]

    def cofaces(self, simplex):
        """All stored simplices having ``simplex`` as a proper face."""
        simplex = tuple(sorted(simplex))
        if simplex not in self:
            raise NotFound(f"simplex {simplex} is not in the complex")
        vertex_set = set(simplex)
        out = []
        for dim in self.dims:
            if dim <= len(simplex) - 1:
                continue
            for candidate in self.simplex_list(dim):
                if vertex_set.issubset(candidate):
                    out.append(candidate)
        return out

    def star(self, simplex):
        return self.cofaces(simplex)


def _neighbor_lists(cloud, radius, slack=1e-12):
    """Adjacency (higher-index neighbors) for pairwise distance <= radius."""
    cloud = np.asarray(cloud, dtype=float)
    n = len(cloud)
    d2 = ((cloud[:, None, :] - cloud[None, :, :]) ** 2).sum(-1)
    thresh = radius * radius + slack * (1.0 + radius * radius)
    adj = []
    for i in range(n):
        nbr = np.nonzero(d2[i] <= thresh)[0]
        adj.append([int(j) for j in nbr if j > i])
    return adj


def _cliques(adj, max_size):
    """All cliques (as sorted tuples) of the higher-neighbor adjacency lists."""
    out = []

    def expand(clique, candidates):
        out.append(tuple(clique))
        if len(clique) >= max_size:
            return
        for idx, v in enumerate(candidates):
            expand(clique + [v], [w for w in candidates[idx + 1:] if w in adj_sets[v]])

    adj_sets = [set(a) for a in adj]
    for v in range(len(adj)):
        expand([v], adj[v])
    return out


def rips_complex(cloud, r, max_dim):
    """Vietoris-Rips complex: simplices with diameter at most ``2r``."""
    if r < 0:
        raise InvalidInput("rips radius must be >= 0")
    cloud = np.asarray(cloud, dtype=float)
    K = SimplicialComplex(cloud)
    for i in range(len(cloud)):
        K.add((i,))
    if r == 0:
        return K
    adj = _neighbor_lists(cloud, 2.0 * r)
    for clique in _cliques(adj, max_dim + 1):
        if len(clique) > 1:
            K.add(clique)
    return K


def ball_small_simplices(cloud, rho, d, max_candidates=None):
    """All d-simplices of the cloud enclosable in a ball of radius ``rho``.

    These are the d-simplices of the Cech complex at scale ``rho``, found as
    cliques of the 2*rho neighborhood graph filtered by miniball radius
    (pruned during expansion: the miniball radius grows with the clique).
    """
    cloud = np.asarray(cloud, dtype=float)
    slack = 1e-12 * (1.0 + rho)
    adj = _neighbor_lists(cloud, 2.0 * rho)
    adj_sets = [set(a) for a in adj]
    out = []
    budget = [0]

    def expand(clique, candidates):
        budget[0] += 1
        if max_candidates is not None and budget[0] > max_candidates:
            raise InvalidInput(
                f"candidate budget {max_candidates} exceeded while enumerating "
                f"{rho}-small {d}-simplices"
            )
        if len(clique) == d + 1:
            out.append(tuple(clique))
            return
        for idx, v in enumerate(candidates):
            new = clique + [v]
            if len(new) >= 3 and miniball(cloud[new]).radius > rho + slack:
                continue
            expand(new, [w for w in candidates[idx + 1:] if w in adj_sets[v]])

    for v in range(len(cloud)):
        expand([v], adj[v])
    return out


def cech_complex(cloud, r, max_dim):
    """Cech complex: simplices whose smallest enclosing ball has radius <= r."""
    if r < 0:
        raise InvalidInput("cech radius must be >= 0")
    cloud = np.asarray(cloud, dtype=float)
    K = SimplicialComplex(cloud)
    for i in range(len(cloud)):
        K.add((i,))
    if r == 0:
        return K
    slack = 1e-12 * (1.0 + r)
    adj = _neighbor_lists(cloud, 2.0 * r)
    for clique in _cliques(adj, max_dim + 1):
        if len(clique) < 2:
            continue
        if len(clique) == 2 or miniball(cloud[list(clique)]).radius <= r + slack:
            K.add(clique)
    return K


def ambient_delaunay_simplices(cloud, d):
    """d-simplices of the ambient Delaunay complex (faces of Qhull cells)."""
    from scipy.spatial import Delaunay as _Delaunay

    cloud = np.asarray(cloud, dtype=float)
    n, ambient = cloud.shape
    if ambient == 1:
        order = np.argsort(cloud.ravel())
        if d != 1:
            raise InvalidInput("1-d clouds only have Delaunay edges")
        return {tuple(sorted((int(order[i]), int(order[i + 1])))) for i in range(n - 1)}
    tri = _Delaunay(cloud)
    out = set()
    for cell in tri.simplices:
        for face in combinations(sorted(int(v) for v in cell), d + 1):
            out.add(face)
    return out


def delaunay_cech_complex(cloud, r, max_dim):
    """``Del(P) ∩ Cech(P, r)``: Delaunay simplices that are r-small."""
    cloud = np.asarray(cloud, dtype=float)
    K = SimplicialComplex(cloud)
    for i in range(len(cloud)):
        K.add((i,))
    slack = 1e-12 * (1.0 + r)
    for dim in range(1, max_dim + 1):
        for simplex in ambient_delaunay_simplices(cloud, dim):
            if miniball(cloud[list(simplex)]).radius <= r + slack:
                K.add(simplex)
    return K


def boundary_matrix(K, d):
    """Sparse boundary operator in the indexed bases of sorted simplices.

    Column ``j`` is the boundary of the ``j``-th d-simplex expressed over the
    (d-1)-simplices; entries lie in {-1, 0, +1}.
    """
    rows = K.simplex_list(d - 1)
    cols = K.simplex_list(d)
    row_index = {simplex: i for i, simplex in enumerate(rows)}
    data, ii, jj = [], [], []
    for j, simplex in enumerate(cols):
        for i in range(len(simplex)):
            face = simplex[:i] + simplex[i + 1:]
            data.append((-1.0) ** i)
            ii.append(row_index[face])
            jj.append(j)
    mat = sp.coo_matrix((data, (ii, jj)), shape=(len(rows), len(cols)))
    return mat.tocsc(), rows, cols


def delaunay_membership(simplex_coords, point_coords, tol_factor=1e-9):
    """Is the full-dimensional simplex Delaunay among points, all in flat coordinates?

    True iff no point lies strictly inside the circumsphere, with power
    tolerance ``tol_factor * R^2``.
    """
    simplex_coords = np.asarray(simplex_coords, dtype=float)
    point_coords = np.asarray(point_coords, dtype=float)
    d = simplex_coords.shape[1]
    if simplex_coords.shape[0] != d + 1:
        raise InvalidInput("simplex must be full-dimensional in the flat")
    e = simplex_coords[1:] - simplex_coords[0]
    try:
        y = np.linalg.solve(e @ e.T, 0.5 * np.einsum("ij,ij->i", e, e))
    except np.linalg.LinAlgError as exc:
        raise DegenerateSimplex("degenerate simplex in delaunay test") from exc
    center = simplex_coords[0] + y @ e
    r2 = float(((simplex_coords[0] - center) ** 2).sum())
    if len(point_coords) == 0:
        return True
    d2 = ((point_coords - center) ** 2).sum(axis=1)
    return bool(np.all(d2 >= r2 - tol_factor * r2))


def restrict_near(K, x, r):
    """``K[x, r]``: stored simplices whose convex hull meets the ball B(x, r).

    Uses the exact distance to the convex hull, not the vertex distance.
    """
    if r < 0:
        raise InvalidInput("radius must be >= 0")
    x = np.asarray(x, dtype=float)
    tol = scale_tol(x, K.cloud if len(K.cloud) else x)
    out = set()
    for dim in K.dims:
        for simplex in K.simplex_list(dim):
            if dist_point_to_simplex(x, K.cloud[list(simplex)]) <= r + tol:
                out.add(simplex)
    return out
