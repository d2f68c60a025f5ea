"""Assembly of the least-energy chain problem and solution extraction.

The optimization is ``min E(gamma)  s.t.  boundary(gamma) = 0, load(gamma) = 1``
over real d-chains, turned into a standard-form LP by splitting each
coefficient into a nonnegative pair ``gamma(sigma) = x+ - x-``.

The load of a chain at a probe point counts, with orientation signs, the chain
simplices whose projection onto a reference covers the point.  Two references
are supported: an affine flat (orthogonal projection) and an analytic manifold
(closest-point projection, evaluated by solving for the intersection of the
simplex with the normal fiber of the probe point).
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .complexes import Chain, boundary, boundary_matrix, restrict_near
from .delloc import encode_chain
from .errors import (
    DegenerateNormalization,
    GenericityViolation,
    InvalidInput,
)
from .geometry import Flat
from .lp import LpProblem
from .manifolds import AnalyticManifold, pca_tangent, simplex_sign

HIT_MARGIN = 1e-6  # barycentric genericity margin for load probes
FIBER_TOL = 1e-7  # residual tolerance for the manifold hit solve


def _flat_hit(vertices, probe, flat, margin=HIT_MARGIN):
    """Does the probe point lie inside the projection of the simplex onto the flat?

    Raises :class:`GenericityViolation` when the answer depends on less than
    ``margin`` of barycentric slack (including a degenerate projection).
    """
    coords = flat.coords(vertices)
    target = flat.coords(probe)
    e = coords[1:] - coords[0]
    try:
        mu = np.linalg.solve(e.T, target - coords[0])
    except np.linalg.LinAlgError:
        raise GenericityViolation("projected simplex is degenerate at the probe")
    lam = np.concatenate([[1.0 - mu.sum()], mu])
    low = float(lam.min())
    if abs(low) < margin:
        raise GenericityViolation(f"probe within {low:.2e} of a projected face")
    return low > 0.0


def _fiber_hit(vertices, probe, manifold, margin=HIT_MARGIN, tol=FIBER_TOL):
    """Does the closest-point projection of the simplex onto the manifold cover
    the probe point?  Solves for the unique intersection of the simplex with
    the normal fiber of the probe (tangential components zero)."""
    tangent = manifold.tangent_at(probe)
    k = len(vertices)
    mat = np.empty((k, k))
    mat[:-1] = tangent.basis @ vertices.T
    mat[-1] = 1.0
    rhs = np.concatenate([tangent.basis @ probe, [1.0]])
    try:
        lam = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError:
        raise GenericityViolation("simplex is parallel to the normal fiber")
    x = lam @ vertices
    scale = 1.0 + float(np.abs(vertices).max())
    if np.linalg.norm(tangent.basis @ (x - probe)) > tol * scale:
        raise GenericityViolation("fiber solve did not converge")
    if math.isfinite(manifold.reach) and np.linalg.norm(x - probe) >= manifold.reach:
        return False
    low = float(lam.min())
    if abs(low) < margin:
        raise GenericityViolation(f"probe within {low:.2e} of a projected face")
    return low > 0.0


def load(chain, probe, reference, restricted_to=None, cloud=None, margin=HIT_MARGIN):
    """Signed count of chain simplices covering the probe under the reference.

    ``reference`` is a :class:`Flat` or an :class:`AnalyticManifold`; signs are
    taken against the flat (resp. the tangent flat at the probe).  Coefficients
    are read in the sorted-vertex gauge.
    """
    if cloud is None:
        raise InvalidInput("load needs the point cloud for vertex coordinates")
    cloud = np.asarray(cloud, dtype=float)
    probe = np.asarray(probe, dtype=float)
    if isinstance(reference, AnalyticManifold):
        sign_flat = reference.tangent_at(probe)
        hit = lambda V: _fiber_hit(V, probe, reference, margin)
    else:
        sign_flat = reference
        hit = lambda V: _flat_hit(V, probe, reference, margin)
    total = 0.0
    for sigma, value in chain.items():
        if restricted_to is not None and sigma not in restricted_to:
            continue
        vertices = cloud[list(sigma)]
        if hit(vertices):
            total += value * simplex_sign(vertices, sign_flat)
    return total


@dataclass
class Normalization:
    """The load constraint data: probe point, reference, simplex restriction."""

    mode: str  # "analytic-m0" or "realistic-p0"
    probe: np.ndarray
    reference: object  # Flat or AnalyticManifold
    restricted_to: set | None
    p0_index: int | None = None
    attempts: int = 1
    extras: dict = field(default_factory=dict)


def analytic_normalization(manifold, seed=0):
    rng = np.random.default_rng(seed)
    return Normalization(
        mode="analytic-m0",
        probe=manifold.random_point(rng),
        reference=manifold,
        restricted_to=None,
        extras={"seed": seed},
    )


def realistic_normalization(cloud, d, rho, seed=0, p0_index=None, pca_scale=None,
                            load_radius=None):
    """Probe at a sample point, reference = PCA tangent flat, simplices
    restricted to those meeting a ball around the probe (default radius 4*rho)."""
    cloud = np.asarray(cloud, dtype=float)
    rng = np.random.default_rng(seed)
    if p0_index is None:
        p0_index = int(rng.integers(0, len(cloud)))
    scale = pca_scale if pca_scale is not None else rho
    flat = pca_tangent(cloud, p0_index, scale, d)
    radius = 4.0 * rho if load_radius is None else float(load_radius)
    return Normalization(
        mode="realistic-p0",
        probe=cloud[p0_index].copy(),
        reference=flat,
        restricted_to=None,  # filled against K at assembly time
        p0_index=p0_index,
        extras={"seed": seed, "pca_scale": scale, "load_radius": radius},
    )


def _redraw(norm, cloud, rho, rng):
    """Re-draw the probe after a genericity violation."""
    if norm.mode == "analytic-m0":
        norm.probe = norm.reference.random_point(rng)
    else:
        flat = norm.reference
        jitter = rng.uniform(-1.0, 1.0, size=flat.dim) * 0.01 * rho
        norm.probe = flat.from_coords(flat.coords(cloud[norm.p0_index]) + jitter)
    norm.attempts += 1


def assemble_problem(K, weights, normalization, rho, d=None, max_retries=50, rng=None):
    """Standard-form LP for the least-energy cycle problem.

    Variables are the split pair per d-simplex; rows are the boundary operator
    (rhs 0) plus one load row (rhs 1).  The probe point is re-drawn (up to
    ``max_retries`` times) whenever a hit test is borderline.
    """
    if d is None:
        for dim in sorted(K.dims, reverse=True):
            if K.n_simplices(dim) and dim >= 1:
                d = dim
                break
    if d is None:
        raise InvalidInput("complex has no simplices of dimension >= 1")
    B, faces, cols = boundary_matrix(K, d)
    n_simplices = len(cols)
    if rng is None:
        rng = np.random.default_rng(0)

    norm = normalization
    is_manifold = isinstance(norm.reference, AnalyticManifold)
    for _ in range(max_retries):
        restricted = None
        if norm.mode == "realistic-p0":
            radius = norm.extras.get("load_radius", 4.0 * rho)
            near = restrict_near(K, norm.probe, radius)
            restricted = {s for s in near if len(s) == d + 1}
        try:
            if is_manifold:
                sign_flat = norm.reference.tangent_at(norm.probe)
            else:
                sign_flat = norm.reference
            load_row = np.zeros(n_simplices)
            for j, sigma in enumerate(cols):
                if restricted is not None and sigma not in restricted:
                    continue
                vertices = K.cloud[list(sigma)]
                if is_manifold:
                    covered = _fiber_hit(vertices, norm.probe, norm.reference)
                else:
                    covered = _flat_hit(vertices, norm.probe, norm.reference)
                if covered:
                    load_row[j] = float(simplex_sign(vertices, sign_flat))
            if not np.any(load_row):
                raise GenericityViolation("empty load row")
            break
        except GenericityViolation:
            _redraw(norm, K.cloud, rho, rng)
    else:
        raise DegenerateNormalization(
            f"no generic load constraint after {max_retries} attempts"
        )
    norm.restricted_to = restricted

    cost = np.empty(2 * n_simplices)
    var_pairs = {}
    for j, sigma in enumerate(cols):
        w = weights.get(sigma)
        if w is None:
            raise InvalidInput(f"missing weight for simplex {sigma}")
        cost[2 * j] = cost[2 * j + 1] = w
        var_pairs[sigma] = (2 * j, 2 * j + 1)

    B = B.tocoo()
    rows_idx = list(B.row) + list(B.row)
    cols_idx = [2 * j for j in B.col] + [2 * j + 1 for j in B.col]
    data = list(B.data) + list(-B.data)
    load_i = len(faces)
    for j in range(n_simplices):
        if load_row[j]:
            rows_idx.extend([load_i, load_i])
            cols_idx.extend([2 * j, 2 * j + 1])
            data.extend([load_row[j], -load_row[j]])
    A = sp.coo_matrix((data, (rows_idx, cols_idx)),
                      shape=(len(faces) + 1, 2 * n_simplices)).tocsc()
    b = np.zeros(len(faces) + 1)
    b[-1] = 1.0
    return LpProblem(
        c=cost, A=A, b=b, var_pairs=var_pairs,
        context={"normalization": norm, "dim": d, "faces": faces, "cols": cols},
    )


def chain_from_solution(solution, problem):
    d = problem.context["dim"]
    chain = Chain(d)
    for sigma, (jp, jm) in problem.var_pairs.items():
        chain[sigma] = solution.x[jp] - solution.x[jm]
    return chain


@dataclass
class ReconstructionResult:
    """Solved chain plus diagnostics; see ``to_dict`` for the serialized form."""

    chain: Chain
    rounded_chain: Chain
    integral: bool
    snap_log: list
    energy: float
    energy_delloc: float | None
    matches_delloc: bool | None
    sign_flipped: bool | None
    boundary_residual: float
    load_residual: float
    objective: float
    lp_status: str
    iterations: int

    def to_dict(self):
        return {
            "support": [list(s) for s in sorted(self.rounded_chain.support)],
            "coefficients": {
                ",".join(map(str, s)): v for s, v in sorted(self.rounded_chain.items())
            },
            "integral": self.integral,
            "non_integral_entries": [
                [list(s), v] for s, v in self.snap_log if v is not None
            ],
            "energy": self.energy,
            "energy_delloc": self.energy_delloc,
            "matches_delloc": self.matches_delloc,
            "sign_flipped": self.sign_flipped,
            "boundary_residual": self.boundary_residual,
            "load_residual": self.load_residual,
            "objective": self.objective,
            "lp_status": self.lp_status,
            "lp_iterations": self.iterations,
        }


SNAP_TOL = 1e-6


def extract_solution(solution, problem, delloc=None, cloud=None, manifold=None,
                     weights=None, pca_scale=None):
    """Recover the chain, snap to {-1, 0, +1}, and recompute residuals from scratch.

    A non-integral optimum is reported, not raised.  ``matches_delloc``
    compares the snapped support and sign pattern with the encoded Delloc
    chain, allowing one global orientation flip (the sign gauge of a PCA
    reference is arbitrary).
    """
    if not solution.optimal:
        raise InvalidInput(f"solution status is {solution.status!r}, not optimal")
    chain = chain_from_solution(solution, problem)
    rounded = Chain(chain.dim)
    snap_log = []
    integral = True
    for sigma, value in chain.items():
        snapped = round(value)
        if abs(value - snapped) <= SNAP_TOL and snapped in (-1, 0, 1):
            if snapped:
                rounded[sigma] = float(snapped)
        else:
            integral = False
            snap_log.append((sigma, value))
            rounded[sigma] = value

    norm = problem.context["normalization"]
    bnd = boundary(chain) if chain.dim >= 1 else Chain(0)
    boundary_residual = bnd.max_abs()
    load_value = load(chain, norm.probe, norm.reference,
                      restricted_to=norm.restricted_to, cloud=cloud)
    load_residual = abs(load_value - 1.0)

    energy_value = float(solution.objective)
    if weights is not None:
        from .weights import energy as energy_fn

        energy_value = energy_fn(chain, weights)

    energy_delloc = None
    matches = None
    flipped = None
    if delloc is not None and cloud is not None:
        reference_chain = encode_chain(delloc, cloud, manifold=manifold,
                                       d=chain.dim, pca_scale=pca_scale)
        if weights is not None:
            from .weights import energy as energy_fn

            energy_delloc = energy_fn(reference_chain, weights)
        support_match = rounded.support == reference_chain.support
        if support_match and integral:
            same = all(abs(rounded[s] - reference_chain[s]) < 0.5 for s in rounded.support)
            opposite = all(abs(rounded[s] + reference_chain[s]) < 0.5 for s in rounded.support)
            matches = same or opposite
            flipped = opposite and not same
        else:
            matches = False
    return ReconstructionResult(
        chain=chain,
        rounded_chain=rounded,
        integral=integral,
        snap_log=snap_log,
        energy=energy_value,
        energy_delloc=energy_delloc,
        matches_delloc=matches,
        sign_flipped=flipped,
        boundary_residual=boundary_residual,
        load_residual=load_residual,
        objective=float(solution.objective),
        lp_status=solution.status,
        iterations=solution.iterations,
    )
