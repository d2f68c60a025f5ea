"""Sampling-quality metrics and the safety-condition predicates.

Separation, minimum simplex height, protection, and maximum angular deviation
at a scale, plus the three safety inequalities, the extra spectral-gap-style
condition, the Jacobian distortion constant J, and the standard-simplex
constant Omega(Delta_d).

Protection comes in two conventions.  The signed value
``min (||q' - Z|| - R)`` is negative whenever a projected competitor falls
inside a circumsphere and is what the perturbation scheme thresholds on.  The
unsigned value ``min |  ||q' - Z|| - R |`` (distance to the sphere) is the one
the safety inequalities are stated with; both are reported.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInput, NoCandidates
from .geometry import affine_hull, circumsphere, miniball, principal_angle, simplex_height
from .complexes import ball_small_simplices
from .manifolds import _probe_barycentric, angular_deviation, pca_tangent

DEFAULT_CANDIDATE_BUDGET = 500_000


def separation(cloud):
    """Exact minimum pairwise distance."""
    cloud = np.asarray(cloud, dtype=float)
    if len(cloud) < 2:
        raise InvalidInput("separation needs at least 2 points")
    d2 = ((cloud[:, None, :] - cloud[None, :, :]) ** 2).sum(-1)
    np.fill_diagonal(d2, np.inf)
    return float(np.sqrt(d2.min()))


def _candidates(cloud, rho, d, max_candidates, given=None):
    if given is not None:
        return [tuple(sorted(s)) for s in given]
    return ball_small_simplices(cloud, rho, d, max_candidates=max_candidates)


def height_at_scale(cloud, rho, d, candidates=None, max_candidates=DEFAULT_CANDIDATE_BUDGET):
    """Min height over all rho-small d-simplices of the cloud."""
    cloud = np.asarray(cloud, dtype=float)
    sims = _candidates(cloud, rho, d, max_candidates, candidates)
    if not sims:
        raise NoCandidates(f"no {rho}-small {d}-simplices")
    return min(simplex_height(cloud[list(s)]) for s in sims)


def protection_stats(cloud, rho3, d, candidates=None, max_candidates=DEFAULT_CANDIDATE_BUDGET):
    """Signed and unsigned protection at scale ``rho3``.

    For each rho3-small d-simplex: project the other points of
    ``B(c_sigma, rho3)`` onto its affine hull and measure their clearance from
    the circumsphere.  Returns ``(signed_min, unsigned_min)``; ``inf`` when no
    simplex has a competitor.
    """
    cloud = np.asarray(cloud, dtype=float)
    sims = _candidates(cloud, rho3, d, max_candidates, candidates)
    signed, unsigned = math.inf, math.inf
    slack = 1e-12 * (1.0 + rho3)
    for s in sims:
        vertices = cloud[list(s)]
        c = miniball(vertices).center
        inside = np.nonzero(((cloud - c) ** 2).sum(axis=1) <= (rho3 + slack) ** 2)[0]
        others = [i for i in inside if i not in s]
        if not others:
            continue
        flat = affine_hull(vertices, expected_dim=d)
        sph = circumsphere(vertices)
        coords = flat.coords(cloud[others])
        zc = flat.coords(sph.center)
        clearance = np.linalg.norm(coords - zc, axis=1) - sph.radius
        signed = min(signed, float(clearance.min()))
        unsigned = min(unsigned, float(np.abs(clearance).min()))
    return signed, unsigned


def protection_at_scale(cloud, rho3, d, candidates=None,
                        max_candidates=DEFAULT_CANDIDATE_BUDGET):
    """Signed protection (negative when a projected competitor is inside)."""
    return protection_stats(cloud, rho3, d, candidates, max_candidates)[0]


def max_angular_deviation(cloud, rho, d, manifold=None, candidates=None,
                          pca_scale=None, n_random=20, seed=0,
                          max_candidates=DEFAULT_CANDIDATE_BUDGET):
    """Max angular deviation over rho-small d-simplices.

    With an analytic manifold the true tangent field is used; otherwise the
    tangent is replaced by a PCA estimate at the sample point nearest to each
    probe projection (mode recorded by the caller).
    """
    cloud = np.asarray(cloud, dtype=float)
    sims = _candidates(cloud, rho, d, max_candidates, candidates)
    if not sims:
        raise NoCandidates(f"no {rho}-small {d}-simplices")
    if manifold is not None:
        return max(
            angular_deviation(s, manifold, cloud, n_random=n_random, seed=seed)
            for s in sims
        )
    scale = pca_scale if pca_scale is not None else rho
    flats = {}

    def flat_near(x):
        idx = int(np.argmin(((cloud - x) ** 2).sum(axis=1)))
        if idx not in flats:
            flats[idx] = pca_tangent(cloud, idx, scale, d)
        return flats[idx]

    worst = 0.0
    rng = np.random.default_rng(seed)
    for s in sims:
        vertices = cloud[list(s)]
        hull = affine_hull(vertices, expected_dim=d)
        for lam in _probe_barycentric(len(vertices), n_random, rng):
            x = lam @ vertices
            worst = max(worst, principal_angle(hull, flat_near(x)))
    return worst


def compute_J(rho, reach, theta, d, ambient_dim):
    """Distortion constant ``(R+rho)^d / ((R-rho)^d cos(theta)^min(d, N-d)) - 1``."""
    if theta >= math.pi / 2:
        raise InvalidInput("theta must be < pi/2")
    if math.isinf(reach):
        ratio = 1.0
    else:
        if rho >= reach:
            raise InvalidInput("need rho < reach")
        ratio = (reach + rho) / (reach - rho)
    return ratio ** d / math.cos(theta) ** min(d, ambient_dim - d) - 1.0


_OMEGA_CACHE = {}


def omega_standard_simplex(d, n_samples=10_000_000, seed=0):
    """Monte Carlo value of ``∫_{Delta_d} min_i lambda_i`` (all d+1 coordinates).

    Computed once per dimension and cached; relative error target 1e-3 at the
    default sample count.
    """
    if d < 1:
        raise InvalidInput("d must be >= 1")
    key = (d, n_samples, seed)
    if key not in _OMEGA_CACHE:
        rng = np.random.default_rng(seed)
        total, done, chunk = 0.0, 0, 1_000_000
        while done < n_samples:
            m = min(chunk, n_samples - done)
            g = rng.standard_exponential(size=(m, d + 1))
            lam = g / g.sum(axis=1, keepdims=True)
            total += float(lam.min(axis=1).sum())
            done += m
        _OMEGA_CACHE[key] = (total / n_samples) / math.factorial(d)
    return _OMEGA_CACHE[key]


def check_safety(theta_max, sep, height_min, protection, *, epsilon, delta, rho,
                 reach, d):
    """The three safety inequalities; returns ``(ok, theta_budget, slacks)``.

    The smallest admissible angle budget ``theta = 2 (Theta + arcsin((rho +
    delta)/R))`` is used: the remaining two constraints are increasing in
    theta, so the minimal feasible choice is optimal.  ``theta > pi/6`` (or an
    arcsin out of domain, or vanishing height) means no budget exists.
    """
    slacks = {
        "slack_angle": -math.inf,
        "slack_separation": -math.inf,
        "slack_protection": -math.inf,
    }
    s = 0.0 if math.isinf(reach) else (rho + delta) / reach
    if s > 1.0:
        return False, None, slacks
    theta = 2.0 * (theta_max + math.asin(s))
    slacks["slack_angle"] = math.pi / 6 - theta
    if theta > math.pi / 6:
        return False, None, slacks
    curvature = 0.0 if math.isinf(reach) else 2.0 * rho * rho / reach
    rhs_sep = 8.0 * (delta * theta + rho * theta * theta) + 6.0 * delta + curvature
    slacks["slack_separation"] = sep - rhs_sep
    if height_min <= 0.0:
        return False, theta, slacks
    rhs_prot = 8.0 * (delta * theta + rho * theta * theta) * (
        1.0 + 4.0 * d * epsilon / height_min
    )
    slacks["slack_protection"] = protection - rhs_prot
    ok = slacks["slack_separation"] > 0.0 and slacks["slack_protection"] > 0.0
    return ok, theta, slacks


def check_extra_condition(protection, sep, rho, theta_max, epsilon, J, omega, d):
    """``prot^2 + prot*sep > max{10 rho Theta (eps + rho Theta), c_J rho^2}``.

    Returns ``(ok, rhs_angular, rhs_jacobian)`` with both right-hand candidates.
    """
    lhs = protection * protection + protection * sep
    rhs1 = 10.0 * rho * theta_max * (epsilon + rho * theta_max)
    rhs2 = 4.0 * J * (1.0 + J) / ((d + 2) * math.factorial(d - 1) * omega) * rho * rho
    return lhs > max(rhs1, rhs2), rhs1, rhs2


@dataclass
class QualityReport:
    """Flat record of the quality metrics and condition checks (angles in radians)."""

    sep: float
    height_min: float
    theta: float
    protection: float
    protection_unsigned: float
    epsilon: float
    delta: float
    rho: float
    theta_budget: float | None
    safety_ok: bool
    extra_ok: bool
    J: float
    omega_delta_d: float
    slack_angle: float
    slack_separation: float
    slack_protection: float
    slack_extra: float
    reach: float
    dim: int
    tangent_mode: str
    candidate_scope: str

    def to_dict(self):
        return asdict(self)


def compute_quality_report(cloud, d, *, epsilon, delta, rho, manifold=None,
                           reach=None, candidates=None, candidates_3rho=None,
                           pca_scale=None, seed=0,
                           max_candidates=DEFAULT_CANDIDATE_BUDGET,
                           candidate_scope="full"):
    """Assemble the full quality report for a cloud at dimension d and scale rho.

    ``candidates`` / ``candidates_3rho`` restrict the brute-force enumeration
    (e.g. to the simplices of a working complex) when the full clique
    enumeration is out of budget; ``candidate_scope`` records which was used.
    """
    cloud = np.asarray(cloud, dtype=float)
    if reach is None:
        if manifold is None:
            raise InvalidInput("need an analytic manifold or an explicit reach")
        reach = manifold.reach
    sep = separation(cloud)
    height_min = height_at_scale(cloud, rho, d, candidates=candidates,
                                 max_candidates=max_candidates)
    theta = max_angular_deviation(cloud, rho, d, manifold=manifold,
                                  candidates=candidates, pca_scale=pca_scale,
                                  seed=seed, max_candidates=max_candidates)
    prot_signed, prot_unsigned = protection_stats(
        cloud, 3.0 * rho, d, candidates=candidates_3rho, max_candidates=max_candidates
    )
    safety_ok, theta_budget, slacks = check_safety(
        theta, sep, height_min, prot_unsigned,
        epsilon=epsilon, delta=delta, rho=rho, reach=reach, d=d,
    )
    ambient = cloud.shape[1]
    J = compute_J(rho, reach, theta, d, ambient) if (math.isinf(reach) or rho < reach) else math.inf
    omega = omega_standard_simplex(d)
    if math.isfinite(J):
        extra_ok, rhs1, rhs2 = check_extra_condition(
            prot_unsigned, sep, rho, theta, epsilon, J, omega, d
        )
        slack_extra = prot_unsigned ** 2 + prot_unsigned * sep - max(rhs1, rhs2)
    else:
        extra_ok, slack_extra = False, -math.inf
    return QualityReport(
        sep=sep,
        height_min=height_min,
        theta=theta,
        protection=prot_signed,
        protection_unsigned=prot_unsigned,
        epsilon=epsilon,
        delta=delta,
        rho=rho,
        theta_budget=theta_budget,
        safety_ok=safety_ok,
        extra_ok=extra_ok,
        J=J,
        omega_delta_d=omega,
        slack_angle=slacks["slack_angle"],
        slack_separation=slacks["slack_separation"],
        slack_protection=slacks["slack_protection"],
        slack_extra=slack_extra,
        reach=reach,
        dim=d,
        tangent_mode="analytic" if manifold is not None else "pca",
        candidate_scope=candidate_scope,
    )
