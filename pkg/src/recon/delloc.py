"""The Delloc complex: d-simplices that are Delaunay among the projections of
their rho-neighborhood onto their own affine hull, plus all faces.

Also: encoding a subcomplex as a signed d-chain, and faithfulness diagnostics
for candidate reconstructions (embedding, closeness, manifold surrogates).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .complexes import Chain, SimplicialComplex, ball_small_simplices
from .errors import DegenerateSimplex
from .geometry import (
    affine_hull,
    circumsphere,
    dist_point_to_simplex,
    hull_distance,
    miniball,
    scale_tol,
)
from .lp import LpProblem, solve_lp
from .manifolds import pca_tangent, simplex_sign
from .utils import n_threads
from .complexes import delaunay_membership

BALL_SLACK = 1e-12


@dataclass
class DellocRecord:
    """Per-simplex diagnostics: enclosing center, circumradius, neighbor count,
    and the Gabriel check result (None when not applicable)."""

    center: np.ndarray
    circumradius: float
    n_neighbors: int
    gabriel_ok: bool | None


@dataclass
class DellocComplex:
    complex: SimplicialComplex
    rho: float
    records: dict

    def d_simplices(self):
        return sorted(self.records)


def is_delloc(sigma, cloud, rho):
    """Delaunay-locally test: project P ∩ B(c_sigma, rho) onto Aff(sigma) and
    ask whether sigma is Delaunay among the projections."""
    cloud = np.asarray(cloud, dtype=float)
    idx = list(sigma)
    vertices = cloud[idx]
    d = len(idx) - 1
    flat = affine_hull(vertices, expected_dim=d)
    center = miniball(vertices).center
    slack = BALL_SLACK * (1.0 + rho)
    near = np.nonzero(((cloud - center) ** 2).sum(axis=1) <= (rho + slack) ** 2)[0]
    competitors = [i for i in near if i not in idx]
    local_sigma = flat.coords(vertices)
    local_pts = flat.coords(cloud[competitors]) if competitors else np.zeros((0, d))
    return delaunay_membership(local_sigma, local_pts)


def _gabriel_ok(vertices, cloud, sigma, rho):
    """Gabriel diagnostic, checked when the circumsphere fits in the rho-ball."""
    sph = circumsphere(vertices)
    if 2.0 * sph.radius > rho:
        return None
    d2 = ((cloud - sph.center) ** 2).sum(axis=1)
    r2 = sph.radius ** 2
    inside = d2 < r2 - 1e-9 * r2
    inside[list(sigma)] = False
    return not bool(inside.any())


def delloc_complex(cloud, rho, d, candidates=None, epsilon=None, max_candidates=None):
    """Filter candidate d-simplices by the delloc test and close under faces.

    ``candidates`` defaults to the epsilon-small d-simplices (the Cech
    d-skeleton at scale epsilon), which contains the Delloc complex whenever
    the reconstruction guarantees apply.
    """
    cloud = np.asarray(cloud, dtype=float)
    if candidates is None:
        if epsilon is None:
            raise DegenerateSimplex("need candidates or an epsilon scale")
        candidates = ball_small_simplices(cloud, epsilon, d, max_candidates=max_candidates)
    candidates = sorted(tuple(sorted(s)) for s in set(tuple(s) for s in candidates))

    def test(sigma):
        try:
            keep = is_delloc(sigma, cloud, rho)
        except DegenerateSimplex:
            return sigma, None
        return sigma, keep

    workers = n_threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(test, candidates))
    else:
        results = [test(s) for s in candidates]

    K = SimplicialComplex(cloud)
    records = {}
    slack = BALL_SLACK * (1.0 + rho)
    for sigma, keep in results:
        if not keep:
            continue
        vertices = cloud[list(sigma)]
        ball = miniball(vertices)
        n_neighbors = int((((cloud - ball.center) ** 2).sum(axis=1) <= (rho + slack) ** 2).sum())
        K.add(sigma)
        records[sigma] = DellocRecord(
            center=ball.center,
            circumradius=circumsphere(vertices).radius,
            n_neighbors=n_neighbors,
            gabriel_ok=_gabriel_ok(vertices, cloud, sigma, rho),
        )
    return DellocComplex(complex=K, rho=rho, records=records)


def encode_chain(D, cloud, manifold=None, d=None, pca_scale=None):
    """Signed indicator chain of a subcomplex: coefficient ±1 on each d-simplex.

    The sign orients each simplex against the local tangent flat at its
    barycenter's projection: the analytic tangent when a manifold is given,
    otherwise a PCA tangent at the nearest sample point.
    """
    cloud = np.asarray(cloud, dtype=float)
    if isinstance(D, DellocComplex):
        simplices = D.d_simplices()
        if d is None and simplices:
            d = len(simplices[0]) - 1
    else:
        simplices = sorted(tuple(sorted(s)) for s in D)
        if d is None and simplices:
            d = len(simplices[0]) - 1
    chain = Chain(d if d is not None else 0)
    flats = {}
    for sigma in simplices:
        vertices = cloud[list(sigma)]
        bary = vertices.mean(axis=0)
        if manifold is not None:
            ref = manifold.tangent_at(manifold.project(bary))
        else:
            idx = int(np.argmin(((cloud - bary) ** 2).sum(axis=1)))
            if idx not in flats:
                scale = pca_scale if pca_scale is not None else 4.0 * np.linalg.norm(
                    vertices - bary, axis=1
                ).max()
                flats[idx] = pca_tangent(cloud, idx, scale, d)
            ref = flats[idx]
        chain[sigma] = float(simplex_sign(vertices, ref))
    return chain


def _relint_overlap(va, vb, tol=1e-7):
    """Max t such that some point lies in both hulls with all barycentric
    coordinates >= t; 0 or negative means no interior-interior overlap."""
    ka, kb = len(va), len(vb)
    dim = va.shape[1]
    # columns: lam (ka), mu (kb), t, slacks (ka + kb)
    n_cols = ka + kb + 1 + ka + kb
    rows = []
    rhs = []
    for axis in range(dim):
        row = np.zeros(n_cols)
        row[:ka] = va[:, axis]
        row[ka:ka + kb] = -vb[:, axis]
        rows.append(row)
        rhs.append(0.0)
    row = np.zeros(n_cols)
    row[:ka] = 1.0
    rows.append(row)
    rhs.append(1.0)
    row = np.zeros(n_cols)
    row[ka:ka + kb] = 1.0
    rows.append(row)
    rhs.append(1.0)
    for i in range(ka + kb):
        row = np.zeros(n_cols)
        row[i] = 1.0
        row[ka + kb] = -1.0
        row[ka + kb + 1 + i] = -1.0
        rows.append(row)
        rhs.append(0.0)
    cost = np.zeros(n_cols)
    cost[ka + kb] = -1.0  # maximize t
    problem = LpProblem(c=cost, A=np.array(rows), b=np.array(rhs))
    sol = solve_lp(problem)
    if not sol.optimal:
        return 0.0
    return float(sol.x[ka + kb])


def _pair_embedding_violation(cloud, s1, s2, tol):
    shared = tuple(sorted(set(s1) & set(s2)))
    v1 = cloud[list(s1)]
    v2 = cloud[list(s2)]
    if not shared:
        return hull_distance(v1, v2) <= tol
    if _relint_overlap(v1, v2) > 1e-6:
        return True
    # a non-shared vertex of one simplex inside the other's hull
    for a, b in ((s1, s2), (s2, s1)):
        vb = cloud[list(b)]
        for v in a:
            if v in shared:
                continue
            if dist_point_to_simplex(cloud[v], vb) <= tol:
                return True
    return False


def check_faithfulness(D, manifold, r_tube, n_probe=8, seed=0):
    """Probe-based faithfulness report for a candidate reconstruction.

    Checks (a) geometric realization on pairs with overlapping miniballs,
    (b) closeness of the underlying space to the manifold within ``r_tube``,
    (c) homeomorphism surrogates: two d-cofaces per (d-1)-simplex, injectivity
    of the projection on a probe set, and probe covering of the manifold.
    """
    K = D.complex if isinstance(D, DellocComplex) else D
    cloud = K.cloud
    dims = K.dims
    d = max(dims) if dims else 0
    simplices = K.simplex_list(d)
    report = {
        "embedding_ok": True,
        "closeness_ok": True,
        "coface_ok": True,
        "injectivity_ok": True,
        "covering_ok": True,
        "violations": [],
    }
    tol = scale_tol(cloud, base=1e-9)

    balls = {s: miniball(cloud[list(s)]) for s in simplices}
    order = list(simplices)
    for i in range(len(order)):
        si = order[i]
        bi = balls[si]
        for j in range(i + 1, len(order)):
            sj = order[j]
            bj = balls[sj]
            if np.linalg.norm(bi.center - bj.center) > bi.radius + bj.radius + tol:
                continue
            if _pair_embedding_violation(cloud, si, sj, tol):
                report["embedding_ok"] = False
                report["violations"].append(("embedding", si, sj))

    rng = np.random.default_rng(seed)
    probe_points = []
    probe_owner = []
    for s in simplices:
        vertices = cloud[list(s)]
        lams = np.vstack([np.eye(len(s)), np.full((1, len(s)), 1.0 / len(s)),
                          rng.dirichlet(np.ones(len(s)), size=n_probe)])
        pts = lams @ vertices
        probe_points.append(pts)
        probe_owner.extend([s] * len(pts))
    probe_points = np.vstack(probe_points) if probe_points else np.zeros((0, cloud.shape[1]))

    if r_tube >= manifold.reach:
        report["closeness_ok"] = False
        report["violations"].append(("closeness", "r_tube >= reach"))
    if len(probe_points):
        proj = manifold.project(probe_points)
        dist = np.linalg.norm(probe_points - proj, axis=1)
        if float(dist.max()) > r_tube + tol:
            report["closeness_ok"] = False
            report["violations"].append(("closeness", float(dist.max())))

        # injectivity surrogate on the projected probes
        inj_tol = 1e-8 * (1.0 + float(np.abs(cloud).max()))
        cell = {}
        width = max(float(r_tube), 10 * inj_tol, 1e-12)
        for idx in range(len(proj)):
            key = tuple(np.floor(proj[idx] / width).astype(int))
            cell.setdefault(key, []).append(idx)
        offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * proj.shape[1])).T.reshape(-1, proj.shape[1])
        for key, members in cell.items():
            neighbors = []
            for off in offsets:
                neighbors.extend(cell.get(tuple(np.asarray(key) + off), []))
            for a in members:
                for bidx in neighbors:
                    if bidx <= a:
                        continue
                    sa, sb = probe_owner[a], probe_owner[bidx]
                    if sa == sb:
                        continue
                    if np.linalg.norm(proj[a] - proj[bidx]) < inj_tol:
                        shared = tuple(sorted(set(sa) & set(sb)))
                        if shared:
                            hull = cloud[list(shared)]
                            if (dist_point_to_simplex(probe_points[a], hull) <= 10 * inj_tol
                                    and dist_point_to_simplex(probe_points[bidx], hull) <= 10 * inj_tol):
                                continue
                        report["injectivity_ok"] = False
                        report["violations"].append(("injectivity", sa, sb))

    index = K.coface_index(d)
    for face, cofaces in index.items():
        if len(cofaces) != 2:
            report["coface_ok"] = False
            report["violations"].append(("coface", face, len(cofaces)))

    if len(probe_points):
        grid, spacing = manifold.grid(max(2048, 16 * len(simplices)))
        diam = max((2.0 * balls[s].radius for s in simplices), default=0.0)
        allowance = spacing + diam + float(r_tube)
        worst = 0.0
        for start in range(0, len(grid), 2048):
            block = grid[start:start + 2048]
            d2 = ((block[:, None, :] - proj[None, :, :]) ** 2).sum(-1)
            worst = max(worst, float(np.sqrt(d2.min(axis=1).max())))
        if worst > allowance:
            report["covering_ok"] = False
            report["violations"].append(("covering", worst, allowance))
        report["covering_radius"] = worst
    report["ok"] = all(report[k] for k in
                       ("embedding_ok", "closeness_ok", "coface_ok",
                        "injectivity_ok", "covering_ok"))
    return report
