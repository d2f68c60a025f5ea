import numpy as np
import pytest

from recon import delloc as dl
from recon import lp
from recon import manifolds as mf
from recon import problem as pb
from recon.complexes import Chain, boundary, rips_complex
from recon.errors import DegenerateNormalization, GenericityViolation
from recon.geometry import Flat
from recon.weights import energy, weight_table


def circle_points(n, radius=1.0):
    angles = 2 * np.pi * np.arange(n) / n
    return radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def test_load_flat_single_triangle():
    cloud = np.array([[0.0, 0.0, 0.1], [1.0, 0.0, -0.1], [0.0, 1.0, 0.05]])
    flat = Flat(np.array([0.3, 0.3, 0.0]), np.eye(3)[:2])
    chain = Chain(2, {(0, 1, 2): 1.0})
    probe = np.array([0.3, 0.3, 0.0])
    assert pb.load(chain, probe, flat, cloud=cloud) == pytest.approx(1.0)


def test_load_outside_projection_zero():
    cloud = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    flat = Flat(np.zeros(2), np.eye(2))
    chain = Chain(2, {(0, 1, 2): 1.0})
    assert pb.load(chain, np.array([2.0, 2.0]), flat, cloud=cloud) == 0.0


def test_load_opposite_orientations_cancel():
    # two copies of the same geometric triangle with opposite chain signs
    cloud = np.array(
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1e-9, 1e-9], [1.0, 1e-9], [1e-9, 1.0]]
    )
    flat = Flat(np.zeros(2), np.eye(2))
    chain = Chain(2, {(0, 1, 2): 1.0, (3, 4, 5): -1.0})
    probe = np.array([0.3, 0.3])
    assert pb.load(chain, probe, flat, cloud=cloud) == pytest.approx(0.0)


def test_load_borderline_raises():
    cloud = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    flat = Flat(np.zeros(2), np.eye(2))
    chain = Chain(2, {(0, 1, 2): 1.0})
    on_edge = np.array([0.5, 0.0])
    with pytest.raises(GenericityViolation):
        pb.load(chain, on_edge, flat, cloud=cloud)


def test_load_manifold_mode_circle():
    pts = circle_points(16)
    m = mf.circle(1.0)
    chain = Chain(1, {(i, i + 1): 1.0 for i in range(15)})
    chain[(0, 15)] = -1.0
    rng = np.random.default_rng(4)
    probe = m.random_point(rng)
    assert pb.load(chain, probe, m, cloud=pts) == pytest.approx(1.0)


def test_load_manifold_far_sheet_not_hit():
    # the fiber through a probe near (1, 0) must not see the far-side edge
    pts = circle_points(16)
    m = mf.circle(1.0)
    far_edge = Chain(1, {(7, 8): 1.0})  # near (-1, 0)
    probe = m.project(np.array([1.0, 0.02]))
    assert pb.load(far_edge, probe, m, cloud=pts) == 0.0


def build_circle_problem(n=8, seed=0, mode="analytic", rho_mult=16.0):
    pts = circle_points(n)
    m = mf.circle(1.0)
    eps = mf.verify_density(m, pts).epsilon
    K = rips_complex(pts, eps, 1)
    weights = weight_table(K.simplex_list(1), pts)
    rho = rho_mult * eps
    if mode == "analytic":
        norm = pb.analytic_normalization(m, seed=seed)
    else:
        norm = pb.realistic_normalization(pts, 1, rho, seed=seed, pca_scale=3 * eps,
                                          load_radius=4 * eps)
    problem = pb.assemble_problem(K, weights, norm, rho, d=1)
    return pts, m, eps, K, weights, problem


def test_assemble_circle_shape():
    pts, m, eps, K, weights, problem = build_circle_problem(8)
    assert problem.shape == (8 + 1, 2 * 8)  # 8 vertex rows + load row, split vars
    A = problem.A.toarray()
    # plus/minus columns are negatives of each other
    for sigma, (jp, jm) in problem.var_pairs.items():
        assert np.allclose(A[:, jp], -A[:, jm])
    assert problem.b[-1] == 1.0 and not problem.b[:-1].any()


def test_single_simplex_problem_is_infeasible():
    # a lone d-simplex has a nonzero boundary, so no chain satisfies both
    # constraints; the cycle condition is binding even for one variable
    cloud = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    from recon.complexes import SimplicialComplex

    K = SimplicialComplex(cloud, [(0, 1, 2)])
    weights = weight_table([(0, 1, 2)], cloud)
    m = mf.flat_disk(2, 2, radius=1.0)
    norm = pb.Normalization(
        mode="analytic-m0",
        probe=np.array([0.21, 0.34]),
        reference=m,
        restricted_to=None,
    )
    problem = pb.assemble_problem(K, weights, norm, rho=1.0, d=2)
    assert lp.solve_lp(problem).status == lp.INFEASIBLE


def test_minimal_cycle_objective_is_total_weight():
    # smallest feasible fixture: the triangle boundary as a 1-complex; the
    # unique feasible chain (up to sign) is the full cycle, so the optimum
    # pays the weight of every edge
    cloud = np.array([[0.0, 0.0], [1.0, 0.0], [0.2, 0.8]])
    from recon.complexes import SimplicialComplex

    K = SimplicialComplex(cloud, [(0, 1), (1, 2), (0, 2)])
    weights = weight_table(K.simplex_list(1), cloud)
    m = mf.circle(1.0)
    probe = m.project(np.array([0.5, -0.2]))
    norm = pb.Normalization(mode="analytic-m0", probe=probe, reference=m,
                            restricted_to=None)
    problem = pb.assemble_problem(K, weights, norm, rho=1.0, d=1)
    sol = lp.solve_lp(problem)
    assert sol.optimal
    assert sol.objective == pytest.approx(sum(weights.values()), rel=1e-9)
    result = pb.extract_solution(sol, problem, cloud=cloud, weights=weights)
    assert result.integral
    assert result.boundary_residual <= 1e-7
    assert result.load_residual <= 1e-7


def test_infeasible_open_arc():
    # an open arc of edges cannot carry a cycle with load 1
    pts = circle_points(12)
    from recon.complexes import SimplicialComplex

    arc = SimplicialComplex(pts, [(i, i + 1) for i in range(5)])
    weights = weight_table(arc.simplex_list(1), pts)
    m = mf.circle(1.0)
    norm = pb.Normalization(
        mode="analytic-m0",
        probe=m.project(pts[2] + np.array([1e-3, 2e-3])),
        reference=m,
        restricted_to=None,
    )
    problem = pb.assemble_problem(arc, weights, norm, rho=1.0, d=1)
    sol = lp.solve_lp(problem)
    assert sol.status == lp.INFEASIBLE


def test_circle_endtoend_analytic():
    pts, m, eps, K, weights, problem = build_circle_problem(8, seed=1)
    sol = lp.solve_lp(problem)
    assert sol.optimal
    D = dl.delloc_complex(pts, 16 * eps, 1, epsilon=eps)
    result = pb.extract_solution(sol, problem, delloc=D, cloud=pts, manifold=m,
                                 weights=weights)
    assert result.integral
    assert result.matches_delloc
    assert not result.sign_flipped
    assert result.boundary_residual <= 1e-7
    assert result.load_residual <= 1e-7
    # objective equals the energy of the polygon
    assert sol.objective == pytest.approx(sum(weights.values()), rel=1e-9)
    cert = lp.certify_solution(problem, sol)
    assert cert["ok"]


def test_circle_endtoend_realistic():
    pts, m, eps, K, weights, problem = build_circle_problem(8, seed=3, mode="realistic")
    sol = lp.solve_lp(problem)
    assert sol.optimal
    D = dl.delloc_complex(pts, 16 * eps, 1, epsilon=eps)
    result = pb.extract_solution(sol, problem, delloc=D, cloud=pts, manifold=m,
                                 weights=weights)
    assert result.integral and result.matches_delloc
    assert result.load_residual <= 1e-7


def test_degenerate_normalization_raises():
    # a complex whose only simplices never cover any probe: empty load row
    pts = np.array([[10.0, 10.0], [10.5, 10.0]])
    from recon.complexes import SimplicialComplex

    K = SimplicialComplex(pts, [(0, 1)])
    weights = weight_table([(0, 1)], pts)
    m = mf.circle(1.0)  # probes live on the unit circle, far from the edge
    norm = pb.analytic_normalization(m, seed=0)
    with pytest.raises(DegenerateNormalization):
        pb.assemble_problem(K, weights, norm, rho=0.1, d=1, max_retries=5)


def test_zero_chain_never_feasible():
    # the load row forbids the zero chain: b has a 1 there
    *_, problem = build_circle_problem(8)
    zero = np.zeros(problem.A.shape[1])
    assert abs(problem.A @ zero - problem.b).max() == 1.0


def enumerate_pm_one_chains(n_simplices):
    """All {-1, 0, 1} coefficient vectors (3^k of them)."""
    k = n_simplices
    grid = np.indices((3,) * k).reshape(k, -1).T - 1
    return grid


def test_energy_minimality_by_enumeration():
    # hexagon with skip-chords: 12 candidate edges
    pts = circle_points(6)
    m = mf.circle(1.0)
    r = 0.9  # includes sides (len 1) and skips (len sqrt(3)), not diameters
    K = rips_complex(pts, r, 1)
    edges = K.simplex_list(1)
    assert len(edges) == 12
    weights = weight_table(edges, pts)
    norm = pb.analytic_normalization(m, seed=2)
    problem = pb.assemble_problem(K, weights, norm, rho=2.0, d=1)
    sol = lp.solve_lp(problem)
    assert sol.optimal

    # brute force over all {0, +-1} chains
    from recon.complexes import boundary_matrix

    B, faces, cols = boundary_matrix(K, 1)
    Bd = B.toarray()
    load_vec = np.zeros(len(cols))
    norm_ctx = problem.context["normalization"]
    for j, sigma in enumerate(cols):
        chain = Chain(1, {sigma: 1.0})
        load_vec[j] = pb.load(chain, norm_ctx.probe, norm_ctx.reference, cloud=pts)
    w = np.array([weights[s] for s in cols])
    best, best_count = None, 0
    for coeffs in enumerate_pm_one_chains(len(cols)):
        if np.abs(Bd @ coeffs).max() > 1e-9:
            continue
        if abs(load_vec @ coeffs - 1.0) > 1e-9:
            continue
        val = float(w @ np.abs(coeffs))
        assert sol.objective <= val + 1e-9
        if abs(val - sol.objective) <= 1e-9:
            best, best_count = coeffs, best_count + 1
    assert best_count == 1  # unique feasible chain achieving the optimum
    support = {cols[j] for j in range(len(cols)) if best[j] != 0}
    lp_chain = pb.chain_from_solution(sol, problem)
    assert support == lp_chain.support
    # the winner is the hexagon
    assert support == {tuple(sorted((i, (i + 1) % 6))) for i in range(6)}


def test_cocircular_square_cycle_is_load_free():
    # the cocircular square violates general position: its only 2-cycle covers
    # each generic point twice with opposite signs, so the load row cannot be
    # met and the problem is reported infeasible
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    from recon.complexes import cech_complex

    K = cech_complex(pts, 1.05, 2)
    assert K.n_simplices(2) == 4
    weights = weight_table(K.simplex_list(2), pts)
    m = mf.flat_disk(2, 2, radius=1.0)
    norm = pb.Normalization(
        mode="analytic-m0", probe=np.array([0.05, 0.02]), reference=m,
        restricted_to=None,
    )
    problem = pb.assemble_problem(K, weights, norm, rho=2.0, d=2)
    assert lp.solve_lp(problem).status == lp.INFEASIBLE


def test_extract_flags_non_integral():
    # a solution with a fractional coefficient is reported, not rejected
    pts, m, eps, K, weights, problem = build_circle_problem(8, seed=1)
    sol = lp.solve_lp(problem)
    assert sol.optimal
    doctored = lp.LpSolution(
        x=sol.x.copy(), objective=sol.objective, status=sol.status,
        basis=sol.basis, iterations=sol.iterations,
    )
    sigma = next(iter(problem.var_pairs))
    jp, jm = problem.var_pairs[sigma]
    doctored.x[jp], doctored.x[jm] = 0.5, 0.0
    result = pb.extract_solution(doctored, problem, cloud=pts, weights=weights)
    assert not result.integral
    assert any(s == sigma for s, _ in result.snap_log)
