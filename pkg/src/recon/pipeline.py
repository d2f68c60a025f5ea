"""End-to-end reconstruction pipeline shared by the CLI and the estimators."""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import manifolds as mf
from .complexes import (
    ball_small_simplices,
    cech_complex,
    delaunay_cech_complex,
    rips_complex,
)
from .delloc import check_faithfulness, delloc_complex
from .errors import InvalidInput, ReconError
from .lp import certify_solution, solve_lp
from .meshio import export_cloud_json, export_mesh, ingest
from .perturb import PerturbConfig, moser_tardos
from .problem import (
    analytic_normalization,
    assemble_problem,
    extract_solution,
    realistic_normalization,
)
from .quality import DEFAULT_CANDIDATE_BUDGET, compute_quality_report
from .utils import write_json_atomic, write_text_atomic
from .weights import weight_table


@dataclass
class PipelineConfig:
    """Everything one reconstruction run needs; see the CLI for the flags."""

    d: int = 1
    input_path: str | None = None
    generator: str | None = None  # circle | sphere | torus | flat_disk
    n_points: int = 64
    radius: float = 1.0
    minor_radius: float = 0.375
    delta: float = 0.0
    jitter: float = 0.0
    epsilon: float | None = None  # measured from the manifold when absent
    rho: float | None = None
    rho_mult: float = 16.0
    scale_r: float | None = None  # complex scale; defaults to epsilon
    complex_kind: str = "rips"  # rips | cech | delaunay-cech
    normalization: str = "analytic-m0"  # or realistic-p0
    pca_scale: float | None = None
    load_radius: float | None = None
    perturb: PerturbConfig | None = None
    seed: int = 0
    reach: float | None = None
    out_dir: str | None = None
    mesh_format: str | None = None  # default: obj for d=1, off for d=2
    quality_budget: int = DEFAULT_CANDIDATE_BUDGET
    skip_quality: bool = False

    def __post_init__(self):
        if self.input_path is None and self.generator is None:
            raise InvalidInput("need an input file or a generator")
        if self.complex_kind not in ("rips", "cech", "delaunay-cech"):
            raise InvalidInput(f"unknown complex kind {self.complex_kind!r}")
        if self.normalization not in ("analytic-m0", "realistic-p0"):
            raise InvalidInput(f"unknown normalization {self.normalization!r}")


def make_manifold(config):
    if config.generator == "circle":
        return mf.circle(config.radius)
    if config.generator == "sphere":
        return mf.sphere(config.radius)
    if config.generator == "torus":
        return mf.torus(config.radius, config.minor_radius)
    if config.generator == "flat_disk":
        return mf.flat_disk(config.d, config.d + 1, radius=config.radius)
    raise InvalidInput(f"unknown generator {config.generator!r}")


def load_cloud(config):
    """Returns (cloud, manifold-or-None)."""
    if config.input_path is not None:
        return ingest(config.input_path), None
    manifold = make_manifold(config)
    spec = mf.SampleSpec(count=config.n_points, delta=config.delta,
                         seed=config.seed, jitter=config.jitter)
    return mf.sample(manifold, spec), manifold


def build_complex(cloud, kind, r, d):
    if kind == "rips":
        return rips_complex(cloud, r, d)
    if kind == "cech":
        return cech_complex(cloud, r, d)
    return delaunay_cech_complex(cloud, r, d)


@dataclass
class PipelineOutcome:
    cloud: np.ndarray
    manifold: object
    epsilon: float
    rho: float
    scale_r: float
    complex: object
    weights: dict
    problem: object
    solution: object
    result: object
    delloc: object
    quality: object
    certificate: dict
    faithfulness: dict | None
    perturb_trace: object | None
    warnings: list = field(default_factory=list)

    @property
    def passed(self):
        return (
            self.solution.optimal
            and self.certificate["ok"]
            and self.result.boundary_residual <= 1e-7
            and self.result.load_residual <= 1e-7
        )


def run_reconstruction(config):
    """The full pipeline, in memory; file artifacts are written by run_pipeline."""
    cloud, manifold = load_cloud(config)
    warnings_list = []

    perturb_trace = None
    if config.perturb is not None:
        result = moser_tardos(cloud, config.perturb)
        perturb_trace = result
        cloud = result.points
        if result.status != "ok":
            warnings_list.append("perturbation timed out; using best cloud so far")

    if config.epsilon is not None:
        epsilon = config.epsilon
    elif manifold is not None:
        epsilon = mf.verify_density(manifold, cloud).epsilon
    else:
        raise InvalidInput("epsilon is required when no generator is given")
    rho = config.rho if config.rho is not None else config.rho_mult * epsilon
    scale_r = config.scale_r if config.scale_r is not None else epsilon
    if not (epsilon <= scale_r <= rho / math.sqrt(2) + 1e-12) and config.complex_kind == "rips":
        warnings_list.append(
            f"rips scale r={scale_r:.4g} outside the recommended band "
            f"[{epsilon:.4g}, {rho / math.sqrt(2):.4g}]"
        )

    K = build_complex(cloud, config.complex_kind, scale_r, config.d)
    if K.n_simplices(config.d) == 0:
        raise InvalidInput("the working complex has no top-dimensional simplices")
    weights = weight_table(K.simplex_list(config.d), cloud)

    if config.normalization == "analytic-m0":
        if manifold is None:
            raise InvalidInput("analytic normalization needs a generated manifold")
        norm = analytic_normalization(manifold, seed=config.seed)
    else:
        norm = realistic_normalization(
            cloud, config.d, rho, seed=config.seed,
            pca_scale=config.pca_scale, load_radius=config.load_radius,
        )
    problem = assemble_problem(K, weights, norm, rho, d=config.d)
    solution = solve_lp(problem)

    delloc = None
    if solution.optimal:
        candidates = ball_small_simplices(cloud, epsilon, config.d)
        delloc = delloc_complex(cloud, rho, config.d, candidates=candidates)
        result = extract_solution(solution, problem, delloc=delloc, cloud=cloud,
                                  manifold=manifold, weights=weights,
                                  pca_scale=config.pca_scale)
        certificate = certify_solution(problem, solution)
    else:
        raise ReconError(f"LP did not reach optimality: status {solution.status!r}")

    quality = None
    if not config.skip_quality:
        scope = "full"
        kw = {}
        try:
            approx = _candidate_count_estimate(cloud, 3.0 * rho, config.d)
            if approx > config.quality_budget:
                scope = "complex"
                kw["candidates"] = K.simplex_list(config.d)
                kw["candidates_3rho"] = K.simplex_list(config.d)
            quality = compute_quality_report(
                cloud, config.d, epsilon=epsilon, delta=config.delta, rho=rho,
                manifold=manifold, reach=config.reach, seed=config.seed,
                max_candidates=config.quality_budget, candidate_scope=scope, **kw,
            )
        except ReconError as exc:
            warnings_list.append(f"quality report unavailable: {exc}")

    faithfulness = None
    if manifold is not None and delloc is not None and delloc.records:
        r_tube = max(
            2.0 * rec.circumradius for rec in delloc.records.values()
        ) ** 2 / (2.0 * manifold.reach) if math.isfinite(manifold.reach) else 0.0
        r_tube = max(r_tube * 2.0, 1e-9) + config.delta
        faithfulness = check_faithfulness(delloc, manifold, r_tube)

    return PipelineOutcome(
        cloud=cloud, manifold=manifold, epsilon=epsilon, rho=rho, scale_r=scale_r,
        complex=K, weights=weights, problem=problem, solution=solution,
        result=result, delloc=delloc, quality=quality, certificate=certificate,
        faithfulness=faithfulness, perturb_trace=perturb_trace,
        warnings=warnings_list,
    )


def _candidate_count_estimate(cloud, radius, d):
    """Cheap upper estimate of the clique count for the budget decision."""
    cloud = np.asarray(cloud, dtype=float)
    n = len(cloud)
    sample = cloud[:: max(1, n // 64)]
    d2 = ((sample[:, None, :] - cloud[None, :, :]) ** 2).sum(-1)
    degree = float((d2 <= 4.0 * radius * radius).sum(axis=1).mean())
    est = n
    for k in range(d):
        est *= degree / (k + 2)
    return est


def euler_characteristic(chain):
    """V - E + F ... of the closure of a chain's support."""
    from itertools import combinations

    counts = {}
    for simplex in chain.support:
        for size in range(1, len(simplex) + 1):
            for face in combinations(simplex, size):
                counts.setdefault(size - 1, set()).add(face)
    return sum((-1) ** d * len(faces) for d, faces in counts.items())


def run_pipeline(config):
    """Run and write artifacts; returns (exit_code, outcome-or-error-dict)."""
    try:
        outcome = run_reconstruction(config)
    except ReconError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        code = 2 if isinstance(exc, InvalidInput) else 1
        return code, payload

    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        fmt = config.mesh_format or ("obj" if config.d == 1 else "off")
        mesh_path = os.path.join(config.out_dir, f"solution.{fmt}")
        try:
            export_mesh(outcome.cloud, outcome.result.rounded_chain, mesh_path, fmt)
        except ReconError as exc:
            outcome.warnings.append(f"mesh export skipped: {exc}")
        report = {
            "epsilon": outcome.epsilon,
            "rho": outcome.rho,
            "scale_r": outcome.scale_r,
            "complex_kind": config.complex_kind,
            "normalization": config.normalization,
            "seed": config.seed,
            "n_points": int(len(outcome.cloud)),
            "euler_characteristic": euler_characteristic(outcome.result.rounded_chain),
            "certificate": outcome.certificate,
            "warnings": outcome.warnings,
            "quality": outcome.quality.to_dict() if outcome.quality else None,
            "faithfulness": (
                {k: v for k, v in outcome.faithfulness.items() if k != "violations"}
                if outcome.faithfulness else None
            ),
        }
        report.update(outcome.result.to_dict())
        write_json_atomic(os.path.join(config.out_dir, "result.json"), report)
        if outcome.quality is not None:
            write_json_atomic(os.path.join(config.out_dir, "quality.json"),
                              outcome.quality.to_dict())
        export_cloud_json(outcome.cloud, os.path.join(config.out_dir, "cloud.json"))
        if outcome.perturb_trace is not None:
            write_text_atomic(os.path.join(config.out_dir, "perturb_trace.jsonl"),
                              outcome.perturb_trace.trace_lines() + "\n")
    return (0 if outcome.passed else 1), outcome
