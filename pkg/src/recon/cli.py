"""Command line interface: ``recon reconstruct | quality | perturb | delloc``."""

import argparse
import json
import os
import sys

from . import manifolds as mf
from .complexes import ball_small_simplices
from .delloc import delloc_complex, encode_chain
from .errors import InvalidInput, ReconError
from .meshio import export_cloud_csv, export_cloud_json, export_mesh
from .perturb import PerturbConfig, moser_tardos
from .pipeline import PipelineConfig, euler_characteristic, run_pipeline
from .quality import compute_quality_report
from .utils import dumps_17g, write_json_atomic, write_text_atomic


def _common_input_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV or JSON point cloud file")
    src.add_argument("--generate", choices=["circle", "sphere", "torus", "flat_disk"],
                     help="sample an analytic manifold instead of reading a file")
    p.add_argument("--n", type=int, default=64, help="sample size for --generate")
    p.add_argument("--radius", type=float, default=1.0,
                   help="circle/sphere radius, torus major radius")
    p.add_argument("--minor-radius", type=float, default=0.375,
                   help="torus tube radius")
    p.add_argument("--jitter", type=float, default=0.0,
                   help="tangential jitter for generated samples (fraction of spacing)")
    p.add_argument("--d", type=int, default=None,
                   help="intrinsic dimension (defaults to the generator's)")
    p.add_argument("--epsilon", type=float, default=None,
                   help="density parameter (measured from the manifold when omitted)")
    p.add_argument("--delta", type=float, default=0.0, help="accuracy (noise) bound")
    p.add_argument("--rho", type=float, default=None, help="locality scale")
    p.add_argument("--rho-mult", type=float, default=16.0,
                   help="rho = mult * epsilon when --rho is not given")
    p.add_argument("--seed", type=int, default=0)


def _perturb_config(args, d):
    if not getattr(args, "perturb", False):
        return None
    return PerturbConfig(
        dim=d,
        rho=args.perturb_rho,
        r_pert=args.r_pert,
        height_min=args.height_min,
        prot_min=args.prot_min,
        max_rounds=args.max_rounds,
        seed=args.seed,
        schedule=args.schedule,
    )


def _add_perturb_args(p, required=False):
    p.add_argument("--perturb-rho", type=float, required=required,
                   help="perturbation locality scale")
    p.add_argument("--r-pert", type=float, required=required,
                   help="reset disk radius")
    p.add_argument("--height-min", type=float, required=required,
                   help="height threshold")
    p.add_argument("--prot-min", type=float, required=required,
                   help="protection (clearance) threshold")
    p.add_argument("--max-rounds", type=int, default=50)
    p.add_argument("--schedule", choices=["worst", "fifo"], default="worst")


def _default_d(args):
    if args.d is not None:
        return args.d
    if args.generate in ("sphere", "torus", "flat_disk"):
        return 2
    return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="recon",
        description="Triangulate a sampled submanifold by minimizing a weighted "
        "l1 chain energy under cycle and load constraints.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reconstruct", help="full pipeline: complex, LP, verification")
    _common_input_args(p)
    p.add_argument("--scale-r", type=float, default=None,
                   help="complex scale r (defaults to epsilon)")
    p.add_argument("--complex", dest="complex_kind", default="rips",
                   choices=["rips", "cech", "delaunay-cech"])
    p.add_argument("--normalization", default="analytic-m0",
                   choices=["analytic-m0", "realistic-p0"])
    p.add_argument("--pca-scale", type=float, default=None,
                   help="PCA neighborhood for the realistic load constraint")
    p.add_argument("--load-radius", type=float, default=None,
                   help="simplex restriction radius for the realistic load "
                        "constraint (default 4*rho)")
    p.add_argument("--reach", type=float, default=None,
                   help="reach estimate when no generator is used")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mesh-format", choices=["off", "obj"], default=None)
    p.add_argument("--skip-quality", action="store_true")
    p.add_argument("--perturb", action="store_true",
                   help="run the resampling perturbation first")
    _add_perturb_args(p)

    p = sub.add_parser("quality", help="quality metrics and safety checks only")
    _common_input_args(p)
    p.add_argument("--reach", type=float, default=None)
    p.add_argument("--out", default=None, help="write the report here (JSON)")

    p = sub.add_parser("perturb", help="resampling perturbation only")
    _common_input_args(p)
    _add_perturb_args(p, required=True)
    p.add_argument("--out", required=True, help="output cloud file (.csv or .json)")
    p.add_argument("--trace", default=None, help="write the round trace here (JSONL)")

    p = sub.add_parser("delloc", help="build the delloc complex and export it")
    _common_input_args(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mesh-format", choices=["off", "obj"], default=None)
    return parser


def _load_cloud_with_optional_manifold(args, d):
    from .pipeline import load_cloud

    config = PipelineConfig(
        d=d,
        input_path=args.input,
        generator=args.generate,
        n_points=args.n,
        radius=args.radius,
        minor_radius=args.minor_radius,
        delta=args.delta,
        jitter=args.jitter,
        seed=args.seed,
    )
    return load_cloud(config)


def _epsilon_for(args, manifold, cloud):
    if args.epsilon is not None:
        return args.epsilon
    if manifold is None:
        raise InvalidInput("--epsilon is required with --input")
    return mf.verify_density(manifold, cloud).epsilon


def cmd_reconstruct(args):
    d = _default_d(args)
    config = PipelineConfig(
        d=d,
        input_path=args.input,
        generator=args.generate,
        n_points=args.n,
        radius=args.radius,
        minor_radius=args.minor_radius,
        delta=args.delta,
        jitter=args.jitter,
        epsilon=args.epsilon,
        rho=args.rho,
        rho_mult=args.rho_mult,
        scale_r=args.scale_r,
        complex_kind=args.complex_kind,
        normalization=args.normalization,
        pca_scale=args.pca_scale,
        load_radius=args.load_radius,
        perturb=_perturb_config(args, d) if args.perturb else None,
        seed=args.seed,
        reach=args.reach,
        out_dir=args.out_dir,
        mesh_format=args.mesh_format,
        skip_quality=args.skip_quality,
    )
    code, outcome = run_pipeline(config)
    if isinstance(outcome, dict):  # structured error
        print(dumps_17g(outcome))
        return code
    print(dumps_17g({
        "status": outcome.solution.status,
        "passed": outcome.passed,
        "support_size": len(outcome.result.rounded_chain),
        "matches_delloc": outcome.result.matches_delloc,
        "euler_characteristic": euler_characteristic(outcome.result.rounded_chain),
        "out_dir": config.out_dir,
    }))
    return code


def cmd_quality(args):
    d = _default_d(args)
    try:
        cloud, manifold = _load_cloud_with_optional_manifold(args, d)
        epsilon = _epsilon_for(args, manifold, cloud)
        rho = args.rho if args.rho is not None else args.rho_mult * epsilon
        report = compute_quality_report(
            cloud, d, epsilon=epsilon, delta=args.delta, rho=rho,
            manifold=manifold, reach=args.reach, seed=args.seed,
        )
    except ReconError as exc:
        print(dumps_17g({"error": type(exc).__name__, "message": str(exc)}))
        return 2 if isinstance(exc, InvalidInput) else 1
    text = dumps_17g(report.to_dict())
    if args.out:
        write_text_atomic(args.out, text + "\n")
    print(text)
    return 0


def cmd_perturb(args):
    d = _default_d(args)
    try:
        cloud, _ = _load_cloud_with_optional_manifold(args, d)
        config = PerturbConfig(
            dim=d, rho=args.perturb_rho, r_pert=args.r_pert,
            height_min=args.height_min, prot_min=args.prot_min,
            max_rounds=args.max_rounds, seed=args.seed, schedule=args.schedule,
        )
        result = moser_tardos(cloud, config)
    except ReconError as exc:
        print(dumps_17g({"error": type(exc).__name__, "message": str(exc)}))
        return 2 if isinstance(exc, InvalidInput) else 1
    if args.out.endswith(".json"):
        export_cloud_json(result.points, args.out)
    else:
        export_cloud_csv(result.points, args.out)
    if args.trace:
        write_text_atomic(args.trace, result.trace_lines() + "\n")
    print(dumps_17g({"status": result.status, "rounds": len(result.rounds),
                     "out": args.out}))
    return 0 if result.status == "ok" else 1


def cmd_delloc(args):
    d = _default_d(args)
    try:
        cloud, manifold = _load_cloud_with_optional_manifold(args, d)
        epsilon = _epsilon_for(args, manifold, cloud)
        rho = args.rho if args.rho is not None else args.rho_mult * epsilon
        candidates = ball_small_simplices(cloud, epsilon, d)
        D = delloc_complex(cloud, rho, d, candidates=candidates)
        chain = encode_chain(D, cloud, manifold=manifold, d=d)
    except ReconError as exc:
        print(dumps_17g({"error": type(exc).__name__, "message": str(exc)}))
        return 2 if isinstance(exc, InvalidInput) else 1
    os.makedirs(args.out_dir, exist_ok=True)
    fmt = args.mesh_format or ("obj" if d == 1 else "off")
    mesh_path = os.path.join(args.out_dir, f"delloc.{fmt}")
    try:
        export_mesh(cloud, chain, mesh_path, fmt)
    except ReconError as exc:
        print(dumps_17g({"error": type(exc).__name__, "message": str(exc)}))
        return 1
    summary = {
        "n_simplices": len(D.d_simplices()),
        "euler_characteristic": euler_characteristic(chain),
        "gabriel_checked": sum(
            1 for r in D.records.values() if r.gabriel_ok is not None
        ),
        "gabriel_ok": all(
            r.gabriel_ok for r in D.records.values() if r.gabriel_ok is not None
        ),
        "mesh": mesh_path,
    }
    write_json_atomic(os.path.join(args.out_dir, "delloc.json"), summary)
    print(dumps_17g(summary))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {
        "reconstruct": cmd_reconstruct,
        "quality": cmd_quality,
        "perturb": cmd_perturb,
        "delloc": cmd_delloc,
    }[args.command]
    try:
        return handler(args)
    except ReconError as exc:
        print(dumps_17g({"error": type(exc).__name__, "message": str(exc)}))
        return 2 if isinstance(exc, InvalidInput) else 1


if __name__ == "__main__":
    sys.exit(main())
