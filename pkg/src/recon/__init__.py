"""Triangulate smooth submanifolds from point samples by minimizing a weighted
l1-norm over simplicial d-chains under cycle and load constraints, and verify
the result against an independently built delloc complex."""

from . import (
    complexes,
    delloc,
    errors,
    estimators,
    geometry,
    lp,
    manifolds,
    meshio,
    perturb,
    pipeline,
    problem,
    quality,
    validation,
    weights,
)
from .estimators import ChainReconstruction, MoserTardosPerturbation
from .pipeline import PipelineConfig, run_pipeline, run_reconstruction

__version__ = "0.1.0"

__all__ = [
    "ChainReconstruction",
    "MoserTardosPerturbation",
    "PipelineConfig",
    "run_pipeline",
    "run_reconstruction",
    "complexes",
    "delloc",
    "errors",
    "estimators",
    "geometry",
    "lp",
    "manifolds",
    "meshio",
    "perturb",
    "pipeline",
    "problem",
    "quality",
    "validation",
    "weights",
]
