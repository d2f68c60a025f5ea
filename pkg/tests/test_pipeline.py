import math

import numpy as np
import pytest

from recon.complexes import Chain
from recon.errors import InvalidInput
from recon.pipeline import (
    PipelineConfig,
    euler_characteristic,
    run_reconstruction,
)


def test_config_validation():
    with pytest.raises(InvalidInput):
        PipelineConfig(d=1)  # neither input nor generator
    with pytest.raises(InvalidInput):
        PipelineConfig(d=1, generator="circle", complex_kind="alpha")
    with pytest.raises(InvalidInput):
        PipelineConfig(d=1, generator="circle", normalization="magic")


def test_euler_characteristic():
    polygon = Chain(1, {(i, (i + 1) % 5): 1.0 for i in range(4)})
    polygon[(0, 4)] = -1.0
    assert euler_characteristic(polygon) == 0
    two_triangles = Chain(2, {(0, 1, 2): 1.0, (1, 2, 3): -1.0})
    # disk: V=4, E=5, F=2
    assert euler_characteristic(two_triangles) == 1


@pytest.mark.parametrize("kind", ["rips", "cech", "delaunay-cech"])
def test_pipeline_complex_kinds_agree_on_circle(kind):
    cfg = PipelineConfig(d=1, generator="circle", n_points=24, seed=3,
                         rho_mult=12.0, complex_kind=kind)
    out = run_reconstruction(cfg)
    assert out.passed
    assert out.result.matches_delloc
    assert len(out.result.rounded_chain) == 24


def test_pipeline_scale_band_warning():
    cfg = PipelineConfig(d=1, generator="circle", n_points=24, seed=3,
                         rho_mult=6.0, scale_r=0.9)  # above rho/sqrt(2) ~ 0.57
    out = run_reconstruction(cfg)
    assert any("band" in w for w in out.warnings)


def test_pipeline_quality_scope_fallback():
    cfg = PipelineConfig(d=1, generator="circle", n_points=48, seed=1,
                         rho_mult=16.0, quality_budget=50)
    out = run_reconstruction(cfg)
    assert out.quality is not None
    assert out.quality.candidate_scope == "complex"


def test_pipeline_epsilon_required_for_files(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("0,0\n1,0\n0,1\n1,1\n")
    cfg = PipelineConfig(d=1, input_path=str(path), normalization="realistic-p0")
    with pytest.raises(InvalidInput):
        run_reconstruction(cfg)
