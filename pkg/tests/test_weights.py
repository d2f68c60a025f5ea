import numpy as np
import pytest

from recon.complexes import Chain
from recon.errors import MissingWeight
from recon import weights as w

from conftest import random_simplex


def test_unit_segment_weight():
    seg = np.array([[0.0], [1.0]])
    assert w.delaunay_weight(seg) == pytest.approx(1.0 / 6.0, abs=1e-12)


def test_right_triangle_weight():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert w.delaunay_weight(tri) == pytest.approx(1.0 / 6.0, abs=1e-12)


def test_collinear_weight_zero():
    line = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert w.delaunay_weight(line) == 0.0


def test_weight_matches_integral_oracle(rng):
    for _ in range(8):
        d = int(rng.integers(1, 4))
        ambient = int(rng.integers(d + 1, 7))
        v = random_simplex(rng, d, ambient)
        closed = w.delaunay_weight(v)
        estimate, stderr = w.weight_integral_oracle(v, n_samples=200_000, seed=1)
        assert abs(closed - estimate) <= 3 * stderr + 1e-12


def test_weight_scaling_law(rng):
    v = random_simplex(rng, 2, 3)
    base = w.delaunay_weight(v)
    for s in (0.5, 2.0, 3.0):
        assert w.delaunay_weight(s * v) == pytest.approx(s ** 4 * base, rel=1e-9)


def test_weight_invariant_under_reordering(rng):
    v = random_simplex(rng, 2, 4)
    assert w.delaunay_weight(v[[2, 0, 1]]) == pytest.approx(w.delaunay_weight(v), rel=1e-12)


def test_tiny_simplex_oracle_scaling():
    seg = np.array([[0.0], [1.0]])
    est1, _ = w.weight_integral_oracle(seg, n_samples=100_000, seed=0)
    est2, _ = w.weight_integral_oracle(0.1 * seg, n_samples=100_000, seed=0)
    assert est2 / est1 == pytest.approx(0.1 ** 3, rel=5e-2)


def test_energy():
    cloud = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    table = w.weight_table([(0, 1), (1, 2)], cloud)
    chain = Chain(1, {(0, 1): -1.0})
    assert w.energy(chain, table) == pytest.approx(table[(0, 1)])
    assert w.energy(Chain(1), table) == 0.0
    scaled = 3.5 * chain
    assert w.energy(scaled, table) == pytest.approx(3.5 * table[(0, 1)])
    with pytest.raises(MissingWeight):
        w.energy(Chain(1, {(0, 2): 1.0}), table)
