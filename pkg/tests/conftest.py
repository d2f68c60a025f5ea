import numpy as np
import pytest

from recon import manifolds


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture(scope="session")
def circle64():
    """Noisy 64-point circle sample: the standard end-to-end fixture."""
    m = manifolds.circle(1.0)
    pts = manifolds.sample(m, manifolds.SampleSpec(count=64, delta=1e-4, seed=7))
    return m, pts


@pytest.fixture(scope="session")
def circle64_eps(circle64):
    m, pts = circle64
    return manifolds.verify_density(m, pts).epsilon


def modulated_circle(n, seed, modulation=0.35, noise=1e-5):
    """Circle sample with smoothly varying density plus tiny radial noise.

    The density asymmetry makes the PCA tangent tilt scale with the
    neighborhood radius, which equi-spaced samples would hide.
    """
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0, 2 * np.pi)
    u = 2 * np.pi * (np.arange(n) + 0.5) / n
    u = u + rng.uniform(-0.05, 0.05, size=n) * (2 * np.pi / n)
    theta = u + modulation * np.sin(u + phase)
    pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    pts = pts * (1 + rng.uniform(-noise, noise, size=(n, 1)))
    return pts


def random_simplex(rng, d, ambient, scale=1.0, min_height=0.15):
    """A non-degenerate d-simplex in R^ambient with a height floor."""
    while True:
        v = rng.normal(size=(d + 1, ambient)) * scale
        from recon.geometry import simplex_diameter, simplex_height

        if simplex_height(v) > min_height * simplex_diameter(v):
            return v
