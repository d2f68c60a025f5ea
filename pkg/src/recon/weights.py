"""Delaunay weights and the weighted l1 chain energy.

The weight of a d-simplex is minus the integral of its power distance over its
convex hull; the closed form used here is
``Vol(a) * sum_{i<j} ||a_i - a_j||^2 / ((d+1)(d+2))``.
"""

import numpy as np

from .errors import DegenerateSimplex, MissingWeight
from .geometry import circumsphere, is_degenerate, simplex_volume


def delaunay_weight(vertices):
    """Closed-form Delaunay weight of a d-simplex (0 if degenerate)."""
    vertices = np.asarray(vertices, dtype=float)
    d = len(vertices) - 1
    vol = simplex_volume(vertices)
    if is_degenerate(vertices) or vol == 0.0:
        return 0.0
    diff = vertices[:, None, :] - vertices[None, :, :]
    ssq = 0.5 * float((diff ** 2).sum())  # sum over ordered pairs, halved
    return vol * ssq / ((d + 1) * (d + 2))


def weight_table(simplices, cloud):
    """Map each simplex (tuple of indices) to its Delaunay weight."""
    cloud = np.asarray(cloud, dtype=float)
    return {tuple(s): delaunay_weight(cloud[list(s)]) for s in simplices}


def energy(chain, weights):
    """Weighted l1-norm of the chain; every supported simplex needs a weight."""
    total = 0.0
    for simplex, value in chain.items():
        if simplex not in weights:
            raise MissingWeight(f"no weight for simplex {simplex}")
        total += weights[simplex] * abs(value)
    return total


def weight_integral_oracle(vertices, n_samples=1_000_000, seed=0):
    """Monte Carlo estimate of ``-∫_{Conv a} Pow_a(x) dx``.

    Uniform barycentric sampling with the volume factor; returns
    ``(estimate, standard_error)``.
    """
    vertices = np.asarray(vertices, dtype=float)
    if is_degenerate(vertices):
        raise DegenerateSimplex("integral oracle needs a non-degenerate simplex")
    vol = simplex_volume(vertices)
    sph = circumsphere(vertices)
    rng = np.random.default_rng(seed)
    k = len(vertices)
    total, total_sq, done = 0.0, 0.0, 0
    chunk = 250_000
    while done < n_samples:
        m = min(chunk, n_samples - done)
        lam = rng.dirichlet(np.ones(k), size=m)
        x = lam @ vertices
        integrand = sph.radius ** 2 - ((x - sph.center) ** 2).sum(axis=1)
        total += float(integrand.sum())
        total_sq += float((integrand ** 2).sum())
        done += m
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    stderr = vol * np.sqrt(var / n_samples)
    return vol * mean, float(stderr)
