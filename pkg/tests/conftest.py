"""Shared helpers: random points/tangents on any manifold."""

import numpy as np
import pytest

from mmembed import manifolds as mf


def random_tangent_at_base(man, rng, radius=1.0, count=None):
    """Tangent vectors drawn uniformly from a metric ball at the base point."""
    basis = man.tangent_basis_at_base()
    shape = (count, man.dim) if count else (man.dim,)
    w = rng.standard_normal(shape)
    w /= np.linalg.norm(w, axis=-1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, size=shape[:-1] + (1,)) ** (1.0 / man.dim)
    coeff = w * r
    return np.tensordot(coeff, basis, axes=(-1, 0))


def random_point(man, rng, radius=1.0, count=None):
    base = man.base_point()
    v = random_tangent_at_base(man, rng, radius=radius, count=count)
    return man.exp(base, v)


def random_tangent(man, x, rng, scale=1.0):
    """A tangent vector at x via projection of ambient noise."""
    g = rng.standard_normal(np.shape(x)) * scale
    return man.proj(np.asarray(x, float), g)


ALL_SPECS = [
    "euclidean:3",
    "sphere:3",
    "lorentz:3",
    "spd:2",
    "stein:2",
    "grassmann:2,4",
    "product:(lorentz:3)x(sphere:3)",
]


@pytest.fixture(params=ALL_SPECS)
def any_manifold(request):
    return mf.parse_spec(request.param)
