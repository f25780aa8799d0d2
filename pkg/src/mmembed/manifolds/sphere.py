"""Unit hypersphere S(n) embedded in R^{n+1}."""

from __future__ import annotations

import numpy as np

from ..errors import CutLocusError
from .base import Manifold

_ANTIPODAL_TOL = 1e-8


class Sphere(Manifold):
    def __init__(self, n: int):
        if n < 1:
            raise ValueError("sphere dimension must be >= 1")
        self.n = n
        self.point_shape = (n + 1,)
        self.dim = n
        self.spec_string = f"sphere:{n}"

    def base_point(self):
        e = np.zeros(self.n + 1)
        e[0] = 1.0
        return e

    def tangent_basis_at_base(self):
        return np.eye(self.n + 1)[1:]

    def inner(self, x, u, v):
        return np.einsum("...i,...i->...", u, v)

    def dist(self, x, y):
        c = np.clip(np.einsum("...i,...i->...", x, y), -1.0, 1.0)
        return np.arccos(c)

    def pairwise_dist(self, X):
        X = np.asarray(X, float)
        c = np.clip(X @ X.T, -1.0, 1.0)
        np.fill_diagonal(c, 1.0)
        return np.arccos(c)

    def proj(self, x, u):
        return u - np.einsum("...i,...i->...", x, u)[..., None] * x

    def exp(self, x, v):
        x = np.asarray(x, float)
        v = np.asarray(v, float)
        theta = np.linalg.norm(v, axis=-1, keepdims=True)
        small = theta < 1e-15
        safe = np.where(small, 1.0, theta)
        y = np.cos(theta) * x + np.sin(theta) * (v / safe)
        y = np.where(small, x + v, y)
        return y / np.linalg.norm(y, axis=-1, keepdims=True)

    def log(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        c = np.clip(np.einsum("...i,...i->...", x, y), -1.0, 1.0)
        if np.any(c <= -1.0 + _ANTIPODAL_TOL):
            raise CutLocusError("log map requested at (nearly) antipodal points")
        u = y - c[..., None] * x
        un = np.linalg.norm(u, axis=-1, keepdims=True)
        theta = np.arccos(c)[..., None]
        return np.where(un > 1e-15, theta * u / np.where(un > 1e-15, un, 1.0), 0.0)

    def weighted_model_sqdist_egrad(self, X, C):
        # grad_i d^2 = -2 d / sin(d) * x_j, with limit -2 at d -> 0
        c = np.clip(X @ X.T, -1.0, 1.0)
        d = np.arccos(c)
        s = np.sqrt(np.maximum(1.0 - c * c, 1e-30))
        f = np.where(d > 1e-12, 2.0 * d / s, 2.0)
        return -(C * f) @ X

    def log_defined(self, x, y):
        c = np.einsum("...i,...i->...", np.asarray(x, float), np.asarray(y, float))
        return c > -1.0 + _ANTIPODAL_TOL

    def point_error(self, x):
        return float(np.abs(np.linalg.norm(np.asarray(x, float), axis=-1) - 1.0).max())

    def tangent_error(self, x, u):
        return float(np.abs(np.einsum("...i,...i->...", x, u)).max())

    def fix_point(self, x):
        x = np.asarray(x, float)
        return x / np.linalg.norm(x, axis=-1, keepdims=True)
