"""Hyperbolic space in the Lorentz (hyperboloid) model.

Points are the upper sheet {x in R^{n+1} : <x, x>_L = -1, x_0 > 0} of the
hyperboloid in Minkowski space, with the Lorentz product
<x, y>_L = -x_0 y_0 + sum_i x_i y_i. The Riemannian metric is the Lorentz
product restricted to tangent spaces, where it is positive definite.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericalDomainError
from .base import Manifold


def lorentz_product(x, y):
    s = np.einsum("...i,...i->...", x, y)
    return s - 2.0 * x[..., 0] * y[..., 0]


class Lorentz(Manifold):
    def __init__(self, n: int):
        if n < 1:
            raise ValueError("hyperbolic dimension must be >= 1")
        self.n = n
        self.point_shape = (n + 1,)
        self.dim = n
        self.spec_string = f"lorentz:{n}"

    def base_point(self):
        e = np.zeros(self.n + 1)
        e[0] = 1.0
        return e

    def tangent_basis_at_base(self):
        return np.eye(self.n + 1)[1:]

    def _flip(self, u):
        out = np.array(u, dtype=float, copy=True)
        out[..., 0] = -out[..., 0]
        return out

    def inner(self, x, u, v):
        return lorentz_product(u, v)

    def _alpha(self, x, y, strict=False):
        a = -lorentz_product(x, y)
        if strict and np.any(a < 1.0 - 1e-9):
            raise NumericalDomainError(
                f"cosh^-1 argument {float(np.min(a)):.12f} below 1"
            )
        return np.maximum(a, 1.0)

    def dist(self, x, y):
        return np.arccosh(self._alpha(np.asarray(x, float), np.asarray(y, float), strict=True))

    def pairwise_dist(self, X):
        X = np.asarray(X, float)
        a = -(X @ self._flip(X).T)
        np.fill_diagonal(a, 1.0)
        return np.arccosh(np.maximum(a, 1.0))

    def proj(self, x, u):
        return u + lorentz_product(u, x)[..., None] * x

    def egrad_to_rgrad(self, x, g):
        return self.proj(x, self._flip(g))

    def exp(self, x, v):
        x = np.asarray(x, float)
        v = np.asarray(v, float)
        theta = np.sqrt(np.maximum(lorentz_product(v, v), 0.0))[..., None]
        small = theta < 1e-15
        safe = np.where(small, 1.0, theta)
        y = np.cosh(theta) * x + np.sinh(theta) * (v / safe)
        y = np.where(small, x + v, y)
        return self.fix_point(y)

    def log(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        a = self._alpha(x, y)
        d = np.arccosh(a)
        denom = np.sqrt(np.maximum(a * a - 1.0, 1e-30))
        f = np.where(d > 1e-12, d / denom, 1.0)[..., None]
        return f * (y - a[..., None] * x)

    def weighted_model_sqdist_egrad(self, X, C):
        # grad_i d^2 = -2 d / sqrt(a^2 - 1) * J x_j, with limit -2 at d -> 0
        Xf = self._flip(X)
        a = np.maximum(-(X @ Xf.T), 1.0)
        d = np.arccosh(a)
        denom = np.sqrt(np.maximum(a * a - 1.0, 1e-30))
        f = np.where(d > 1e-12, 2.0 * d / denom, 2.0)
        return -self._flip((C * f) @ X)

    def point_error(self, x):
        x = np.asarray(x, float)
        errs = np.abs(lorentz_product(x, x) + 1.0)
        sheet = np.where(x[..., 0] > 0.0, 0.0, np.inf)
        return float(np.maximum(errs, sheet).max())

    def tangent_error(self, x, u):
        return float(np.abs(lorentz_product(x, u)).max())

    def fix_point(self, x):
        """Recompute the time coordinate from the spatial part."""
        x = np.array(x, dtype=float, copy=True)
        x[..., 0] = np.sqrt(1.0 + np.sum(x[..., 1:] ** 2, axis=-1))
        return x
