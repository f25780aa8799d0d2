"""Flat baseline space R^n."""

from __future__ import annotations

import numpy as np

from .base import Manifold


class Euclidean(Manifold):
    def __init__(self, n: int):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self.n = n
        self.point_shape = (n,)
        self.dim = n
        self.spec_string = f"euclidean:{n}"

    def base_point(self):
        return np.zeros(self.n)

    def tangent_basis_at_base(self):
        return np.eye(self.n)

    def inner(self, x, u, v):
        return np.einsum("...i,...i->...", u, v)

    def dist(self, x, y):
        return np.linalg.norm(np.asarray(y, float) - x, axis=-1)

    def pairwise_dist(self, X):
        X = np.asarray(X, float)
        sq = np.sum(X**2, axis=-1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
        np.fill_diagonal(d2, 0.0)
        return np.sqrt(np.maximum(d2, 0.0))

    def proj(self, x, u):
        return np.asarray(u, float)

    def exp(self, x, v):
        return np.asarray(x, float) + v

    def log(self, x, y):
        return np.asarray(y, float) - x

    def weighted_model_sqdist_egrad(self, X, C):
        # grad_i d^2(x_i, x_j) = 2 (x_i - x_j)
        rowsum = C.sum(axis=1)
        return 2.0 * (rowsum[:, None] * X - C @ X)

    def point_error(self, x):
        x = np.asarray(x, float)
        return 0.0 if np.all(np.isfinite(x)) else np.inf

    def tangent_error(self, x, u):
        return 0.0

    def fix_point(self, x):
        return np.asarray(x, float)
