"""Cartesian products of manifolds.

A product point is stored flattened: the factor values are raveled and
concatenated into one vector, so product embeddings stack and serialize
exactly like every other manifold's. Squared distances, inner products,
and gradients all decompose as sums over the factors.
"""

from __future__ import annotations

import numpy as np

from .base import Manifold


class Product(Manifold):
    def __init__(self, factors):
        factors = list(factors)
        if len(factors) < 2:
            raise ValueError("a product needs at least 2 factors")
        if any(isinstance(f, Product) for f in factors):
            raise ValueError("nested products are not supported")
        self.factors = factors
        lens = [f.flat_len for f in factors]
        self.offsets = np.concatenate([[0], np.cumsum(lens)])
        self.point_shape = (int(self.offsets[-1]),)
        self.dim = sum(f.dim for f in factors)
        inner = ")x(".join(f.spec_string for f in factors)
        self.spec_string = f"product:({inner})"

    # -- packing ----------------------------------------------------------------

    def split(self, x):
        """Views of the factor components, reshaped to each factor's shape."""
        x = np.asarray(x, float)
        out = []
        for f, a, b in zip(self.factors, self.offsets[:-1], self.offsets[1:]):
            out.append(x[..., a:b].reshape(x.shape[:-1] + f.point_shape))
        return out

    def join(self, parts):
        flat = [
            np.asarray(p, float).reshape(np.asarray(p).shape[: -len(f.point_shape)] + (f.flat_len,))
            for f, p in zip(self.factors, parts)
        ]
        return np.concatenate(flat, axis=-1)

    # -- interface ----------------------------------------------------------------

    def base_point(self):
        return self.join([f.base_point() for f in self.factors])

    def tangent_basis_at_base(self):
        blocks = []
        for i, f in enumerate(self.factors):
            for b in f.tangent_basis_at_base():
                parts = [
                    b if j == i else np.zeros(g.point_shape)
                    for j, g in enumerate(self.factors)
                ]
                blocks.append(self.join(parts))
        return np.stack(blocks)

    def inner(self, x, u, v):
        xs, us, vs = self.split(x), self.split(u), self.split(v)
        return sum(f.inner(a, b, c) for f, a, b, c in zip(self.factors, xs, us, vs))

    def dist(self, x, y):
        xs, ys = self.split(x), self.split(y)
        d2 = sum(f.dist(a, b) ** 2 for f, a, b in zip(self.factors, xs, ys))
        return np.sqrt(d2)

    def pairwise_dist(self, X):
        parts = self.split(np.asarray(X, float))
        d2 = sum(f.pairwise_dist(p) ** 2 for f, p in zip(self.factors, parts))
        return np.sqrt(d2)

    def proj(self, x, u):
        return self.join(
            [f.proj(a, b) for f, a, b in zip(self.factors, self.split(x), self.split(u))]
        )

    def egrad_to_rgrad(self, x, g):
        return self.join(
            [
                f.egrad_to_rgrad(a, b)
                for f, a, b in zip(self.factors, self.split(x), self.split(g))
            ]
        )

    def exp(self, x, v):
        return self.join(
            [f.exp(a, b) for f, a, b in zip(self.factors, self.split(x), self.split(v))]
        )

    def log(self, x, y):
        return self.join(
            [f.log(a, b) for f, a, b in zip(self.factors, self.split(x), self.split(y))]
        )

    def retract(self, x, v):
        return self.join(
            [f.retract(a, b) for f, a, b in zip(self.factors, self.split(x), self.split(v))]
        )

    def model_pairwise_sqdist(self, X):
        parts = self.split(np.asarray(X, float))
        return sum(f.model_pairwise_sqdist(p) for f, p in zip(self.factors, parts))

    def model_pairwise_dist(self, X):
        return np.sqrt(self.model_pairwise_sqdist(X))

    def weighted_model_sqdist_egrad(self, X, C):
        parts = self.split(np.asarray(X, float))
        return self.join(
            [f.weighted_model_sqdist_egrad(p, C) for f, p in zip(self.factors, parts)]
        )

    def log_defined(self, x, y):
        xs, ys = self.split(x), self.split(y)
        ok = None
        for f, a, b in zip(self.factors, xs, ys):
            m = f.log_defined(a, b)
            ok = m if ok is None else (ok & m)
        return ok

    def point_error(self, x):
        return max(f.point_error(p) for f, p in zip(self.factors, self.split(x)))

    def tangent_error(self, x, u):
        return max(
            f.tangent_error(a, b)
            for f, a, b in zip(self.factors, self.split(x), self.split(u))
        )

    def fix_point(self, x):
        return self.join(
            [f.fix_point(p) for f, p in zip(self.factors, self.split(x))]
        )
