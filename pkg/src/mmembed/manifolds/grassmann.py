"""Grassmann manifold Gr(k, n) of k-dimensional subspaces of R^n.

A point is stored as an arbitrary n x k orthonormal representative of its
subspace; two representatives are the same point iff their subspace
distance vanishes, so equality is never entrywise. Distances come from the
principal angles between subspaces: the arccos of the singular values of
A^T B. Those singular values are closed-form for k = 2, plain scalars for
k = 1, and numpy's SVD otherwise.
"""

from __future__ import annotations

import numpy as np

from .. import smallmat as sm
from ..errors import CutLocusError
from .base import Manifold

#: largest principal angle (relative to pi/2) at which the log map is
#: still considered well defined
_CUT_TOL = 1e-6


def _orthonormalize(x):
    """Polar-factor orthonormalization of (..., n, k) stacks."""
    u, sig, v = sm.svd_small(np.asarray(x, float))
    return np.einsum("...ij,...kj->...ik", u, v)


class Grassmann(Manifold):
    def __init__(self, k: int, n: int):
        if not 1 <= k < n:
            raise ValueError("grassmann requires 1 <= k < n")
        self.k = k
        self.n = n
        self.point_shape = (n, k)
        self.dim = k * (n - k)
        self.spec_string = f"grassmann:{k},{n}"

    def base_point(self):
        return np.eye(self.n, self.k)

    def tangent_basis_at_base(self):
        basis = []
        for i in range(self.k, self.n):
            for j in range(self.k):
                e = np.zeros((self.n, self.k))
                e[i, j] = 1.0
                basis.append(e)
        return np.stack(basis)

    # -- principal angles ------------------------------------------------------

    def _cross(self, x, y):
        return np.einsum("...ji,...jl->...il", np.asarray(x, float), np.asarray(y, float))

    def principal_angles(self, x, y):
        s = self._cross(x, y)
        if self.k == 1:
            sig = np.abs(s[..., 0, 0])[..., None]
        elif self.k == 2:
            sig = sm.singvals_2x2(s)
        else:
            sig = np.linalg.svd(s, compute_uv=False)
        return np.arccos(np.clip(sig, 0.0, 1.0))

    def inner(self, x, u, v):
        return np.einsum("...ij,...ij->...", u, v)

    def dist(self, x, y):
        theta = self.principal_angles(x, y)
        return np.sqrt(np.sum(theta**2, axis=-1))

    def pairwise_dist(self, X):
        X = np.asarray(X, float)
        theta = self.principal_angles(X[:, None], X[None, :])
        d = np.sqrt(np.sum(theta**2, axis=-1))
        np.fill_diagonal(d, 0.0)
        return d

    # -- maps ------------------------------------------------------------------

    def proj(self, x, u):
        x = np.asarray(x, float)
        return u - np.einsum("...ij,...kj,...kl->...il", x, x, u)

    def exp(self, x, v):
        x = np.asarray(x, float)
        u, sig, w = sm.svd_small(np.asarray(v, float))
        cos = np.cos(sig)
        sin = np.sin(sig)
        xw = np.einsum("...ij,...jl->...il", x, w)
        y = np.einsum("...il,...l,...ml->...im", xw, cos, w) + np.einsum(
            "...il,...l,...ml->...im", u, sin, w
        )
        return _orthonormalize(y)

    def _log_impl(self, x, y, clamp: bool):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        s = self._cross(x, y)
        v, sig, w = sm.svd_small(s)
        theta = np.arccos(np.clip(sig, 0.0, 1.0))
        if clamp:
            theta = np.minimum(theta, np.pi / 2 - 1e-9)
        elif np.any(theta > np.pi / 2 - _CUT_TOL):
            raise CutLocusError(
                "principal angle within 1e-6 of pi/2: log map undefined"
            )
        aligned = np.einsum("...ij,...jl,...ml->...im", y, w, v)
        p = aligned - np.einsum(
            "...ij,...kj,...kl->...il", x, x, aligned
        )
        ratio = np.where(theta > 1e-12, theta / np.maximum(np.sin(theta), 1e-300), 1.0)
        pv = np.einsum("...ij,...jl->...il", p, v)
        return np.einsum("...il,...l,...ml->...im", pv, ratio, v)

    def log(self, x, y):
        return self._log_impl(x, y, clamp=False)

    def retract(self, x, v):
        return _orthonormalize(np.asarray(x, float) + v)

    def weighted_model_sqdist_egrad(self, X, C):
        # grad d^2 = -2 log, with principal angles clamped away from pi/2
        X = np.asarray(X, float)
        logs = self._log_impl(X[:, None], X[None, :], clamp=True)
        return -2.0 * np.einsum("ab,abij->aij", C, logs)

    # -- validity ----------------------------------------------------------------

    def log_defined(self, x, y):
        theta = self.principal_angles(x, y)
        return theta.max(axis=-1) < np.pi / 2 - _CUT_TOL

    def point_error(self, x):
        x = np.asarray(x, float)
        g = np.einsum("...ji,...jl->...il", x, x)
        return float(np.abs(g - np.eye(self.k)).max())

    def tangent_error(self, x, u):
        return float(np.abs(self._cross(x, u)).max())

    def fix_point(self, x):
        return _orthonormalize(x)

    def same_point(self, x, y, tol: float = 1e-8) -> bool:
        """Subspace equality, the only meaningful comparison on a quotient."""
        return bool(np.all(self.dist(x, y) < tol))
