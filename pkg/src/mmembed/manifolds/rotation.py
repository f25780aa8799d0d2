"""Special orthogonal group SO(n) for n in {2, 3}.

Only these two sizes are supported: their rotation angles (the complex
arguments of the eigenvalues of R1^T R2) have closed forms, giving the
bi-invariant distance sqrt(2) * |angle| for n = 2 and sqrt(2) * theta with
cos(theta) = (trace - 1)/2 for n = 3. The group is used for random-graph
sampling and angle profiling, not for embedding training.
"""

from __future__ import annotations

import numpy as np

from ..errors import CutLocusError, InvalidInputError
from .base import Manifold


def _skew(a):
    return 0.5 * (a - np.swapaxes(a, -1, -2))


class SpecialOrthogonal(Manifold):
    def __init__(self, n: int):
        if n not in (2, 3):
            raise InvalidInputError("special orthogonal support is limited to n in {2, 3}")
        self.n = n
        self.point_shape = (n, n)
        self.dim = n * (n - 1) // 2
        self.spec_string = f"so:{n}"

    def base_point(self):
        return np.eye(self.n)

    def tangent_basis_at_base(self):
        n = self.n
        basis = []
        for i in range(n):
            for j in range(i + 1, n):
                e = np.zeros((n, n))
                e[i, j] = -1.0 / np.sqrt(2.0)
                e[j, i] = 1.0 / np.sqrt(2.0)
                basis.append(e)
        return np.stack(basis)

    def inner(self, x, u, v):
        return np.einsum("...ij,...ij->...", u, v)

    def _check_rotation(self, r):
        r = np.asarray(r, float)
        g = np.einsum("...ji,...jk->...ik", r, r)
        if np.abs(g - np.eye(self.n)).max() > 1e-8:
            raise InvalidInputError("matrix is not orthogonal")
        det = np.linalg.det(r)
        if np.any(np.abs(det - 1.0) > 1e-8):
            raise InvalidInputError("determinant must be +1 (same SO(n) component)")
        return r

    def _rel_angle(self, x, y):
        """Rotation angle of x^T y, in [0, pi]."""
        q = np.einsum("...ji,...jk->...ik", x, y)
        if self.n == 2:
            return np.abs(np.arctan2(q[..., 1, 0], q[..., 0, 0]))
        tr = np.trace(q, axis1=-2, axis2=-1)
        return np.arccos(np.clip(0.5 * (tr - 1.0), -1.0, 1.0))

    def dist(self, x, y):
        x = self._check_rotation(x)
        y = self._check_rotation(y)
        return np.sqrt(2.0) * self._rel_angle(x, y)

    def pairwise_dist(self, X):
        X = np.asarray(X, float)
        return np.sqrt(2.0) * self._rel_angle(X[:, None], X[None, :])

    def proj(self, x, u):
        x = np.asarray(x, float)
        return np.einsum(
            "...ij,...jk->...ik", x, _skew(np.einsum("...ji,...jk->...ik", x, u))
        )

    def exp(self, x, v):
        x = np.asarray(x, float)
        s = _skew(np.einsum("...ji,...jk->...ik", x, v))
        return np.einsum("...ij,...jk->...ik", x, _expm_skew(s))

    def log(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        q = np.einsum("...ji,...jk->...ik", x, y)
        return np.einsum("...ij,...jk->...ik", x, _logm_rotation(q))

    def log_defined(self, x, y):
        return self._rel_angle(np.asarray(x, float), np.asarray(y, float)) < np.pi - 1e-6

    def point_error(self, x):
        x = np.asarray(x, float)
        g = np.einsum("...ji,...jk->...ik", x, x)
        err = float(np.abs(g - np.eye(self.n)).max())
        det_err = float(np.abs(np.linalg.det(x) - 1.0).max())
        return max(err, det_err)

    def tangent_error(self, x, u):
        s = np.einsum("...ji,...jk->...ik", np.asarray(x, float), u)
        return float(np.abs(s + np.swapaxes(s, -1, -2)).max())

    def fix_point(self, x):
        from . import grassmann

        q = grassmann._orthonormalize(np.asarray(x, float))
        det = np.linalg.det(q)
        flip = np.where(det < 0.0, -1.0, 1.0)
        q = np.array(q, copy=True)
        q[..., :, -1] *= flip[..., None]
        return q


def _expm_skew(s: np.ndarray) -> np.ndarray:
    """Matrix exponential of skew stacks, closed form for n in {2, 3}."""
    n = s.shape[-1]
    if n == 2:
        a = s[..., 1, 0]
        c, sn = np.cos(a), np.sin(a)
        row1 = np.stack([c, -sn], axis=-1)
        row2 = np.stack([sn, c], axis=-1)
        return np.stack([row1, row2], axis=-2)
    # Rodrigues: exp(S) = I + sin(t)/t S + (1 - cos(t))/t^2 S^2
    w = np.stack([s[..., 2, 1], s[..., 0, 2], s[..., 1, 0]], axis=-1)
    t = np.linalg.norm(w, axis=-1)[..., None, None]
    s2 = np.einsum("...ij,...jk->...ik", s, s)
    small = t < 1e-12
    safe = np.where(small, 1.0, t)
    a = np.where(small, 1.0 - t**2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - t**2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    return np.eye(3) + a * s + b * s2


def _logm_rotation(q: np.ndarray) -> np.ndarray:
    """Principal matrix logarithm of rotation stacks (skew output)."""
    n = q.shape[-1]
    if n == 2:
        a = np.arctan2(q[..., 1, 0], q[..., 0, 0])
        if np.any(np.abs(np.abs(a) - np.pi) < 1e-8):
            raise CutLocusError("rotation by pi: log map undefined")
        z = np.zeros_like(a)
        row1 = np.stack([z, -a], axis=-1)
        row2 = np.stack([a, z], axis=-1)
        return np.stack([row1, row2], axis=-2)
    tr = np.trace(q, axis1=-2, axis2=-1)
    theta = np.arccos(np.clip(0.5 * (tr - 1.0), -1.0, 1.0))
    if np.any(theta > np.pi - 1e-6):
        raise CutLocusError("rotation angle within 1e-6 of pi: log map undefined")
    k = _skew(q)
    f = np.where(theta > 1e-12, theta / np.maximum(np.sin(theta), 1e-300), 1.0)
    return f[..., None, None] * k
