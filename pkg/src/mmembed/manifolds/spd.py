"""Symmetric positive-definite matrices with the affine-invariant metric.

Distances avoid matrix square roots on the hot path: with A = L L^T the
matrix L^-1 B L^-T is SPD and shares its spectrum with A^-1 B, so the
geodesic distance is the root-sum-square of its log-eigenvalues. Exact
exponential/logarithm maps go through the symmetric form
A^{1/2} f(A^{-1/2} . A^{-1/2}) A^{1/2}.

``SteinSpd`` keeps the identical Riemannian toolbox but swaps the *model*
metric used by losses and evaluation for the symmetric Stein divergence
S(A, B) = log det((A+B)/2) - log det(A B)/2, whose gradient in A is the
closed form (A+B)^{-1}/2 - A^{-1}/2. S plays the role of a squared
distance; sqrt(S) is used wherever an unsquared one is needed.
"""

from __future__ import annotations

import numpy as np

from .. import smallmat as sm
from .base import Manifold

#: eigenvalue floor applied when repairing iterates that drift toward the
#: cone boundary
EIG_FLOOR = 1e-10


def _sym(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


class Spd(Manifold):
    def __init__(self, n: int, metric: str = "canonical"):
        if n < 1:
            raise ValueError("matrix size must be >= 1")
        self.n = n
        self.point_shape = (n, n)
        self.dim = n * (n + 1) // 2
        self.spec_string = f"spd:{n}" if metric == "canonical" else f"stein:{n}"

    def base_point(self):
        return np.eye(self.n)

    def tangent_basis_at_base(self):
        n = self.n
        basis = []
        for i in range(n):
            e = np.zeros((n, n))
            e[i, i] = 1.0
            basis.append(e)
        for i in range(n):
            for j in range(i + 1, n):
                e = np.zeros((n, n))
                e[i, j] = e[j, i] = 1.0 / np.sqrt(2.0)
                basis.append(e)
        return np.stack(basis)

    # -- metric --------------------------------------------------------------

    def inner(self, x, u, v):
        xinv = sm.spd_inv_batch(np.asarray(x, float))
        a = np.einsum("...ij,...jk->...ik", xinv, u)
        b = np.einsum("...ij,...jk->...ik", xinv, v)
        return np.einsum("...ij,...ji->...", a, b)

    def _log_eigs_rel(self, x, y):
        """log eigenvalues of x^-1 y via the Cholesky congruence."""
        L = sm.cholesky_batch(np.asarray(x, float))
        Linv = sm.inv_lower(L)
        m = np.einsum("...ij,...jk,...lk->...il", Linv, np.asarray(y, float), Linv)
        lam = sm.eigvalsh(_sym(m))
        return np.log(np.maximum(lam, 1e-300))

    def dist(self, x, y):
        logs = self._log_eigs_rel(x, y)
        return np.sqrt(np.sum(logs**2, axis=-1))

    def pairwise_dist(self, X):
        X = np.asarray(X, float)
        Linv = sm.inv_lower(sm.cholesky_batch(X))
        m = np.einsum("aij,bjk,alk->abil", Linv, X, Linv)
        lam = np.maximum(sm.eigvalsh(_sym(m)), 1e-300)
        d2 = np.sum(np.log(lam) ** 2, axis=-1)
        np.fill_diagonal(d2, 0.0)
        return np.sqrt(d2)

    # -- maps ----------------------------------------------------------------

    def proj(self, x, u):
        return _sym(np.asarray(u, float))

    def egrad_to_rgrad(self, x, g):
        x = np.asarray(x, float)
        s = self.proj(x, g)
        return np.einsum("...ij,...jk,...kl->...il", x, s, x)

    def exp(self, x, v):
        x = np.asarray(x, float)
        r = sm.spd_fn_batch(x, "inv_sqrt")
        s = sm.spd_fn_batch(x, "sqrt")
        inner = sm.spd_fn_batch(_sym(np.einsum("...ij,...jk,...kl->...il", r, v, r)), "exp")
        return _sym(np.einsum("...ij,...jk,...kl->...il", s, inner, s))

    def log(self, x, y):
        x = np.asarray(x, float)
        r = sm.spd_fn_batch(x, "inv_sqrt")
        s = sm.spd_fn_batch(x, "sqrt")
        inner = sm.spd_fn_batch(_sym(np.einsum("...ij,...jk,...kl->...il", r, y, r)), "log")
        return _sym(np.einsum("...ij,...jk,...kl->...il", s, inner, s))

    def retract(self, x, v):
        """Second-order retraction A + P + P A^-1 P / 2."""
        x = np.asarray(x, float)
        v = _sym(np.asarray(v, float))
        xinv = sm.spd_inv_batch(x)
        quad = np.einsum("...ij,...jk,...kl->...il", v, xinv, v)
        return self.fix_point(x + v + 0.5 * quad)

    # -- loss-side gradients ---------------------------------------------------

    def weighted_model_sqdist_egrad(self, X, C):
        # grad_A d^2(A, B) = -2 A^{-1/2} log(A^{-1/2} B A^{-1/2}) A^{-1/2}
        X = np.asarray(X, float)
        r = sm.spd_fn_batch(X, "inv_sqrt")
        m = _sym(np.einsum("aij,bjk,akl->abil", r, X, r))
        vals, vecs = sm.eigh(m)
        logm = np.einsum(
            "abik,abk,abjk->abij", vecs, np.log(np.maximum(vals, 1e-300)), vecs
        )
        acc = np.einsum("ab,abij->aij", C, logm)
        return -2.0 * _sym(np.einsum("aij,ajk,akl->ail", r, acc, r))

    # -- validity --------------------------------------------------------------

    def point_error(self, x):
        x = np.asarray(x, float)
        asym = np.abs(x - np.swapaxes(x, -1, -2)).max()
        lam_min = sm.eigvalsh(_sym(x))[..., -1].min()
        return float(max(asym, EIG_FLOOR - lam_min))

    def tangent_error(self, x, u):
        u = np.asarray(u, float)
        return float(np.abs(u - np.swapaxes(u, -1, -2)).max())

    def fix_point(self, x):
        """Symmetrize and clamp eigenvalues at the floor."""
        x = _sym(np.asarray(x, float))
        vals, vecs = sm.eigh(x)
        if np.all(vals[..., -1] >= EIG_FLOOR):
            return x
        vals = np.maximum(vals, EIG_FLOOR)
        return _sym(np.einsum("...ik,...k,...jk->...ij", vecs, vals, vecs))


class SteinSpd(Spd):
    """SPD manifold whose model metric is the symmetric Stein divergence."""

    def __init__(self, n: int):
        super().__init__(n, metric="stein")

    def model_pairwise_sqdist(self, X):
        X = np.asarray(X, float)
        ld = sm.logdet_batch(X)
        mid = 0.5 * (X[:, None] + X[None, :])
        s = sm.logdet_batch(mid) - 0.5 * (ld[:, None] + ld[None, :])
        np.fill_diagonal(s, 0.0)
        return np.maximum(s, 0.0)

    def model_pairwise_dist(self, X):
        return np.sqrt(self.model_pairwise_sqdist(X))

    def weighted_model_sqdist_egrad(self, X, C):
        # grad_A S(A, B) = (A+B)^{-1}/2 - A^{-1}/2
        X = np.asarray(X, float)
        mid_inv = sm.spd_inv_batch(0.5 * (X[:, None] + X[None, :]))
        xinv = sm.spd_inv_batch(X)
        acc = 0.5 * np.einsum("ab,abij->aij", C, mid_inv)
        acc -= 0.5 * C.sum(axis=1)[:, None, None] * xinv
        return _sym(acc)


def stein_divergence(a, b) -> np.ndarray:
    """S(A, B) = log det((A+B)/2) - log det(AB)/2, elementwise over stacks."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    mid = sm.logdet_batch(0.5 * (a + b))
    return mid - 0.5 * (sm.logdet_batch(a) + sm.logdet_batch(b))


def stein_gradient(a, b) -> np.ndarray:
    """Gradient of the Stein divergence in its first argument."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return _sym(0.5 * sm.spd_inv_batch(0.5 * (a + b)) - 0.5 * sm.spd_inv_batch(a))


def congruence(x, a) -> np.ndarray:
    """X^T A X, the transformation the canonical metric is invariant to."""
    return np.einsum("...ji,...jk,...kl->...il", x, a, x)
