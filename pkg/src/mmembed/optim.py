"""Riemannian SGD and Riemannian Adam.

Both step with the manifold's retraction and re-validate points
afterwards. Adam keeps a tangent first moment per point (re-projected
onto the new tangent space after each step, a projection-based transport)
and a scalar second moment per point accumulating the squared Riemannian
gradient norm; in the Euclidean 1-D case this reduces exactly to standard
Adam. The learned distance scale, when enabled, is a plain Euclidean
parameter driven by the same optimizer type.
"""

from __future__ import annotations

import numpy as np

from .embedding import EmbeddingSet
from .errors import NumericalError


def _post_step(emb: EmbeddingSet, batch, new_points, tol: float = 1e-6) -> None:
    new_points = emb.manifold.fix_point(new_points)
    err = emb.manifold.point_error(new_points)
    if err > tol:
        raise NumericalError(
            f"optimizer step left {emb.manifold.spec_string} by {err:.3e}"
        )
    emb.points[batch] = new_points


class Rsgd:
    def __init__(self, learn_scale: bool = False):
        self.learn_scale = learn_scale

    def step(self, emb: EmbeddingSet, batch, rgrads, scale_grad: float, lr: float):
        x = emb.points[batch]
        new = emb.manifold.retract(x, -lr * rgrads)
        _post_step(emb, batch, new)
        if self.learn_scale:
            emb.log_scale -= lr * scale_grad


class Radam:
    def __init__(
        self,
        m: int,
        point_shape,
        learn_scale: bool = False,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.learn_scale = learn_scale
        self.moment1 = np.zeros((m,) + tuple(point_shape))
        self.moment2 = np.zeros(m)
        self.t = 0
        self.scale_m1 = 0.0
        self.scale_m2 = 0.0

    def step(self, emb: EmbeddingSet, batch, rgrads, scale_grad: float, lr: float):
        man = emb.manifold
        self.t += 1
        x = emb.points[batch]
        m1 = self.beta1 * self.moment1[batch] + (1.0 - self.beta1) * rgrads
        g2 = man.inner(x, rgrads, rgrads)
        m2 = self.beta2 * self.moment2[batch] + (1.0 - self.beta2) * g2
        bias1 = 1.0 - self.beta1**self.t
        bias2 = 1.0 - self.beta2**self.t
        denom = np.sqrt(m2 / bias2) + self.eps
        shape = (-1,) + (1,) * (rgrads.ndim - 1)
        step = -(lr / bias1) * m1 / denom.reshape(shape)
        new = man.retract(x, step)
        _post_step(emb, batch, new)
        # transport stale tangents onto the new tangent spaces
        self.moment1[batch] = man.transport(x, emb.points[batch], m1)
        self.moment2[batch] = m2
        if self.learn_scale:
            self.scale_m1 = self.beta1 * self.scale_m1 + (1 - self.beta1) * scale_grad
            self.scale_m2 = self.beta2 * self.scale_m2 + (1 - self.beta2) * scale_grad**2
            emb.log_scale -= (
                lr
                * (self.scale_m1 / bias1)
                / (np.sqrt(self.scale_m2 / bias2) + self.eps)
            )


def make_optimizer(name: str, m: int, point_shape, learn_scale: bool):
    name = name.strip().lower()
    if name == "rsgd":
        return Rsgd(learn_scale)
    if name == "radam":
        return Radam(m, point_shape, learn_scale)
    from .errors import InvalidInputError

    raise InvalidInputError(f"unknown optimizer {name!r}")
