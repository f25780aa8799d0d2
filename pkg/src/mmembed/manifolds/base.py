"""Common manifold interface.

Every manifold operates on numpy arrays whose trailing axes hold one point
(a vector, a tall-skinny frame, a square matrix, ...) and whose leading
axes broadcast, so the same code serves single points and stacked
embeddings. Conventions:

* ``dist``/``exp``/``log`` are the exact geodesic tools.
* ``retract`` is the (possibly cheaper) update rule used by optimizers and
  defaults to ``exp``.
* ``egrad_to_rgrad`` converts an ambient-coordinate gradient into the
  Riemannian gradient, an element of the tangent space.
* ``model_*`` methods define the metric fed to losses and evaluation.
  For every manifold except the Stein-metric SPD variant this is the
  squared geodesic distance.
* ``weighted_model_sqdist_egrad(X, C)`` returns, for each point i, the
  ambient gradient of  sum_j C[i, j] * model_sqdist(x_i, x_j)  with respect
  to x_i. It is the single hot path behind all loss gradients.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError


class Manifold:
    #: shape of one point, e.g. (n,) or (n, k)
    point_shape: tuple
    #: intrinsic dimension of the manifold
    dim: int
    #: parseable textual form, e.g. "sphere:3"
    spec_string: str

    # -- canonical anchor ---------------------------------------------------

    def base_point(self) -> np.ndarray:
        raise NotImplementedError

    def tangent_basis_at_base(self) -> np.ndarray:
        """Orthonormal basis (under the metric at the base) of the tangent
        space at the base point, shaped (dim, *point_shape)."""
        raise NotImplementedError

    # -- metric -------------------------------------------------------------

    def inner(self, x, u, v) -> np.ndarray:
        raise NotImplementedError

    def norm(self, x, u) -> np.ndarray:
        return np.sqrt(np.maximum(self.inner(x, u, u), 0.0))

    def dist(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def pairwise_dist(self, X) -> np.ndarray:
        """Dense (m, m) geodesic distance matrix of a point stack."""
        raise NotImplementedError

    # -- maps ---------------------------------------------------------------

    def proj(self, x, u) -> np.ndarray:
        raise NotImplementedError

    def egrad_to_rgrad(self, x, g) -> np.ndarray:
        return self.proj(x, g)

    def exp(self, x, v) -> np.ndarray:
        raise NotImplementedError

    def log(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def retract(self, x, v) -> np.ndarray:
        return self.exp(x, v)

    def transport(self, x, y, u) -> np.ndarray:
        """Projection-based vector transport from T_x to T_y."""
        return self.proj(y, u)

    def log_defined(self, x, y) -> np.ndarray:
        """Boolean mask: y outside the cut locus of x (elementwise)."""
        return np.ones(np.broadcast_shapes(
            np.shape(x)[: -len(self.point_shape)],
            np.shape(y)[: -len(self.point_shape)],
        ), dtype=bool)

    # -- model metric (losses / evaluation) ----------------------------------

    def model_pairwise_sqdist(self, X) -> np.ndarray:
        return self.pairwise_dist(X) ** 2

    def model_pairwise_dist(self, X) -> np.ndarray:
        return self.pairwise_dist(X)

    def weighted_model_sqdist_egrad(self, X, C) -> np.ndarray:
        """Ambient gradients G[i] = d/dx_i sum_j C[i,j] msq(x_i, x_j).

        C must have a zero diagonal; entries pair row point i with column
        point j.
        """
        raise NotImplementedError

    # -- validity -----------------------------------------------------------

    def check_point(self, x, atol: float = 1e-6) -> None:
        err = self.point_error(x)
        if err > atol:
            raise InvalidInputError(
                f"point off {self.spec_string} by {err:.3e} (tol {atol:g})"
            )

    def point_error(self, x) -> float:
        """Maximal constraint violation over the (possibly stacked) input."""
        raise NotImplementedError

    def fix_point(self, x) -> np.ndarray:
        """Cheap re-normalization repair used after optimizer steps."""
        return x

    def tangent_error(self, x, u) -> float:
        raise NotImplementedError

    def check_tangent(self, x, u, atol: float = 1e-6) -> None:
        err = self.tangent_error(x, u)
        if err > atol:
            raise InvalidInputError(
                f"tangent off T_x {self.spec_string} by {err:.3e} (tol {atol:g})"
            )

    # -- misc ---------------------------------------------------------------

    @property
    def flat_len(self) -> int:
        return int(np.prod(self.point_shape))

    def __repr__(self):
        return f"{type(self).__name__}({self.spec_string!r})"

    def __eq__(self, other):
        return isinstance(other, Manifold) and other.spec_string == self.spec_string

    def __hash__(self):
        return hash(self.spec_string)


def sqdist_coeff_to_dist_coeff(D: np.ndarray, C_d: np.ndarray) -> np.ndarray:
    """Convert dL/dd coefficients into dL/d(d^2) ones: divide by 2d.

    Pairs at (numerically) zero distance get a zero coefficient: the
    distance function is not differentiable there and the subgradient 0
    is the declared choice.
    """
    safe = np.where(D > 1e-12, D, 1.0)
    out = C_d / (2.0 * safe)
    return np.where(D > 1e-12, out, 0.0)
