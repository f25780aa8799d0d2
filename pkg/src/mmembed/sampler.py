"""Random points on manifolds and threshold nearest-neighbor graphs.

Two sampling schemes:

* ``sample_uniform`` draws from the invariant (Haar-type) measure of the
  compact manifolds -- normalized Gaussians on the sphere, orthonormalized
  Gaussian frames on the Grassmannian, polar factors with a determinant
  fix on SO(n).
* ``sample_exp_ball`` draws tangent vectors uniformly from a metric ball
  at a base point and pushes them through the exponential map. Radii are
  exact by construction: the geodesic distance to the base equals the
  tangent norm.

Streams are counter-based (Philox) keyed by the seed, so a (seed, count)
pair always yields the same cloud.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .manifolds import Grassmann, Manifold, SpecialOrthogonal, Sphere

_COMPACT = (Sphere, Grassmann, SpecialOrthogonal)


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


@dataclass
class SampleCloud:
    manifold: Manifold
    points: np.ndarray
    method: str

    @property
    def count(self) -> int:
        return self.points.shape[0]


def tangent_basis(man: Manifold, x) -> np.ndarray:
    """Orthonormal basis of T_x under the metric at x, for arbitrary x.

    Projects the ambient coordinate directions and Gram-Schmidts them with
    the Riemannian inner product; at the canonical base point the
    closed-form basis is used directly.
    """
    x = np.asarray(x, float)
    if x.shape == tuple(man.point_shape) and np.allclose(x, man.base_point(), atol=1e-12):
        return man.tangent_basis_at_base()
    basis = []
    for i in range(man.flat_len):
        amb = np.zeros(man.flat_len)
        amb[i] = 1.0
        v = man.proj(x, amb.reshape(man.point_shape))
        for b in basis:
            v = v - man.inner(x, b, v) * b
        n = man.norm(x, v)
        if n > 1e-9:
            basis.append(v / n)
        if len(basis) == man.dim:
            break
    if len(basis) != man.dim:
        raise InvalidInputError("could not build a tangent basis at this point")
    return np.stack(basis)


def tangent_ball(man: Manifold, rng, radius: float, count: int, base=None) -> np.ndarray:
    """Tangent vectors uniform in the metric ball of the given radius."""
    basis = man.tangent_basis_at_base() if base is None else tangent_basis(man, base)
    w = rng.standard_normal((count, man.dim))
    w /= np.maximum(np.linalg.norm(w, axis=-1, keepdims=True), 1e-300)
    r = radius * rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / man.dim)
    return np.tensordot(w * r, basis, axes=(1, 0))


def sample_exp_ball(
    man: Manifold, radius: float, count: int, seed: int, base=None
) -> SampleCloud:
    """Exp-map push-forward of a uniform tangent ball at the base point."""
    if radius <= 0:
        raise InvalidInputError("radius must be positive")
    rng = _rng(seed)
    base_pt = man.base_point() if base is None else np.asarray(base, float)
    v = tangent_ball(man, rng, radius, count, base=None if base is None else base_pt)
    pts = man.exp(np.broadcast_to(base_pt, (count,) + base_pt.shape), v)
    return SampleCloud(man, pts, f"exp_ball(r={radius:g})")


def sample_uniform(man: Manifold, count: int, seed: int) -> SampleCloud:
    """Invariant-measure samples on a compact manifold."""
    if not isinstance(man, _COMPACT):
        raise InvalidInputError(
            f"uniform sampling needs a compact manifold, got {man.spec_string}"
        )
    rng = _rng(seed)
    if isinstance(man, Sphere):
        g = rng.standard_normal((count, man.n + 1))
        pts = g / np.linalg.norm(g, axis=-1, keepdims=True)
    elif isinstance(man, Grassmann):
        g = rng.standard_normal((count, man.n, man.k))
        pts = man.fix_point(g)
    else:  # SO(n): polar factor of a Gaussian, reflected into det = +1
        g = rng.standard_normal((count, man.n, man.n))
        pts = man.fix_point(g)
    return SampleCloud(man, pts, "uniform_compact")


def threshold_graph(cloud: SampleCloud, tau: float):
    """Link samples at geodesic distance strictly below tau.

    Unlike graph ingestion, no component extraction happens here: isolated
    nodes are part of the degree statistics.
    """
    from .graphio import Graph

    if tau <= 0:
        raise InvalidInputError("threshold must be positive")
    d = cloud.manifold.pairwise_dist(cloud.points)
    adj = d < tau
    np.fill_diagonal(adj, False)
    return Graph([np.nonzero(row)[0].tolist() for row in adj])


@dataclass
class ThresholdSweep:
    thresholds: np.ndarray
    degree_q: np.ndarray  # (len, 3) columns q25, q50, q75
    curv_q: np.ndarray    # (len, 3), NaN rows when skipped
    largest_component: np.ndarray

    def rows(self):
        for i, t in enumerate(self.thresholds):
            yield (
                float(t),
                *(float(x) for x in self.degree_q[i]),
                *(float(x) for x in self.curv_q[i]),
                int(self.largest_component[i]),
            )


def _largest_component_nodes(adj_bool: np.ndarray):
    m = adj_bool.shape[0]
    seen = np.zeros(m, dtype=bool)
    best = []
    for s in range(m):
        if seen[s]:
            continue
        stack = [s]
        seen[s] = True
        comp = [s]
        while stack:
            u = stack.pop()
            for v in np.nonzero(adj_bool[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
                    comp.append(v)
        if len(comp) > len(best):
            best = comp
    return np.array(sorted(best))


def sweep(
    cloud: SampleCloud,
    thresholds,
    curvature_samples: int = 200,
    min_component: int = 100,
    seed: int = 0,
) -> ThresholdSweep:
    """Degree and discrete-curvature statistics across a threshold grid.

    Graph sectional curvatures are sampled on the largest component when
    it holds at least ``min_component`` nodes; smaller components leave a
    NaN marker row.
    """
    from . import graphgeom
    from .graphio import Graph, apsp

    thresholds = np.asarray(list(thresholds), float)
    if thresholds.size < 2:
        raise InvalidInputError("a sweep needs at least 2 thresholds")
    d = cloud.manifold.pairwise_dist(cloud.points)
    m = d.shape[0]
    deg_q = np.zeros((thresholds.size, 3))
    curv_q = np.full((thresholds.size, 3), np.nan)
    comp_sizes = np.zeros(thresholds.size, dtype=int)
    rng = _rng(seed)
    for i, tau in enumerate(thresholds):
        adj = d < tau
        np.fill_diagonal(adj, False)
        degrees = adj.sum(axis=1)
        deg_q[i] = np.percentile(degrees, [25, 50, 75])
        nodes = _largest_component_nodes(adj)
        comp_sizes[i] = len(nodes)
        if len(nodes) < min_component:
            continue
        sub = adj[np.ix_(nodes, nodes)]
        sub_graph = Graph([np.nonzero(r)[0].tolist() for r in sub])
        dist = apsp(sub_graph)
        samples = graphgeom.sectional_samples(
            sub_graph, dist, curvature_samples, rng=rng
        )
        if samples.size:
            curv_q[i] = np.percentile(samples, [25, 50, 75])
    return ThresholdSweep(thresholds, deg_q, curv_q, comp_sizes)
