"""Loss functions over pairwise model distances.

Every loss reduces to the same pattern: a value plus a symmetric matrix of
partial derivatives with respect to the (scaled) squared model distances
of the batch. Those coefficients are pushed through the manifold's
weighted gradient kernel to yield ambient point gradients, and contracted
against the squared distances themselves for the scale gradient
(d t / d sigma = 2 t when t = exp(2 sigma) * msq).

Batches are node subsets; a loss sees all pairs within the subset
(neighborhood terms are restricted to within-batch edges and
neighborhoods, SNE distributions are normalized over the batch's node
set).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingSet
from .errors import InvalidInputError
from .graphio import DistanceMatrix, Graph

#: distances below this are treated as a coincident pair: the distance
#: function is not differentiable there and the subgradient 0 is used
_DIST_EPS = 1e-12
#: |ratio - 1| window in which the distortion kink takes subgradient 0
_KINK_EPS = 1e-12


@dataclass
class LossResult:
    value: float
    point_egrads: np.ndarray
    scale_grad: float


def _log_softmax(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Row-wise log softmax over masked entries (False rows allowed)."""
    neg = np.where(mask, scores, -np.inf)
    top = np.max(neg, axis=1, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    z = np.sum(np.exp(neg - top), axis=1, keepdims=True)
    return neg - top - np.log(np.maximum(z, 1e-300))


def _finish(emb: EmbeddingSet, batch, value, coeff_t, t) -> LossResult:
    """Assemble gradients from d(loss)/d(scaled squared distances)."""
    s2 = emb.scale**2
    grads = emb.manifold.weighted_model_sqdist_egrad(
        emb.points[batch], coeff_t * s2
    )
    scale_grad = float(np.sum(coeff_t * t))
    return LossResult(float(value), grads, scale_grad)


def _batch_indices(m: int, nodes) -> np.ndarray:
    if nodes is None:
        return np.arange(m)
    idx = np.asarray(nodes, dtype=np.int64)
    if idx.ndim != 1 or len(np.unique(idx)) != len(idx):
        raise InvalidInputError("batch must be a 1-D array of distinct node ids")
    return idx


def _coeff_from_dist(D: np.ndarray, dcoeff: np.ndarray) -> np.ndarray:
    """Chain rule d/dd -> d/d(d^2), guarding coincident pairs."""
    safe = np.where(D > _DIST_EPS, D, 1.0)
    return np.where(D > _DIST_EPS, dcoeff / (2.0 * safe), 0.0)


def loss_stress(emb: EmbeddingSet, d: DistanceMatrix, nodes=None) -> LossResult:
    """Sum of squared differences between graph and model distances."""
    batch = _batch_indices(emb.m, nodes)
    t = emb.scale**2 * emb.manifold.model_pairwise_sqdist(emb.points[batch])
    dt = np.sqrt(np.maximum(t, 0.0))
    dg = d.values[np.ix_(batch, batch)]
    diff = dg - dt
    iu = np.triu_indices(len(batch), k=1)
    value = np.sum(diff[iu] ** 2)
    coeff = _coeff_from_dist(dt, -2.0 * diff)
    np.fill_diagonal(coeff, 0.0)
    return _finish(emb, batch, value, coeff, t)


def loss_distortion(emb: EmbeddingSet, d: DistanceMatrix, nodes=None) -> LossResult:
    """Sum over pairs of |model^2 / graph^2 - 1|."""
    batch = _batch_indices(emb.m, nodes)
    dg = d.values[np.ix_(batch, batch)]
    off = ~np.eye(len(batch), dtype=bool)
    if np.any(dg[off] <= 0.0):
        raise InvalidInputError("distortion loss needs positive graph distances")
    t = emb.scale**2 * emb.manifold.model_pairwise_sqdist(emb.points[batch])
    dg2 = np.where(off, dg**2, 1.0)
    ratio = t / dg2
    dev = ratio - 1.0
    iu = np.triu_indices(len(batch), k=1)
    value = np.sum(np.abs(dev[iu]))
    coeff = np.where(np.abs(dev) > _KINK_EPS, np.sign(dev) / dg2, 0.0)
    coeff[~off] = 0.0
    return _finish(emb, batch, value, coeff, t)


def loss_neighborhood(emb: EmbeddingSet, g: Graph, nodes=None) -> LossResult:
    """Negative log softmax placement of each edge among its source's
    neighbors (within the batch)."""
    if not g.unweighted:
        raise InvalidInputError("neighborhood loss is defined for unweighted graphs")
    if any(len(nb) == 0 for nb in g.adjacency):
        raise InvalidInputError("graph has an isolated node")
    batch = _batch_indices(emb.m, nodes)
    b = len(batch)
    pos = {int(n): i for i, n in enumerate(batch)}
    nbr = np.zeros((b, b), dtype=bool)
    for bi, u in enumerate(batch):
        for v in g.adjacency[int(u)]:
            if v in pos:
                nbr[bi, pos[v]] = True
    t = emb.scale**2 * emb.manifold.model_pairwise_sqdist(emb.points[batch])
    dt = np.sqrt(np.maximum(t, 0.0))
    logp = _log_softmax(-dt, nbr)
    value = -np.sum(logp[nbr])
    # per ordered source row i: d/d dt(i,k) = 1[k neighbor] - deg_b(i) p(i,k)
    p = np.where(nbr, np.exp(logp), 0.0)
    deg_b = nbr.sum(axis=1, keepdims=True)
    dcoeff_ord = np.where(nbr, 1.0 - deg_b * p, 0.0)
    dcoeff = dcoeff_ord + dcoeff_ord.T
    coeff = _coeff_from_dist(dt, dcoeff)
    np.fill_diagonal(coeff, 0.0)
    return _finish(emb, batch, value, coeff, t)


def rsne_conditionals(emb: EmbeddingSet, d: DistanceMatrix, temperature: float, nodes=None):
    """Row-conditional distributions (p from graph distances, q from the
    model metric), normalized over the batch's node set."""
    batch = _batch_indices(emb.m, nodes)
    b = len(batch)
    off = ~np.eye(b, dtype=bool)
    dg = d.values[np.ix_(batch, batch)]
    t = emb.scale**2 * emb.manifold.model_pairwise_sqdist(emb.points[batch])
    logp = _log_softmax(-(dg**2) / temperature, off)
    logq = _log_softmax(-t, off)
    p = np.where(off, np.exp(logp), 0.0)
    q = np.where(off, np.exp(logq), 0.0)
    return p, q


def loss_rsne(
    emb: EmbeddingSet, d: DistanceMatrix, temperature: float, nodes=None
) -> LossResult:
    """Sum of KL divergences between graph- and model-induced conditional
    neighbor distributions, normalized over the batch's node set."""
    if temperature <= 0:
        raise InvalidInputError("temperature must be positive")
    batch = _batch_indices(emb.m, nodes)
    b = len(batch)
    off = ~np.eye(b, dtype=bool)
    if b < 2:
        z = np.zeros_like(emb.points[batch])
        return LossResult(0.0, z, 0.0)
    dg = d.values[np.ix_(batch, batch)]
    t = emb.scale**2 * emb.manifold.model_pairwise_sqdist(emb.points[batch])
    logp = _log_softmax(-(dg**2) / temperature, off)
    logq = _log_softmax(-t, off)
    p = np.where(off, np.exp(logp), 0.0)
    q = np.where(off, np.exp(logq), 0.0)
    value = np.sum(p[off] * (logp[off] - logq[off]))
    coeff_ord = p - q
    coeff = coeff_ord + coeff_ord.T
    np.fill_diagonal(coeff, 0.0)
    return _finish(emb, batch, value, coeff, t)


def make_loss(name: str, graph: Graph | None, d: DistanceMatrix | None):
    """Bind a loss name ("stress", "rsne:0.1", ...) to its data sources."""
    base, _, arg = name.partition(":")
    base = base.strip().lower()
    if base == "neighborhood":
        if graph is None:
            raise InvalidInputError("neighborhood loss needs graph adjacency")
        return lambda emb, nodes=None: loss_neighborhood(emb, graph, nodes)
    if base == "stress":
        return lambda emb, nodes=None: loss_stress(emb, d, nodes)
    if base == "distortion":
        return lambda emb, nodes=None: loss_distortion(emb, d, nodes)
    if base == "rsne":
        temp = float(arg) if arg else 1.0
        return lambda emb, nodes=None: loss_rsne(emb, d, temp, nodes)
    raise InvalidInputError(f"unknown loss {name!r}")
