"""Reconstruction metrics and the angle-sum curvature profile.

Ranking metrics use strict "closer than" balls on both the graph and the
model side: a node w belongs to the model ball of (u, v) iff
d_M(u, w) < d_M(u, v) - 1e-12, so exact ties are excluded. The query node
u itself (distance 0) belongs to both balls, which keeps precision and
recall well defined for hop-1 targets. An empty model ball (every other
node tied with v, e.g. a fully collapsed embedding) scores F1 = 0.

The F1@k curve is averaged per hop layer; its AUC is the layer-size
weighted mean, which stays in [0, 1] regardless of the diameter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import EmbeddingSet
from .errors import DegenerateConfigurationError, InvalidInputError
from .graphio import DistanceMatrix, Graph, hops_from_cache

_TIE_TOL = 1e-12


@dataclass
class F1Curve:
    values: np.ndarray  # F1(k) for k = 1..diameter
    counts: np.ndarray  # c(k) pair counts per layer

    @property
    def diameter(self) -> int:
        return len(self.values)

    def save_csv(self, path) -> None:
        with open(Path(path), "w") as fh:
            fh.write("k,f1,count\n")
            for k, (f1, c) in enumerate(zip(self.values, self.counts), start=1):
                fh.write(f"{k},{f1:.10g},{int(c)}\n")


@dataclass
class MetricsReport:
    f1_curve: F1Curve | None
    auc: float | None
    mean_avg_precision: float | None
    avg_distortion: float
    angle_samples: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "f1_at_1": None if self.f1_curve is None else float(self.f1_curve.values[0]),
            "f1_curve": None if self.f1_curve is None else self.f1_curve.values.tolist(),
            "layer_counts": None if self.f1_curve is None else self.f1_curve.counts.tolist(),
            "auc": self.auc,
            "map": self.mean_avg_precision,
            "avg_distortion": self.avg_distortion,
        }

    def save_json(self, path) -> None:
        with open(Path(path), "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def f1_curve_from_matrices(hops: np.ndarray, model_d: np.ndarray) -> F1Curve:
    """F1@k of a model distance matrix against integer hop distances."""
    m = hops.shape[0]
    diam = int(hops.max())
    sums = np.zeros(diam)
    counts = np.zeros(diam, dtype=np.int64)
    for u in range(m):
        hop = hops[u]
        md = model_d[u]
        order_md = np.sort(md)
        bm = np.searchsorted(order_md, md - _TIE_TOL, side="left")
        hop_hist = np.bincount(hop, minlength=diam + 1)
        bg_cum = np.concatenate([[0], np.cumsum(hop_hist)])  # bg_cum[h] = #{hop < h}
        # true positives: 2-d dominance counting per hop level
        tp = np.zeros(m, dtype=np.int64)
        pool = np.empty(m)
        pool_n = 0
        for h in range(1, diam + 1):
            fresh = md[hop == h - 1]
            if fresh.size:
                pool[pool_n : pool_n + fresh.size] = fresh
                pool_n += fresh.size
                pool[:pool_n].sort()
            level = np.nonzero(hop == h)[0]
            if level.size:
                tp[level] = np.searchsorted(
                    pool[:pool_n], md[level] - _TIE_TOL, side="left"
                )
        for h in range(1, diam + 1):
            level = np.nonzero(hop == h)[0]
            if not level.size:
                continue
            bg = bg_cum[h]
            prec_den = bm[level]
            with np.errstate(invalid="ignore", divide="ignore"):
                p = np.where(prec_den > 0, tp[level] / np.maximum(prec_den, 1), 0.0)
                r = tp[level] / bg
                f1 = np.where(p + r > 0, 2 * p * r / np.maximum(p + r, 1e-300), 0.0)
            f1 = np.where(prec_den == 0, 0.0, f1)
            sums[h - 1] += f1.sum()
            counts[h - 1] += level.size
    values = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    return F1Curve(values, counts)


def f1_at_k(g_or_hops, emb: EmbeddingSet) -> F1Curve:
    """F1@k curve of an embedding against its unweighted source graph."""
    hops = _as_hops(g_or_hops)
    return f1_curve_from_matrices(hops, emb.model_dist())


def _as_hops(g_or_hops) -> np.ndarray:
    if isinstance(g_or_hops, Graph):
        from .graphio import apsp

        if not g_or_hops.unweighted:
            raise InvalidInputError("ranking metrics need an unweighted graph")
        return apsp(g_or_hops).values.astype(np.int64)
    if isinstance(g_or_hops, DistanceMatrix):
        return hops_from_cache(g_or_hops)
    return np.asarray(g_or_hops, dtype=np.int64)


def auc_f1(curve: F1Curve) -> float:
    """Layer-count weighted mean of the F1@k curve."""
    total = curve.counts.sum()
    if total == 0:
        raise InvalidInputError("empty F1 curve")
    return float(np.dot(curve.values, curve.counts) / total)


def mean_average_precision(g_or_hops, emb: EmbeddingSet) -> float:
    """Rank-based mAP: for each node and each of its neighbors, the
    precision of the model-ranked ball of the neighbor's size."""
    hops = _as_hops(g_or_hops)
    model_d = emb.model_dist()
    m = hops.shape[0]
    ap = np.zeros(m)
    for u in range(m):
        others = np.concatenate([np.arange(u), np.arange(u + 1, m)])
        order = others[np.argsort(model_d[u, others], kind="stable")]
        is_nbr = hops[u, order] == 1
        ranks = np.nonzero(is_nbr)[0] + 1
        hits = np.arange(1, len(ranks) + 1)
        ap[u] = np.mean(hits / ranks) if len(ranks) else 0.0
    return float(ap.mean())


def average_distortion(d: DistanceMatrix, emb: EmbeddingSet) -> float:
    """Mean relative deviation between the two metrics, both max-scaled."""
    model = emb.model_dist()
    top = model.max()
    if top <= 0:
        model = np.zeros_like(model)
    else:
        model = model / top
    ref = d.values / d.values.max()
    iu = np.triu_indices(d.m, k=1)
    if np.any(ref[iu] <= 0):
        raise InvalidInputError("distortion needs positive reference distances")
    return float(np.mean(np.abs(model[iu] - ref[iu]) / ref[iu]))


def angle_sum_profile(
    emb: EmbeddingSet, n_triples: int = 10_000, seed: int = 0
) -> np.ndarray:
    """Normalized geodesic-triangle angle sums (k - pi) / (2 pi).

    Triples are drawn uniformly from the embedding points; draws whose log
    maps are undefined (cut locus) or whose points coincide are replaced,
    giving up after 10x the requested count.
    """
    man = emb.manifold
    pts = emb.points
    m = emb.m
    if m < 3:
        raise InvalidInputError("angle profile needs at least 3 points")
    rng = np.random.default_rng(seed)
    out = np.empty(n_triples)
    filled = 0
    attempts = 0
    while filled < n_triples:
        want = n_triples - filled
        attempts += want
        if attempts > 10 * n_triples:
            raise DegenerateConfigurationError(
                "too many degenerate triples while sampling angle sums"
            )
        idx = rng.integers(0, m, size=(want, 3))
        distinct = (
            (idx[:, 0] != idx[:, 1]) & (idx[:, 0] != idx[:, 2]) & (idx[:, 1] != idx[:, 2])
        )
        idx = idx[distinct]
        if not idx.size:
            continue
        a, b, c = pts[idx[:, 0]], pts[idx[:, 1]], pts[idx[:, 2]]
        ok = (
            man.log_defined(a, b)
            & man.log_defined(b, a)
            & man.log_defined(a, c)
            & man.log_defined(c, a)
            & man.log_defined(b, c)
            & man.log_defined(c, b)
        )
        a, b, c = a[ok], b[ok], c[ok]
        if not a.shape[0]:
            continue
        ks = _angle_sum(man, a, b, c)
        good = np.isfinite(ks)
        ks = ks[good]
        take = min(len(ks), n_triples - filled)
        out[filled : filled + take] = ks[:take]
        filled += take
    return (out - np.pi) / (2.0 * np.pi)


def _angle_sum(man, a, b, c) -> np.ndarray:
    """Angle sums of geodesic triangles; NaN where a corner degenerates."""

    def corner(x, p, q):
        u = man.log(x, p)
        v = man.log(x, q)
        nu = man.norm(x, u)
        nv = man.norm(x, v)
        bad = (nu < 1e-12) | (nv < 1e-12)
        cosang = man.inner(x, u, v) / np.maximum(nu * nv, 1e-300)
        ang = np.arccos(np.clip(cosang, -1.0, 1.0))
        return np.where(bad, np.nan, ang)

    return corner(c, a, b) + corner(b, a, c) + corner(a, b, c)


def evaluate_embedding(
    d: DistanceMatrix,
    emb: EmbeddingSet,
    hops: np.ndarray | None = None,
    n_angle_triples: int = 0,
    seed: int = 0,
) -> MetricsReport:
    """Full metrics report; ranking metrics only when hop data exists."""
    if hops is None and d.unweighted:
        hops = hops_from_cache(d)
    if hops is not None:
        curve = f1_curve_from_matrices(hops, emb.model_dist())
        auc = auc_f1(curve)
        mean_ap = mean_average_precision(hops, emb)
    else:
        curve, auc, mean_ap = None, None, None
    ad = average_distortion(d, emb)
    angles = (
        angle_sum_profile(emb, n_angle_triples, seed=seed) if n_angle_triples else None
    )
    return MetricsReport(curve, auc, mean_ap, ad, angles)
