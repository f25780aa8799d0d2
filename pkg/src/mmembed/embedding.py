"""Embedding sets: a manifold, a stack of points, and a distance scale.

The scale multiplies model distances before they enter a loss and is
parametrized as s = exp(sigma) with sigma unconstrained, so positivity
never needs a projection. Checkpoints are binary:

    magic "MMEMB" | version u32 | spec len u32 | spec utf-8 |
    m u64 | scale f64 | m * flat_len f64 little-endian
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .manifolds import Manifold, parse_spec
from .sampler import tangent_ball

CKPT_MAGIC = b"MMEMB"
CKPT_VERSION = 1


@dataclass
class EmbeddingSet:
    manifold: Manifold
    points: np.ndarray
    log_scale: float = 0.0

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def scale(self) -> float:
        return float(np.exp(self.log_scale))

    def model_sqdist(self) -> np.ndarray:
        """Scaled model metric playing the role of a squared distance."""
        return self.scale**2 * self.manifold.model_pairwise_sqdist(self.points)

    def model_dist(self) -> np.ndarray:
        return self.scale * self.manifold.model_pairwise_dist(self.points)

    def geodesic_dist(self) -> np.ndarray:
        """Unscaled geodesic distances (angle profiling, diagnostics)."""
        return self.manifold.pairwise_dist(self.points)


def init_embedding(
    manifold: Manifold, m: int, seed: int, radius: float = 0.1
) -> EmbeddingSet:
    """Points exp-mapped from a uniform tangent ball at the base point.

    All initial pairwise distances are at most 2 * radius by the triangle
    inequality through the base point. Bit-identical per (manifold, m,
    seed, radius).
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    base = manifold.base_point()
    if radius == 0.0:
        pts = np.broadcast_to(base, (m,) + base.shape).copy()
    else:
        v = tangent_ball(manifold, rng, radius, m)
        pts = manifold.exp(np.broadcast_to(base, (m,) + base.shape), v)
    return EmbeddingSet(manifold, pts, 0.0)


def save_checkpoint(path, emb: EmbeddingSet) -> None:
    spec = emb.manifold.spec_string.encode()
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(struct.pack("<I", CKPT_VERSION))
        fh.write(struct.pack("<I", len(spec)))
        fh.write(spec)
        fh.write(struct.pack("<Q", emb.m))
        fh.write(struct.pack("<d", emb.scale))
        fh.write(emb.points.astype("<f8").tobytes(order="C"))


def load_checkpoint(path) -> EmbeddingSet:
    path = Path(path)
    with open(path, "rb") as fh:
        if fh.read(5) != CKPT_MAGIC:
            raise InvalidInputError(f"{path}: not an embedding checkpoint")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != CKPT_VERSION:
            raise InvalidInputError(f"{path}: unsupported checkpoint version {version}")
        (spec_len,) = struct.unpack("<I", fh.read(4))
        spec = fh.read(spec_len).decode()
        (m,) = struct.unpack("<Q", fh.read(8))
        (scale,) = struct.unpack("<d", fh.read(8))
        manifold = parse_spec(spec)
        flat = np.frombuffer(fh.read(8 * m * manifold.flat_len), dtype="<f8")
        if flat.size != m * manifold.flat_len:
            raise InvalidInputError(f"{path}: truncated checkpoint")
    points = flat.reshape((m,) + tuple(manifold.point_shape)).copy()
    if scale <= 0:
        raise InvalidInputError(f"{path}: non-positive scale {scale}")
    return EmbeddingSet(manifold, points, float(np.log(scale)))
