"""Manifold registry and spec-string parsing.

Textual forms:

    euclidean:3   sphere:3    lorentz:3     spd:2    stein:2
    grassmann:2,4     so:3    product:(lorentz:3)x(sphere:3)
"""

from __future__ import annotations

from ..errors import InvalidInputError
from .base import Manifold
from .euclidean import Euclidean
from .grassmann import Grassmann
from .lorentz import Lorentz
from .product import Product
from .rotation import SpecialOrthogonal
from .spd import Spd, SteinSpd, stein_divergence, stein_gradient
from .sphere import Sphere

__all__ = [
    "Manifold",
    "Euclidean",
    "Sphere",
    "Lorentz",
    "Spd",
    "SteinSpd",
    "Grassmann",
    "SpecialOrthogonal",
    "Product",
    "parse_spec",
    "stein_divergence",
    "stein_gradient",
]


def _split_factors(body: str):
    """Split "(a)x(b)x(c)" into ["a", "b", "c"]."""
    parts = []
    depth = 0
    start = None
    for i, ch in enumerate(body):
        if ch == "(":
            if depth == 0:
                start = i + 1
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise InvalidInputError(f"unbalanced parentheses in {body!r}")
            if depth == 0:
                parts.append(body[start:i])
        elif depth == 0 and ch not in "x ":
            raise InvalidInputError(f"malformed product spec {body!r}")
    if depth != 0:
        raise InvalidInputError(f"unbalanced parentheses in {body!r}")
    if not parts:
        raise InvalidInputError(f"empty product spec {body!r}")
    return parts


def parse_spec(spec: str) -> Manifold:
    """Build a manifold from its textual form."""
    spec = spec.strip()
    if ":" not in spec:
        raise InvalidInputError(f"malformed manifold spec {spec!r}")
    kind, _, body = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "euclidean":
            return Euclidean(int(body))
        if kind == "sphere":
            return Sphere(int(body))
        if kind == "lorentz":
            return Lorentz(int(body))
        if kind == "spd":
            return Spd(int(body))
        if kind == "stein":
            return SteinSpd(int(body))
        if kind == "grassmann":
            k, n = (int(t) for t in body.split(","))
            return Grassmann(k, n)
        if kind == "so":
            return SpecialOrthogonal(int(body))
        if kind == "product":
            return Product([parse_spec(f) for f in _split_factors(body)])
    except (ValueError, TypeError) as exc:
        raise InvalidInputError(f"malformed manifold spec {spec!r}: {exc}") from exc
    raise InvalidInputError(f"unknown manifold kind {kind!r}")
