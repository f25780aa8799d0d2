"""Graph ingestion, all-pairs shortest paths, max-scaling, hop layers.

Distance matrices are float64 in memory and serialized as a dense
little-endian float32 cache:

    magic "MMDM" | version u32 | m u64 | scale f64 | m*m f32 row-major

A JSON sidecar written by the CLI records m, diameter, scale, and how many
nodes were dropped when only the largest component of a disconnected input
is kept.
"""

from __future__ import annotations

import heapq
import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, UnsupportedError

log = logging.getLogger(__name__)

CACHE_MAGIC = b"MMDM"
CACHE_VERSION = 1


@dataclass
class Graph:
    """Undirected, connected, self-loop-free graph with 0..m-1 node labels."""

    adjacency: list
    weights: dict | None = None
    dropped_nodes: int = 0

    @property
    def m(self) -> int:
        return len(self.adjacency)

    @property
    def unweighted(self) -> bool:
        return self.weights is None

    def edges(self):
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    def num_edges(self) -> int:
        return sum(len(n) for n in self.adjacency) // 2

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def edge_weight(self, u: int, v: int) -> float:
        if self.weights is None:
            return 1.0
        return self.weights[(u, v) if u < v else (v, u)]


@dataclass
class DistanceMatrix:
    """Symmetric nonnegative distances plus the max-scaling divisor."""

    values: np.ndarray
    scale: float = 1.0
    unweighted: bool = True

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def diameter(self) -> float:
        return float(self.values.max() * self.scale)


def _components(adjacency) -> list:
    m = len(adjacency)
    seen = np.zeros(m, dtype=bool)
    comps = []
    for s in range(m):
        if seen[s]:
            continue
        stack = [s]
        seen[s] = True
        comp = []
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        comps.append(comp)
    return comps


def build_graph(edges, weights=None) -> Graph:
    """Assemble a Graph from (u, v) int pairs, keeping the largest component."""
    if not edges:
        raise InvalidInputError("graph has no edges")
    m = max(max(u, v) for u, v in edges) + 1
    adjacency = [set() for _ in range(m)]
    for u, v in edges:
        adjacency[u].add(v)
        adjacency[v].add(u)
    comps = _components(adjacency)
    dropped = 0
    if len(comps) > 1:
        comps.sort(key=len, reverse=True)
        keep = sorted(comps[0])
        dropped = m - len(keep)
        log.warning(
            "input graph is disconnected: keeping largest component "
            "(%d nodes, dropping %d)",
            len(keep),
            dropped,
        )
        relabel = {old: new for new, old in enumerate(keep)}
        new_adj = [
            sorted(relabel[v] for v in adjacency[old] if v in relabel)
            for old in keep
        ]
        new_weights = None
        if weights:
            new_weights = {}
            for (u, v), w in weights.items():
                if u in relabel and v in relabel:
                    a, b = relabel[u], relabel[v]
                    new_weights[(min(a, b), max(a, b))] = w
        return Graph([list(n) for n in new_adj], new_weights, dropped)
    return Graph([sorted(n) for n in adjacency], weights, 0)


def load_edgelist(path) -> Graph:
    """Read whitespace-separated "u v [w]" lines; '#'/'%' start comments.

    Nodes are relabeled to 0..m-1 in order of first appearance, duplicate
    edges are merged, self-loops dropped, and the largest connected
    component is extracted (with a warning) if the input is disconnected.
    """
    path = Path(path)
    ids: dict = {}
    edges = []
    weights = {}
    weighted = False

    def node_id(tok: str) -> int:
        if tok not in ids:
            ids[tok] = len(ids)
        return ids[tok]

    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#")[0].split("%")[0].strip()
            if not line:
                continue
            toks = line.split()
            if len(toks) not in (2, 3):
                raise InvalidInputError(
                    f"{path}:{lineno}: expected 'u v [w]', got {line!r}"
                )
            u, v = node_id(toks[0]), node_id(toks[1])
            if len(toks) == 3:
                w = float(toks[2])
                if w <= 0:
                    raise InvalidInputError(
                        f"{path}:{lineno}: nonpositive edge weight {w}"
                    )
                weighted = True
            else:
                w = 1.0
            if u == v:
                log.warning("%s:%d: dropping self-loop on %s", path, lineno, toks[0])
                continue
            key = (min(u, v), max(u, v))
            if key in weights:
                continue  # duplicate edge
            weights[key] = w
            edges.append(key)
    if not edges:
        raise InvalidInputError(f"{path}: no edges found")
    return build_graph(edges, weights if weighted else None)


def _bfs_row(g: Graph, source: int) -> np.ndarray:
    dist = np.full(g.m, -1, dtype=np.int64)
    dist[source] = 0
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in g.adjacency[u]:
                if dist[v] < 0:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    return dist


def _dijkstra_row(g: Graph, source: int) -> np.ndarray:
    dist = np.full(g.m, np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v in g.adjacency[u]:
            nd = d + g.edge_weight(u, v)
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _apsp_dense_unweighted(g: Graph) -> np.ndarray:
    """Hop distances by frontier expansion with matrix products.

    Much faster than per-source BFS for dense graphs of a few thousand
    nodes; exact integer hop counts either way.
    """
    m = g.m
    adj = np.zeros((m, m), dtype=bool)
    for u, nbrs in enumerate(g.adjacency):
        adj[u, nbrs] = True
    dist = np.zeros((m, m), dtype=np.int64)
    dist[adj] = 1
    reached = adj | np.eye(m, dtype=bool)
    frontier = adj
    d = 1
    while not reached.all():
        grown = (frontier.astype(np.float32) @ adj.astype(np.float32)) > 0
        frontier = grown & ~reached
        if not frontier.any():
            raise InvalidInputError("graph is disconnected: infinite distance")
        d += 1
        dist[frontier] = d
        reached |= frontier
    return dist.astype(float)


def apsp(g: Graph) -> DistanceMatrix:
    """All-pairs shortest paths: BFS per source when unweighted, Dijkstra
    otherwise. Raises on disconnected graphs (infinite distances)."""
    m = g.m
    if g.unweighted and m >= 128:
        return DistanceMatrix(_apsp_dense_unweighted(g), scale=1.0, unweighted=True)
    out = np.zeros((m, m))
    for s in range(m):
        row = _bfs_row(g, s) if g.unweighted else _dijkstra_row(g, s)
        if np.any(row < 0) or not np.all(np.isfinite(row)):
            raise InvalidInputError("graph is disconnected: infinite distance")
        out[s] = row
    out = 0.5 * (out + out.T)  # Dijkstra float noise; exact for BFS
    return DistanceMatrix(out, scale=1.0, unweighted=g.unweighted)


def max_scale(d: DistanceMatrix) -> DistanceMatrix:
    """Divide by the maximum entry; records the divisor; idempotent."""
    if not np.all(np.isfinite(d.values)):
        raise InvalidInputError("distance matrix has non-finite entries")
    top = float(d.values.max())
    if top <= 0.0:
        raise InvalidInputError("all-zero distance matrix cannot be scaled")
    return DistanceMatrix(d.values / top, scale=d.scale * top, unweighted=d.unweighted)


def hop_layers(g: Graph):
    """Per-source lists L[u][k-1] of nodes exactly k hops from u."""
    if not g.unweighted:
        raise UnsupportedError("hop layers are defined for unweighted graphs only")
    layers = []
    for s in range(g.m):
        row = _bfs_row(g, s)
        if np.any(row < 0):
            raise InvalidInputError("graph is disconnected")
        ecc = int(row.max())
        per_k = [[] for _ in range(ecc)]
        for v in range(g.m):
            if v != s:
                per_k[int(row[v]) - 1].append(v)
        layers.append(per_k)
    return layers


def hops_from_cache(d: DistanceMatrix) -> np.ndarray:
    """Integer hop matrix recovered from a scaled unweighted-graph cache."""
    if not d.unweighted:
        raise UnsupportedError("hop counts require an unweighted graph")
    hops = d.values * d.scale
    out = np.rint(hops).astype(np.int64)
    if np.abs(hops - out).max() > 1e-6:
        raise InvalidInputError("cache does not hold integer hop distances")
    return out


def adjacency_from_hops(hops: np.ndarray) -> Graph:
    """Rebuild the unweighted graph whose APSP produced the hop matrix."""
    adjacency = [sorted(np.nonzero(hops[u] == 1)[0].tolist()) for u in range(hops.shape[0])]
    return Graph(adjacency, None, 0)


def save_cache(path, d: DistanceMatrix) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<I", CACHE_VERSION))
        fh.write(struct.pack("<Q", d.m))
        fh.write(struct.pack("<d", d.scale))
        fh.write(d.values.astype("<f4").tobytes(order="C"))


def load_cache(path) -> DistanceMatrix:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CACHE_MAGIC:
            raise InvalidInputError(f"{path}: not a distance cache (magic {magic!r})")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != CACHE_VERSION:
            raise InvalidInputError(f"{path}: unsupported cache version {version}")
        (m,) = struct.unpack("<Q", fh.read(8))
        (scale,) = struct.unpack("<d", fh.read(8))
        data = np.frombuffer(fh.read(4 * m * m), dtype="<f4").astype(np.float64)
        if data.size != m * m:
            raise InvalidInputError(f"{path}: truncated cache")
    values = data.reshape(m, m)
    hops = values * scale
    unweighted = bool(np.abs(hops - np.rint(hops)).max() <= 1e-6)
    return DistanceMatrix(values, scale=scale, unweighted=unweighted)


def load_dissimilarity(path) -> DistanceMatrix:
    """Square dissimilarity matrix in whitespace-separated text form.

    Used for datasets that carry a metric but no graph connectivity;
    the result bypasses APSP and is flagged as weighted (no hop layers).
    """
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#")[0].strip()
            if line:
                rows.append([float(t) for t in line.split()])
    if not rows:
        raise InvalidInputError(f"{path}: empty matrix file")
    mat = np.asarray(rows, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidInputError(f"{path}: expected a square matrix, got {mat.shape}")
    if np.abs(mat - mat.T).max() > 1e-8 * max(1.0, np.abs(mat).max()):
        mat = 0.5 * (mat + mat.T)
        log.warning("%s: symmetrized a slightly asymmetric matrix", path)
    np.fill_diagonal(mat, 0.0)
    if mat.min() < 0:
        raise InvalidInputError(f"{path}: negative dissimilarities")
    return DistanceMatrix(mat, scale=1.0, unweighted=False)
