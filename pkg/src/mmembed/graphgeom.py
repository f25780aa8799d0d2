"""Discrete geometric diagnostics of graphs.

* Gromov delta via the 4-point condition: for a quadruple, sort the three
  pairings of opposite pairwise-distance sums S1 >= S2 >= S3 and take
  (S1 - S2) / 2. Exhaustive below ``EXHAUSTIVE_LIMIT`` nodes, sampled above.
* Ollivier-Ricci curvature of an edge: 1 - W(m_x, m_y) / d(x, y) for lazy
  random-walk measures (mass alpha on the node, the rest uniform on its
  neighbors); the alpha -> 1 limit is estimated at a large alpha by
  dividing out (1 - alpha). The Wasserstein distance is an exact linear
  program over the tiny coupling polytope, no entropic approximation.
* Graph sectional curvature as the deviation from the parallelogram law,
  averaged over all reference nodes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import InvalidInputError
from .graphio import DistanceMatrix, Graph, _bfs_row, _dijkstra_row

EXHAUSTIVE_LIMIT = 60


# ---------------------------------------------------------------------------
# delta-hyperbolicity


def _quadruple_deltas(d: np.ndarray, quads: np.ndarray) -> np.ndarray:
    i, j, k, l = quads.T
    s = np.stack(
        [
            d[i, j] + d[k, l],
            d[i, k] + d[j, l],
            d[i, l] + d[j, k],
        ],
        axis=-1,
    )
    s.sort(axis=-1)
    return 0.5 * (s[:, 2] - s[:, 1])


def delta_hyperbolicity(
    d, n_quadruples: int = 100_000, seed: int = 0, exhaustive: bool | None = None
):
    """Sampled (or exhaustive) 4-point-condition deltas.

    Returns (samples, max_delta). ``exhaustive`` defaults to m <= 60.
    """
    values = d.values * d.scale if isinstance(d, DistanceMatrix) else np.asarray(d, float)
    m = values.shape[0]
    if m < 4:
        raise InvalidInputError("delta-hyperbolicity needs at least 4 nodes")
    if exhaustive is None:
        exhaustive = m <= EXHAUSTIVE_LIMIT
    if exhaustive:
        quads = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(m), 4)),
            dtype=np.int64,
        ).reshape(-1, 4)
    else:
        rng = np.random.default_rng(seed)
        quads = np.empty((n_quadruples, 4), dtype=np.int64)
        filled = 0
        while filled < n_quadruples:
            cand = rng.integers(0, m, size=(2 * (n_quadruples - filled), 4))
            ok = (
                (cand[:, 0] < cand[:, 1])
                & (cand[:, 1] < cand[:, 2])
                & (cand[:, 2] < cand[:, 3])
            )
            good = cand[ok][: n_quadruples - filled]
            quads[filled : filled + len(good)] = good
            filled += len(good)
    deltas = _quadruple_deltas(values, quads)
    return deltas, float(deltas.max())


# ---------------------------------------------------------------------------
# Ollivier-Ricci


def _walk_measure(g: Graph, node: int, alpha: float):
    support = [node] + list(g.adjacency[node])
    mass = np.empty(len(support))
    mass[0] = alpha
    deg = g.degree(node)
    mass[1:] = (1.0 - alpha) / deg
    return support, mass


def wasserstein_exact(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Exact optimal-transport cost between two small discrete measures."""
    na, nb = cost.shape
    c = cost.reshape(-1)
    A_eq = np.zeros((na + nb, na * nb))
    for i in range(na):
        A_eq[i, i * nb : (i + 1) * nb] = 1.0
    for j in range(nb):
        A_eq[na + j, j::nb] = 1.0
    res = linprog(
        c,
        A_eq=A_eq,
        b_eq=np.concatenate([a, b]),
        bounds=(0, None),
        method="highs",
    )
    if not res.success:
        raise InvalidInputError(f"transport LP failed: {res.message}")
    return float(res.fun)


def ollivier_ricci_edge(g: Graph, edge, alpha: float = 0.999):
    """(first-order curvature, alpha->1 estimate) of one edge."""
    u, v = edge
    if not 0.0 <= alpha < 1.0:
        raise InvalidInputError("alpha must lie in [0, 1)")
    if v not in g.adjacency[u]:
        raise InvalidInputError(f"({u}, {v}) is not an edge")
    sup_u, mass_u = _walk_measure(g, u, alpha)
    sup_v, mass_v = _walk_measure(g, v, alpha)
    rows = []
    for s in sup_u:
        row = _bfs_row(g, s) if g.unweighted else _dijkstra_row(g, s)
        rows.append(row)
    cost = np.array([[float(rows[i][t]) for t in sup_v] for i in range(len(sup_u))])
    w = wasserstein_exact(cost, mass_u, mass_v)
    d_uv = g.edge_weight(u, v)
    ric1 = 1.0 - w / d_uv
    return ric1, ric1 / (1.0 - alpha)


def ollivier_ricci_graph(g: Graph, alpha: float = 0.999):
    """Curvature of every edge plus per-node means of incident edges.

    Returns (edge list [(u, v, ric2_estimate)], node array of means).
    """
    edge_vals = []
    node_acc = np.zeros(g.m)
    node_cnt = np.zeros(g.m)
    for u, v in g.edges():
        _, ric2 = ollivier_ricci_edge(g, (u, v), alpha)
        edge_vals.append((u, v, ric2))
        node_acc[u] += ric2
        node_acc[v] += ric2
        node_cnt[u] += 1
        node_cnt[v] += 1
    nodes = node_acc / np.maximum(node_cnt, 1)
    return edge_vals, nodes


# ---------------------------------------------------------------------------
# graph sectional curvature


def graph_sectional(d, g: Graph, m_node: int, y: int, z: int) -> float:
    """Parallelogram-law deviation at m_node toward neighbors y and z,
    averaged over all other nodes."""
    values = d.values * d.scale if isinstance(d, DistanceMatrix) else np.asarray(d, float)
    if y == z:
        raise InvalidInputError("directions y and z must differ")
    if y not in g.adjacency[m_node] or z not in g.adjacency[m_node]:
        raise InvalidInputError("y and z must be neighbors of the center node")
    n = values.shape[0]
    x = np.arange(n) != m_node
    k = (
        values[x, m_node] ** 2
        + values[y, z] ** 2 / 4.0
        - (values[x, y] ** 2 + values[x, z] ** 2) / 2.0
    )
    return float(np.mean(k / (2.0 * values[x, m_node])))


def sectional_samples(g: Graph, d, count: int, rng=None, seed: int = 0) -> np.ndarray:
    """Sampled k(m; y, z) over random centers and neighbor pairs."""
    if rng is None:
        rng = np.random.default_rng(seed)
    eligible = [u for u in range(g.m) if g.degree(u) >= 2]
    if not eligible:
        return np.array([])
    out = np.empty(count)
    for t in range(count):
        m_node = eligible[rng.integers(len(eligible))]
        y, z = rng.choice(g.adjacency[m_node], size=2, replace=False)
        out[t] = graph_sectional(d, g, m_node, int(y), int(z))
    return out


def sectional_all_triples(g: Graph, d) -> np.ndarray:
    """k(m; y, z) for every center and unordered neighbor pair (small graphs)."""
    vals = []
    for m_node in range(g.m):
        for y, z in itertools.combinations(g.adjacency[m_node], 2):
            vals.append(graph_sectional(d, g, m_node, y, z))
    return np.asarray(vals)


@dataclass
class CurvatureReport:
    delta_samples: np.ndarray
    delta_max: float
    ricci_edges: list
    ricci_nodes: np.ndarray
    sectional_samples: np.ndarray


def analyze_graph(
    g: Graph,
    d,
    n_quadruples: int = 100_000,
    n_sectional: int = 1000,
    alpha: float = 0.999,
    seed: int = 0,
) -> CurvatureReport:
    deltas, dmax = delta_hyperbolicity(d, n_quadruples=n_quadruples, seed=seed)
    edges, nodes = ollivier_ricci_graph(g, alpha)
    if sum(1 for u in range(g.m) for _ in itertools.combinations(g.adjacency[u], 2)) <= n_sectional:
        sect = sectional_all_triples(g, d)
    else:
        sect = sectional_samples(g, d, n_sectional, seed=seed)
    return CurvatureReport(deltas, dmax, edges, np.asarray(nodes), sect)
