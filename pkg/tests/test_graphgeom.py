"""Curvature diagnostics: delta-hyperbolicity (exhaustive brute force),
Ollivier-Ricci (independent min-cost-flow oracle), graph sectional
curvature (direct formula)."""

import itertools

import numpy as np
import pytest

from mmembed import graphgeom as gg
from mmembed import graphio as gio
from mmembed.errors import InvalidInputError
from test_graphio import balanced_tree, cycle_graph, path_graph, star_graph


def complete_graph(n):
    return gio.build_graph([(i, j) for i in range(n) for j in range(i + 1, n)])


def delta_oracle(d):
    """All quadruples, straight from the 4-point condition."""
    m = d.shape[0]
    best = 0.0
    vals = []
    for i, j, k, l in itertools.combinations(range(m), 4):
        s = sorted([d[i, j] + d[k, l], d[i, k] + d[j, l], d[i, l] + d[j, k]])
        vals.append((s[2] - s[1]) / 2)
        best = max(best, vals[-1])
    return np.array(vals), best


def transport_oracle(cost, a, b, tol=1e-12):
    """Exact optimal transport by successive shortest augmenting paths.

    Independent of the LP solver used by the implementation.
    """
    na, nb = cost.shape
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    flow = np.zeros((na, nb))
    guard = 0
    while max(a) > tol:
        guard += 1
        assert guard <= 4 * na * nb, "oracle failed to terminate"
        INF = float("inf")
        dist_i = [0.0 if a[i] > tol else INF for i in range(na)]
        dist_j = [INF] * nb
        par_j = [-1] * nb
        par_i = [-1] * na
        for _ in range(na + nb):
            changed = False
            for i in range(na):
                if dist_i[i] == INF:
                    continue
                for j in range(nb):
                    nd = dist_i[i] + cost[i, j]
                    if nd < dist_j[j] - 1e-15:
                        dist_j[j] = nd
                        par_j[j] = i
                        changed = True
            for j in range(nb):
                if dist_j[j] == INF:
                    continue
                for i in range(na):
                    if flow[i, j] > tol:
                        nd = dist_j[j] - cost[i, j]
                        if nd < dist_i[i] - 1e-15:
                            dist_i[i] = nd
                            par_i[i] = j
                            changed = True
            if not changed:
                break
        sink = min((j for j in range(nb) if b[j] > tol), key=lambda j: dist_j[j])
        # trace sink -> root source, collecting the augmenting path
        fwd, bwd = [], []
        j = sink
        while True:
            i = par_j[j]
            fwd.append((i, j))
            if par_i[i] == -1:
                root = i
                break
            j = par_i[i]
            bwd.append((i, j))
        delta = min(a[root], b[sink])
        for i, j in bwd:
            delta = min(delta, flow[i, j])
        for i, j in fwd:
            flow[i, j] += delta
        for i, j in bwd:
            flow[i, j] -= delta
        a[root] -= delta
        b[sink] -= delta
    return float(np.sum(flow * cost))


class TestDeltaHyperbolicity:
    def test_tree_is_zero(self):
        d = gio.apsp(balanced_tree(2, 3))
        samples, dmax = gg.delta_hyperbolicity(d)
        assert dmax == 0.0

    def test_k4_is_zero(self):
        d = gio.apsp(complete_graph(4))
        _, dmax = gg.delta_hyperbolicity(d)
        assert dmax == 0.0

    def test_c6_exhaustive_matches_brute_force(self):
        d = gio.apsp(cycle_graph(6))
        samples, dmax = gg.delta_hyperbolicity(d)
        oracle_vals, oracle_max = delta_oracle(d.values)
        assert dmax == oracle_max == 1.0
        np.testing.assert_allclose(np.sort(samples), np.sort(oracle_vals))

    def test_scaling_equivariance(self):
        d = gio.apsp(cycle_graph(8)).values
        s1, m1 = gg.delta_hyperbolicity(d)
        s3, m3 = gg.delta_hyperbolicity(3.0 * d)
        np.testing.assert_allclose(s3, 3.0 * s1)
        assert m3 == 3.0 * m1

    def test_sampled_mode(self):
        d = gio.apsp(cycle_graph(10)).values
        samples, dmax = gg.delta_hyperbolicity(
            d, n_quadruples=500, seed=1, exhaustive=False
        )
        assert samples.shape == (500,)
        assert samples.min() >= 0.0
        _, exact = gg.delta_hyperbolicity(d)
        assert dmax <= exact + 1e-12

    def test_scaled_matrix_uses_original_distances(self):
        d = gio.max_scale(gio.apsp(cycle_graph(6)))
        _, dmax = gg.delta_hyperbolicity(d)
        assert dmax == 1.0

    def test_too_small(self):
        with pytest.raises(InvalidInputError):
            gg.delta_hyperbolicity(np.zeros((3, 3)))


class TestOllivierRicci:
    def test_k2_alpha_zero(self):
        g = path_graph(2)
        ric1, _ = gg.ollivier_ricci_edge(g, (0, 1), alpha=0.0)
        assert abs(ric1) < 1e-9

    def test_middle_edge_p4_matches_oracle(self):
        g = path_graph(4)
        alpha = 0.999
        got1, got2 = gg.ollivier_ricci_edge(g, (1, 2), alpha)
        d = gio.apsp(g).values
        sup_u = [1, 0, 2]
        sup_v = [2, 1, 3]
        mass = lambda: [alpha, (1 - alpha) / 2, (1 - alpha) / 2]
        cost = np.array([[d[i, j] for j in sup_v] for i in sup_u])
        w = transport_oracle(cost, mass(), mass())
        want1 = 1.0 - w
        assert abs(got1 - want1) < 1e-6
        assert abs(got2 - want1 / (1 - alpha)) < 1e-3

    def test_k3_positive_and_matches_oracle(self):
        g = complete_graph(3)
        alpha = 0.999
        _, ric2 = gg.ollivier_ricci_edge(g, (0, 1), alpha)
        assert ric2 > 0.0
        d = gio.apsp(g).values
        sup_u = [0, 1, 2]
        sup_v = [1, 0, 2]
        m = [alpha, (1 - alpha) / 2, (1 - alpha) / 2]
        cost = np.array([[d[i, j] for j in sup_v] for i in sup_u])
        w = transport_oracle(cost, m, m)
        assert abs((1.0 - w) / (1 - alpha) - ric2) < 1e-6

    def test_symmetric_in_endpoints(self):
        g = balanced_tree(2, 3)
        for e in [(0, 1), (1, 3)]:
            a = gg.ollivier_ricci_edge(g, e, 0.999)[1]
            b = gg.ollivier_ricci_edge(g, e[::-1], 0.999)[1]
            assert abs(a - b) < 1e-9

    def test_complete_graph_edges_positive(self):
        g = complete_graph(5)
        edges, nodes = gg.ollivier_ricci_graph(g, alpha=0.999)
        assert all(val > 0 for _, _, val in edges)
        assert np.all(nodes > 0)

    def test_tree_internal_edges_negative(self):
        g = balanced_tree(3, 3)
        internal = [
            (u, v)
            for u, v in g.edges()
            if g.degree(u) > 1 and g.degree(v) > 1
        ]
        assert internal
        for e in internal:
            _, ric2 = gg.ollivier_ricci_edge(g, e, 0.999)
            assert ric2 < 0.0

    def test_node_means(self):
        g = star_graph(3)
        edges, nodes = gg.ollivier_ricci_graph(g, alpha=0.5)
        incident = [val for u, v, val in edges if 0 in (u, v)]
        assert abs(nodes[0] - np.mean(incident)) < 1e-12

    def test_rejects_non_edge(self):
        with pytest.raises(InvalidInputError):
            gg.ollivier_ricci_edge(path_graph(3), (0, 2), 0.5)

    def test_rejects_bad_alpha(self):
        with pytest.raises(InvalidInputError):
            gg.ollivier_ricci_edge(path_graph(2), (0, 1), 1.0)


class TestGraphSectional:
    def test_path_interior_is_zero(self):
        g = path_graph(5)
        d = gio.apsp(g)
        assert abs(gg.graph_sectional(d, g, 2, 1, 3)) < 1e-12

    def test_star_root_nonpositive_and_exact(self):
        g = star_graph(3)
        d = gio.apsp(g)
        got = gg.graph_sectional(d, g, 0, 1, 2)
        # brute force: leaves y=1, z=2; x ranges over {1, 2, 3}
        vals = d.values
        acc = []
        for x in (1, 2, 3):
            k = (
                vals[x, 0] ** 2
                + vals[1, 2] ** 2 / 4
                - (vals[x, 1] ** 2 + vals[x, 2] ** 2) / 2
            )
            acc.append(k / (2 * vals[x, 0]))
        assert got <= 0.0
        assert abs(got - np.mean(acc)) < 1e-12
        assert abs(got - (-1.0 / 3.0)) < 1e-12

    def test_cycle6_nonnegative(self):
        g = cycle_graph(6)
        d = gio.apsp(g)
        assert gg.graph_sectional(d, g, 0, 1, 5) >= 0.0

    def test_tree_all_triples_nonpositive(self):
        g = balanced_tree(2, 3)
        d = gio.apsp(g)
        vals = gg.sectional_all_triples(g, d)
        assert vals.max() <= 1e-12

    def test_even_cycle_all_triples_nonnegative(self):
        g = cycle_graph(8)
        d = gio.apsp(g)
        vals = gg.sectional_all_triples(g, d)
        assert vals.min() >= -1e-12

    def test_complete_graph_constant(self):
        # all unit distances: generic reference nodes contribute 1/8, the two
        # corner nodes 3/8 each, so the constant is (m+3) / (8 (m-1)) -> 1/8
        for m in (6, 12):
            g = complete_graph(m)
            d = gio.apsp(g)
            vals = gg.sectional_all_triples(g, d)
            np.testing.assert_allclose(vals, (m + 3) / (8.0 * (m - 1)), atol=1e-12)

    def test_rejects_non_neighbors(self):
        g = path_graph(4)
        d = gio.apsp(g)
        with pytest.raises(InvalidInputError):
            gg.graph_sectional(d, g, 0, 2, 3)

    def test_samples_shape(self):
        g = cycle_graph(6)
        d = gio.apsp(g)
        vals = gg.sectional_samples(g, d, 25, seed=3)
        assert vals.shape == (25,)


class TestAnalyzeGraph:
    def test_report_fields(self):
        g = balanced_tree(2, 3)
        d = gio.apsp(g)
        rep = gg.analyze_graph(g, d, n_quadruples=200, n_sectional=50, seed=0)
        assert rep.delta_max == 0.0
        assert len(rep.ricci_edges) == g.num_edges()
        assert rep.ricci_nodes.shape == (g.m,)
        assert rep.sectional_samples.size > 0
