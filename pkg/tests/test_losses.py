"""Losses against brute-force double-loop oracles, plus finite-difference
gradient checks across every manifold."""

import numpy as np
import pytest

from conftest import ALL_SPECS, random_point
from mmembed import graphio as gio
from mmembed import losses as ls
from mmembed.embedding import EmbeddingSet
from mmembed.errors import InvalidInputError
from mmembed.manifolds import Euclidean, parse_spec
from test_graphio import cycle_graph, path_graph


def euclidean_embedding(coords, log_scale=0.0):
    coords = np.asarray(coords, float)
    return EmbeddingSet(Euclidean(coords.shape[1]), coords, log_scale)


def scaled(g):
    return gio.max_scale(gio.apsp(g))


class TestNeighborhood:
    def test_single_neighbor_contributes_zero(self):
        g = path_graph(2)
        emb = euclidean_embedding([[0.0, 0.0], [1.0, 0.0]])
        res = ls.loss_neighborhood(emb, g)
        assert abs(res.value) < 1e-12

    def test_triangle_uniform_softmax(self):
        g = cycle_graph(3)
        # equilateral: all pairwise distances equal
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
        res = ls.loss_neighborhood(euclidean_embedding(pts), g)
        # six directed edges, each -log(1/2)
        assert abs(res.value - 6 * np.log(2.0)) < 1e-12

    def test_matches_direct_summation_oracle(self):
        rng = np.random.default_rng(0)
        g = path_graph(3)
        pts = rng.standard_normal((3, 2))
        emb = euclidean_embedding(pts)
        res = ls.loss_neighborhood(emb, g)
        man = emb.manifold
        want = 0.0
        for i in range(3):
            for j in g.adjacency[i]:
                num = np.exp(-man.dist(pts[i], pts[j]))
                den = sum(np.exp(-man.dist(pts[i], pts[k])) for k in g.adjacency[i])
                want -= np.log(num / den)
        assert abs(res.value - want) < 1e-10

    def test_isolated_node_rejected(self):
        g = gio.Graph([[1], [0], []])
        emb = euclidean_embedding(np.zeros((3, 2)))
        with pytest.raises(InvalidInputError):
            ls.loss_neighborhood(emb, g)

    def test_weighted_graph_rejected(self):
        g = gio.build_graph([(0, 1)], {(0, 1): 2.0})
        with pytest.raises(InvalidInputError):
            ls.loss_neighborhood(euclidean_embedding(np.zeros((2, 2))), g)


class TestStress:
    def test_exact_line_embedding(self):
        d = scaled(path_graph(3))
        emb = euclidean_embedding([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
        assert abs(ls.loss_stress(emb, d).value) < 1e-12

    def test_single_term(self):
        d = gio.DistanceMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        emb = euclidean_embedding([[0.0, 0.0], [0.0, 0.0]])
        assert abs(ls.loss_stress(emb, d).value - 1.0) < 1e-12

    def test_double_loop_oracle(self):
        rng = np.random.default_rng(1)
        g = cycle_graph(6)
        d = scaled(g)
        pts = rng.standard_normal((6, 3))
        emb = euclidean_embedding(pts, log_scale=0.3)
        res = ls.loss_stress(emb, d)
        s = emb.scale
        want = 0.0
        for i in range(6):
            for j in range(i + 1, 6):
                want += (d.values[i, j] - s * np.linalg.norm(pts[i] - pts[j])) ** 2
        assert abs(res.value - want) < 1e-10


class TestDistortion:
    def test_perfect(self):
        d = scaled(path_graph(3))
        emb = euclidean_embedding([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
        assert abs(ls.loss_distortion(emb, d).value) < 1e-12

    def test_sqrt2_blowup_single_pair(self):
        d = gio.DistanceMatrix(np.array([[0.0, 0.5], [0.5, 0.0]]))
        emb = euclidean_embedding([[0.0], [0.5 * np.sqrt(2.0)]])
        assert abs(ls.loss_distortion(emb, d).value - 1.0) < 1e-12

    def test_double_loop_oracle(self):
        rng = np.random.default_rng(2)
        g = cycle_graph(5)
        d = scaled(g)
        pts = rng.standard_normal((5, 2))
        emb = euclidean_embedding(pts, log_scale=-0.2)
        res = ls.loss_distortion(emb, d)
        s2 = emb.scale**2
        want = 0.0
        for i in range(5):
            for j in range(i + 1, 5):
                want += abs(
                    s2 * np.sum((pts[i] - pts[j]) ** 2) / d.values[i, j] ** 2 - 1.0
                )
        assert abs(res.value - want) < 1e-10

    def test_zero_graph_distance_rejected(self):
        d = gio.DistanceMatrix(np.array([[0.0, 0.0], [0.0, 0.0]]))
        emb = euclidean_embedding(np.zeros((2, 2)))
        with pytest.raises(InvalidInputError):
            ls.loss_distortion(emb, d)


class TestRsne:
    def test_matching_distributions_give_zero(self):
        # isometric line embedding of P4 with T = 1: p and q coincide
        d = scaled(path_graph(4))
        emb = euclidean_embedding([[0.0], [1 / 3], [2 / 3], [1.0]])
        assert abs(ls.loss_rsne(emb, d, 1.0).value) < 1e-12

    def test_two_nodes_degenerate(self):
        d = gio.DistanceMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        emb = euclidean_embedding([[0.0], [7.0]])
        assert ls.loss_rsne(emb, d, 0.5).value == 0.0

    def test_tabulation_oracle_5_nodes(self):
        rng = np.random.default_rng(3)
        g = cycle_graph(5)
        d = scaled(g)
        pts = rng.standard_normal((5, 2))
        emb = euclidean_embedding(pts, log_scale=0.1)
        temp = 0.7
        res = ls.loss_rsne(emb, d, temp)
        s2 = emb.scale**2
        want = 0.0
        for i in range(5):
            pi = np.array(
                [
                    np.exp(-d.values[i, j] ** 2 / temp) if j != i else 0.0
                    for j in range(5)
                ]
            )
            pi /= pi.sum()
            qi = np.array(
                [
                    np.exp(-s2 * np.sum((pts[i] - pts[j]) ** 2)) if j != i else 0.0
                    for j in range(5)
                ]
            )
            qi /= qi.sum()
            for j in range(5):
                if j != i:
                    want += pi[j] * (np.log(pi[j]) - np.log(qi[j]))
        assert abs(res.value - want) < 1e-10

    def test_low_temperature_concentrates_on_neighbors(self):
        g = cycle_graph(8)
        d = scaled(g)
        emb = euclidean_embedding(np.random.default_rng(4).standard_normal((8, 2)))
        min_pos = d.values[d.values > 0].min()
        temp = 0.01 * min_pos**2
        p, _ = ls.rsne_conditionals(emb, d, temp)
        for i in range(8):
            nbrs = g.adjacency[i]
            uniform = np.zeros(8)
            uniform[nbrs] = 1.0 / len(nbrs)
            tv = 0.5 * np.abs(p[i] - uniform).sum()
            assert tv <= 1e-6


def directional_fd(loss_fn, emb, i, u, h=1e-5):
    man = emb.manifold

    def value(t):
        pts = emb.points.copy()
        pts[i] = man.exp(emb.points[i], t * u)
        return loss_fn(EmbeddingSet(man, pts, emb.log_scale)).value

    return (value(h) - value(-h)) / (2.0 * h)


def _make_losses(g, d):
    return {
        "neighborhood": lambda e, nodes=None: ls.loss_neighborhood(e, g, nodes),
        "stress": lambda e, nodes=None: ls.loss_stress(e, d, nodes),
        "distortion": lambda e, nodes=None: ls.loss_distortion(e, d, nodes),
        "rsne": lambda e, nodes=None: ls.loss_rsne(e, d, 0.5, nodes),
    }


class TestGradientsMatchFiniteDifferences:
    @pytest.mark.parametrize("spec", ALL_SPECS)
    @pytest.mark.parametrize("loss_name", ["neighborhood", "stress", "distortion", "rsne"])
    def test_point_gradients(self, spec, loss_name):
        man = parse_spec(spec)
        g = cycle_graph(6)
        d = scaled(g)
        rng = np.random.default_rng(hash((spec, loss_name)) % 2**32)
        pts = random_point(man, rng, radius=0.6, count=6)
        emb = EmbeddingSet(man, pts, log_scale=0.1)
        loss_fn = _make_losses(g, d)[loss_name]
        res = loss_fn(emb)
        rgrads = man.egrad_to_rgrad(pts, res.point_egrads)
        for i in (0, 3):
            for _ in range(5):
                u = man.proj(pts[i], rng.standard_normal(np.shape(pts[i])))
                nu = man.norm(pts[i], u)
                if nu < 1e-12:
                    continue
                u = u / nu
                num = directional_fd(loss_fn, emb, i, u)
                ana = man.inner(pts[i], rgrads[i], u)
                assert abs(num - ana) <= 1e-4 * (1.0 + abs(ana))

    @pytest.mark.parametrize("loss_name", ["neighborhood", "stress", "distortion", "rsne"])
    def test_scale_gradient(self, loss_name):
        man = parse_spec("lorentz:3")
        g = cycle_graph(6)
        d = scaled(g)
        rng = np.random.default_rng(9)
        pts = random_point(man, rng, radius=0.6, count=6)
        emb = EmbeddingSet(man, pts, log_scale=-0.2)
        loss_fn = _make_losses(g, d)[loss_name]
        ana = loss_fn(emb).scale_grad
        h = 1e-6
        up = loss_fn(EmbeddingSet(man, pts, emb.log_scale + h)).value
        dn = loss_fn(EmbeddingSet(man, pts, emb.log_scale - h)).value
        num = (up - dn) / (2 * h)
        assert abs(num - ana) <= 1e-5 * (1.0 + abs(ana))


class TestMakeLoss:
    def test_parses_rsne_temperature(self):
        d = scaled(path_graph(3))
        fn = ls.make_loss("rsne:0.25", None, d)
        emb = euclidean_embedding([[0.0], [0.5], [1.0]])
        want = ls.loss_rsne(emb, d, 0.25).value
        assert fn(emb).value == want

    def test_unknown_loss(self):
        with pytest.raises(InvalidInputError):
            ls.make_loss("huber", None, None)
