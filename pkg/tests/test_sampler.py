"""Manifold random sampling: distributional checks against analytic
moments, the exp-ball radius guarantee, threshold graphs, and sweeps."""

import numpy as np
import pytest

from mmembed import graphio as gio
from mmembed import sampler as sp
from mmembed.errors import InvalidInputError
from mmembed.manifolds import parse_spec
from test_manifolds import random_quaternion, rotation_from_quaternion


class TestUniformCompact:
    def test_sphere_coordinate_means(self):
        man = parse_spec("sphere:2")
        cloud = sp.sample_uniform(man, 100_000, seed=0)
        se = 1.0 / np.sqrt(3 * 100_000)  # per-coordinate variance is 1/3
        assert np.abs(cloud.points.mean(axis=0)).max() < 5 * se

    def test_gr12_mean_angle_is_pi_over_4(self):
        # angle between a uniform line in R^2 and a fixed one is uniform
        # on [0, pi/2], so the mean distance is pi/4
        man = parse_spec("grassmann:1,2")
        cloud = sp.sample_uniform(man, 50_000, seed=1)
        ref = np.array([[1.0], [0.0]])
        d = man.dist(cloud.points, ref)
        se = (np.pi / 2) / np.sqrt(12 * 50_000)
        assert abs(d.mean() - np.pi / 4) < 3 * se

    def test_so2_angles_uniform_ks(self):
        man = parse_spec("so:2")
        n = 20_000
        cloud = sp.sample_uniform(man, n, seed=2)
        ang = np.arctan2(cloud.points[:, 1, 0], cloud.points[:, 0, 0])
        u = np.sort((ang + np.pi) / (2 * np.pi))
        ks = np.abs(u - (np.arange(1, n + 1) - 0.5) / n).max() + 0.5 / n
        assert ks < 1.63 / np.sqrt(n)  # 1% critical value

    def test_rotations_are_proper(self):
        man = parse_spec("so:3")
        cloud = sp.sample_uniform(man, 500, seed=3)
        assert man.point_error(cloud.points) < 1e-8

    def test_grassmann_points_valid(self):
        man = parse_spec("grassmann:2,4")
        cloud = sp.sample_uniform(man, 500, seed=4)
        assert man.point_error(cloud.points) < 1e-8

    def test_rejects_noncompact(self):
        with pytest.raises(InvalidInputError):
            sp.sample_uniform(parse_spec("euclidean:3"), 10, seed=0)


class TestExpBall:
    def test_tiny_radius_stays_at_base(self):
        man = parse_spec("spd:2")
        cloud = sp.sample_exp_ball(man, 1e-9, 20, seed=0)
        for p in cloud.points:
            assert man.dist(p, man.base_point()) < 1e-8

    def test_euclidean_mean_radius(self):
        man = parse_spec("euclidean:3")
        r, n = 2.0, 50_000
        cloud = sp.sample_exp_ball(man, r, n, seed=1)
        norms = np.linalg.norm(cloud.points, axis=1)
        mean = r * 3 / 4  # dim / (dim + 1)
        var = r * r * (3 / 5 - 9 / 16)
        assert abs(norms.mean() - mean) < 3 * np.sqrt(var / n)
        assert norms.max() <= r + 1e-9

    def test_distance_equals_tangent_norm(self, any_manifold):
        man = any_manifold
        rng = np.random.Generator(np.random.Philox(key=42))
        radius = 1.2
        v = sp.tangent_ball(man, rng, radius, 200)
        base = np.broadcast_to(man.base_point(), v.shape)
        pts = man.exp(base, v)
        norms = man.norm(base, v)
        dists = man.dist(base, pts)
        assert np.abs(dists - norms).max() <= 1e-6
        assert dists.max() <= radius + 1e-6

    def test_lorentz_shell_concentration(self):
        man = parse_spec("lorentz:3")
        r = 5.0
        cloud = sp.sample_exp_ball(man, r, 20_000, seed=2)
        d = man.dist(np.broadcast_to(man.base_point(), cloud.points.shape), cloud.points)
        # distance CDF is (t/r)^dim: the median sits at r * 0.5^(1/3)
        want = r * 0.5 ** (1.0 / 3.0)
        assert abs(np.median(d) - want) < 0.05
        assert d.mean() > 0.7 * r  # mass skewed toward the boundary

    def test_deterministic_per_seed(self):
        man = parse_spec("sphere:3")
        a = sp.sample_exp_ball(man, 1.0, 50, seed=9).points
        b = sp.sample_exp_ball(man, 1.0, 50, seed=9).points
        assert np.array_equal(a, b)

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(InvalidInputError):
            sp.sample_exp_ball(parse_spec("euclidean:2"), 0.0, 5, seed=0)


class TestHomothety:
    def test_so3_vs_quaternion_lines(self):
        """Rotation distance = 2 sqrt(2) x Gr(1,4) distance of the
        quaternion lines, checked on 1000 pairs."""
        so3 = parse_spec("so:3")
        gr14 = parse_spec("grassmann:1,4")
        rng = np.random.default_rng(0)
        for _ in range(1000):
            q1, q2 = random_quaternion(rng), random_quaternion(rng)
            r1, r2 = rotation_from_quaternion(q1), rotation_from_quaternion(q2)
            theta = 2.0 * np.arccos(np.clip(abs(q1 @ q2), 0.0, 1.0))
            if theta < 1e-6 or theta > np.pi - 1e-6:
                continue
            d_so = so3.dist(r1, r2)
            d_gr = gr14.dist(q1[:, None], q2[:, None])
            assert abs(d_so - 2.0 * np.sqrt(2.0) * d_gr) < 1e-8


class TestThresholdGraph:
    def _cloud(self):
        man = parse_spec("euclidean:2")
        return sp.sample_exp_ball(man, 1.5, 10, seed=5)

    def test_complete_when_tau_large(self):
        cloud = self._cloud()
        g = sp.threshold_graph(cloud, 1e6)
        assert g.num_edges() == 10 * 9 // 2

    def test_empty_when_tau_tiny(self):
        cloud = self._cloud()
        g = sp.threshold_graph(cloud, 1e-12)
        assert g.num_edges() == 0

    def test_matches_double_loop_oracle(self):
        cloud = self._cloud()
        tau = 1.0
        g = sp.threshold_graph(cloud, tau)
        pts = cloud.points
        for i in range(10):
            for j in range(10):
                want = i != j and np.linalg.norm(pts[i] - pts[j]) < tau
                assert (j in g.adjacency[i]) == want

    def test_isolated_nodes_kept(self):
        man = parse_spec("euclidean:1")
        cloud = sp.SampleCloud(man, np.array([[0.0], [0.1], [9.9]]), "manual")
        g = sp.threshold_graph(cloud, 0.5)
        assert g.m == 3
        assert g.adjacency[2] == []


class TestSweep:
    def test_degree_monotone_and_markers(self):
        man = parse_spec("sphere:2")
        cloud = sp.sample_uniform(man, 150, seed=6)
        d = man.pairwise_dist(cloud.points)
        dmax = d.max()
        taus = np.linspace(dmax / 10, dmax * 1.001, 8)
        sw = sp.sweep(cloud, taus, curvature_samples=40, seed=0)
        med = sw.degree_q[:, 1]
        assert np.all(np.diff(med) >= 0)
        assert med[-1] == 149  # complete graph at the largest threshold
        # the smallest threshold yields a sparse graph on a sphere at this
        # density; components below 100 nodes leave a NaN marker
        assert sw.largest_component[-1] == 150

    def test_complete_graph_curvature_near_one_eighth(self):
        man = parse_spec("sphere:2")
        cloud = sp.sample_uniform(man, 1000, seed=7)
        d = man.pairwise_dist(cloud.points)
        taus = [d.max() / 2, d.max() * 1.01]
        sw = sp.sweep(cloud, taus, curvature_samples=60, seed=1)
        m = 1000
        want = (m + 3) / (8.0 * (m - 1))
        assert abs(sw.curv_q[-1, 1] - want) < 1e-9
        assert abs(sw.curv_q[-1, 1] - 0.125) < 0.01

    def test_needs_two_thresholds(self):
        man = parse_spec("sphere:2")
        cloud = sp.sample_uniform(man, 10, seed=8)
        with pytest.raises(InvalidInputError):
            sp.sweep(cloud, [1.0])

    def test_euclidean_degrees_dominate_lorentz(self):
        """Exp-ball clouds at equal radius: flat space packs points closer
        than hyperbolic space at every matched threshold."""
        r, n = 5.0, 1000
        e_cloud = sp.sample_exp_ball(parse_spec("euclidean:3"), r, n, seed=10)
        l_cloud = sp.sample_exp_ball(parse_spec("lorentz:3"), r, n, seed=10)
        taus = np.linspace(r / 10, 1.5 * r, 8)
        de = parse_spec("euclidean:3").pairwise_dist(e_cloud.points)
        dl = parse_spec("lorentz:3").pairwise_dist(l_cloud.points)
        med_e = [np.median((de < t).sum(axis=1) - 1) for t in taus]
        med_l = [np.median((dl < t).sum(axis=1) - 1) for t in taus]
        assert all(a >= b for a, b in zip(med_e, med_l))
        assert any(a > b for a, b in zip(med_e, med_l))
