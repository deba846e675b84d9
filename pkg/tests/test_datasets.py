import numpy as np
import pytest

from dirpart.datasets import gen_gmm, gen_moons, gen_sphere_points, nearest_neighbor_spacing
from dirpart.errors import InputError
from dirpart.graph import gaussian_similarity, pairwise_distance
from dirpart.metrics import purity
from dirpart.rearrangement import RunConfig, run


class TestGMM:
    def test_shapes_and_labels(self):
        ds = gen_gmm((30, 20, 10), means=[[0, 0], [5, 0], [0, 5]], seed=1)
        assert ds.cloud.points.shape == (60, 2)
        np.testing.assert_array_equal(np.bincount(ds.labels), [30, 20, 10])
        assert ds.spec["seed"] == 1

    def test_one_cloud(self):
        ds = gen_gmm([25], seed=0)
        assert set(ds.labels.tolist()) == {0}

    def test_reproducible(self):
        a, b = gen_gmm(seed=5), gen_gmm(seed=5)
        assert a.cloud.points.tobytes() == b.cloud.points.tobytes()
        assert not np.array_equal(a.cloud.points, gen_gmm(seed=6).cloud.points)

    def test_bad_args(self):
        with pytest.raises(InputError):
            gen_gmm([10, 0])
        with pytest.raises(InputError):
            gen_gmm([10], cov_scale=-1)
        with pytest.raises(InputError):
            gen_gmm([10, 10], means=[[0, 0]])

    def test_recovered_when_separated(self):
        ds = gen_gmm((60, 40), means=[[0, 0], [6, 0]], cov_scale=0.5, seed=3)
        G = gaussian_similarity(ds.cloud, 1.0)
        rep = run(G, RunConfig(k=2, r=1.0, alpha_scale=2, restarts=3, seed=0))
        assert purity(rep.labels, ds.labels) >= 0.99


class TestMoons:
    def test_noiseless_on_arcs(self):
        ds = gen_moons(n_moons=4, n_per_moon=50, noise=0.0)
        X = ds.cloud.points
        sp, il = ds.spec["spacing"], ds.spec["interleave"]
        for i in range(4):
            P = X[ds.labels == i]
            centre = np.array([i * sp, 0.0 if i % 2 == 0 else il])
            np.testing.assert_allclose(np.linalg.norm(P - centre, axis=1), 1.0, atol=1e-12)
            side = P[:, 1] - centre[1]
            assert np.all(side >= -1e-12) if i % 2 == 0 else np.all(side <= 1e-12)

    def test_labels_and_reproducible(self):
        a, b = gen_moons(seed=2), gen_moons(seed=2)
        assert a.cloud.points.tobytes() == b.cloud.points.tobytes()
        np.testing.assert_array_equal(np.bincount(a.labels), [300] * 5)

    def test_bad_args(self):
        with pytest.raises(InputError):
            gen_moons(0)
        with pytest.raises(InputError):
            gen_moons(noise=-0.1)

    def test_pipeline_converges(self):
        ds = gen_moons(seed=0)
        G = gaussian_similarity(ds.cloud, 1.0)
        rep = run(G, RunConfig(k=5, r=1.0, alpha_scale=5, restarts=2, seed=0))
        assert rep.converged and rep.iterations <= 30


class TestSphere:
    def test_unit_norm(self):
        for seed in (None, 0, 7):
            X = gen_sphere_points(500, seed=seed).cloud.points
            np.testing.assert_allclose(np.linalg.norm(X, axis=1), 1.0, atol=1e-12)

    def test_spacing_uniform(self):
        for n in (100, 2000, 4000):
            s = nearest_neighbor_spacing(gen_sphere_points(n).cloud)
            assert s.std() / s.mean() <= 0.25

    def test_antipodal_distance(self):
        cloud = gen_sphere_points(4).cloud
        from dirpart.graph import PointCloud

        pc = PointCloud(np.array([cloud.points[0], -cloud.points[0]]), metric="sphere-geodesic")
        assert pairwise_distance(pc, 0, 1) == pytest.approx(np.pi, abs=1e-9)

    def test_reproducible(self):
        assert gen_sphere_points(300, seed=4).cloud.points.tobytes() == gen_sphere_points(300, seed=4).cloud.points.tobytes()

    def test_too_small(self):
        with pytest.raises(InputError):
            gen_sphere_points(3)
