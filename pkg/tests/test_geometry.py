"""Tests for anchorcloud.geometry - cloud types, FPS, normalization, rotation."""

import numpy as np
import pytest

from anchorcloud.errors import (
    DegenerateCloudError,
    EmptyInputError,
    InsufficientPointsError,
)
from anchorcloud.geometry import (
    AugmentConfig,
    PointCloud,
    augment,
    center_and_scale,
    fps,
    random_rotation,
    validate_rotation,
)
from oracles import fps_oracle


def random_cloud(rng, n):
    pts = rng.uniform(-1.0, 1.0, size=(n, 3))
    # sprinkle in exact duplicates so ties are actually exercised
    if n >= 4 and rng.random() < 0.5:
        pts[n // 2] = pts[0]
    return pts


LINE4 = np.array([[0.0, 0, 0], [1.0, 0, 0], [0.4, 0, 0], [10.0, 0, 0]])


class TestFps:
    def test_k_equals_n_selects_all(self):
        cloud = PointCloud("c", np.array([[0.0, 0, 0], [1, 0, 0], [0, 2, 0]]))
        idx = fps(cloud, 3, start=0)
        assert sorted(idx) == [0, 1, 2]
        assert idx[0] == 0

    def test_line_cloud_k2(self):
        assert list(fps(LINE4, 2, start=0)) == fps_oracle(LINE4, 2) == [0, 3]

    def test_line_cloud_k3(self):
        # after {0,3}: min-dists are 1.0 for p1 and 0.4 for p2 -> p1 wins
        assert list(fps(LINE4, 3, start=0)) == fps_oracle(LINE4, 3) == [0, 3, 1]

    def test_oracle_equivalence_random(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            n = int(rng.integers(2, 33))
            pts = random_cloud(rng, n)
            k = int(rng.integers(1, n + 1))
            start = int(rng.integers(0, n))
            assert list(fps(pts, k, start=start)) == fps_oracle(pts, k, start)

    def test_indices_distinct_with_duplicates(self):
        pts = np.array([[1.0, 0, 0]] * 5)
        idx = fps(pts, 5, start=2)
        assert sorted(idx) == [0, 1, 2, 3, 4]
        assert idx[0] == 2

    def test_k_too_large_errors(self):
        with pytest.raises(InsufficientPointsError):
            fps(LINE4, 5, start=0)

    def test_pad_duplicates_last_selected(self):
        idx = fps(LINE4, 6, start=0, pad=True)
        assert len(idx) == 6
        assert sorted(idx[:4]) == [0, 1, 2, 3]
        assert list(idx[4:]) == [idx[3], idx[3]]

    def test_empty_cloud_errors(self):
        with pytest.raises(EmptyInputError):
            fps(np.empty((0, 3)), 1)

    def test_bad_start_errors(self):
        with pytest.raises(InsufficientPointsError):
            fps(LINE4, 2, start=4)


class TestCenterAndScale:
    def test_symmetric_pair(self):
        out = center_and_scale(PointCloud("p", np.array([[1.0, 1, 1], [3.0, 1, 1]])))
        np.testing.assert_allclose(out.points, [[-1, 0, 0], [1, 0, 0]], atol=1e-12)

    def test_triangle_direct_computation(self):
        pts = np.array([[0.0, 0, 0], [0, 0, 2], [0, 2, 0]])
        centroid = pts.mean(axis=0)
        np.testing.assert_allclose(centroid, [0, 2 / 3, 2 / 3])
        radius = np.max(np.linalg.norm(pts - centroid, axis=1))
        np.testing.assert_allclose(radius, np.sqrt(20 / 9))
        out = center_and_scale(PointCloud("t", pts))
        np.testing.assert_allclose(out.points, (pts - centroid) / radius, atol=1e-12)

    def test_coincident_points_degenerate(self):
        with pytest.raises(DegenerateCloudError):
            center_and_scale(PointCloud("d", np.array([[5.0, 5, 5], [5.0, 5, 5]])))

    def test_single_point_degenerate(self):
        with pytest.raises(DegenerateCloudError):
            center_and_scale(PointCloud("s", np.array([[1.0, 2, 3]])))

    def test_centroid_and_radius_invariants(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            pts = rng.normal(size=(int(rng.integers(2, 200)), 3)) * rng.uniform(0.1, 50)
            pts += rng.uniform(-1e4, 1e4, size=3)
            out = center_and_scale(PointCloud("r", pts)).points
            assert np.max(np.abs(out.mean(axis=0))) <= 1e-9
            radius = np.max(np.linalg.norm(out, axis=1))
            assert 1 - 1e-9 <= radius <= 1.0

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(64, 3)) * 4 + 2
        once = center_and_scale(PointCloud("a", pts)).points
        twice = center_and_scale(PointCloud("b", once)).points
        np.testing.assert_allclose(twice, once, atol=1e-12)


class TestRandomRotation:
    def test_orthogonal_unit_determinant(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            r = random_rotation(rng)
            np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-9)
            assert abs(np.linalg.det(r) - 1.0) <= 1e-9
            validate_rotation(r)

    def test_deterministic_for_seed(self):
        a = random_rotation(np.random.default_rng(42))
        b = random_rotation(np.random.default_rng(42))
        np.testing.assert_array_equal(a, b)

    def test_uniformity_monte_carlo(self):
        # images of a fixed vector should average out near the origin
        rng = np.random.default_rng(123)
        v = np.array([0.0, 0.0, 1.0])
        mean = np.zeros(3)
        for _ in range(10_000):
            mean += v @ random_rotation(rng)
        mean /= 10_000
        assert np.linalg.norm(mean) < 0.05

    def test_preserves_pairwise_distances(self):
        from scipy.spatial.distance import pdist

        rng = np.random.default_rng(5)
        pts = rng.normal(size=(60, 3))
        base = np.sort(pdist(pts))
        for _ in range(5):
            rotated = pts @ random_rotation(rng)
            got = np.sort(pdist(rotated))
            assert np.max(np.abs(got - base) / base) <= 1e-12

    def test_validate_rejects_non_rotation(self):
        with pytest.raises(ValueError):
            validate_rotation(np.diag([1.0, 1.0, -1.0]))  # reflection
        with pytest.raises(ValueError):
            validate_rotation(np.eye(3) * 2)


class TestAugment:
    def test_normalized_input_is_fixed_point(self):
        rng = np.random.default_rng(9)
        pts = center_and_scale(PointCloud("x", rng.normal(size=(1024, 3)))).points
        cfg = AugmentConfig(target_points=1024, rotate=False)
        out = augment(PointCloud("x", pts), cfg)
        order = fps(pts, 1024, start=0)
        np.testing.assert_allclose(out.points, pts[order], atol=1e-9)

    def test_rotation_preserves_max_norm(self):
        rng = np.random.default_rng(21)
        cloud = PointCloud("r", rng.normal(size=(500, 3)) * 3 + 1)
        out = augment(cloud, AugmentConfig(target_points=256, rotate=True, seed=4))
        radius = np.max(np.linalg.norm(out.points, axis=1))
        assert 1 - 1e-7 <= radius <= 1.0
        assert np.max(np.abs(out.points.mean(axis=0))) <= 1e-7
        assert len(out.points) == 256

    def test_line_cloud_composition(self):
        out = augment(
            PointCloud("l", LINE4), AugmentConfig(target_points=2, rotate=False)
        )
        # fps picks indices [0, 3]; centered/scaled to the unit segment ends
        np.testing.assert_allclose(out.points, [[-1, 0, 0], [1, 0, 0]], atol=1e-12)

    def test_deterministic_without_rotation(self):
        rng = np.random.default_rng(33)
        pts = rng.normal(size=(300, 3))
        cfg = AugmentConfig(target_points=128, rotate=False)
        a = augment(PointCloud("d", pts), cfg).points
        b = augment(PointCloud("d", pts), cfg).points
        np.testing.assert_array_equal(a, b)

    def test_deterministic_with_seeded_rotation(self):
        rng = np.random.default_rng(34)
        pts = rng.normal(size=(300, 3))
        cfg = AugmentConfig(target_points=128, rotate=True, seed=77)
        a = augment(PointCloud("d", pts), cfg).points
        b = augment(PointCloud("d", pts), cfg).points
        np.testing.assert_array_equal(a, b)

    def test_propagates_insufficient_points(self):
        with pytest.raises(InsufficientPointsError):
            augment(PointCloud("l", LINE4), AugmentConfig(target_points=8, rotate=False))
        out = augment(
            PointCloud("l", LINE4),
            AugmentConfig(target_points=8, rotate=False, pad=True),
        )
        assert len(out.points) == 8


class TestPointCloud:
    def test_rejects_empty(self):
        with pytest.raises(EmptyInputError):
            PointCloud("e", np.empty((0, 3)))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            PointCloud("n", np.array([[0.0, 0, np.nan]]))
        with pytest.raises(ValueError):
            PointCloud("i", np.array([[np.inf, 0, 0]]))

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            PointCloud("s", np.zeros((3, 2)))

    def test_points_read_only(self):
        cloud = PointCloud("ro", np.zeros((2, 3)))
        with pytest.raises(ValueError):
            cloud.points[0, 0] = 1.0

    def test_order_preserved(self):
        pts = np.array([[3.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]])
        np.testing.assert_array_equal(PointCloud("o", pts).points, pts)


class TestAugmentConfig:
    def test_rejects_nonpositive_target(self):
        with pytest.raises(ValueError):
            AugmentConfig(target_points=0)
