import math

import numpy as np
import pytest

from udlab import expr as ex
from udlab import sequences as sq
from udlab import weyl as wy
from udlab.discrepancy import (star_discrepancy_1d, star_discrepancy_kd,
                               ud_trend)

PHI = (1 + math.sqrt(5)) / 2


def brute_force_2d(points, extra_resolution=64):
    """Independent oracle: scan anchored boxes over all corners drawn from
    the point coordinates plus a refinement grid, with open and closed
    counts from direct comparisons."""
    points = np.asarray(points)
    n = len(points)
    cands = np.unique(np.concatenate(
        [points[:, 0], points[:, 1], np.linspace(0, 1, extra_resolution), [1.0]]))
    best = 0.0
    for a in cands:
        for b in cands:
            closed = np.sum((points[:, 0] <= a) & (points[:, 1] <= b)) / n
            opened = np.sum((points[:, 0] < a) & (points[:, 1] < b)) / n
            best = max(best, closed - a * b, a * b - opened)
    return best


class TestOneDimensional:
    def test_single_point(self):
        assert star_discrepancy_1d([0.5]) == 0.5

    def test_midpoint_lattice(self):
        n = 4
        pts = [(2 * i - 1) / (2 * n) for i in range(1, n + 1)]
        assert star_discrepancy_1d(pts) == 1 / (2 * n)

    def test_total_clustering(self):
        assert star_discrepancy_1d([0.0, 0.0, 0.0]) == 1.0

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        pts = rng.random(64)
        assert star_discrepancy_1d(pts) == star_discrepancy_1d(pts[rng.permutation(64)])

    def test_range_validation(self):
        with pytest.raises(ValueError):
            star_discrepancy_1d([0.5, 1.0])
        with pytest.raises(ValueError):
            star_discrepancy_1d([-0.1])


class TestTwoDimensional:
    def test_single_point_hand_value(self):
        value, err = star_discrepancy_kd([[0.5, 0.5]], "exact")
        assert value == 0.75 and err == 0.0

    def test_exact_equals_brute_force(self):
        rng = np.random.default_rng(5)
        for _ in range(8):
            pts = rng.random((int(rng.integers(4, 65)), 2))
            exact, _ = star_discrepancy_kd(pts, "exact")
            assert exact == pytest.approx(brute_force_2d(pts), abs=1e-12)

    def test_exact_with_duplicate_points(self):
        pts = np.array([[0.25, 0.25]] * 3 + [[0.7, 0.7]])
        exact, _ = star_discrepancy_kd(pts, "exact")
        assert exact == pytest.approx(brute_force_2d(pts), abs=1e-12)

    def test_grid_sandwich(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            pts = rng.random((int(rng.integers(16, 200)), 2))
            exact, _ = star_discrepancy_kd(pts, "exact")
            for m in (32, 128, 256):
                g, err = star_discrepancy_kd(pts, "grid", m)
                assert err == 2 / m
                assert exact - err - 1e-12 <= g <= exact + 1e-12

    def test_product_lattice_order_one_over_m(self):
        # midpoint product lattice, m = 10: exact D* = 0.0975 (frozen from
        # the brute-force oracle; the scale is 1/m)
        m = 10
        lat = np.array([[(i + 0.5) / m, (j + 0.5) / m]
                        for i in range(m) for j in range(m)])
        exact, _ = star_discrepancy_kd(lat, "exact")
        assert exact == pytest.approx(0.0975, abs=1e-12)
        g, err = star_discrepancy_kd(lat, "grid", 1000)
        assert exact - err - 1e-12 <= g <= exact + 1e-12

    def test_one_dimensional_consistency_is_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            pts = rng.random(int(rng.integers(1, 250)))
            assert star_discrepancy_kd(pts.reshape(-1, 1), "exact")[0] == \
                star_discrepancy_1d(pts)

    def test_method_caps(self):
        rng = np.random.default_rng(8)
        with pytest.raises(ValueError):
            star_discrepancy_kd(rng.random((10, 3)), "exact")
        with pytest.raises(ValueError):
            star_discrepancy_kd(rng.random((5000, 2)), "exact")


class TestThreeDimensionalGrid:
    def test_uniform_grid_small_defect(self):
        rng = np.random.default_rng(9)
        pts = rng.random((4096, 3))
        value, err = star_discrepancy_kd(pts, "grid", 64)
        assert err == 3 / 64
        assert value < 0.08  # random 4096-point set is roughly uniform

    def test_clustered_set_large_defect(self):
        pts = np.full((100, 3), 0.01)
        value, _ = star_discrepancy_kd(pts, "grid", 64)
        assert value > 0.95


class TestTrend:
    def test_golden_ratio_low_discrepancy(self):
        gen = wy.PointGenerator([wy.ProductCoord(sq.identity(),
                                                 ex.parse_expr("x"), PHI)])
        rep = ud_trend(gen, [10 ** 3, 10 ** 4, 10 ** 5])
        for N, d in zip(rep.grid, rep.values):
            assert d <= 5 * math.log(N) / N
        assert rep.trend_slope < -0.5
        assert rep.methods == ["exact-1d"] * 3

    def test_diagonal_saturates_near_one_quarter(self):
        # the diagonal carries its mass on a measure-zero set; the anchored
        # defect sup_{a,b} |min(a,b) - ab| = 1/4 (frozen from computation)
        gen = wy.PointGenerator([wy.ProductCoord(sq.identity(), ex.parse_expr("x"), PHI),
                                 wy.ProductCoord(sq.identity(), ex.parse_expr("x"), PHI)])
        rep = ud_trend(gen, [10 ** 3, 10 ** 4], method="grid", m=256)
        assert 0.2 <= rep.values[-1] <= 0.3

    def test_zero_sequence_pins_at_one(self):
        gen = wy.PointGenerator([wy.ProductCoord(sq.identity(),
                                                 ex.parse_expr("0*x"), 0.3)])
        rep = ud_trend(gen, [10, 100])
        assert rep.values == [1.0, 1.0]

    def test_grid_validation(self):
        gen = wy.PointGenerator([wy.ProductCoord(sq.identity(),
                                                 ex.parse_expr("x"), PHI)])
        with pytest.raises(ValueError):
            ud_trend(gen, [100, 100])
