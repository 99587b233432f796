import math

import mpmath
import numpy as np
import pytest

from udlab import expr as ex
from udlab import sequences as sq
from udlab import weyl as wy
from udlab.numerics import frac_product, power_tower_frac_mp, tree_sum

PHI = (1 + math.sqrt(5)) / 2
X = ex.parse_expr("x")
ZERO = ex.parse_expr("0*x")


def linear_gen(x, dim=1):
    return wy.PointGenerator([wy.ProductCoord(sq.identity(), X, x)
                              for _ in range(dim)])


class TestWeylSum:
    def test_zero_sequence_is_one(self):
        gen = wy.PointGenerator([wy.ProductCoord(sq.identity(), ZERO, 0.4)])
        for n in (1, 3, 10):
            assert wy.weyl_sum(gen, [1], n) == 1.0

    def test_half_cycle_cancellation(self):
        assert abs(wy.weyl_sum(linear_gen(0.5), [1], 2)) < 1e-15

    def test_quarter_cycle_four_terms(self):
        assert abs(wy.weyl_sum(linear_gen(0.25), [1], 4)) < 1e-15

    def test_magnitude_never_exceeds_one(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            gen = linear_gen(float(rng.random()))
            assert abs(wy.weyl_sum(gen, [int(rng.integers(1, 5))],
                                   int(rng.integers(1, 500)))) <= 1.0 + 1e-12

    def test_conjugation(self):
        gen = linear_gen(PHI)
        a = wy.weyl_sum(gen, [2], 1000)
        b = wy.weyl_sum(gen, [-2], 1000)
        assert abs(a - np.conj(b)) < 1e-12

    def test_frequency_validation(self):
        gen = linear_gen(0.3)
        with pytest.raises(ValueError):
            wy.weyl_sum(gen, [0], 10)
        with pytest.raises(ValueError):
            wy.weyl_sum(gen, [1, 1], 10)

    def test_unit_magnitude_iff_phases_coincide(self):
        # x = 1/3, v = 3: phases all integral
        assert abs(wy.weyl_sum(linear_gen(1 / 3), [3], 100)) == pytest.approx(1.0, abs=1e-12)
        # generic x: strictly smaller
        assert abs(wy.weyl_sum(linear_gen(PHI), [1], 100)) < 0.999


class TestOverIndexSets:
    def test_prefixes_reduce_to_weyl_sum(self):
        gen = linear_gen(PHI)
        series = wy.weyl_sum_over_sets(gen, [1], sq.prefixes(), [5, 50, 500])
        for N, f in zip(series.grid, series.averages):
            assert f == wy.weyl_sum(gen, [1], N)

    def test_geometric_zero_sequence(self):
        gen = wy.PointGenerator([wy.ProductCoord(sq.identity(), ZERO, 0.4)])
        series = wy.weyl_sum_over_sets(gen, [1], sq.geometric(2.0), [1, 2, 3, 4])
        assert series.magnitudes == [1.0, 1.0, 1.0, 1.0]
        assert series.set_sizes == [2, 4, 8, 16]

    def test_strided_non_ud_witness(self):
        # along even indices, n*(1/2) is always integral: |F_N| = 1
        series = wy.weyl_sum_over_sets(linear_gen(0.5), [1], sq.strided(2),
                                       [2, 4, 8])
        assert all(abs(m - 1.0) < 1e-14 for m in series.magnitudes)

    def test_divergence_diagnostic(self):
        series = wy.weyl_sum_over_sets(linear_gen(0.3), [1], sq.prefixes(), [1, 2, 3])
        assert series.inverse_size_partial_sums[-1] == pytest.approx(1 + 0.5 + 1 / 3)

    def test_prefix_series_equals_direct_sums(self):
        gen = linear_gen(PHI)
        grid = [3, 17, 250, 999]
        points = gen.fracs(np.arange(1, 1000))
        series = wy.prefix_weyl_series(points, [1], grid)
        for N, f in zip(grid, series):
            assert f == wy.weyl_sum(gen, [1], N)
            assert abs(f) <= 1.0 + 1e-12

    def test_raw_coordinate_recipe(self):
        gen = wy.PointGenerator([wy.RawCoord(lambda n: n * math.sqrt(2)),
                                 wy.RawCoord(lambda n: n * math.sqrt(3))])
        assert gen.dim == 2
        pts = gen.fracs([1, 2])
        assert pts[0, 0] == pytest.approx(math.sqrt(2) % 1)
        assert abs(wy.weyl_sum(gen, [1, 1], 2000)) < 0.05

    def test_custom_nested_family_path(self):
        fam = sq.custom_nested([[1], [1, 2], [1, 2, 3]])
        series = wy.weyl_sum_over_sets(linear_gen(0.25), [1], fam, [1, 2, 3])
        assert series.set_sizes == [1, 2, 3]
        # phases 1/4, 2/4, 3/4: partial averages by hand
        assert series.averages[0] == pytest.approx(1j)
        assert series.averages[1] == pytest.approx((1j - 1) / 2)


class TestMaxWeylSum:
    def test_zero_sequence_tie_break(self):
        gen = wy.PointGenerator([wy.ProductCoord(sq.identity(), ZERO, 0.4),
                                 wy.ProductCoord(sq.identity(), ZERO, 0.4)])
        mag, v = wy.max_weyl_sum(gen, 2, 40)
        assert mag == 1.0
        assert list(v) == [-2, -2]  # lexicographically first among ties

    def test_golden_ratio_small(self):
        mag, _ = wy.max_weyl_sum(linear_gen(PHI), 3, 10 ** 4)
        assert mag <= 0.02

    def test_diagonal_obstruction(self):
        gen = linear_gen(PHI, dim=2)
        assert wy.weyl_sum(gen, [1, -1], 10 ** 4) == 1.0
        mag, v = wy.max_weyl_sum(gen, 1, 10 ** 4)
        assert mag == 1.0
        assert abs(v[0]) == 1 and v[1] == -v[0]


class TestSublacunaryGrid:
    def test_first_values(self):
        grid = wy.sublacunary_grid(0.5, 9)
        assert grid[0] == 3          # ceil(e)
        assert 8 in grid             # ceil(e^2) at r = 4
        assert 21 in grid            # ceil(e^3) at r = 9

    def test_increasing_dedup(self):
        grid = wy.sublacunary_grid(0.3, 60)
        assert all(b > a for a, b in zip(grid, grid[1:]))

    def test_ratios_tend_to_one(self):
        grid = wy.sublacunary_grid(0.5, 500)
        ratios = [b / a for a, b in zip(grid, grid[1:])]
        assert ratios[-1] < 1.03
        assert ratios[-1] < ratios[len(ratios) // 4]

    def test_domain(self):
        with pytest.raises(ValueError):
            wy.sublacunary_grid(1.0, 10)
        with pytest.raises(ValueError):
            wy.sublacunary_grid(0.0, 10)
        with pytest.raises(ValueError):
            wy.sublacunary_grid(0.5, 1)


class TestCesaroGap:
    def test_constant_sequence(self):
        lhs, bound = wy.cesaro_gap(np.ones(10), 3, 7)
        assert lhs == 0.0 and lhs <= bound

    def test_alternating_tight(self):
        lhs, bound = wy.cesaro_gap([1.0, -1.0], 1, 2)
        assert lhs == 1.0 and bound == 1.0

    def test_seeded_exhaustive(self):
        rng = np.random.default_rng(11)
        zs = np.exp(2j * np.pi * rng.random(256))
        prefix = np.cumsum(zs)
        avg = prefix / np.arange(1, 257)
        for N in range(1, 256):
            diffs = np.abs(avg[N - 1] - avg[N:])
            bounds = 2.0 * (1.0 - N / np.arange(N + 1, 257))
            assert np.all(diffs <= bounds + 1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            wy.cesaro_gap([1.0, 1.0], 2, 2)
        with pytest.raises(ValueError):
            wy.cesaro_gap([1.0, 3.0], 1, 2)


class TestPrecisionPolicy:
    def test_tower_fracs_match_512bit_reference(self):
        with mpmath.workprec(512):
            for n in (1, 7, 50, 137, 200):
                ref = mpmath.frac(mpmath.mpf(1.5) ** n)
                got = power_tower_frac_mp(1.5, float(n))
                assert abs(ref - got) <= mpmath.mpf("1e-20")

    def test_tower_base_validation(self):
        with pytest.raises(ValueError):
            wy.TowerCoord(ex.parse_expr("x"), sq.identity(), 0.9)

    def test_product_fracs_match_high_precision(self):
        # fractional parts of n*x for n up to 10^7: double-double keeps
        # them where a plain double product loses the low bits
        x = 0.7548776662466927  # irrational-ish double
        ns = np.array([10 ** 3, 10 ** 5, 10 ** 7], dtype=float)
        got = frac_product(ns, x)
        with mpmath.workprec(200):
            for n, g in zip(ns, got):
                ref = mpmath.frac(mpmath.mpf(int(n)) * mpmath.mpf(x))
                assert abs(float(ref) - g) < 1e-15

    def test_worker_count_bit_stability(self):
        gen = wy.PointGenerator([wy.TowerCoord(X, sq.identity(), 1.5)])
        results = [wy.weyl_sum(gen, [1], 300, workers=w) for w in (1, 2, 8)]
        assert results[0] == results[1] == results[2]

    def test_tree_sum_matches_exact_for_integers(self):
        rng = np.random.default_rng(2)
        vals = rng.integers(-1000, 1000, size=1234).astype(float)
        assert tree_sum(vals) == float(sum(int(v) for v in vals))
