import math

import numpy as np
import pytest

from udlab import sequences as sq
from udlab.scatter import (fit_scatter, joint_scatter_check, scatter_sum,
                           weyl_growth_check)

IDENTITY = sq.make_sequence(sq.identity())
CONSTANT = sq.make_sequence(sq.custom("0*n + 1"))


def array_evaluator(values):
    return lambda n: values[np.asarray(n) - 1]


class TestScatterSum:
    def test_constant_sequence(self):
        # all 6 pairs contribute 1
        assert scatter_sum(CONSTANT, 4, 0.5).S == 6 / 16

    def test_identity_hand_enumeration(self):
        expect = (1 + 0.5 + 1 / 3 + 1 + 0.5 + 1) / 16
        assert scatter_sum(IDENTITY, 4, 1.0).S == pytest.approx(expect, abs=1e-15)

    def test_affine_hand_enumeration(self):
        a = sq.make_sequence(sq.affine(2.0, 0.0))
        assert scatter_sum(a, 3, 1.0).S == pytest.approx((0.5 + 0.25 + 0.5) / 9,
                                                         abs=1e-15)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            scatter_sum(IDENTITY, 1, 1.0)
        with pytest.raises(ValueError):
            scatter_sum(IDENTITY, 10, 0.0)
        with pytest.raises(ValueError):
            scatter_sum(IDENTITY, 10, 1.5)
        with pytest.raises(ValueError):
            scatter_sum(IDENTITY, 10, 1.0, mode="bucketed", eta=0.2)

    def test_upper_bound_invariant(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            n = int(rng.integers(2, 400))
            vals = rng.normal(size=n) * 10 ** rng.uniform(-2, 3)
            s = scatter_sum(array_evaluator(vals), n, 1.0).S
            assert 0.0 <= s <= (n - 1) / (2 * n) + 1e-15

    def test_bucketed_matches_exact_within_bound(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            n = int(rng.integers(200, 1500))
            vals = np.cumsum(rng.random(n) * 10 ** rng.uniform(-1, 3))
            ev = array_evaluator(vals)
            for delta in (0.25, 0.5, 1.0):
                exact = scatter_sum(ev, n, delta, mode="exact")
                bucket = scatter_sum(ev, n, delta, mode="bucketed", eta=0.01)
                assert abs(exact.S - bucket.S) <= bucket.error_bound + 1e-15
                assert abs(exact.S - bucket.S) / exact.S <= delta * 0.01 + 1e-12

    def test_shift_and_negation_invariance(self):
        rng = np.random.default_rng(3)
        vals = np.cumsum(rng.random(200) * 5)
        base = scatter_sum(array_evaluator(vals), 200, 0.5).S
        shifted = scatter_sum(array_evaluator(vals + 17.25), 200, 0.5).S
        negated = scatter_sum(array_evaluator(-vals), 200, 0.5).S
        assert shifted == pytest.approx(base, abs=1e-13)
        assert negated == pytest.approx(base, abs=1e-13)

    def test_monotone_in_delta(self):
        rng = np.random.default_rng(5)
        vals = rng.normal(size=300) * 40
        ev = array_evaluator(vals)
        s = [scatter_sum(ev, 300, d).S for d in (0.25, 0.5, 1.0)]
        assert s[0] >= s[1] >= s[2]

    def test_auto_mode_switches(self):
        assert scatter_sum(IDENTITY, 512, 1.0).method == "exact"
        assert scatter_sum(IDENTITY, 2 ** 13 + 1, 1.0).method.startswith("bucketed")

    def test_iterated_exp_uses_exact_block_differences(self):
        ev = sq.make_sequence(sq.iterated_exp())
        n = 60
        got = scatter_sum(ev, n, 1.0, mode="exact").S
        # independent oracle from the evaluator's pairwise differences
        total = 0.0
        for nn in range(2, n + 1):
            for mm in range(1, nn):
                d = ev.abs_diff(nn, mm)
                total += 1.0 if d <= 1 else d ** -1.0
        assert got == pytest.approx(total / (n * n), rel=1e-12)


class TestFitScatter:
    def test_constant_never_decays(self):
        rep = fit_scatter(CONSTANT, 0.5, [8, 16, 32, 64])
        assert all(s == pytest.approx((N - 1) / (2 * N), abs=1e-12)
                   for s, N in zip(rep.S, rep.grid))
        assert rep.eps_hat < 0 and not rep.evidence_scattered

    def test_power_half_reports_scattered_evidence(self):
        # the conservative eps_hat is a min over the grid, so the verdict
        # needs N large enough that S has dropped below 1/log N
        rep = fit_scatter(sq.make_sequence(sq.power(0.5)), 1.0,
                          [2 ** k for k in range(10, 14)])
        assert rep.evidence_scattered
        assert "evidence" in rep.label

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            fit_scatter(IDENTITY, 1.0, [8, 16, 32])           # too few
        with pytest.raises(ValueError):
            fit_scatter(IDENTITY, 1.0, [4, 16, 32, 64])       # min < 8
        with pytest.raises(ValueError):
            fit_scatter(IDENTITY, 1.0, [8, 16, 16, 64])       # not increasing

    def test_methods_recorded_per_point(self):
        rep = fit_scatter(IDENTITY, 1.0, [8, 16, 32, 2 ** 14])
        assert rep.methods[0] == "exact"
        assert rep.methods[-1].startswith("bucketed")
        assert rep.error_bounds[0] == 0.0


class TestGrowthCheck:
    def test_identity_passes(self):
        rep = weyl_growth_check(IDENTITY, 1000, 1.0, 0.5, budget=10 ** 7)
        assert rep.verdict == "pass" and rep.coverage == "exhaustive"
        assert rep.witness is None

    def test_sqrt_residue_fails_with_verified_witness(self):
        a = sq.make_sequence(sq.sqrt_residue())
        rep = weyl_growth_check(a, 100, 0.1, 0.5, budget=10 ** 7)
        assert rep.verdict == "fail"
        n, m = rep.witness
        assert m > n + n / math.log(n) ** 1.1
        assert abs(a(m) - a(n)) <= 0.5

    def test_spec_pair_4_9_is_a_violation(self):
        # the block structure puts 4 and 9 at value 0 with 9 beyond the
        # growth threshold of 4
        a = sq.make_sequence(sq.sqrt_residue())
        assert 9 > 4 + 4 / math.log(4) ** 1.1
        assert a(9) == a(4) == 0.0

    def test_sampled_path_still_finds_block_collisions(self):
        a = sq.make_sequence(sq.sqrt_residue())
        rep = weyl_growth_check(a, 3000, 0.1, 0.5, budget=2000, seed=4)
        assert rep.coverage == "sampled"
        assert rep.verdict == "fail"
        n, m = rep.witness
        assert m > n + n / math.log(n) ** 1.1 and abs(a(m) - a(n)) <= 0.5

    def test_iterated_exp_fails_growth(self):
        ev = sq.make_sequence(sq.iterated_exp())
        rep = weyl_growth_check(ev, 200, 0.5, 0.5, budget=10 ** 6)
        assert rep.verdict == "fail"
        n, m = rep.witness
        assert ev.abs_diff(n, m) <= 0.5

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            weyl_growth_check(IDENTITY, 4, 1.0, 1.0)
        with pytest.raises(ValueError):
            weyl_growth_check(IDENTITY, 100, -1.0, 1.0)


class TestJointScatter:
    def test_structure_and_axis_directions(self):
        rep = joint_scatter_check([sq.identity(), sq.power(0.5)], 1.0,
                                  [8, 16, 32, 64], directions=5, seed=2)
        assert len(rep.reports) == 5
        assert np.array_equal(rep.directions[0], [1, 0])
        assert np.array_equal(rep.directions[1], [0, 1])
        assert rep.min_eps_hat == min(r.eps_hat for r in rep.reports)
        assert "sampled" in rep.label

    def test_degenerate_pair_direction(self):
        # (identity, identity) along (1,-1): difference is constantly zero,
        # every pair contributes 1
        combo = sq.linear_combination([(1.0, sq.identity()), (-1.0, sq.identity())])
        ev = sq.make_sequence(combo)
        for N in (8, 32, 128):
            assert scatter_sum(ev, N, 1.0).S == pytest.approx((N - 1) / (2 * N),
                                                              abs=1e-13)

    def test_log_direction_not_scattered(self):
        # (n + log n, identity) along (1,-1)/sqrt(2) is proportional to log n,
        # whose pair sum decays slower than any power of log N
        w = 1 / math.sqrt(2)
        combo = sq.linear_combination([(w, sq.n_plus_log()), (-w, sq.identity())])
        rep = fit_scatter(sq.make_sequence(combo), 1.0,
                          [2 ** k for k in range(10, 15)])
        assert all(s * math.log(N) > 0.3 for s, N in zip(rep.S, rep.grid))

    def test_axis_direction_reduces_to_single_sequence(self):
        grid = [8, 16, 32, 64]
        rep = joint_scatter_check([sq.identity(), sq.power(0.5)], 1.0, grid,
                                  directions=2, seed=0)
        solo = fit_scatter(sq.make_sequence(sq.identity()), 1.0, grid)
        assert rep.reports[0].S == solo.S

    def test_growth_pass_implies_scattered_evidence(self):
        # exhaustive growth pass at (eps, g) forces the pair sum below
        # (log N)^-(1+eps') for eps' < eps on the same range
        lp = sq.make_sequence(sq.log_power(2.5))
        growth = weyl_growth_check(lp, 10 ** 4, 0.4, 0.3, budget=10 ** 8)
        assert growth.verdict == "pass" and growth.coverage == "exhaustive"
        rep = fit_scatter(lp, 1.0, [2 ** k for k in range(10, 14)])
        assert rep.eps_hat > 0
        assert rep.evidence_scattered

    def test_validation(self):
        with pytest.raises(ValueError):
            joint_scatter_check([sq.identity()], 1.0, [8, 16, 32, 64], 3)
        with pytest.raises(ValueError):
            joint_scatter_check([sq.identity(), sq.identity()], 1.0,
                                [8, 16, 32, 64], 1)
