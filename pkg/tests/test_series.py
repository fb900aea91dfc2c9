from fractions import Fraction

import pytest
from mpmath import mp, mpf

from pilerace.closedforms import win_within_one
from pilerace.numeric import PiLinear
from pilerace.passage import GameSpec, MoveSet, build_passage_table
from pilerace.series import (
    CONVERGED,
    DIVERGED,
    TailPolicy,
    expected_duration,
    passage_product_sum,
    race_identity_residual,
    square_sum_sequence,
    square_sum_value,
    win_prob_direct,
    win_prob_squares,
    win_prob_targets,
    win_within,
)

PM1 = MoveSet(-1, 1)
M12 = MoveSet(-1, 2)

F = Fraction


def pl(const, inv_pi):
    return PiLinear(F(const), F(inv_pi)).approx(30).value


class TestPolicy:
    def test_validation(self):
        with pytest.raises(ValueError):
            TailPolicy(tolerance=0)
        with pytest.raises(ValueError):
            TailPolicy(max_k=8)
        with pytest.raises(ValueError):
            TailPolicy(min_k=-1)

    def test_defaults_by_drift(self):
        p = TailPolicy()
        assert p.resolved_max_k(PM1) == 200_000
        assert p.resolved_max_k(M12) == 5_000
        assert p.mode_for(PM1) == "power"
        assert p.mode_for(M12) == "geometric"

    def test_min_k_extends_cap(self):
        assert TailPolicy(max_k=100, min_k=5000).resolved_max_k(M12) == 5000


class TestWinProbSquares:
    def test_unit_step_target_one(self):
        res = win_prob_squares(GameSpec(PM1, 1), TailPolicy(tolerance=1e-10))
        assert res.verdict == CONVERGED
        assert abs(res.value - pl(1, -2)) < 1e-9

    def test_unit_step_target_two(self):
        res = win_prob_squares(GameSpec(PM1, 2))
        assert abs(res.value - pl(3, -8)) < 1e-8

    def test_minus12_target_five(self):
        res = win_prob_squares(GameSpec(M12, 5))
        assert abs(res.value - mpf("0.45292179047578731")) < 1e-9

    def test_zero_target_is_immediate(self):
        res = win_prob_squares(GameSpec(PM1, 0))
        assert res.value == 0 and res.verdict == CONVERGED

    def test_rejects_negative_drift(self):
        with pytest.raises(ValueError, match="direct"):
            win_prob_squares(GameSpec(MoveSet(-2, 1), 1))

    def test_rejects_unreachable_target(self):
        with pytest.raises(ValueError, match="never"):
            win_prob_squares(GameSpec(MoveSet(0, 0), 1))

    def test_deterministic_race_second_player_never_wins(self):
        res = win_prob_squares(GameSpec(MoveSet(1, 1), 5))
        assert res.value == 0 and res.verdict == CONVERGED and res.tail_estimate == 0


class TestWinProbDirect:
    def test_agrees_with_squares(self):
        for spec in (GameSpec(PM1, 1), GameSpec(PM1, 3), GameSpec(M12, 2)):
            tol = 1e-9
            a = win_prob_squares(spec, TailPolicy(tolerance=tol))
            b = win_prob_direct(spec, TailPolicy(tolerance=tol))
            assert a.verdict == b.verdict == CONVERGED
            assert abs(a.value - b.value) <= 2 * tol

    def test_minus12_target_one(self):
        res = win_prob_direct(GameSpec(M12, 1))
        assert abs(res.value - mpf("0.33891390869471156")) < 1e-9

    def test_negative_drift_reports_no_winner(self):
        res = win_prob_direct(GameSpec(MoveSet(-2, 1), 1))
        assert res.verdict == CONVERGED
        assert 0 < float(res.value) < 0.5
        assert float(res.no_winner) > 0.10
        # stalemate odds: both walks independently miss forever,
        # P(miss) = 1 - (sqrt(5) - 1)/2 exactly, squared; no_winner is the
        # truncation-point estimate q_K^2, so allow its remaining drift
        import math

        miss = 1 - (math.sqrt(5) - 1) / 2
        assert abs(float(res.no_winner) - miss**2) < 1e-5

    def test_negative_drift_agrees_with_frozen_simulation(self):
        # frozen oracle: run_simulation(SimConfig(MoveSet(-2, 1), 1, 1,
        # trials=10**7, seed=777)) -> see FROZEN constants
        res = win_prob_direct(GameSpec(MoveSet(-2, 1), 1))
        mc_rate, mc_se = FROZEN_M21_MC
        assert abs(float(res.value) - mc_rate) < 4 * mc_se

    def test_unreachable_target(self):
        res = win_prob_direct(GameSpec(MoveSet(-1, 0), 3))
        assert res.value == 0 and float(res.no_winner) == 1.0


# frozen 10^7-trial Monte Carlo oracle for the {-2,1} race to one chip
# (p2 win rate and its standard error); regenerate with the call above
FROZEN_M21_MC = (0.2999770, 0.0001449)


class TestWinProbTargets:
    def test_table_cells(self):
        cells = {
            (1, 2): pl(-1, 4),
            (4, 1): pl(0, F(8, 3)),
            (3, 2): pl(7, -20),
            (5, 4): pl(161, -504),
        }
        for (n1, n2), expected in cells.items():
            res = win_prob_targets(n1, n2, PM1)
            assert res.verdict == CONVERGED
            assert abs(res.value - expected) < 1e-8, (n1, n2)

    def test_equal_targets_match_symmetric_game(self):
        a = win_prob_targets(2, 2, PM1)
        b = win_prob_direct(GameSpec(PM1, 2))
        assert abs(a.value - b.value) <= 2e-9

    def test_deterministic_targets(self):
        assert win_prob_targets(3, 5, MoveSet(1, 1)).value == 0
        assert win_prob_targets(5, 3, MoveSet(1, 1)).value == 1

    def test_negative_drift_direct_path(self):
        res = win_prob_targets(1, 2, MoveSet(-2, 1))
        assert res.verdict == CONVERGED
        assert 0 < float(res.value) < 0.5
        assert res.no_winner is not None

    def test_rejects_zero_targets(self):
        with pytest.raises(ValueError):
            win_prob_targets(0, 1, PM1)

    def test_mixed_parity_pairs_sum_to_one(self):
        a = win_prob_targets(5, 4, PM1)
        b = win_prob_targets(4, 5, PM1)
        assert abs(a.value + b.value - 1) < 2e-8

    def test_same_parity_pairs_sum_below_one(self):
        a = win_prob_targets(3, 5, PM1)
        b = win_prob_targets(5, 3, PM1)
        assert float(a.value + b.value) < 1 - 0.01


class TestProductSum:
    def test_parity_mismatch_is_structurally_zero(self):
        res = passage_product_sum(1, 2, PM1)
        assert res.value == 0 and res.tail_estimate == 0

    def test_unit_step_equal_targets(self):
        # sum r(1,k)^2 = 4/pi - 1
        res = passage_product_sum(1, 1, PM1)
        assert abs(res.value - pl(-1, 4)) < 1e-8


class TestIdentityResidual:
    @pytest.mark.parametrize("moves", [PM1, M12], ids=str)
    def test_residual_small_on_grid(self, moves):
        tol = 1e-9
        for n1, n2 in [(1, 1), (1, 2), (2, 3), (3, 5)]:
            res = race_identity_residual(n1, n2, moves, TailPolicy(tolerance=tol))
            assert res.verdict == CONVERGED
            assert float(res.value) < 3 * tol

    def test_rejects_negative_drift(self):
        with pytest.raises(ValueError):
            race_identity_residual(1, 2, MoveSet(-2, 1))


class TestExpectedDuration:
    def test_unit_step_diverges(self):
        for n in (1, 2, 3):
            res = expected_duration(GameSpec(PM1, n))
            assert res.verdict == DIVERGED
            assert res.witness is not None

    def test_deterministic_exact(self):
        res = expected_duration(GameSpec(MoveSet(1, 1), 4))
        assert res.value == 4
        assert res.verdict == CONVERGED and res.tail_estimate == 0

    def test_minus12_converges(self):
        res = expected_duration(GameSpec(M12, 1))
        assert res.verdict == CONVERGED
        # independent check: exact partial sum of q^2 to k=400 (geometric tail)
        table = build_passage_table(GameSpec(M12, 1), 400)
        partial = sum((q * q for q in table.q), F(0))
        assert abs(res.value - mpf(partial.numerator) / partial.denominator) < 1e-8

    def test_zero_move_set_diverges(self):
        res = expected_duration(GameSpec(MoveSet(0, 0), 1))
        assert res.verdict == DIVERGED

    def test_negative_drift_diverges(self):
        res = expected_duration(GameSpec(MoveSet(-2, 1), 1))
        assert res.verdict == DIVERGED

    def test_positive_drift_with_zero_move(self):
        # q(1,k) = 2^-k exactly, so the sum is 1/(1 - 1/4) = 4/3
        res = expected_duration(GameSpec(MoveSet(0, 1), 1))
        assert res.verdict == CONVERGED
        assert abs(res.value - mpf(4) / 3) < 1e-9

    def test_lower_bound_when_convergent(self):
        # no race ends before n / max-move rounds
        for moves, n in [(M12, 4), (MoveSet(1, 2), 5), (MoveSet(0, 1), 3)]:
            res = expected_duration(GameSpec(moves, n))
            if res.verdict == CONVERGED:
                assert float(res.value) >= n / max(moves.a, moves.b) - 1


class TestWinWithin:
    def test_first_round(self):
        assert win_within(GameSpec(PM1, 1), 1) == F(1, 4)

    def test_matches_closed_form_exactly(self):
        spec = GameSpec(PM1, 1)
        assert win_within(spec, 200) == win_within_one(200)

    def test_nondecreasing_and_bounded_by_total(self):
        spec = GameSpec(M12, 2)
        total = win_prob_direct(spec)
        prev = F(0)
        for k in range(1, 40):
            cur = win_within(spec, k)
            assert cur >= prev
            prev = cur
        assert float(prev) <= float(total.value) + 1e-9

    def test_validation(self):
        with pytest.raises(ValueError):
            win_within(GameSpec(PM1, 1), 0)


class TestSquareSums:
    def test_unit_step_values(self):
        seq = square_sum_sequence(PM1, 3)
        assert abs(seq[0].value - pl(-1, 4)) < 1e-8
        assert abs(seq[2].value - pl(-25, F(236, 3))) < 1e-8

    def test_minus12_value(self):
        res = square_sum_value(M12, 2)
        assert abs(res.value - mpf("0.2886887304423")) < 1e-9


class TestTailHonesty:
    @pytest.mark.parametrize(
        "make",
        [
            lambda p: win_prob_squares(GameSpec(PM1, 1), p),
            lambda p: win_prob_squares(GameSpec(M12, 3), p),
            lambda p: win_prob_targets(1, 2, PM1, p),
            lambda p: expected_duration(GameSpec(M12, 1), p),
        ],
    )
    def test_doubling_stays_within_tail(self, make):
        first = make(TailPolicy())
        assert first.verdict == CONVERGED
        second = make(TailPolicy(min_k=2 * first.truncation_k))
        assert abs(second.value - first.value) <= first.tail_estimate


class TestScaledZeroDrift:
    def test_scaled_moves_match_unit_step(self):
        a = win_prob_squares(GameSpec(MoveSet(-3, 3), 7))
        b = win_prob_squares(GameSpec(PM1, 3))
        assert abs(a.value - b.value) <= a.tail_estimate + b.tail_estimate


def test_result_serialization_round_trip():
    res = win_prob_squares(GameSpec(M12, 1))
    d = res.to_json_dict()
    assert d["verdict"] == CONVERGED
    assert d["method"] == "squares"
    with mp.workdps(30):
        assert abs(mpf(d["value"]) - res.value) < mpf("1e-20")
    assert d["witness"] is None
