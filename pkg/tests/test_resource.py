import math

import numpy as np
import pytest

from qbetting import divergences as dv
from qbetting import games as gm
from qbetting import quantum_core as qc
from qbetting import resource as rs
from qbetting.errors import InputError

KET0, KET1 = qc.pure_state([1, 0]), qc.pure_state([0, 1])
BASIS = np.array([KET0, KET1])
Z = qc.computational_povm(2)
TRINE = qc.trine_povm()
FLAT = qc.uninformative_povm([0.3, 0.7], 2)
FINITE = (-8.0, -2.0, -0.5, 0.5, 2.0, 8.0)


def noisy(v, q=(0.5, 0.5)):
    return (1 - v) * qc.uninformative_povm(list(q), 2) + v * Z


def depolarized(v):
    return qc.simulate_measurement(Z, np.array([[1 - v / 2, v / 2], [v / 2, 1 - v / 2]]))


class TestRobustnessWeight:
    @pytest.mark.parametrize("m,r,w", [(FLAT, 0.0, 0.0), (Z, 1.0, 1.0), (TRINE, 1.0, 1.0), (noisy(0.3), 0.3, 0.3)])
    def test_examples(self, m, r, w):
        assert rs.robustness_informativeness(m) == pytest.approx(r, abs=1e-12)
        assert rs.weight_informativeness(m) == pytest.approx(w, abs=1e-12)
        assert rs.robustness_bisection(m) == pytest.approx(r, abs=1e-9)
        assert rs.weight_bisection(m) == pytest.approx(w, abs=1e-9)

    def test_oracles(self, rng):
        for _ in range(100):
            d, o = int(rng.integers(2, 5)), int(rng.integers(2, 7))
            m = qc.random_povm(rng, d, o)
            r, w = rs.robustness_informativeness(m), rs.weight_informativeness(m)
            assert abs(r - rs.robustness_bisection(m)) <= 1e-9
            assert abs(w - rs.weight_bisection(m)) <= 1e-9
            assert r >= 0 and 0 <= w <= 1

    def test_reports_reverify(self, rng):
        m = qc.random_povm(rng, 3, 4)
        for rep in (rs.robustness_report(m), rs.weight_report(m)):
            assert rs.reverify(rep, m) == pytest.approx(rep.value, abs=1e-8)
            assert rep.value >= 0


class TestMeasuredDivergence:
    def test_self(self, rng):
        m = qc.random_povm(rng, 2, 3)
        states = np.array([qc.random_state(rng, 2) for _ in range(3)])
        assert rs.measured_sibson_div(m, m, states, 2.0) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("a", (-2.0, 0.5, 2.0, math.inf))
    def test_against_uninformative_row(self, a, rng):
        m = qc.random_povm(rng, 2, 3)
        states = np.array([qc.random_state(rng, 2) for _ in range(2)])
        rows = qc.born_cond_pmf(m, states)
        n = qc.uninformative_povm(rows[0], 2)
        assert rs.measured_sibson_div(m, n, states, a) == pytest.approx(dv.renyi_div(rows[1], rows[0], a), abs=1e-10)

    def test_data_processing(self, rng):
        for _ in range(20):
            m, n = qc.random_povm(rng, 2, 3), qc.random_povm(rng, 2, 3)
            states = np.array([qc.random_state(rng, 2) for _ in range(3)])
            post = rng.dirichlet(np.ones(2), size=3)
            for a in (-2.0, 0.5, 2.0):
                before = rs.measured_sibson_div(m, n, states, a)
                after = rs.measured_sibson_div(qc.simulate_measurement(m, post), qc.simulate_measurement(n, post),
                                               states, a)
                assert after <= before + 1e-9


class TestInformativeness:
    @pytest.mark.parametrize("a", FINITE + (math.inf, -math.inf))
    def test_uninformative(self, a, rng):
        states = np.array([qc.random_state(rng, 2) for _ in range(3)])
        assert rs.informativeness_measure(FLAT, states, a) == pytest.approx(0.0, abs=1e-9)

    def test_projective_basis(self):
        assert rs.informativeness_measure(Z, BASIS, math.inf) == pytest.approx(1.0, abs=1e-12)
        assert rs.informativeness_measure(Z, BASIS, math.inf) == pytest.approx(
            math.log2(1 + rs.robustness_informativeness(Z)), abs=1e-12)

    @pytest.mark.parametrize("a", FINITE + (math.inf, -math.inf))
    def test_capacity_and_gap(self, a, rng):
        for _ in range(3):
            m = qc.random_povm(rng, 2, 3)
            w = qc.born_cond_pmf(m, np.array([qc.random_state(rng, 2) for _ in range(3)]))
            mm = rs.informativeness_minimax(w, a)
            assert abs(mm.gap) <= 1e-6
            assert mm.min_max == pytest.approx(dv.renyi_capacity(w, a)[0], abs=1e-6)

    def test_order_zero(self):
        with pytest.raises(InputError):
            rs.informativeness_minimax(np.eye(2), 0.0)


class TestAlphaMeasure:
    @pytest.mark.parametrize("a", FINITE + (math.inf, -math.inf))
    def test_uninformative(self, a):
        assert rs.alpha_measure(FLAT, a) == pytest.approx(0.0, abs=1e-12)

    def test_extremes(self, rng):
        m = qc.random_povm(rng, 3, 4)
        assert rs.alpha_measure(m, math.inf) == pytest.approx(rs.robustness_informativeness(m), abs=1e-12)
        assert rs.alpha_measure(m, -math.inf) == pytest.approx(rs.weight_informativeness(m), abs=1e-12)

    @pytest.mark.parametrize("a", FINITE)
    def test_witness_reverifies(self, a, rng):
        m = qc.random_povm(np.random.default_rng(7), 2, 3)
        rep = rs.alpha_measure_report(m, a, seed=1)
        assert rs.reverify(rep, m, a) == pytest.approx(rep.value, abs=1e-8)
        assert rep.value >= 0 and (a > 0 or rep.value <= 1)

    def test_rank_deficient_negative_order(self):
        rep = rs.alpha_measure_report(TRINE, -2.0)
        assert rep.value == 1.0 and rep.method is rs.Method.CLOSED_FORM
        w = qc.born_cond_pmf(TRINE, rep.achiever["states"])
        assert np.all(w.min(axis=0) <= 1e-12)

    @pytest.mark.parametrize("a", (-2.0, -0.5, 0.5, 2.0))
    def test_betting_advantage(self, a):
        m = qc.random_povm(np.random.default_rng(7), 2, 3)
        rep = rs.alpha_measure_report(m, a, seed=1)
        # the witness prior maximizes Sibson's MI; the game needs Arimoto's maximizer
        _, prior = dv.renyi_capacity(qc.born_cond_pmf(m, rep.achiever["states"]), a)
        e = qc.Ensemble(rep.achiever["states"], prior)
        g = gm.QsbGame.constant(a, e)
        ratio = gm.qsb_value(g, m, a, numeric=True) / gm.no_side_information_value(g, a, numeric=True)
        expected = 1 + rep.value if a > 0 else 1 - rep.value
        assert ratio == pytest.approx(expected, abs=1e-5)

    def test_depolarizing_decreases(self):
        vals = [rs.alpha_measure(depolarized(v), math.inf) for v in np.linspace(0, 1, 6)]
        assert np.allclose(vals, 1 - np.linspace(0, 1, 6), atol=1e-12)
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_report_json(self):
        out = rs.robustness_report(Z).to_json()
        assert out["method"] == "closed_form" and out["value"] == pytest.approx(1.0)


class TestMonotoneSuite:
    def test_uninformative(self):
        rep = rs.monotone_suite(FLAT, trials=5, seed=0, alphas=(2.0, math.inf))
        assert rep.passed and all(v == 0 for v in rep.values.values())

    def test_collapse_is_free(self, rng):
        m = qc.random_povm(rng, 2, 3)
        collapsed = qc.simulate_measurement(m, np.ones((3, 1)))
        assert rs.alpha_measure(collapsed, 2.0) == 0.0

    def test_small_run(self):
        m = qc.random_povm(np.random.default_rng(3), 2, 3)
        rep = rs.monotone_suite(m, trials=5, seed=0, alphas=(-2.0, 2.0, math.inf, -math.inf))
        assert rep.passed and rep.faithful and rep.checks == 20
