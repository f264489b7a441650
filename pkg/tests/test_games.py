import math

import numpy as np
import pytest

from qbetting import games as gm
from qbetting import prob_core as pc
from qbetting import quantum_core as qc
from qbetting.errors import InputError

KET0, KET1 = qc.pure_state([1, 0]), qc.pure_state([0, 1])
PAIR = qc.Ensemble(np.array([KET0, KET1]), np.array([0.5, 0.5]))
Z = qc.computational_povm(2)
X_GATE = np.array([[0, 1], [1, 0]])
ORDERS = (-8.0, -2.0, -0.5, 0.5, 2.0, 8.0, math.inf, -math.inf)


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def flat(q=(0.4, 0.6)):
    return qc.uninformative_povm(list(q), 2)


class TestInformation:
    @pytest.mark.parametrize("a", ORDERS + (1.0,))
    def test_uninformative(self, a):
        e, _, _ = qc.random_instance(4)
        assert gm.arimoto_mi_quantum(e, qc.uninformative_povm([0.2, 0.3, 0.5], 2), a) == pytest.approx(0, abs=1e-10)

    @pytest.mark.parametrize("a", (0.0, 0.5, 1.0, 2.0, math.inf))
    def test_perfect_pair(self, a):
        assert gm.arimoto_mi_quantum(PAIR, Z, a) == pytest.approx(1.0, abs=1e-12)

    def test_shannon(self):
        e, m, _ = qc.random_instance(9)
        assert gm.arimoto_mi_quantum(e, m, 1.0) == pytest.approx(pc.shannon_mi(qc.born_joint(e, m)), abs=1e-12)

    @pytest.mark.parametrize("a", ORDERS)
    def test_identity_channel(self, a):
        e, m, _ = qc.random_instance(2)
        assert gm.noisy_arimoto_mi(e, m, qc.identity_channel(2), a) == pytest.approx(gm.arimoto_mi_quantum(e, m, a))

    @pytest.mark.parametrize("a", ORDERS)
    def test_constant_channel(self, a, rng):
        e, m, _ = qc.random_instance(2)
        n = qc.replacement_channel(qc.random_state(rng, 2), 2)
        assert gm.noisy_arimoto_mi(e, m, n, a) == pytest.approx(0.0, abs=1e-10)

    def test_depolarized_pair(self):
        v = gm.noisy_arimoto_mi(PAIR, Z, qc.depolarizing_channel(2, 0.5), 1.0)
        oracle = 1 - h2(0.25)
        assert 0 < v < 1
        assert v == pytest.approx(oracle, abs=1e-12)

    def test_max_noisy_identity(self):
        v, m = gm.max_noisy_arimoto_mi(PAIR, None, 2.0, seed=0)
        assert v == pytest.approx(1.0, abs=1e-6)
        qc.as_povm(m)

    def test_max_noisy_dominates(self):
        e, m, n = qc.random_instance(5)
        v, _ = gm.max_noisy_arimoto_mi(e, n, 2.0, seed=0)
        assert v >= gm.noisy_arimoto_mi(e, m, n, 2.0) - 1e-9

    def test_max_noisy_infinite_order(self):
        with pytest.raises(InputError):
            gm.max_noisy_arimoto_mi(PAIR, None, math.inf)

    @pytest.mark.parametrize("a", ORDERS + (1.0,))
    def test_simulation_monotone(self, a, rng):
        for seed in range(10):
            e, m, _ = qc.random_instance(seed)
            post = rng.dirichlet(np.ones(3), size=3)
            sim = qc.simulate_measurement(m, post)
            assert gm.arimoto_mi_quantum(e, sim, a) <= gm.arimoto_mi_quantum(e, m, a) + 1e-9


class TestGameValues:
    @pytest.mark.parametrize("a", ORDERS)
    def test_conditional_renyi_probability(self, a):
        e, m, _ = qc.random_instance(3)
        g = gm.QsbGame.constant(a, e, 1.3)
        expected = pc.sgn(a) * 1.3 * pc.cond_renyi_probability(qc.born_joint(e, m), a)
        assert gm.qsb_value(g, m, a) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("a", ORDERS)
    def test_uninformative_is_prior_only(self, a):
        e, _, _ = qc.random_instance(3)
        g = gm.QsbGame.constant(a, e)
        expected = pc.sgn(a) * pc.renyi_probability(e.probs, a)
        assert gm.qsb_value(g, qc.uninformative_povm([0.5, 0.5], 2), a) == pytest.approx(expected, abs=1e-12)
        assert gm.no_side_information_value(g, a) == pytest.approx(expected, abs=1e-12)
        assert gm.best_free_qsb_value(g, gm.FreeSet.uninformative(), a) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_discrimination_and_exclusion_limits(self, seed):
        e, m, _ = qc.random_instance(seed)
        succ, err = gm.discrimination_exclusion(e, m)
        assert gm.qsb_value(gm.QsbGame.constant(math.inf, e), m, math.inf) == pytest.approx(succ, abs=1e-9)
        assert gm.qsb_value(gm.QsbGame.constant(-math.inf, e), m, -math.inf) == pytest.approx(-err, abs=1e-9)
        assert gm.qsb_value(gm.QsbGame.constant(math.inf, e), m, math.inf, numeric=True) == pytest.approx(succ, abs=1e-9)

    def test_explicit_free_sets(self):
        e, m, _ = qc.random_instance(6)
        for a in (-2.0, 2.0):
            g = gm.QsbGame.constant(a, e)
            own = gm.qsb_value(g, m, a)
            assert gm.best_free_qsb_value(g, gm.FreeSet.measurements([m, flat()]), a) >= own - 1e-12
            single = gm.best_free_qsb_value(g, gm.FreeSet.measurements([flat()]), a)
            assert single == pytest.approx(gm.qsb_value(g, flat(), a), abs=0)

    def test_empty_free_set(self):
        with pytest.raises(InputError):
            gm.FreeSet.measurements([])

    @pytest.mark.parametrize("a", ORDERS)
    def test_noisy_game(self, a, rng):
        e, m, n = qc.random_instance(8)
        g = gm.QsbGame.constant(a, e)
        assert gm.nqsb_value(g, m, qc.identity_channel(2), a) == pytest.approx(gm.qsb_value(g, m, a), abs=1e-12)
        const = qc.replacement_channel(qc.random_state(rng, 2), 2)
        assert gm.nqsb_value(g, m, const, a) == pytest.approx(gm.no_side_information_value(g, a), abs=1e-10)
        direct = gm.qsb_value(gm.QsbGame(g.odds, qc.Ensemble(
            np.array([qc.apply_channel(n, r) for r in e.states]), e.probs)), m, a)
        assert gm.nqsb_value(g, m, n, a) == pytest.approx(direct, abs=1e-10)
        assert gm.nqsb_value(g, m, n, a) == pytest.approx(gm.qsb_value(g, qc.adjoint_apply(n, m), a), abs=1e-10)

    def test_channel_betting(self, rng):
        prior = np.array([0.3, 0.7])
        for a in (0.5, 2.0, math.inf):
            odds = np.ones(2)
            same = [qc.bit_flip_channel(0.2)] * 2
            assert gm.qcb_value(odds, prior, same, KET0, Z, a) == pytest.approx(pc.renyi_probability(prior, a))
            flip = [qc.identity_channel(2), qc.unitary_channel(X_GATE)]
            assert gm.qcb_value(odds, prior, flip, KET0, Z, a) == pytest.approx(1.0, abs=1e-12)
        chans = [qc.random_channel(rng, 2, 2) for _ in range(2)]
        rho, m = qc.random_state(rng, 2), qc.random_povm(rng, 2, 2)
        succ, _ = gm.discrimination_exclusion(gm.induced_ensemble(prior, chans, rho), m)
        assert gm.qcb_value(np.ones(2), prior, chans, rho, m, math.inf) == pytest.approx(succ, abs=1e-12)


class TestDiscrimination:
    def test_orthogonal(self):
        assert gm.discrimination_exclusion(PAIR, Z) == pytest.approx((1.0, 0.0))

    def test_uninformative(self):
        for K in (2, 3, 4):
            e = qc.Ensemble(np.array([KET0] * K), np.full(K, 1 / K))
            succ, err = gm.discrimination_exclusion(e, qc.uninformative_povm([0.25, 0.75], 2))
            assert succ == pytest.approx(1 / K) and err == pytest.approx(1 / K)

    @pytest.mark.parametrize("seed", range(20))
    def test_bruteforce(self, seed):
        e, m, _ = qc.random_instance(seed, counts=(4, 4, 2))
        assert gm.cpp_bruteforce(e, m) == pytest.approx(gm.discrimination_exclusion(e, m), abs=1e-12)


class TestGaps:
    @pytest.mark.parametrize("a", ORDERS)
    def test_uninformative_gap_is_information(self, a):
        e, m, _ = qc.random_instance(1)
        gap = gm.arimoto_gap("measurement", {"ensemble": e, "povm": m}, gm.FreeSet.uninformative(), a)
        assert gap == pytest.approx(gm.arimoto_mi_quantum(e, m, a))

    def test_membership(self):
        e, m, _ = qc.random_instance(1)
        fixed = {"ensemble": e, "povm": m}
        assert gm.arimoto_gap("measurement", fixed, gm.FreeSet.measurements([m, flat()]), 2.0) == pytest.approx(0.0)
        assert gm.arimoto_gap("measurement", fixed, gm.FreeSet.measurements([m, Z]), 2.0) <= 1e-12

    def test_two_povm_enumeration(self, rng):
        e, m, _ = qc.random_instance(11)
        m1, m2 = qc.random_povm(rng, 2, 2), qc.random_povm(rng, 2, 3)
        for a in (-2.0, 0.5, 2.0):
            expected = gm.arimoto_mi_quantum(e, m, a) - max(gm.arimoto_mi_quantum(e, m1, a),
                                                            gm.arimoto_mi_quantum(e, m2, a))
            gap = gm.arimoto_gap("measurement", {"ensemble": e, "povm": m}, gm.FreeSet.measurements([m1, m2]), a)
            assert gap == pytest.approx(expected, abs=1e-14)

    def test_state_gap(self, rng):
        prior = np.array([0.5, 0.5])
        chans = [qc.identity_channel(2), qc.unitary_channel(X_GATE)]
        fixed = {"prior": prior, "channels": chans, "state": KET0, "povm": Z}
        free = gm.FreeSet.states([np.eye(2) / 2])
        assert gm.arimoto_gap("state", fixed, free, 2.0) == pytest.approx(1.0, abs=1e-12)

    def test_wrong_free_kind(self):
        e, m, _ = qc.random_instance(1)
        with pytest.raises(InputError):
            gm.arimoto_gap("measurement", {"ensemble": e, "povm": m}, gm.FreeSet.constant_channels(), 2.0)


class TestResultChecks:
    @pytest.mark.parametrize("a", ORDERS)
    def test_uninformative_measurement_check(self, a):
        e, _, _ = qc.random_instance(2)
        r = gm.result_check("R1", {"ensemble": e, "povm": flat()}, a)
        assert r.lhs == pytest.approx(0.0, abs=1e-10) and r.rhs == pytest.approx(0.0, abs=1e-9) and r.passed

    def test_projective_discrimination_check(self):
        r = gm.result_check("R1", {"ensemble": PAIR, "povm": Z}, math.inf)
        assert r.lhs == pytest.approx(1.0, abs=1e-12) and r.passed

    def test_classical_shannon_check(self):
        j = 0.5 * np.array([[0.9, 0.1], [0.1, 0.9]])
        r = gm.result_check("R5", {"joint": j}, 1.0)
        assert r.lhs == pytest.approx(1 - h2(0.1), abs=1e-12)
        assert r.rhs == pytest.approx(1 - h2(0.1), abs=1e-8)

    @pytest.mark.parametrize("a", (-2.0, 0.5, 2.0))
    def test_random_measurement_check(self, a):
        e, m, _ = qc.random_instance(21)
        r = gm.result_check("R1", {"ensemble": e, "povm": m}, a, seed=21)
        assert r.passed and r.abs_err <= 1e-6

    def test_explicit_free_measurements_check(self, rng):
        e, m, _ = qc.random_instance(22)
        free = gm.FreeSet.measurements([qc.random_povm(rng, 2, 2), flat()])
        r = gm.result_check("R3", {"ensemble": e, "povm": m, "free": free}, -2.0, seed=22)
        assert r.passed

    def test_report_json(self):
        r = gm.result_check("R5", {"joint": np.array([[0.3, 0.2], [0.1, 0.4]])}, math.inf)
        out = r.to_json()
        assert out["alpha"] == "inf" and out["pass"] is True
        assert set(out) == {"result", "alpha", "lhs", "rhs", "abs_err", "pass", "seed"}
