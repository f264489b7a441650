import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qbetting import prob_core as pc
from qbetting.errors import DivergentEntropy, InputError

from conftest import SWEEP

CORR = np.array([[0.4, 0.1], [0.1, 0.4]])


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def pmfs(n_min=2, n_max=6):
    return st.integers(n_min, n_max).flatmap(
        lambda n: arrays(float, n, elements=st.floats(0.01, 1.0))).map(lambda v: v / v.sum())


class TestOrder:
    @pytest.mark.parametrize("raw,value", [("inf", math.inf), ("-inf", -math.inf), ("2", 2.0), (0.5, 0.5)])
    def test_parse(self, raw, value):
        assert pc.Order.parse(raw).value == value

    def test_nan_rejected(self):
        with pytest.raises(InputError):
            pc.Order(float("nan"))

    def test_risk_round_trip(self):
        for a in (-8.0, -0.5, 0.3, 2.0, 7.0):
            assert abs(1.0 / pc.Order(a).risk() - a) <= 1e-12
        assert pc.Order(math.inf).risk() == 0.0

    def test_json(self):
        assert pc.Order(-math.inf).to_json() == "-inf"


class TestSgn:
    def test_values(self):
        assert pc.sgn(0) == 1
        assert pc.sgn(-3.2) == -1
        assert pc.sgn(math.inf) == 1


class TestRenyiEntropy:
    @pytest.mark.parametrize("a", SWEEP + (0.0, 1.0))
    def test_uniform(self, a):
        assert pc.renyi_entropy(np.full(4, 0.25), a) == pytest.approx(2.0, abs=1e-12)

    def test_order_two(self):
        assert pc.renyi_entropy([0.5, 0.25, 0.25], 2) == pytest.approx(math.log2(8 / 3), abs=1e-12)
        assert pc.renyi_entropy([0.5, 0.25, 0.25], 2) == pytest.approx(1.41504, abs=5e-6)

    def test_extremes(self):
        p = [0.5, 0.25, 0.25]
        assert pc.renyi_entropy(p, math.inf) == pytest.approx(1.0, abs=1e-12)
        assert pc.renyi_entropy(p, -math.inf) == pytest.approx(2.0, abs=1e-12)
        assert pc.renyi_entropy([0.5, 0.5, 0.0], 0) == pytest.approx(1.0, abs=1e-12)

    def test_shannon(self):
        assert pc.renyi_entropy([0.9, 0.1], 1) == pytest.approx(h2(0.1), abs=1e-12)

    def test_negative_order_needs_full_support(self):
        with pytest.raises(DivergentEntropy):
            pc.renyi_entropy([0.5, 0.5, 0.0], -2)

    def test_rejects_bad_pmf(self):
        with pytest.raises(InputError):
            pc.renyi_entropy([0.5, 0.6], 2)

    def test_continuity_at_one(self, rng):
        for _ in range(20):
            p = rng.dirichlet(np.ones(5))
            h1 = pc.renyi_entropy(p, 1)
            for eps in (1e-2, 1e-3):
                for a in (1 - eps, 1 + eps):
                    assert abs(pc.renyi_entropy(p, a) - h1) <= 10 * eps

    @given(pmfs())
    def test_probability_consistency(self, p):
        for a in SWEEP + (0.0, 1.0):
            assert 2 ** -pc.renyi_entropy(p, a) == pytest.approx(pc.renyi_probability(p, a), abs=1e-10)


class TestRenyiProbability:
    def test_examples(self):
        assert pc.renyi_probability([0.5, 0.5], 2) == pytest.approx(0.5, abs=1e-12)
        assert pc.renyi_probability([0.5, 0.25, 0.25], 2) == pytest.approx(3 / 8, abs=1e-12)
        assert pc.renyi_probability([1.0, 0.0], math.inf) == pytest.approx(1.0, abs=1e-12)


class TestArimoto:
    def test_correlated_pair(self):
        assert pc.arimoto_cond_entropy(np.diag([0.5, 0.5]), 2) == pytest.approx(0.0, abs=1e-12)
        assert pc.cond_renyi_probability(np.diag([0.5, 0.5]), 2) == pytest.approx(1.0, abs=1e-12)

    def test_max_order(self):
        assert pc.arimoto_cond_entropy(CORR, math.inf) == pytest.approx(-math.log2(0.8), abs=1e-12)
        assert pc.cond_renyi_probability(CORR, math.inf) == pytest.approx(0.8, abs=1e-12)

    @pytest.mark.parametrize("a", SWEEP + (1.0,))
    def test_independent(self, a, rng):
        px, pg = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(2))
        j = np.outer(px, pg)
        assert pc.arimoto_cond_entropy(j, a) == pytest.approx(pc.renyi_entropy(px, a), abs=1e-10)
        assert pc.cond_renyi_probability(j, a) == pytest.approx(pc.renyi_probability(px, a), abs=1e-10)
        assert pc.arimoto_mi(j, a) == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("a", (0.0, 0.5, 1.0, 2.0, 8.0, math.inf))
    def test_perfect_correlation(self, a):
        assert pc.arimoto_mi(np.diag([0.5, 0.5]), a) == pytest.approx(1.0, abs=1e-12)

    def test_shannon_bsc(self):
        j = 0.5 * np.array([[0.9, 0.1], [0.1, 0.9]])
        assert pc.arimoto_mi(j, 1) == pytest.approx(1 - h2(0.1), abs=1e-12)
        assert pc.arimoto_mi(j, 1) == pytest.approx(0.53100, abs=5e-6)
        assert pc.shannon_mi(j) == pytest.approx(1 - h2(0.1), abs=1e-12)

    def test_nonnegative(self, rng):
        worst = math.inf
        for i in range(1000):
            nx, ng = rng.integers(2, 5, size=2)
            j = rng.dirichlet(np.ones(nx * ng)).reshape(nx, ng)
            for a in SWEEP + (1.0,):
                worst = min(worst, pc.arimoto_mi(j, a))
        assert worst >= -1e-10

    def test_data_processing_shannon(self, rng):
        for _ in range(200):
            j = rng.dirichlet(np.ones(9)).reshape(3, 3)
            post = rng.dirichlet(np.ones(3), size=3)
            assert pc.shannon_mi(j @ post) <= pc.shannon_mi(j) + 1e-9

    def test_marginals(self):
        assert np.allclose(pc.marginal_x(CORR), [0.5, 0.5])
        assert np.allclose(pc.condition_on_x(CORR), [[0.8, 0.2], [0.2, 0.8]])
