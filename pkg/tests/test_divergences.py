import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qbetting import divergences as dv
from qbetting import prob_core as pc
from qbetting.errors import InputError
from qbetting.simplex import simplex_grid

from conftest import SWEEP

V = dv.CrdVariant
CORR = np.array([[0.4, 0.1], [0.1, 0.4]])
SIBSON_CORR_2 = 0.4436066514756146


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def pmf_pairs(n_max=5):
    def pair(n):
        el = arrays(float, n, elements=st.floats(0.01, 1.0))
        return st.tuples(el, el).map(lambda t: (t[0] / t[0].sum(), t[1] / t[1].sum()))
    return st.integers(2, n_max).flatmap(pair)


class TestRenyiDiv:
    def test_extremes(self):
        p, q = [0.5, 0.5], [0.25, 0.75]
        assert dv.renyi_div(p, q, math.inf) == pytest.approx(1.0, abs=1e-12)
        assert dv.renyi_div(p, q, -math.inf) == pytest.approx(-math.log2(2 / 3), abs=1e-12)
        assert dv.renyi_div(p, q, -math.inf) == pytest.approx(0.58496, abs=5e-6)

    @pytest.mark.parametrize("a", SWEEP + (0.0, 1.0))
    def test_self_is_zero(self, a, rng):
        p = rng.dirichlet(np.ones(4))
        assert dv.renyi_div(p, p, a) == pytest.approx(0.0, abs=1e-12)

    def test_absolute_continuity(self):
        assert dv.renyi_div([0.5, 0.5], [1.0, 0.0], 2.0) == math.inf

    def test_alphabet_mismatch(self):
        with pytest.raises(InputError):
            dv.renyi_div([0.5, 0.5], [0.2, 0.3, 0.5], 2.0)

    @given(pmf_pairs())
    def test_nonnegative(self, pq):
        p, q = pq
        for a in SWEEP + (1.0,):
            assert dv.renyi_div(p, q, a) >= -1e-12


class TestConditionalDivergences:
    @pytest.mark.parametrize("variant", list(V))
    @pytest.mark.parametrize("a", SWEEP + (1.0,))
    def test_identical_is_zero(self, variant, a, rng):
        P = rng.dirichlet(np.ones(3), size=2)
        assert dv.cond_renyi_div(variant, P, P, rng.dirichlet(np.ones(2)), a) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("a", SWEEP + (1.0,))
    def test_sibson_against_joint(self, a, rng):
        P, q, px = rng.dirichlet(np.ones(3), size=3), rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
        lhs = dv.cond_renyi_div(V.SIBSON, P, q, px, a)
        rhs = dv.renyi_div((px[:, None] * P).ravel(), np.outer(px, q).ravel(), a)
        assert lhs == pytest.approx(rhs, abs=1e-10)

    @pytest.mark.parametrize("a", SWEEP + (1.0,))
    def test_csiszar_is_average(self, a, rng):
        P, Q, px = rng.dirichlet(np.ones(3), size=3), rng.dirichlet(np.ones(3), size=3), rng.dirichlet(np.ones(3))
        rhs = sum(px[x] * dv.renyi_div(P[x], Q[x], a) for x in range(3))
        assert dv.cond_renyi_div(V.CSISZAR, P, Q, px, a) == pytest.approx(rhs, abs=1e-10)

    def test_variant_parse(self):
        assert V.parse("BLP") is V.BLP
        assert V.parse("sibson") is V.SIBSON
        with pytest.raises(InputError):
            V.parse("petz")

    def test_sibson_identity_negative_orders(self, rng):
        for a in (-8.0, -2.0, -0.5):
            P, Q, px = rng.dirichlet(np.ones(3), size=3), rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
            qs = dv.sibson_minimizer(P, px, a)
            lhs = dv.cond_renyi_div(V.SIBSON, P, Q, px, a)
            rhs = dv.cond_renyi_div(V.SIBSON, P, qs, px, a) + dv.renyi_div(qs, Q, a)
            assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_orderings(self, rng):
        for a in SWEEP + (0.3, 1.0):
            for _ in range(20):
                P, Q, px = rng.dirichlet(np.ones(3), size=2), rng.dirichlet(np.ones(3), size=2), rng.dirichlet(np.ones(2))
                s, c, b = (dv.cond_renyi_div(v, P, Q, px, a) for v in (V.SIBSON, V.CSISZAR, V.BLP))
                if a <= 0:
                    assert b <= c + 1e-9 and c <= s + 1e-9
                elif a <= 1:
                    assert b <= s + 1e-9 and s <= c + 1e-9
                else:
                    assert c <= b + 1e-9 and b <= s + 1e-9


class TestVariantMI:
    @pytest.mark.parametrize("variant", list(V))
    def test_independent(self, variant, rng):
        j = np.outer(rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(2)))
        for a in (-2.0, 0.5, 2.0, math.inf):
            assert dv.variant_mi(variant, j, a) == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.parametrize("variant", list(V))
    def test_shannon_at_one(self, variant, rng):
        j = rng.dirichlet(np.ones(6)).reshape(3, 2)
        assert dv.variant_mi(variant, j, 1.0) == pytest.approx(pc.shannon_mi(j), abs=1e-8)

    def test_sibson_against_grid(self):
        P, px = pc.condition_on_x(CORR), pc.marginal_x(CORR)
        grid = simplex_grid(2, 1e-3)
        oracle = min(dv.cond_renyi_div(V.SIBSON, P, q, px, 2.0) for q in grid if q.min() > 0)
        value = dv.variant_mi(V.SIBSON, CORR, 2.0)
        assert value == pytest.approx(SIBSON_CORR_2, abs=1e-12)
        assert value <= oracle + 1e-12
        assert oracle - value <= 1e-5

    def test_mi_orderings(self):
        joints = [np.random.default_rng(i).dirichlet(np.ones(6)).reshape(2, 3) for i in range(6)]
        for a in (-2.0, 0.5, 2.0):
            for r in dv.mutual_informations(joints, a, seed=0):
                s, c, b = r[V.SIBSON], r[V.CSISZAR], r[V.BLP]
                if a < 0:
                    assert b <= c + 1e-9 and c <= s + 1e-9
                elif a < 1:
                    assert b <= s + 1e-9 and s <= c + 1e-9
                else:
                    assert c <= b + 1e-9 and b <= s + 1e-9


class TestCapacity:
    @pytest.mark.parametrize("a", (0.5, 1.0, 2.0, math.inf))
    def test_noiseless(self, a):
        c, p = dv.renyi_capacity(np.eye(3), a)
        assert c == pytest.approx(math.log2(3), abs=1e-8)
        assert np.allclose(p, 1 / 3, atol=1e-4)

    @pytest.mark.parametrize("a", (-2.0, -math.inf))
    def test_noiseless_negative_orders_diverge(self, a):
        assert dv.renyi_capacity(np.eye(3), a)[0] == math.inf

    @pytest.mark.parametrize("a", (-2.0, 0.5, 2.0, math.inf, -math.inf))
    def test_useless_channel(self, a):
        assert dv.renyi_capacity(np.array([[0.3, 0.7], [0.3, 0.7]]), a)[0] == pytest.approx(0.0, abs=1e-9)

    def test_bsc_shannon(self):
        c, p = dv.renyi_capacity(np.array([[0.9, 0.1], [0.1, 0.9]]), 1.0)
        assert c == pytest.approx(1 - h2(0.1), abs=1e-8)
        assert np.allclose(p, 0.5, atol=1e-6)

    def test_arimoto_equals_sibson(self, rng):
        for a in SWEEP:
            W = rng.dirichlet(np.ones(3), size=3)
            assert dv.renyi_capacity(W, a)[0] == pytest.approx(dv.sibson_capacity(W, a)[0], abs=1e-6)

    def test_capacity_dominates_inputs(self, rng):
        W = rng.dirichlet(np.ones(3), size=2)
        for a in (-2.0, 0.5, 2.0):
            c, _ = dv.renyi_capacity(W, a)
            for _ in range(20):
                px = rng.dirichlet(np.ones(2))
                assert pc.arimoto_mi(pc.joint_from(px, W), a) <= c + 1e-9

    def test_order_zero_rejected(self):
        with pytest.raises(InputError):
            dv.renyi_capacity(np.eye(2), 0.0)
