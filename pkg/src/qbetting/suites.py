"""Seeded verification suites for every equality and ordering the package certifies.

Each suite returns a ``SuiteReport`` listing one ``Check`` per comparison,
with the instance (seed, index, order) that produced it. Suites are
deterministic given their arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import betting as bt
from . import divergences as dv
from . import games as gm
from . import prob_core as pc
from . import quantum_core as qc
from . import resource as rs
from .errors import QBettingError

SWEEP = (-8.0, -2.0, -0.5, 0.5, 2.0, 8.0, math.inf, -math.inf)
FINITE_SWEEP = (-8.0, -2.0, -0.5, 0.5, 2.0, 8.0)
REGIMES = {
    "negative": (-math.inf, -8.0, -2.0, -0.5, 0.0),
    "unit": (0.0, 0.3, 0.5, 0.8, 1.0),
    "above_one": (1.0, 1.5, 2.0, 8.0, math.inf),
}
RISKS = (-3.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0)


@dataclass
class Check:
    name: str
    passed: bool
    error: float
    tol: float
    instance: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    suite: str
    seed: int
    trials: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def add(self, name, error, tol, **instance):
        error = float(error)
        self.checks.append(Check(name, bool(error <= tol), error, tol, instance))

    def add_flag(self, name, ok, **instance):
        self.checks.append(Check(name, bool(ok), 0.0 if ok else 1.0, 0.0, instance))

    def worst(self, name=None) -> float:
        errs = [c.error for c in self.checks if name is None or c.name == name]
        return max(errs, default=0.0)

    def summary(self) -> dict:
        names = sorted({c.name for c in self.checks})
        return {
            n: {
                "checks": sum(c.name == n for c in self.checks),
                "failed": sum(c.name == n and not c.passed for c in self.checks),
                "worst_error": self.worst(n),
            }
            for n in names
        }

    def to_json(self) -> dict:
        from .serialization import to_jsonable

        return {
            "suite": self.suite,
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "summary": to_jsonable(self.summary()),
            "failures": to_jsonable(self.failures),
        }


def _guard(report: SuiteReport, name: str, fn, **instance):
    """Run ``fn``; a package error becomes a failed check naming the instance."""
    try:
        return fn()
    except QBettingError as exc:
        report.checks.append(Check(name, False, math.inf, 0.0, instance, {"error": f"{type(exc).__name__}: {exc}"}))
        return None


def _report_check(report: SuiteReport, name: str, which: str, inst: dict, a, index: int, **kw):
    rep = _guard(report, name, lambda: gm.result_check(which, inst, a, **kw), index=index, alpha=a)
    if rep is not None:
        tol = gm.NESTED_TOL if which == "R2" or (which == "R3" and "channel" in inst) else gm.SINGLE_TOL
        tol = kw.get("tol") or tol
        report.add(name, rep.abs_err, tol, index=index, alpha=a, seed=rep.seed)


def _orders(alphas, index, default):
    """All requested orders, or the default sweep cycled by instance."""
    if alphas:
        return list(alphas)
    return [default[index % len(default)]]


# games ------------------------------------------------------------------------


def result1(seed: int = 0, trials: int = 50, tol: float | None = None, alphas=None) -> SuiteReport:
    rep = SuiteReport("result1", seed, trials)
    for i in range(trials):
        e, m, _ = qc.random_instance(seed + i)
        for a in alphas or SWEEP:
            _report_check(rep, "result1", "R1", {"ensemble": e, "povm": m}, a, i, seed=seed + i, tol=tol)
    return rep


def result2(seed: int = 0, trials: int = 20, tol: float | None = None, alphas=None) -> SuiteReport:
    rep = SuiteReport("result2", seed, trials)
    for i in range(trials):
        e, _, n = qc.random_instance(seed + i)
        for a in _orders(alphas, i, FINITE_SWEEP):
            _report_check(rep, "result2", "R2", {"ensemble": e, "channel": n}, a, i, seed=seed + i, tol=tol)
    return rep


def result3(seed: int = 0, trials: int = 20, tol: float | None = None, alphas=None) -> SuiteReport:
    rep = SuiteReport("result3", seed, trials)
    for i in range(trials):
        e, m, n = qc.random_instance(seed + i)
        rng = np.random.default_rng(10_000 + seed + i)
        free_m = [qc.random_povm(rng, 2, 2) for _ in range(3)]
        free_n = [qc.random_channel(rng, 2, 2) for _ in range(2)]
        for a in alphas or SWEEP:
            _report_check(rep, "result3_measurements_explicit", "R3", {"ensemble": e, "povm": m, "free": free_m},
                          a, i, seed=seed + i, tol=tol)
            _report_check(rep, "result3_measurements_uninformative", "R3",
                          {"ensemble": e, "povm": m, "free": gm.FreeSet.uninformative()}, a, i, seed=seed + i, tol=tol)
        for a in _orders(alphas, i, FINITE_SWEEP):
            _report_check(rep, "result3_channels_explicit", "R3", {"ensemble": e, "channel": n, "free": free_n},
                          a, i, seed=seed + i, tol=tol)
            _report_check(rep, "result3_channels_constant", "R3",
                          {"ensemble": e, "channel": n, "free": gm.FreeSet.constant_channels()}, a, i,
                          seed=seed + i, tol=tol)
    return rep


def result4(seed: int = 0, trials: int = 20, tol: float | None = None, alphas=None) -> SuiteReport:
    rep = SuiteReport("result4", seed, trials)
    for i in range(trials):
        rng = np.random.default_rng(20_000 + seed + i)
        _, m, _ = qc.random_instance(seed + i)
        inst = {
            "prior": rng.dirichlet(np.ones(3)),
            "channels": [qc.random_channel(rng, 2, 2) for _ in range(3)],
            "state": qc.random_state(rng, 2),
            "povm": m,
            "free_states": [qc.random_state(rng, 2) for _ in range(3)],
        }
        pair = dict(inst, free_measurements=[qc.random_povm(rng, 2, 2) for _ in range(2)])
        for a in alphas or SWEEP:
            _report_check(rep, "result4_states", "R4", inst, a, i, seed=seed + i, tol=tol)
            _report_check(rep, "result4_state_measurement_pairs", "R4", pair, a, i, seed=seed + i, tol=tol)
    return rep


def result5(seed: int = 0, trials: int = 100, tol: float | None = None, alphas=None) -> SuiteReport:
    tol = 1e-8 if tol is None else tol
    rep = SuiteReport("result5", seed, trials)
    rng = np.random.default_rng(seed)
    for i in range(trials):
        nx, ng = rng.integers(2, 5, size=2)
        j = rng.dirichlet(np.ones(nx * ng)).reshape(nx, ng)
        for a in alphas or SWEEP:
            _report_check(rep, "result5", "R5", {"joint": j}, a, i, seed=seed + i, tol=tol)
        one = _guard(rep, "side_information_shannon", lambda: gm.result_check("R5", {"joint": j}, 1.0, seed=seed + i), index=i)
        if one is not None:
            rep.add("side_information_shannon", max(one.abs_err, abs(one.rhs - pc.shannon_mi(j))), tol, index=i, alpha=1.0)
    return rep


# resource ---------------------------------------------------------------------


def result6(seed: int = 0, trials: int = 30, tol: float | None = None, alphas=None) -> SuiteReport:
    tol = rs.MINIMAX_TOL if tol is None else tol
    rep = SuiteReport("result6", seed, trials)
    for i in range(trials):
        rng = np.random.default_rng(30_000 + seed + i)
        m = qc.random_povm(rng, 2, 3)
        states = np.array([qc.random_state(rng, 2) for _ in range(3)])
        w = qc.born_cond_pmf(m, states)
        for a in alphas or SWEEP:
            mm = _guard(rep, "minimax_gap", lambda: rs.informativeness_minimax(w, a, seed=seed + i, tol=math.inf),
                        index=i, alpha=a)
            cap = _guard(rep, "measure_equals_capacity", lambda: dv.renyi_capacity(w, a, seed=seed + i), index=i, alpha=a)
            if mm is None or cap is None:
                continue
            rep.add("minimax_gap", abs(mm.gap), tol, index=i, alpha=a)
            rep.add("measure_equals_capacity", abs(mm.min_max - cap[0]), tol, index=i, alpha=a)
    return rep


def result7(seed: int = 0, trials: int = 100, tol: float | None = None, alphas=None) -> SuiteReport:
    """Oracles on 5 x ``trials`` POVMs; monotonicity under ``trials`` post-processings of three POVMs."""
    tol = 1e-9 if tol is None else tol
    rep = SuiteReport("result7", seed, trials)
    rng = np.random.default_rng(seed)
    for i in range(5 * trials):
        d, o = int(rng.integers(2, 5)), int(rng.integers(2, 7))
        m = qc.random_povm(rng, d, o)
        rep.add("robustness_oracle", abs(rs.robustness_informativeness(m) - rs.robustness_bisection(m)), tol, index=i)
        rep.add("weight_oracle", abs(rs.weight_informativeness(m) - rs.weight_bisection(m)), tol, index=i)
    sweep = tuple(alphas or SWEEP)
    subjects = [qc.random_povm(np.random.default_rng(seed + 1), 2, 3), qc.trine_povm(),
                qc.random_povm(np.random.default_rng(seed + 2), 2, 4)]
    for k, m in enumerate(subjects):
        suite = rs.monotone_suite(m, trials=trials, seed=seed + k, alphas=sweep)
        rep.add_flag("faithfulness", suite.faithful, index=k)
        for f in suite.failures:
            rep.add("monotonicity", f["after"] - f["before"], rs.MONOTONE_SLACK, index=k, trial=f["trial"], alpha=f["alpha"])
        rep.add_flag("monotonicity", not suite.failures, index=k, checks=suite.checks)
        for a, v in suite.values.items():
            ok = v >= -1e-12 and (a > 0 or v <= 1.0 + 1e-12)
            rep.add_flag("measure_bounds", ok, index=k, alpha=a)
    flat = qc.uninformative_povm([0.3, 0.7], 2)
    near = flat + 1e-8 * np.array([[[1, 0], [0, -1]], [[-1, 0], [0, 1]]])
    for name, m, expect_zero in (("faithful_uninformative", flat, True), ("faithful_near", near, True),
                                 ("faithful_informative", qc.computational_povm(2), False)):
        vals = [rs.alpha_measure(m, a, seed=seed) for a in sweep]
        rep.add_flag(name, (max(vals) <= rs.FAITHFUL_TOL) == expect_zero
                     and qc.is_uninformative(m, tol=rs.FAITHFUL_TOL)[0] == expect_zero)
    return rep


# divergence orderings ----------------------------------------------------------------


def _ordered(regime, s, c, b):
    """Violation of the variant ordering expected in the regime (0 when it holds)."""
    if regime == "negative":
        pairs = [(b, c), (c, s)]
    elif regime == "unit":
        pairs = [(b, s), (s, c)]
    else:
        pairs = [(c, b), (b, s)]
    # equal infinities are ordered
    return max((max(lo - hi, 0.0) for lo, hi in pairs if not (math.isinf(lo) and lo == hi)), default=0.0)


def divergence_orderings(seed: int = 0, trials: int = 500, tol: float | None = None, rep=None) -> SuiteReport:
    """Divergence orderings (``trials`` triples per regime), MI orderings and the q* identity."""
    slack = 1e-9 if tol is None else tol
    rep = SuiteReport("lemmas", seed, trials) if rep is None else rep
    rng = np.random.default_rng(seed)
    V = dv.CrdVariant
    shapes = [(2, 2), (2, 3), (3, 2), (3, 3), (4, 3)]
    for regime, orders in REGIMES.items():
        for i in range(trials):
            nx, ng = shapes[i % len(shapes)]
            a = orders[i % len(orders)]
            P = rng.dirichlet(np.ones(ng), size=nx)
            Q = rng.dirichlet(np.ones(ng), size=nx)
            px = rng.dirichlet(np.ones(nx))
            s, c, b = (dv.cond_renyi_div(v, P, Q, px, a) for v in (V.SIBSON, V.CSISZAR, V.BLP))
            rep.add(f"divergence_order_{regime}", _ordered(regime, s, c, b), slack, index=i, alpha=a)
        per = max(1, trials // (len(orders) * len(shapes)))
        for a in orders:
            for sh in shapes:
                js = [rng.dirichlet(np.ones(sh[0] * sh[1])).reshape(sh) for _ in range(per)]
                for k, r in enumerate(dv.mutual_informations(js, a, seed=seed, starts=3, polish=False)):
                    rep.add(f"mi_order_{regime}", _ordered(regime, r[V.SIBSON], r[V.CSISZAR], r[V.BLP]),
                            slack, alpha=a, shape=sh, index=k)
    for i in range(trials // 10):
        a = (-8.0, -2.0, -0.5)[i % 3]
        P = rng.dirichlet(np.ones(3), size=3)
        Q = rng.dirichlet(np.ones(3))
        px = rng.dirichlet(np.ones(3))
        q_star = dv.sibson_minimizer(P, px, a)
        lhs = dv.cond_renyi_div(V.SIBSON, P, Q, px, a)
        rhs = dv.cond_renyi_div(V.SIBSON, P, q_star, px, a) + dv.renyi_div(q_star, Q, a)
        rep.add("sibson_identity", abs(lhs - rhs), 1e-9, index=i, alpha=a)
    return rep


def capacity_agreement(seed: int = 0, trials: int = 50, alphas=None, rep=None) -> SuiteReport:
    """Arimoto and Sibson capacities agree on ``trials`` random conditionals."""
    rep = SuiteReport("lemmas", seed, trials) if rep is None else rep
    rng = np.random.default_rng(seed + 40_000)
    for i in range(trials):
        nx, ng = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        W = rng.dirichlet(np.ones(ng), size=nx)
        for a in alphas or SWEEP + (1.0,):
            res = _guard(rep, "capacity_agreement", lambda: (dv.renyi_capacity(W, a, seed=seed + i)[0],
                                                          dv.sibson_capacity(W, a, seed=seed + i)[0]),
                         index=i, alpha=a)
            if res is not None:
                rep.add("capacity_agreement", abs(res[0] - res[1]), dv.CAPACITY_TOL, index=i, alpha=a)
    return rep


def lemmas(seed: int = 0, trials: int = 500, tol: float | None = None, alphas=None) -> SuiteReport:
    """Orderings and identities plus capacity equality on ``trials // 10`` conditionals."""
    rep = divergence_orderings(seed, trials, tol)
    return capacity_agreement(seed, max(1, trials // 10), alphas, rep)


# betting ------------------------------------------------------------------------


def betting(seed: int = 0, trials: int = 500, tol: float | None = None, alphas=None) -> SuiteReport:
    """Three-term decompositions, closed-form optimality, operational entropies and risk classification."""
    tol = 1e-9 if tol is None else tol
    rep = SuiteReport("betting", seed, trials)
    rng = np.random.default_rng(seed)
    for i in range(trials):
        nx, ng = (int(v) for v in rng.integers(2, 5, size=2))
        s = int(rng.choice([-1, 1]))
        R = float(RISKS[i % len(RISKS)])
        o = s * rng.uniform(0.5, 3.0, nx)
        if i % 2:
            dist, b = rng.dirichlet(np.ones(nx * ng)).reshape(nx, ng), rng.dirichlet(np.ones(nx), size=ng)
        else:
            dist, b = rng.dirichlet(np.ones(nx)), rng.dirichlet(np.ones(nx))
        d = bt.blp_decomposition(b, o, dist, R)
        rep.add("decomposition_sum", abs(d.total - bt.log_ice(b, o, dist, R)), tol, index=i, risk=R, sign=s)
        h = bt.optimal_strategy(o, dist, R)
        if s * pc.sgn(R) > 0:
            # here the optimum is interior and the third term vanishes there
            rep.add("decomposition_optimal_third_term", abs(bt.blp_decomposition(h, o, dist, R).term_div2), 1e-10,
                    index=i, risk=R, sign=s)
    for i in range(trials // 5):
        nx, ng = (int(v) for v in rng.integers(2, 5, size=2))
        s = int(rng.choice([-1, 1]))
        R = float(rng.choice(RISKS + (0.0, math.inf, -math.inf)))
        o = s * rng.uniform(0.5, 3.0, nx)
        dist = rng.dirichlet(np.ones(nx * ng)).reshape(nx, ng)
        best = bt.optimal_ice(o, dist, R)
        others = max(bt.ice(rng.dirichlet(np.ones(nx), size=ng), o, dist, R) for _ in range(100))
        rep.add("closed_form_optimality", max(others - best, 0.0), 1e-10, index=i, risk=R, sign=s)
        num = bt.numeric_optimal_ice(o, dist, R, seed=seed + i)[0]
        rep.add("numeric_matches_closed_form", abs(num - best) / max(1.0, abs(best)), 1e-6, index=i, risk=R, sign=s)
    for i, a in enumerate((alphas or SWEEP) * max(1, trials // 100)):
        C = float(rng.uniform(0.5, 3.0))
        p = rng.dirichlet(np.ones(3))
        j = rng.dirichlet(np.ones(9)).reshape(3, 3)
        odds = bt.constant_odds(pc.sgn(a), C, 3)
        R = 1.0 / a
        rep.add("optimal_value_renyi_probability", abs(bt.optimal_ice(odds, p, R) - pc.sgn(a) * C * pc.renyi_probability(p, a)), tol,
                index=i, alpha=a)
        rep.add("optimal_value_cond_renyi_probability",
                abs(bt.optimal_ice(odds, j, R) - pc.sgn(a) * C * pc.cond_renyi_probability(j, a)), tol, index=i, alpha=a)
    for i in range(trials // 5):
        R = float(rng.choice((-3.0, -1.0, -0.5, 0.5, 2.0, 3.0)))
        w = rng.uniform(0.5, 3.0, 4)
        p = rng.dirichlet(np.ones(4))
        b = np.ones(4) / 4
        c = bt.ice(b, w * 4, p, R)
        lhs = bt.isoelastic_utility(c, R)
        rhs = float(np.dot(p, [bt.isoelastic_utility(x, R) for x in w]))
        rep.add("certainty_equivalent_identity", abs(lhs - rhs), tol, index=i, risk=R)
        mean = float(np.dot(p, w))
        rep.add_flag("risk_classification", (c < mean) == (R > 0), index=i, risk=R)
    return rep


SUITES = {
    "result1": result1,
    "result2": result2,
    "result3": result3,
    "result4": result4,
    "result5": result5,
    "result6": result6,
    "result7": result7,
    "lemmas": lemmas,
    "betting": betting,
}


def run_suite(name: str, seed: int = 0, trials: int | None = None, tol: float | None = None, alphas=None):
    """One suite, or every suite for ``name == "all"`` (one report each)."""
    if name == "all":
        return [run_suite(n, seed, trials, tol, alphas)[0] for n in SUITES]
    if name not in SUITES:
        raise KeyError(name)
    fn = SUITES[name]
    kw = {} if trials is None else {"trials": trials}
    return [fn(seed=seed, tol=tol, alphas=alphas, **kw)]
