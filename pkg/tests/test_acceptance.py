"""Acceptance criteria: each test runs one criterion at its stated scale, tolerance and time budget.

Every test prints one ``criterion N: PASS|FAIL`` line with its worst error and runtime.
"""

import io
import math
import time
from contextlib import redirect_stdout

import numpy as np
import pytest

from qbetting import cli, suites
from qbetting import games as gm
from qbetting import quantum_core as qc

pytestmark = pytest.mark.acceptance


def _report(capsys, number, ok, elapsed, budget, detail):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    with capsys.disabled():
        print(f"\ncriterion {number}: {status}  {detail}  time={elapsed:.1f}s (budget {budget:.0f}s)")
    assert ok, detail
    assert elapsed < budget, f"took {elapsed:.1f}s, budget {budget}s"


def _suite_detail(*reports):
    checks = sum(len(r.checks) for r in reports)
    failed = sum(len(r.failures) for r in reports)
    worst = max(r.worst() for r in reports)
    return f"checks={checks} failed={failed} worst_error={worst:.2e}"


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_criterion_01_information_equals_log_ratio(capsys):
    rep, dt = _timed(lambda: suites.result1(seed=0, trials=50, tol=1e-6))
    assert len(rep.checks) == 50 * 8
    _report(capsys, 1, rep.passed, dt, 60, _suite_detail(rep))


def _cpp_ratios(seed):
    rng = np.random.default_rng(seed)
    counts = (int(rng.integers(2, 5)), int(rng.integers(2, 5)), 2)
    e, m, _ = qc.random_instance(seed, counts=counts)
    trivial = np.eye(2)[None]
    succ, err = gm.cpp_bruteforce(e, m)
    succ0, err0 = gm.cpp_bruteforce(e, trivial)
    errors = []
    for a, oracle in ((math.inf, succ / succ0), (-math.inf, err / err0)):
        g = gm.QsbGame.constant(a, e)
        ratio = gm.qsb_value(g, m, a, numeric=True) / gm.no_side_information_value(g, a, numeric=True)
        errors.append(abs(ratio - oracle))
        errors.append(abs(gm.arimoto_mi_quantum(e, m, a) - np.sign(a) * math.log2(oracle)))
    return errors


def test_criterion_02_discrimination_exclusion(capsys):
    errs, dt = _timed(lambda: [x for s in range(50) for x in _cpp_ratios(s)])
    worst = max(errs)
    _report(capsys, 2, worst <= 1e-9, dt, 10, f"instances=50 worst_error={worst:.2e}")


def test_criterion_03_divergence_orderings(capsys):
    rep, dt = _timed(lambda: suites.divergence_orderings(seed=0, trials=500, tol=1e-9))
    per_regime = {n: s["checks"] for n, s in rep.summary().items() if n.startswith("divergence_order_")}
    assert all(v == 500 for v in per_regime.values()) and len(per_regime) == 3
    _report(capsys, 3, rep.passed, dt, 30, _suite_detail(rep))


def test_criterion_04_capacity_agreement(capsys):
    rep, dt = _timed(lambda: suites.capacity_agreement(seed=0, trials=50))
    _report(capsys, 4, rep.passed, dt, 120, _suite_detail(rep))


def test_criterion_05_decomposition(capsys):
    rep, dt = _timed(lambda: suites.betting(seed=0, trials=500))
    summary = rep.summary()
    assert summary["decomposition_sum"]["checks"] == 500
    assert summary["decomposition_optimal_third_term"]["checks"] > 0
    _report(capsys, 5, rep.passed, dt, 20, _suite_detail(rep))


def test_criterion_06_classical_side_information(capsys):
    rep, dt = _timed(lambda: suites.result5(seed=0, trials=100, tol=1e-8))
    assert rep.summary()["side_information_shannon"]["checks"] == 100
    _report(capsys, 6, rep.passed, dt, 20, _suite_detail(rep))


def test_criterion_07_measure_equals_capacity(capsys):
    rep, dt = _timed(lambda: suites.result6(seed=0, trials=30, tol=1e-6))
    assert rep.summary()["measure_equals_capacity"]["checks"] == 30 * 8
    _report(capsys, 7, rep.passed, dt, 180, _suite_detail(rep))


def test_criterion_08_alpha_measure_monotone(capsys):
    rep, dt = _timed(lambda: suites.result7(seed=0, trials=100, tol=1e-9))
    summary = rep.summary()
    assert summary["robustness_oracle"]["checks"] == 500 and summary["weight_oracle"]["checks"] == 500
    _report(capsys, 8, rep.passed, dt, 300, _suite_detail(rep))


def test_criterion_09_arimoto_gaps(capsys):
    reps, dt = _timed(lambda: [suites.result2(seed=0, trials=20), suites.result3(seed=0, trials=20),
                               suites.result4(seed=0, trials=20)])
    _report(capsys, 9, all(r.passed for r in reps), dt, 300, _suite_detail(*reps))


def _sweep(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(["sweep", *argv])
    lines = buf.getvalue().strip().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return code, header, data


def _figures():
    problems = []
    risks = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
    code, header, data = _sweep("isoelastic-utility", *[f"--risk={r}" for r in risks])
    problems += ["isoelastic exit code"] if code else []
    d2 = np.diff(data[:, 1:], n=2, axis=0)
    for k, R in enumerate(risks):
        expected = np.sign(-R)
        if not np.all(np.sign(d2[:, k]) == expected):
            problems.append(f"second differences at R={R}")
    code, header, data = _sweep("ice-vs-alpha", "--seed", "7")
    alpha = data[:, header.index("alpha")]
    ice, prior = data[:, header.index("ice_measured")], data[:, header.index("ice_prior")]
    if code or not (np.all(np.sign(ice) == np.sign(alpha)) and np.all(np.sign(prior) == np.sign(alpha))):
        problems.append("gain/loss flip at alpha = 0")
    if not (np.all(ice[alpha > 0] >= prior[alpha > 0]) and np.all(np.abs(ice[alpha < 0]) <= np.abs(prior[alpha < 0]))):
        problems.append("measurement helps in both regimes")
    if not ((alpha < 0).any() and (alpha > 0).any()):
        problems.append("sweep does not straddle zero")
    return problems


def test_criterion_10_figures(capsys):
    problems, dt = _timed(_figures)
    _report(capsys, 10, not problems, dt, 5, "problems=" + (";".join(problems) or "none"))
