"""Informativeness of measurements as a resource.

Robustness and weight of informativeness have eigenvalue closed forms; each
is paired with a bisection oracle that tests positive semidefiniteness by
Cholesky factorization instead of eigenvalues. The informativeness measure is
computed as a min-max (a Rényi radius over uninformative measurements) and as
a max-min (a Sibson capacity); weak duality makes the pair a certificate.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize

from .divergences import _renyi_div_rows, sibson_capacity, sibson_mi_closed_form, sibson_minimizer
from .errors import InputError, MinimaxGapExceeded
from .linalg import eigvalsh
from .prob_core import LN2, SUPPORT_TOL, as_cond, order_value, sgn
from .quantum_core import as_povm, as_states, born_cond_pmf, is_uninformative, simulate_measurement
from .search import ENSEMBLE_STARTS, maximize_over_ensembles

MINIMAX_TOL = 1e-6
BISECTION_TOL = 1e-13
MONOTONE_SLACK = 1e-6
FAITHFUL_TOL = 1e-6
SWEEP = (-8.0, -2.0, -0.5, 0.5, 2.0, 8.0, math.inf, -math.inf)
_Q_FLOOR = 1e-14


class Method(enum.Enum):
    CLOSED_FORM = "closed_form"
    BISECTION_ORACLE = "bisection_oracle"
    MINIMAX = "minimax"


@dataclass(frozen=True)
class MonotoneReport:
    """A monotone value with the witness that reproduces it (see ``reverify``)."""

    measure: str
    value: float
    achiever: dict
    method: Method

    def to_json(self) -> dict:
        from .serialization import to_jsonable

        return {"measure": self.measure, "value": self.value, "method": self.method.value,
                "achiever": to_jsonable(self.achiever)}


# robustness and weight ----------------------------------------------------------


def _extreme_eigs(m):
    m = as_povm(m)
    ev = np.array([eigvalsh(el) for el in m])
    return ev.max(axis=1), ev.min(axis=1)


def robustness_informativeness(m) -> float:
    """Least r such that (M_a + r N_a) / (1 + r) is uninformative for some POVM N: Σ_a λ_max(M_a) - 1."""
    lmax, _ = _extreme_eigs(m)
    return max(float(lmax.sum()) - 1.0, 0.0)


def weight_informativeness(m) -> float:
    """Least w with M_a = w N_a + (1 - w) q(a) I for a POVM N and a PMF q: 1 - Σ_a λ_min(M_a)."""
    _, lmin = _extreme_eigs(m)
    return min(max(1.0 - float(lmin.sum()), 0.0), 1.0)


def _is_psd(a) -> bool:
    try:
        np.linalg.cholesky(a + 1e-15 * np.eye(a.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


def _bisect(pred, lo, hi, tol=BISECTION_TOL):
    """Smallest x in [lo, hi] with pred(x) true, for a predicate monotone in x."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def robustness_bisection(m) -> float:
    """Robustness of informativeness from feasibility tests alone.

    The least multiple c_a of the identity dominating M_a is bracketed with
    Cholesky tests; r is then the least value with Σ_a c_a / (1 + r) <= 1.
    """
    m = as_povm(m)
    eye = np.eye(m.shape[1])
    c = np.array([_bisect(lambda x, el=el: _is_psd(x * eye - el), 0.0, 1.0 + 1e-9) for el in m])
    return _bisect(lambda r: c.sum() / (1.0 + r) <= 1.0, 0.0, float(m.shape[0]))


def weight_bisection(m) -> float:
    """Weight of informativeness from feasibility tests alone.

    The largest multiple c_a of the identity below M_a is bracketed with
    Cholesky tests; w is then the least value with Σ_a c_a / (1 - w) >= 1.
    """
    m = as_povm(m)
    eye = np.eye(m.shape[1])
    c = np.array([-_bisect(lambda x, el=el: _is_psd(el + x * eye), -1.0 - 1e-9, 0.0) for el in m])
    c = np.clip(c, 0.0, None)
    return _bisect(lambda w: w >= 1.0 or c.sum() / (1.0 - w) >= 1.0, 0.0, 1.0)


def robustness_report(m) -> MonotoneReport:
    lmax, _ = _extreme_eigs(m)
    return MonotoneReport("robustness", robustness_informativeness(m), {"q": lmax / lmax.sum()}, Method.CLOSED_FORM)


def weight_report(m) -> MonotoneReport:
    _, lmin = _extreme_eigs(m)
    total = lmin.sum()
    q = lmin / total if total > SUPPORT_TOL else np.full(lmin.size, 1.0 / lmin.size)
    return MonotoneReport("weight", weight_informativeness(m), {"q": q}, Method.CLOSED_FORM)


# measured divergences -------------------------------------------------------------


def measured_sibson_div(m, n, states, alpha) -> float:
    """max over p_X of Sibson's conditional divergence between the two measured conditionals.

    Sibson's divergence is the Rényi divergence of the joints p_X p(g|x) and
    p_X q(g|x). For every order it is a monotone function of a quantity linear
    in p_X, so the maximum sits at a point mass: the largest row divergence.
    """
    m, n = as_povm(m), as_povm(n, "n")
    if m.shape != n.shape:
        raise InputError(f"POVMs differ in shape: {m.shape} vs {n.shape}")
    states = as_states(states)
    a = order_value(alpha)
    rows = _renyi_div_rows(born_cond_pmf(m, states), born_cond_pmf(n, states), a)
    return float(rows.max()) + 0.0


# informativeness measure -----------------------------------------------------------


@dataclass(frozen=True)
class Minimax:
    """Both orders of the informativeness optimization.

    ``min_max`` is attained by the uninformative outcome distribution ``q``,
    ``max_min`` by the input PMF ``p``; weak duality gives max_min <= min_max.
    """

    min_max: float
    max_min: float
    q: np.ndarray
    p: np.ndarray

    @property
    def gap(self) -> float:
        if math.isinf(self.min_max) and math.isinf(self.max_min):
            return 0.0
        return self.min_max - self.max_min


def _radius_value(W, q, a) -> float:
    return float(_renyi_div_rows(W, q, a).max())


def _radius_lp(W, a):
    """min_q max_x D_a(W_x‖q) at a = ±∞ as a linear program in u = s q."""
    ng = W.shape[1]
    eye = np.eye(ng)
    if a > 0:
        # minimize Σu subject to u_g >= W[x, g]
        A = np.vstack([-eye] * W.shape[0])
        res = linprog(np.ones(ng), A_ub=A, b_ub=-W.ravel(), bounds=[(0, None)] * ng, method="highs")
    else:
        # maximize Σu subject to u_g <= W[x, g]
        A = np.vstack([eye] * W.shape[0])
        res = linprog(-np.ones(ng), A_ub=A, b_ub=W.ravel(), bounds=[(0, None)] * ng, method="highs")
    u = np.clip(res.x, 0.0, None)
    total = u.sum()
    if total <= SUPPORT_TOL:
        return math.inf, np.full(ng, 1.0 / ng)
    q = u / total
    return math.log2(total) if a > 0 else -math.log2(total), q


def _radius_slsqp(W, a, q0, face):
    """min_q max_x D_a(W_x‖q) on the face, as min t subject to D_a(W_x‖q) <= t."""
    Wf = W[:, face]
    k = Wf.shape[1]
    with np.errstate(divide="ignore"):
        Va = np.where(Wf > 0, Wf, 0.0) ** a if a != 1.0 else None
        lW = np.where(Wf > 0, np.log(np.where(Wf > 0, Wf, 1.0)), 0.0)

    def rows_and_jac(q):
        q = np.maximum(q, _Q_FLOOR)
        if a == 1.0:
            d = (Wf * (lW - np.log(q))).sum(axis=1) / LN2
            jac = -Wf / q / LN2
            return d, jac
        k_ = sgn(a) / (a - 1.0)
        terms = Va * q ** (1.0 - a)
        S = terms.sum(axis=1)
        d = k_ * np.log(S) / LN2
        jac = k_ * (1.0 - a) * Va * q ** (-a) / S[:, None] / LN2
        return d, jac

    def cons(z):
        d, _ = rows_and_jac(z[:k])
        return z[k] - d

    def cons_jac(z):
        _, jac = rows_and_jac(z[:k])
        return np.hstack([-jac, np.ones((W.shape[0], 1))])

    q0 = np.maximum(q0[face], _Q_FLOOR)
    q0 = q0 / q0.sum()
    z0 = np.append(q0, rows_and_jac(q0)[0].max())
    constraints = [
        {"type": "ineq", "fun": cons, "jac": cons_jac},
        {"type": "eq", "fun": lambda z: z[:k].sum() - 1.0, "jac": lambda z: np.append(np.ones(k), 0.0)},
    ]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(lambda z: z[k], z0, jac=lambda z: np.append(np.zeros(k), 1.0), method="SLSQP",
                       bounds=[(_Q_FLOOR, 1.0)] * k + [(None, None)], constraints=constraints,
                       options={"ftol": 1e-15, "maxiter": 500})
    q = np.zeros(W.shape[1])
    q[face] = np.maximum(res.x[:k], 0.0)
    return q / q.sum()


def informativeness_minimax(p_gx, alpha, *, seed: int = 0, tol: float = MINIMAX_TOL) -> Minimax:
    """Min-max and max-min of Sibson's divergence against uninformative measurements.

    Uninformative measurements produce rows that do not depend on x, so the
    min-max is min_q max_x D_α(p(·|x)‖q), solved here as an epigraph program
    (a linear program at α = ±∞). The max-min is the Sibson capacity. Raises
    ``MinimaxGapExceeded`` when the two differ by more than ``tol``.
    """
    W = as_cond(p_gx, "p_gx")
    a = order_value(alpha)
    if a == 0.0:
        raise InputError("the informativeness measure at order 0 is not supported")
    max_min, p = sibson_capacity(W, a, seed=seed)
    if math.isinf(a):
        min_max, q = _radius_lp(W, a)
    else:
        live = W > SUPPORT_TOL
        face = live.all(axis=0) if a < 0 else live.any(axis=0)
        if not face.any():
            min_max, q = math.inf, np.full(W.shape[1], 1.0 / W.shape[1])
        else:
            seeds = [np.where(face, 1.0, 0.0), np.where(face, W.max(axis=0), 0.0), np.where(face, W.mean(axis=0), 0.0)]
            q_star = sibson_minimizer(W, p, a)
            if np.all(np.isfinite(q_star)) and q_star[face].sum() > 0:
                seeds.insert(0, np.where(face, q_star, 0.0))
            min_max, q = math.inf, seeds[0] / seeds[0].sum()
            for s in seeds:
                s = s / s.sum()
                for cand in (s, _radius_slsqp(W, a, s, face)):
                    v = _radius_value(W, cand, a)
                    if v < min_max:
                        min_max, q = v, cand
    out = Minimax(float(min_max), float(max_min), q, p)
    if not out.gap <= tol or out.gap < -tol:
        raise MinimaxGapExceeded(
            f"min-max {min_max!r} and max-min {max_min!r} differ by more than {tol!r}",
            min_max=min_max, max_min=max_min,
        )
    return out


def informativeness_measure(m, states, alpha, *, seed: int = 0, tol: float = MINIMAX_TOL) -> float:
    """E_α(M) on a state set: the least measured Sibson divergence to an uninformative measurement."""
    w = born_cond_pmf(as_povm(m), as_states(states))
    return informativeness_minimax(w, alpha, seed=seed, tol=tol).min_max + 0.0


# alpha-measure --------------------------------------------------------------------


def _sibson_objective(a):
    """Sibson MI of (prior, p(g|x)) in bits with its partial derivatives."""
    if a == 1.0:

        def objective(P, prior):
            q = prior @ P
            with np.errstate(divide="ignore", invalid="ignore"):
                lr = np.where(P > 0, np.log(np.where(P > 0, P, 1.0) / np.where(q > 0, q, 1.0)[None]), 0.0)
            rows = (P * lr).sum(axis=1)
            return float(prior @ rows) / LN2, prior[:, None] * lr / LN2, rows / LN2

        return objective
    c = abs(a) / (a - 1.0) / LN2

    def objective(P, prior):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            Pc = np.maximum(P, 1e-300)
            V = np.minimum(Pc**a, 1e300)
            A = prior @ V
            N = A ** (1.0 / a)
            T = N.sum()
            val = c * math.log(T)
            dA = A ** (1.0 / a - 1.0) / T
            dP = c * prior[:, None] * dA[None] * np.minimum(Pc ** (a - 1.0), 1e300)
            dprior = c * (V @ dA) / a
        return val, np.nan_to_num(dP, nan=0.0, posinf=1e300, neginf=-1e300), \
            np.nan_to_num(dprior, nan=0.0, posinf=1e300, neginf=-1e300)

    return objective


def _kernel_witness(m):
    """One unit vector in the kernel of each element, or None if some element has full rank."""
    vecs = []
    for el in m:
        lam, u = np.linalg.eigh(el)
        if lam[0] > SUPPORT_TOL:
            return None
        vecs.append(u[:, 0])
    return np.array(vecs)


def _from_measure(a, e) -> float:
    s = sgn(a)
    return s * 2.0 ** (s * e) - s


def alpha_measure_report(m, alpha, *, seed: int = 0, starts: int = ENSEMBLE_STARTS, seeds=()) -> MonotoneReport:
    """α-measure of informativeness sgn(α) 2^{sgn(α) E_α(M)} - sgn(α), maximized over pure state sets.

    At α = ±∞ it equals the robustness and the weight of informativeness. At
    finite orders the state set (d² pure states) and the input PMF are found
    by ascent on Sibson's MI; the winner is certified through the min-max.
    ``seeds`` are (state vectors, prior) pairs for warm starts.
    """
    m = as_povm(m)
    a = order_value(alpha)
    if a == 0.0:
        raise InputError("the alpha-measure at order 0 is not supported")
    if a == math.inf:
        r = robustness_report(m)
        return MonotoneReport("alpha_measure", r.value, r.achiever, Method.CLOSED_FORM)
    if a == -math.inf:
        r = weight_report(m)
        return MonotoneReport("alpha_measure", r.value, r.achiever, Method.CLOSED_FORM)
    if a < 0:
        vecs = _kernel_witness(m)
        if vecs is not None:
            # a zero in every column of p(g|x) makes E_α infinite
            states = np.einsum("xi,xj->xij", vecs, vecs.conj())
            return MonotoneReport("alpha_measure", 1.0, {"states": states, "vectors": vecs,
                                                         "prior": np.full(len(vecs), 1.0 / len(vecs))},
                                  Method.CLOSED_FORM)
    flat, q = is_uninformative(m, tol=1e-12)
    if flat:
        return MonotoneReport("alpha_measure", 0.0, {"q": q}, Method.CLOSED_FORM)
    res = maximize_over_ensembles(_sibson_objective(a), m, starts=starts, seed=seed, seeds=seeds)
    e = res.x
    mm = informativeness_minimax(born_cond_pmf(m, e.states), a, seed=seed)
    value = max(_from_measure(a, mm.min_max), 0.0)
    vecs = np.array([np.linalg.eigh(rho)[1][:, -1] for rho in e.states])
    return MonotoneReport("alpha_measure", value, {"states": e.states, "vectors": vecs, "prior": mm.p, "q": mm.q},
                          Method.MINIMAX)


def alpha_measure(m, alpha, *, seed: int = 0, starts: int = ENSEMBLE_STARTS) -> float:
    return alpha_measure_report(m, alpha, seed=seed, starts=starts).value


def reverify(report: MonotoneReport, m, alpha=None) -> float:
    """Recompute a report's value from its witness alone."""
    m = as_povm(m)
    lmax, lmin = _extreme_eigs(m)
    a = None if alpha is None else order_value(alpha)
    if report.method is Method.CLOSED_FORM and (report.measure == "robustness" or a == math.inf):
        q = np.asarray(report.achiever["q"], dtype=float)
        return float(np.max(lmax / q)) - 1.0
    if report.method is Method.CLOSED_FORM and (report.measure == "weight" or a == -math.inf):
        q = np.asarray(report.achiever["q"], dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 - float(np.min(np.where(q > 0, lmin / q, np.inf)))
    if report.method is Method.CLOSED_FORM and "states" not in report.achiever:
        return 0.0
    if a is None:
        raise InputError("a minimax report needs its order to be re-verified")
    w = born_cond_pmf(m, report.achiever["states"])
    return max(_from_measure(a, sibson_mi_closed_form(w, report.achiever["prior"], a)), 0.0)


# monotone suite -------------------------------------------------------------------


@dataclass
class MonotoneSuiteReport:
    values: dict
    faithful: bool
    checks: int
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.faithful and not self.failures


def random_post_processing(rng: np.random.Generator, n_in: int, n_out: int | None = None) -> np.ndarray:
    n_out = n_in if n_out is None else n_out
    return rng.dirichlet(np.full(n_out, 0.5), size=n_in)


def monotone_suite(m, trials: int = 100, seed: int = 0, *, alphas=SWEEP, starts: int = ENSEMBLE_STARTS,
                   trial_starts: int = 2) -> MonotoneSuiteReport:
    """Faithfulness and monotonicity of the α-measure under classical post-processing.

    Each trial applies a random post-processing and checks that no order in
    ``alphas`` increases the measure beyond ``MONOTONE_SLACK``. Processed
    measurements are searched with ``trial_starts`` random starts plus the
    optimal states of ``m``: a search can only under-estimate their value.
    """
    m = as_povm(m)
    rng = np.random.default_rng(seed)
    values, witness = {}, {}
    for a in alphas:
        rep = alpha_measure_report(m, a, seed=seed, starts=starts)
        values[a] = rep.value
        if rep.method is Method.MINIMAX:
            witness[a] = [(rep.achiever["vectors"], rep.achiever["prior"])]
    uninformative = is_uninformative(m, tol=FAITHFUL_TOL)[0]
    faithful = (max(values.values()) <= FAITHFUL_TOL) == uninformative
    failures, checks = [], 0
    for t in range(trials):
        post = random_post_processing(rng, m.shape[0])
        sim = simulate_measurement(m, post)
        for a in alphas:
            v = alpha_measure_report(sim, a, seed=seed + 1 + t, starts=trial_starts, seeds=witness.get(a, ())).value
            checks += 1
            if v > values[a] + MONOTONE_SLACK:
                failures.append({"trial": t, "alpha": a, "before": values[a], "after": v})
    return MonotoneSuiteReport(values, bool(faithful), checks, failures)
