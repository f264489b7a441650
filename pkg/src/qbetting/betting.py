"""Isoelastic utilities, certainty equivalents and horse betting with risk.

A game is a set of signed odds ``o(x)`` (all of one sign) and either a PMF
``p_x`` (no side information) or a joint ``p[x, g]``. Strategies are a PMF
``b[x]`` or a matrix ``b[g, x]`` whose rows are PMFs over x. The risk
parameter ``R`` may be any extended real; ``+0.0`` and ``-0.0`` are the
limits of order ``+inf`` and ``-inf`` and differ only in tie-breaking of the
optimal strategy.

Negative odds enter every power through ``|o(x)|``; the sign of the game is
carried separately as ``sgn(o)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from .divergences import CrdVariant, _cond_div, _renyi_div_rows
from .errors import (
    DegenerateDistribution,
    InputError,
    OptimizerDidNotConverge,
    ShapeMismatch,
    UndefinedAtZero,
    ZeroPayoffAtNegativePower,
)
from .prob_core import LN2, SUPPORT_TOL, as_cond, as_joint, as_pmf, sgn
from .simplex import minimize_rows, polish_softmax, simplex_starts

NUMERIC_STARTS = 8


# utilities -------------------------------------------------------------------


def isoelastic_utility(w: float, R: float) -> float:
    """u_R(w) = sgn(w)(|w|^{1-R} - 1)/(1 - R), and sgn(w) ln|w| at R = 1."""
    w = float(w)
    R = float(R)
    if not math.isfinite(R):
        raise InputError("isoelastic utility needs a finite risk parameter")
    if w == 0.0 and R >= 1.0:
        raise UndefinedAtZero(f"u_R(0) is unbounded for R = {R}")
    s = sgn(w)
    if R == 1.0:
        return s * math.log(abs(w))
    return s * (abs(w) ** (1.0 - R) - 1.0) / (1.0 - R)


def isoelastic_derivatives(w: float, R: float):
    """(u'(w), u''(w)) of the isoelastic family for w != 0."""
    w = float(w)
    if w == 0.0:
        raise UndefinedAtZero("derivatives are evaluated away from zero wealth")
    a = abs(w)
    return a ** (-R), -R * sgn(w) * a ** (-R - 1.0)


def rra(u_second: float, u_first: float, w: float) -> float:
    """Relative risk aversion -w u''(w) / u'(w)."""
    if not u_first > 0:
        raise InputError("u'(w) must be positive")
    return -w * u_second / u_first


# games -----------------------------------------------------------------------


def constant_odds(sign: int, C: float, n: int) -> np.ndarray:
    """o(x) = sign * C for every x."""
    if C <= 0:
        raise InputError("the odds magnitude C must be positive")
    return np.full(n, (1.0 if sign >= 0 else -1.0) * float(C))


def as_odds(odds, n: int):
    """Return (|o|, sgn(o)) after checking that all odds share one sign."""
    o = np.asarray(odds, dtype=float)
    if o.ndim == 0:
        o = np.full(n, float(o))
    if o.shape != (n,):
        raise ShapeMismatch(f"odds have length {o.size}, the game has {n} outcomes")
    if not np.all(np.isfinite(o)) or np.any(o == 0):
        raise InputError("odds must be finite and nonzero")
    if not (np.all(o > 0) or np.all(o < 0)):
        raise InputError("odds must all have the same sign")
    return np.abs(o), (1 if o[0] > 0 else -1)


def _as_game(odds, dist):
    """Normalize to a joint ``P[x, g]``; ``side`` records whether G was given."""
    arr = np.asarray(dist, dtype=float)
    if arr.ndim == 1:
        P = as_pmf(arr, "prior")[:, None]
        side = False
    else:
        P = as_joint(arr)
        side = True
    absodds, s = as_odds(odds, P.shape[0])
    return P, absodds, s, side


def _as_strategy(strategy, P, side):
    b = np.asarray(strategy, dtype=float)
    if side:
        b = as_cond(b, "strategy")
        if b.shape != (P.shape[1], P.shape[0]):
            raise ShapeMismatch(f"strategy must have shape (|G|, |X|) = {(P.shape[1], P.shape[0])}")
    else:
        b = as_pmf(b, "strategy")[None, :]
        if b.shape[1] != P.shape[0]:
            raise ShapeMismatch("strategy and prior differ in length")
    return b


def _risk(R) -> float:
    if isinstance(R, str):
        from .prob_core import Order

        return Order.parse(R).value
    return float(R)


@dataclass(frozen=True)
class IceResult:
    """Signed certainty equivalent; ``degenerate`` marks an exact-zero boundary value."""

    value: float
    log_abs: float
    sign: int
    degenerate: bool

    @property
    def log_ice(self) -> float:
        return self.sign * self.log_abs / LN2


def _log_abs_ice(b, P, absodds, R):
    """ln|ICE| for strategy rows ``b[g, x]``; -inf on the zero-wealth boundary."""
    mask = P > SUPPORT_TOL
    with np.errstate(divide="ignore"):
        logw = np.log(b.T) + np.log(absodds)[:, None]  # [x, g]
    logw_s = logw[mask]
    Ps = P[mask]
    if R == 0.0:
        return float(logsumexp(logw_s, b=Ps))
    if R == math.inf:
        return float(logw_s.min())
    if R == -math.inf:
        return float(logw_s.max())
    if R == 1.0:
        if np.any(np.isneginf(logw_s)):
            return -math.inf
        return float(np.dot(Ps, logw_s))
    beta = 1.0 - R
    if beta < 0 and np.any(np.isneginf(logw_s)):
        return -math.inf
    return float(logsumexp(np.log(Ps) + beta * logw_s)) / beta


def ice_details(strategy, odds, dist, R, *, strict: bool = False) -> IceResult:
    """Isoelastic certainty equivalent with its degeneracy flag.

    A zero bet on an outcome of positive probability sends wealth to zero;
    for ``1 - R <= 0`` this drives the certainty equivalent to exactly zero.
    ``strict=True`` raises instead.
    """
    P, absodds, s, side = _as_game(odds, dist)
    b = _as_strategy(strategy, P, side)
    R = _risk(R)
    la = _log_abs_ice(b, P, absodds, R)
    degenerate = la == -math.inf
    if degenerate and strict:
        raise ZeroPayoffAtNegativePower("a zero payoff on the support meets a non-positive power")
    return IceResult(value=s * math.exp(la) + 0.0, log_abs=la, sign=s, degenerate=degenerate)


def ice(strategy, odds, dist, R, *, strict: bool = False) -> float:
    """sgn(o) [Σ p(x,g) (b(x|g)|o(x)|)^{1-R}]^{1/(1-R)} with its limits at R ∈ {0, 1, ±∞}."""
    return ice_details(strategy, odds, dist, R, strict=strict).value


def ice_joint_gradient(strategy, odds, joint, R) -> np.ndarray:
    """Partial derivatives of the ICE in the joint entries ``p(x, g)`` at a fixed strategy.

    Finite R only; the joint is not renormalized.
    """
    P, absodds, s, _ = _as_game(odds, joint)
    b = _as_strategy(strategy, P, True)
    R = _risk(R)
    if math.isinf(R):
        raise InputError("the ICE gradient needs a finite risk")
    value = ice(b, odds, P, R)
    w = b.T * absodds[:, None]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if R == 0.0:
            return s * w
        if R == 1.0:
            return value * np.log(w)
        beta = 1.0 - R
        wb = w**beta
        total = np.sum(np.where(P > SUPPORT_TOL, P * wb, 0.0))
        return value * wb / (beta * total)


def log_ice(strategy, odds, dist, R, *, strict: bool = False) -> float:
    """U_R = sgn(o) log2|ICE|."""
    return ice_details(strategy, odds, dist, R, strict=strict).log_ice + 0.0


# closed-form strategies -----------------------------------------------------


def _uniform_on(mask):
    out = mask.astype(float)
    return out / out.sum()


def _h_rows(Pcond, absodds, R):
    """h(x|g) ∝ p(x|g)^{1/R} |o(x)|^{(1-R)/R} row by row, in log domain."""
    pp = Pcond > SUPPORT_TOL
    out = np.empty_like(Pcond)
    for g in range(Pcond.shape[0]):
        row, pos = Pcond[g], pp[g]
        if R < 0 and not pos.all():
            # p^{1/R} is infinite on zero-probability outcomes
            out[g] = _uniform_on(~pos)
            continue
        with np.errstate(divide="ignore"):
            logs = np.where(pos, np.log(np.where(pos, row, 1.0)) / R + (1.0 - R) / R * np.log(absodds), -np.inf)
        out[g] = np.exp(logs - logsumexp(logs))
    return out


def _log_h_g(Pcol, Pcond, absodds, R):
    """ln of the unnormalized h(g) = p(g) [Σ_x p(x|g)^{1/R} |o|^{(1-R)/R}]^R."""
    pp = Pcond > SUPPORT_TOL
    with np.errstate(divide="ignore"):
        logs = np.where(pp, np.log(np.where(pp, Pcond, 1.0)) / R + (1.0 - R) / R * np.log(absodds)[None, :], -np.inf)
        if R < 0:
            logs = np.where(pp, logs, np.inf)
        inner = logsumexp(logs, axis=1)
        return np.log(Pcol) + R * inner


def _limit_rows(Pcond, absodds, R, s):
    """Optimal rows for R ∈ {0, ±∞}."""
    pp = Pcond > SUPPORT_TOL
    out = np.empty_like(Pcond)
    for g in range(Pcond.shape[0]):
        pos = pp[g]
        if R == 0.0:
            score = Pcond[g] * absodds
            target = score.max() if s > 0 else score.min()
            out[g] = _uniform_on(np.isclose(score, target, rtol=0, atol=1e-15))
        elif (R == math.inf and s > 0) or (R == -math.inf and s < 0 and pos.all()):
            w = np.where(pos, 1.0 / absodds, 0.0)
            out[g] = w / w.sum()
        elif R == -math.inf and s < 0:
            out[g] = _uniform_on(~pos)
        elif R == -math.inf:
            target = absodds[pos].max()
            out[g] = _uniform_on(pos & (absodds == target))
        else:  # R = +inf, loss game: starve one supported outcome
            out[g] = _vertex_rows(Pcond[g : g + 1], absodds, R, s)[0]
    return out


def _columns(P):
    pg = P.sum(axis=0)
    Pcond = np.full((P.shape[1], P.shape[0]), 1.0 / P.shape[0])
    live = pg > SUPPORT_TOL
    Pcond[live] = (P[:, live] / pg[live]).T
    return pg, Pcond, live


def optimal_strategy(odds, dist, R):
    """A maximizer of the ICE over betting strategies.

    When sgn(o) sgn(R) = +1 the maximizer is h(x|g) ∝ p(x|g)^{1/R}|o(x)|^{(1-R)/R};
    the opposite sign pairing is a convex maximization solved at a vertex.
    Limits R ∈ {0, ±∞} use the argmax/argmin and equalizing rules.
    """
    P, absodds, s, side = _as_game(odds, dist)
    R = _risk(R)
    if P.sum() <= SUPPORT_TOL:
        raise DegenerateDistribution("the game has no probability mass")
    pg, Pcond, live = _columns(P)
    if R == 0.0 or math.isinf(R):
        rows = _limit_rows(Pcond, absodds, R, s)
    elif s * sgn(R) > 0:
        rows = _h_rows(Pcond, absodds, R)
    else:
        rows = _vertex_rows(Pcond, absodds, R, s)
    rows[~live] = 1.0 / P.shape[0]
    return rows if side else rows[0]


def optimal_ice(odds, dist, R) -> float:
    return ice(optimal_strategy(odds, dist, R), odds, dist, R)


# decomposition ---------------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """log-ICE = term_c + term_div1 + term_div2 (bits)."""

    term_c: float
    term_div1: float
    term_div2: float
    c: float
    r: np.ndarray
    h: np.ndarray
    h_g: np.ndarray | None

    @property
    def total(self) -> float:
        return self.term_c + self.term_div1 + self.term_div2


def blp_decomposition(strategy, odds, dist, R) -> Decomposition:
    """Three-term split of U_R = sgn(o) log2|ICE| for finite nonzero R.

    term_c = sgn(o) log|c|, term_div1 = sgn(o) sgn(R) D_{1/R}(p ‖ r) (BLP
    conditional divergence given G with side information) and term_div2 =
    -sgn(o) sgn(R) D_R(h ‖ b) (joint over (g, x) weighted by h_G).
    """
    P, absodds, s, side = _as_game(odds, dist)
    b = _as_strategy(strategy, P, side)
    R = _risk(R)
    if R == 0.0 or not math.isfinite(R):
        raise InputError("the decomposition needs a finite nonzero risk parameter")
    signed = s * absodds
    c = 1.0 / np.sum(1.0 / signed)
    r = (1.0 / absodds) / np.sum(1.0 / absodds)
    ss = s * sgn(R)
    term_c = s * math.log2(abs(c))
    if not side:
        p = P[:, 0]
        h = _h_rows(p[None, :], absodds, R)[0]
        d1 = float(_renyi_div_rows(p, r, 1.0 / R)[0])
        d2 = float(_renyi_div_rows(h, b[0], R)[0])
        h_g = None
    else:
        pg, Pcond, live = _columns(P)
        Pcond, pgl, bl = Pcond[live], pg[live], b[live]
        h = _h_rows(Pcond, absodds, R)
        d1 = _cond_div(CrdVariant.BLP, Pcond, r, pgl, 1.0 / R)
        lhg = _log_h_g(pgl, Pcond, absodds, R)
        if np.any(np.isposinf(lhg)):
            h_g = _uniform_on(np.isposinf(lhg))
        else:
            h_g = np.exp(lhg - logsumexp(lhg))
        d2 = float(_renyi_div_rows((h * h_g[:, None]).ravel(), (bl * h_g[:, None]).ravel(), R)[0])
    return Decomposition(term_c + 0.0, ss * d1 + 0.0, -ss * d2 + 0.0, c, r, h, h_g)


# independent numeric optimizer ------------------------------------------------


def _row_aggregate(b, Pcol, absodds, R):
    """Per-g aggregate that the ICE is monotone in, and the direction to push it.

    Finite R != 1: S_g = Σ_x p(x,g)(b|o|)^{1-R}; R = 1: Σ p ln(b|o|); R = +inf:
    min over the support of b|o|; R = -inf: max over it.
    """
    mask = Pcol > SUPPORT_TOL
    with np.errstate(divide="ignore", over="ignore"):
        w = b * absodds
        if R == math.inf:
            return np.where(mask, w, np.inf).min(axis=-1)
        if R == -math.inf:
            return np.where(mask, w, -np.inf).max(axis=-1)
        if R == 1.0:
            return np.where(mask, Pcol * np.log(np.where(mask, w, 1.0)), 0.0).sum(axis=-1) + np.where(
                np.any(mask & (w <= 0), axis=-1), -np.inf, 0.0
            )
        beta = 1.0 - R
        terms = np.where(mask, Pcol * np.where(w > 0, w, 0.0) ** beta, 0.0)
        if beta < 0:
            terms = np.where(mask & (w <= 0), np.inf, terms)
        return terms.sum(axis=-1)


def _direction(R, s):
    if R == 0.0 or R == 1.0 or math.isinf(R):
        return s
    return s * (1 if 1.0 - R > 0 else -1)


def _vertex_rows(Pcond, absodds, R, s):
    """Best vertex of the simplex for each row (ties to the lowest index)."""
    n = Pcond.shape[1]
    eye = np.eye(n)
    d = _direction(R, s)
    out = np.empty_like(Pcond)
    for g in range(Pcond.shape[0]):
        vals = d * _row_aggregate(eye, np.broadcast_to(Pcond[g], (n, n)), absodds, R)
        out[g] = eye[int(np.argmax(vals))]
    return out


def _convex_case(R, s) -> bool:
    """True when maximizing the ICE is a concave problem in each row."""
    if R == 0.0:
        return False
    if R == math.inf:
        return s > 0
    if R == -math.inf:
        return s < 0
    if R == 1.0:
        return s > 0
    beta = 1.0 - R
    if 0 < beta < 1:
        return s > 0
    if beta < 0:
        return s > 0
    return s < 0


def _lp_rows(Pcond, absodds, R):
    """R = +inf gains (max min b|o|) and R = -inf losses (min max b|o|) by linprog."""
    n = Pcond.shape[1]
    out = np.empty_like(Pcond)
    for g in range(Pcond.shape[0]):
        sup = np.flatnonzero(Pcond[g] > SUPPORT_TOL)
        # variables (b_1..b_n, t)
        A = np.zeros((sup.size, n + 1))
        if R == math.inf:
            A[np.arange(sup.size), sup] = -absodds[sup]
            A[:, n] = 1.0  # t <= b|o|
            cost = np.zeros(n + 1)
            cost[n] = -1.0
        else:
            A[np.arange(sup.size), sup] = absodds[sup]
            A[:, n] = -1.0  # b|o| <= t
            cost = np.zeros(n + 1)
            cost[n] = 1.0
        A_eq = np.concatenate([np.ones(n), [0.0]])[None, :]
        res = linprog(cost, A_ub=A, b_ub=np.zeros(sup.size), A_eq=A_eq, b_eq=[1.0],
                      bounds=[(0, None)] * n + [(None, None)], method="highs")
        if not res.success:
            raise OptimizerDidNotConverge(f"linear program failed: {res.message}")
        out[g] = np.clip(res.x[:n], 0.0, None)
        out[g] /= out[g].sum()
    return out


def _pg_rows(Pcond, absodds, R, rng, n_starts, warm):
    """Projected gradient on each row of the concave cases."""
    G, n = Pcond.shape
    base = simplex_starts(n, rng, count=n_starts)
    blocks = [base if warm is None else np.vstack([warm[g : g + 1], base]) for g in range(G)]
    k = blocks[0].shape[0]
    X0 = np.vstack(blocks)
    W = np.repeat(Pcond, k, axis=0)
    mask = W > SUPPORT_TOL
    lo = np.log(absodds)

    if R == 1.0:

        def fun(X, rows):
            Wr, mr = W[rows], mask[rows]
            with np.errstate(divide="ignore"):
                lx = np.log(X)
            return -np.where(mr, Wr * (lx + lo), 0.0).sum(axis=1)

        def grad(X, rows):
            with np.errstate(divide="ignore"):
                return -np.where(mask[rows], W[rows] / X, 0.0)

    else:
        beta = 1.0 - R
        # maximize S for 0 < 1-R < 1, minimize it otherwise
        sign_obj = -1.0 if 0 < beta < 1 else 1.0
        ob = absodds**beta

        def fun(X, rows):
            Wr, mr = W[rows], mask[rows]
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                t = np.where(mr, Wr * ob * X**beta, 0.0)
                if beta < 0:
                    t = np.where(mr & (X <= 0), np.inf, t)
            return sign_obj * t.sum(axis=1)

        def grad(X, rows):
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                g = np.where(mask[rows], beta * W[rows] * ob * X ** (beta - 1.0), 0.0)
            return sign_obj * g

    # a warm start is already close; the polish does the rest
    res = minimize_rows(fun, grad, X0, max_iter=15 if warm is None else 8, gtol=1e-12, indexed=True)
    f = np.where(np.isfinite(res.fun), res.fun, np.inf).reshape(G, k)
    out = np.empty((G, n))
    for g in range(G):
        r = g * k + int(np.argmin(f[g]))
        # strongly peaked optima (|R| small) need the log-scale refinement
        q = polish_softmax(fun, grad, res.x[r], r)
        fq = float(fun(q[None], np.array([r]))[0])
        out[g] = q if fq < f[g].min() else res.x[r]
    return out


def numeric_optimal_ice(odds, dist, R, *, seed: int = 0, starts: int = NUMERIC_STARTS, warm=None):
    """Maximize the ICE over strategies without the closed forms.

    The problem splits over g. Concave cases use multi-start projected
    gradient; convex maximizations and the linear case use vertex
    enumeration; the two piecewise-linear infinite-R cases use a linear
    program. Returns ``(value, strategy)``.
    """
    P, absodds, s, side = _as_game(odds, dist)
    R = _risk(R)
    if P.shape[0] > 6 or P.shape[1] > 6:
        raise InputError("the numeric optimizer is limited to 6 x 6 games")
    pg, Pcond, live = _columns(P)
    rows = np.full_like(Pcond, 1.0 / P.shape[0])
    sub = Pcond[live]
    if math.isinf(R) and _convex_case(R, s):
        rows[live] = _lp_rows(sub, absodds, R)
    elif _convex_case(R, s):
        w = None if warm is None else np.atleast_2d(np.asarray(warm, dtype=float))[live if side else [0]]
        rows[live] = _pg_rows(sub, absodds, R, np.random.default_rng(seed), starts, w)
    else:
        rows[live] = _vertex_rows(sub, absodds, R, s)
    strategy = rows if side else rows[0]
    return ice(strategy, odds, dist, R), strategy
