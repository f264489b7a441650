"""Rényi divergence, the Sibson / Csiszár / BLP conditional divergences, their
mutual informations and the Rényi channel capacity.

Conditionals are row-stochastic matrices ``p_gx[x, g] = p(g|x)``. A PMF
``q_g`` over G may be passed where a conditional is expected; it is broadcast
over x. Values are in bits and may be ``inf`` in the private helpers.
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .errors import AlphabetMismatch, DivergentValue, InputError, OptimizerDidNotConverge
from .prob_core import (
    LN2,
    SUPPORT_TOL,
    as_cond,
    as_joint,
    as_pmf,
    condition_on_x,
    joint_from,
    marginal_g,
    marginal_x,
    order_value,
    sgn,
    shannon_mi,
)
from .simplex import N_STARTS, minimize_rows, polish_softmax, simplex_starts

CAPACITY_TOL = 1e-6
IDENTITY_TOL = 1e-9


class CrdVariant(enum.Enum):
    SIBSON = "sibson"
    CSISZAR = "csiszar"
    BLP = "blp"

    @classmethod
    def parse(cls, raw) -> "CrdVariant":
        if isinstance(raw, CrdVariant):
            return raw
        try:
            return cls(str(raw).lower())
        except ValueError as exc:
            raise InputError(f"unknown conditional divergence variant {raw!r}") from exc


# elementwise conventions -----------------------------------------------------


def _log_power_sum(p, q, a):
    """ln Σ p^a q^{1-a} along the last axis with the zero conventions of each order.

    Pairs with p = q = 0 are dropped. A zero in p with q > 0 is harmless for
    a > 0 and infinite for a < 0; a zero in q with p > 0 is harmless for a < 1
    and infinite for a > 1.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pp = p > SUPPORT_TOL
    qp = q > SUPPORT_TOL
    both = pp & qp
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(both, a * np.log(np.where(pp, p, 1.0)) + (1 - a) * np.log(np.where(qp, q, 1.0)), -np.inf)
    out = logsumexp(logs, axis=-1)
    blow = np.zeros(out.shape, dtype=bool)
    if a > 1:
        blow = np.any(pp & ~qp, axis=-1)
    elif a < 0:
        blow = np.any(~pp & qp, axis=-1)
    return np.where(blow, np.inf, out)


def _renyi_div_rows(p, q, a):
    """Row-wise D_a(p‖q) in bits (``inf`` allowed)."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    q = np.broadcast_to(np.asarray(q, dtype=float), p.shape)
    pp = p > SUPPORT_TOL
    qp = q > SUPPORT_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(pp & qp, p / np.where(qp, q, 1.0), np.where(pp, np.inf, 0.0))
        if a == 1.0:
            terms = np.where(pp, p * (np.log(np.where(pp, p, 1.0)) - np.log(np.where(qp, q, 1.0))), 0.0)
            out = np.where(np.any(pp & ~qp, axis=1), np.inf, terms.sum(axis=1))
        elif a == 0.0:
            out = -np.log(np.where(pp, q, 0.0).sum(axis=1))
        elif a == math.inf:
            out = np.log(np.where(pp, ratio, 0.0).max(axis=1))
        elif a == -math.inf:
            out = -np.log(np.where(qp, ratio, np.inf).min(axis=1))
        else:
            out = sgn(a) / (a - 1.0) * _log_power_sum(p, q, a)
    return out / LN2


def renyi_div(p, q, alpha) -> float:
    """Rényi divergence D_α(p‖q) in bits; non-negative for every order.

    Returns ``inf`` when the order-dependent absolute-continuity condition fails.
    """
    p = as_pmf(p, "p")
    q = as_pmf(q, "q")
    if p.shape != q.shape:
        raise AlphabetMismatch(f"alphabets differ: {p.size} vs {q.size}")
    return float(_renyi_div_rows(p, q, order_value(alpha))[0]) + 0.0


def _cond_div(variant: CrdVariant, P, Q, px, a) -> float:
    """Conditional divergence in bits on rows restricted to supp(p_x)."""
    keep = px > SUPPORT_TOL
    Q = np.broadcast_to(Q, P.shape)[keep]
    P, px = P[keep], px[keep]
    lpx = np.log(px)
    if variant is CrdVariant.CSISZAR or a == 1.0:
        rows = _renyi_div_rows(P, Q, a)
        return float(np.dot(px, rows)) if np.all(np.isfinite(rows)) else math.inf
    pp = P > SUPPORT_TOL
    qp = Q > SUPPORT_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(pp & qp, P / np.where(qp, Q, 1.0), np.where(pp, np.inf, 0.0))
        if variant is CrdVariant.SIBSON:
            if a == 0.0:
                val = -np.log(np.dot(px, np.where(pp, Q, 0.0).sum(axis=1)))
            elif a == math.inf:
                val = np.log(np.where(pp, ratio, 0.0).max())
            elif a == -math.inf:
                val = -np.log(np.where(qp, ratio, np.inf).min())
            else:
                val = sgn(a) / (a - 1.0) * logsumexp(lpx + _log_power_sum(P, Q, a))
        else:
            if a == 0.0:
                val = -np.log(np.where(pp, Q, 0.0).sum(axis=1).max())
            elif a == math.inf:
                val = np.log(np.dot(px, np.where(pp, ratio, 0.0).max(axis=1)))
            elif a == -math.inf:
                val = -np.log(np.dot(px, np.where(qp, ratio, np.inf).min(axis=1)))
            else:
                with np.errstate(over="ignore"):
                    val = abs(a) / (a - 1.0) * logsumexp(lpx + _log_power_sum(P, Q, a) / a)
    return float(val) / LN2


def _check_cond_shapes(p_gx, q_gx, p_x):
    P = as_cond(p_gx, "p_gx")
    q_arr = np.asarray(q_gx, dtype=float)
    Q = as_pmf(q_arr, "q_g") if q_arr.ndim == 1 else as_cond(q_arr, "q_gx")
    px = as_pmf(p_x, "p_x")
    if P.shape[0] != px.size:
        raise AlphabetMismatch("p_gx rows must match p_x")
    if Q.shape[-1] != P.shape[1] or (Q.ndim == 2 and Q.shape != P.shape):
        raise AlphabetMismatch("q_gx must match the shape of p_gx")
    return P, Q, px


def cond_renyi_div(variant, p_gx, q_gx, p_x, alpha) -> float:
    """Conditional Rényi divergence D^V_α(p_{G|X} ‖ q_{G|X} | p_X) in bits."""
    variant = CrdVariant.parse(variant)
    P, Q, px = _check_cond_shapes(p_gx, q_gx, p_x)
    val = _cond_div(variant, P, Q, px, order_value(alpha))
    if not math.isfinite(val):
        raise DivergentValue(f"{variant.value} conditional divergence is infinite: support condition fails")
    return val + 0.0


# mutual informations ----------------------------------------------------------


def sibson_minimizer(P, px, a) -> np.ndarray:
    """q*(g) ∝ (Σ_x p(x) p(g|x)^α)^{1/α} and its limits at α ∈ {1, ±∞}."""
    keep = px > SUPPORT_TOL
    P, px = P[keep], px[keep]
    if a == 1.0:
        q = px @ P
    elif a == math.inf:
        q = P.max(axis=0)
    elif a == -math.inf:
        q = P.min(axis=0)
    elif a == 0.0:
        q = np.zeros(P.shape[1])
        q[np.argmax(px @ (P > SUPPORT_TOL))] = 1.0
    else:
        with np.errstate(divide="ignore"):
            logs = np.log(px)[:, None] + a * np.log(P)
        if a < 0:
            logs = np.where(P > SUPPORT_TOL, logs, np.inf)
        inner = logsumexp(logs, axis=0) / a
        q = np.exp(inner - logsumexp(inner))
    return q / q.sum()


def sibson_mi_closed_form(P, px, a) -> float:
    """|α|/(α-1) log Σ_g (Σ_x p(x) p(g|x)^α)^{1/α} with its limiting cases."""
    keep = px > SUPPORT_TOL
    P, px = P[keep], px[keep]
    if a == 1.0:
        return shannon_mi(joint_from(px, P))
    if a == math.inf:
        return math.log2(P.max(axis=0).sum())
    if a == -math.inf:
        return -math.log2(P.min(axis=0).sum())
    if a == 0.0:
        return -math.log2((px @ (P > SUPPORT_TOL)).max())
    with np.errstate(divide="ignore"):
        logs = np.log(px)[:, None] + a * np.log(P)
    if a < 0:
        logs = np.where(P > SUPPORT_TOL, logs, np.inf)
    inner = logsumexp(logs, axis=0) / a
    return abs(a) / (a - 1.0) * float(logsumexp(inner)) / LN2


def _sibson_identity_holds(P, px, a, qstar) -> bool:
    """Check D^S(q) = D^S(q*) + D_α(q*‖q) at two probe PMFs."""
    base = _cond_div(CrdVariant.SIBSON, P, qstar, px, a)
    if not math.isfinite(base):
        return False
    probes = [px @ P, np.full(P.shape[1], 1.0 / P.shape[1])]
    for q in probes:
        lhs = _cond_div(CrdVariant.SIBSON, P, q, px, a)
        rhs = base + float(_renyi_div_rows(qstar, q, a)[0])
        if math.isinf(lhs) and math.isinf(rhs):
            continue
        if not abs(lhs - rhs) <= IDENTITY_TOL * (1.0 + abs(lhs)):
            return False
    return True


def _restrict_rows(P, px):
    """Replace rows outside supp(p_x) by a harmless uniform row of weight zero."""
    P = np.array(P, dtype=float)
    px = np.asarray(px, dtype=float)
    dead = px <= SUPPORT_TOL
    P[dead] = 1.0 / P.shape[-1]
    return P, np.where(dead, 0.0, px)


def _smooth_objective(variant, P, px, a, owner):
    """Indexed objective and gradient in q for finite orders other than 1.

    ``P`` has shape (B, nx, ng) and ``px`` (B, nx); iterate row r belongs to
    instance ``owner[r]``. Order 0 uses the Csiszár indicator form.
    """
    pp = P > SUPPORT_TOL
    if a == 0.0:
        ind = pp.astype(float)

        def fun(Q, rows):
            o = owner[rows]
            with np.errstate(divide="ignore"):
                return -np.einsum("rx,rx->r", px[o], np.log(np.einsum("rxg,rg->rx", ind[o], Q))) / LN2

        def grad(Q, rows):
            o = owner[rows]
            with np.errstate(divide="ignore"):
                w = px[o] / np.einsum("rxg,rg->rx", ind[o], Q)
            return -np.einsum("rx,rxg->rg", w, ind[o]) / LN2

        return fun, grad

    with np.errstate(divide="ignore"):
        A = np.where(pp, np.where(pp, P, 1.0) ** a, 0.0 if a > 0 else np.inf)
    b = 1.0 - a
    finite = np.isfinite(A) & (A > 0)
    infinite = np.isinf(A)
    live = px > 0

    def kernel(Q, rows):
        o = owner[rows]
        Qe = Q[:, None, :]
        qpos = Qe > 0
        fe = finite[o]
        Ae = A[o]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            qb = np.where(qpos, np.where(qpos, Qe, 1.0) ** b, 0.0 if b > 0 else np.inf)
            term = np.where(fe, Ae * qb, 0.0)
            # a < 0 and p(g|x) = 0: infinite unless q(g) = 0
            term = np.where(infinite[o] & qpos, np.inf, term)
            s = term.sum(axis=-1)
            ds = np.where(fe, b * Ae * np.where(qpos, Qe, 0.0) ** (-a), 0.0)
        return o, s, ds

    if variant is CrdVariant.CSISZAR:
        c = sgn(a) / (a - 1.0) / LN2

        def fun(Q, rows):
            o, s, _ = kernel(Q, rows)
            with np.errstate(divide="ignore", invalid="ignore"):
                return c * np.where(live[o], px[o] * np.log(s), 0.0).sum(axis=1)

        def grad(Q, rows):
            o, s, ds = kernel(Q, rows)
            with np.errstate(invalid="ignore", divide="ignore"):
                w = np.where(live[o], px[o] / s, 0.0)
            return c * np.einsum("rx,rxg->rg", w, ds)

    else:
        c = abs(a) / (a - 1.0) / LN2

        def fun(Q, rows):
            o, s, _ = kernel(Q, rows)
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                return c * np.log(np.where(live[o], px[o] * s ** (1.0 / a), 0.0).sum(axis=1))

        def grad(Q, rows):
            o, s, ds = kernel(Q, rows)
            with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
                t = np.where(live[o], px[o] * s ** (1.0 / a), 0.0).sum(axis=1)
                w = np.where(live[o], px[o] * s ** (1.0 / a - 1.0) / a, 0.0)
                return c * np.einsum("rx,rxg->rg", w, ds) / t[:, None]

    return fun, grad


VERTEX_LIMIT = 20_000


def _epigraph_solve(variant, P, px, a, q0):
    """Local solve at α = ±∞ over (q, t) with per-x ratio bounds.

    At +∞ the constraints are t_x q(g) ≥ p(g|x) and the objective is
    Σ p(x) log t_x (Csiszár) or log Σ p(x) t_x (BLP); both problems are
    convex in q. At -∞ the sense flips and the problem is not convex; this
    is only the fallback when the vertex enumeration is too large.
    """
    keep = px > SUPPORT_TOL
    return _epigraph_q(variant, P[keep], px[keep], q0, a > 0)


def _neg_inf_candidates(P, px):
    """Vertices of the tie arrangement that contain the minimizer at α = -∞.

    Inside each cell where the extremal g of p(g|x)/q(g) is fixed for every
    x, the Csiszár objective is a concave function of q and the BLP
    objective a monotone transform of a convex one being maximized, and each
    cell is a polytope cut out by the ties q(g) p(g'|x) = q(g') p(g|x). Both
    optima therefore lie at vertices of this arrangement, restricted to the
    face where every live row has p(g|x) > 0. Returns None when there are
    too many vertices to enumerate.
    """
    keep = px > SUPPORT_TOL
    P = P[keep]
    nx, ng = P.shape
    face = np.flatnonzero(np.all(P > SUPPORT_TOL, axis=0))
    k = face.size
    if k == 0:
        return np.full((1, ng), 1.0 / ng)
    sub = P[:, face]
    planes = [np.eye(k)[g] for g in range(k)]
    for x in range(nx):
        for g in range(k):
            for h in range(g + 1, k):
                row = np.zeros(k)
                row[g], row[h] = sub[x, h], -sub[x, g]
                planes.append(row / np.linalg.norm(row))
    planes = np.unique(np.round(np.array(planes), 14), axis=0)
    if math.comb(len(planes), k - 1) > VERTEX_LIMIT:
        return None
    combos = np.array(list(itertools.combinations(range(len(planes)), k - 1)), dtype=int).reshape(-1, k - 1)
    A = np.concatenate([planes[combos], np.ones((len(combos), 1, k))], axis=1)
    rhs = np.zeros(k)
    rhs[-1] = 1.0
    det = np.linalg.det(A)
    ok = np.abs(det) > 1e-12
    Q = np.linalg.solve(A[ok], np.broadcast_to(rhs, (int(ok.sum()), k))[..., None])[..., 0]
    Q = Q[np.all(Q > -1e-12, axis=1)]
    Q = np.clip(Q, 0.0, None)
    Q = Q / Q.sum(axis=1, keepdims=True)
    out = np.zeros((len(Q), ng))
    out[:, face] = Q
    return out


def _neg_inf_values(variant, P, px, Q):
    """Conditional divergences at α = -∞ for many candidate q (rows of Q), in bits."""
    keep = px > SUPPORT_TOL
    P, px = P[keep], px[keep]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(Q[:, None, :] > 0, P[None] / Q[:, None, :], np.inf)
        low = ratio.min(axis=2)
        if variant is CrdVariant.CSISZAR:
            return -(px * np.log2(low)).sum(axis=1)
        return -np.log2((px * low).sum(axis=1))


def _epigraph_q(variant, P, px, q0, up):
    nx, ng = P.shape
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = P / np.where(q0 > 0, q0, np.inf)
    if up:
        t0 = ratio.max(axis=1) * (1 + 1e-9)
    else:
        t0 = np.where(q0 > 0, ratio, np.inf).min(axis=1) * (1 - 1e-9)
    t0 = np.clip(t0, 1e-12, None)
    sign = 1.0 if up else -1.0

    if variant is CrdVariant.CSISZAR:
        def obj(z):
            return sign * np.dot(px, np.log(z[ng:]))

        def obj_jac(z):
            return np.concatenate([np.zeros(ng), sign * px / z[ng:]])
    else:
        def obj(z):
            return sign * np.log(np.dot(px, z[ng:]))

        def obj_jac(z):
            return np.concatenate([np.zeros(ng), sign * px / np.dot(px, z[ng:])])

    def cons(z):
        q, t = z[:ng], z[ng:]
        return sign * (t[:, None] * q[None, :] - P).ravel()

    eye_g = np.eye(ng)
    sel = np.repeat(np.eye(nx), ng, axis=0)  # row (x, g) picks t_x

    def cons_jac(z):
        q, t = z[:ng], z[ng:]
        jq = (t[:, None, None] * eye_g[None]).reshape(nx * ng, ng)
        jt = sel * np.tile(q, nx)[:, None]
        return sign * np.hstack([jq, jt])

    bounds = [(0.0, 1.0)] * ng + [(1e-12, None)] * nx
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(
            obj, np.concatenate([q0, t0]), jac=obj_jac, method="SLSQP", bounds=bounds,
            constraints=[
                {"type": "ineq", "fun": cons, "jac": cons_jac},
                {"type": "eq", "fun": lambda z: z[:ng].sum() - 1.0, "jac": lambda z: np.r_[np.ones(ng), np.zeros(nx)]},
            ],
            options={"ftol": 1e-14, "maxiter": 500},
        )
    q = np.clip(res.x[:ng], 0.0, None)
    return q / q.sum()


def _minimize_many(variant, Ps, pxs, a, seeds, rng, n_random, polish=True):
    """Minimize D^V(p_{G|X} ‖ q | p_X) over q for a batch of same-shape instances.

    ``seeds[i]`` lists candidate PMFs for instance i; each instance also gets
    ``n_random`` starts (uniform, near-vertices, Dirichlet). Returns a list of
    (value, q) with values from the reference formula.
    """
    B, _, ng = Ps.shape
    rand = simplex_starts(ng, rng, count=n_random)
    blocks = [np.vstack([np.atleast_2d(q) for q in seeds[i]] + [rand]) for i in range(B)]
    out = []
    if a in (math.inf, -math.inf):
        for i in range(B):
            if a < 0:
                cands = _neg_inf_candidates(Ps[i], pxs[i])
                if cands is not None:
                    cands = np.vstack([cands, blocks[i]])
                    k = int(np.argmin(_neg_inf_values(variant, Ps[i], pxs[i], cands)))
                    out.append((_cond_div(variant, Ps[i], cands[k], pxs[i], a), cands[k]))
                    continue
            # convex at +inf; at -inf this fallback is a multi-start local search
            n_local = 2 if a > 0 else len(blocks[i])
            single = lambda q: _cond_div(variant, Ps[i], q, pxs[i], a)  # noqa: E731
            vals = np.array([single(q) for q in blocks[i]])
            order = np.argsort(vals, kind="stable")
            best_v, best_q = float(vals[order[0]]), blocks[i][order[0]]
            for k in order[:n_local]:
                q = _epigraph_solve(variant, Ps[i], pxs[i], a, blocks[i][k])
                v = single(q)
                if v < best_v:
                    best_v, best_q = v, q
            out.append((best_v, best_q))
        return out
    owner = np.concatenate([np.full(len(bl), i) for i, bl in enumerate(blocks)])
    RP, Rpx = zip(*(_restrict_rows(Ps[i], pxs[i]) for i in range(B)))
    RP, Rpx = np.array(RP), np.array(Rpx)
    if a < 0:
        # q(g) > 0 where some live row has p(g|x) = 0 gives an infinite divergence
        face = np.all((RP > SUPPORT_TOL) | (Rpx[:, :, None] == 0), axis=1)
    else:
        face = np.ones((B, ng), dtype=bool)
    empty = ~face.any(axis=1)
    face[empty] = True
    fun, grad = _smooth_objective(variant, RP, Rpx, a, owner)
    res = minimize_rows(fun, grad, np.vstack(blocks), indexed=True, allowed=face[owner])
    fvals = np.where(np.isfinite(res.fun), res.fun, np.inf)
    for i in range(B):
        rows = np.flatnonzero(owner == i)
        if empty[i]:
            out.append((math.inf, np.full(ng, 1.0 / ng)))
            continue
        # the reference formula decides between the two best rows and the
        # polished best row, so the reported value is exact for the q returned
        top = rows[np.argsort(fvals[rows], kind="stable")[:2]]
        cands = [res.x[r] for r in top]
        if polish:
            cands.append(polish_softmax(fun, grad, res.x[top[0]], top[0], face[i]))
        vals = np.array([_cond_div(variant, Ps[i], q, pxs[i], a) for q in cands])
        k = int(np.argmin(vals))
        out.append((float(vals[k]), cands[k]))
    return out


def _sibson_details(P, px, a, seeds, rng, n_random):
    qs = sibson_minimizer(P, px, a)
    if a in (0.0, 1.0, math.inf, -math.inf) or _sibson_identity_holds(P, px, a, qs):
        return sibson_mi_closed_form(P, px, a) + 0.0, qs
    return _minimize_many(CrdVariant.SIBSON, P[None], px[None], a, [[qs, *seeds]], rng, n_random)[0]


def _all_mi(Ps, pxs, a, extra_seeds, seed, n_random, polish=True):
    """Sibson, Csiszár and BLP MIs for same-shape instances with shared candidates.

    Csiszár is minimized from q*_S and p_G; BLP additionally from Csiszár's
    minimizer, and Csiszár is finally re-checked at BLP's minimizer. Each
    variant therefore sees every candidate the other found.
    """
    B = Ps.shape[0]
    rng = np.random.default_rng(seed)
    sib = [_sibson_details(Ps[i], pxs[i], a, extra_seeds[i], rng, n_random) for i in range(B)]
    if a == 1.0:
        vals = [sibson_mi_closed_form(Ps[i], pxs[i], 1.0) for i in range(B)]
        qg = [pxs[i] @ Ps[i] for i in range(B)]
        return [{v: (vals[i] + 0.0, qg[i]) for v in CrdVariant} for i in range(B)]
    base = [[sib[i][1], pxs[i] @ Ps[i], *extra_seeds[i]] for i in range(B)]
    csz = _minimize_many(CrdVariant.CSISZAR, Ps, pxs, a, base, np.random.default_rng(seed), n_random, polish)
    if a == 0.0:
        blp = [(0.0, sib[i][1]) for i in range(B)]
    else:
        seeds_b = [base[i] + [csz[i][1]] for i in range(B)]
        blp = _minimize_many(CrdVariant.BLP, Ps, pxs, a, seeds_b, np.random.default_rng(seed), n_random, polish)
        for i in range(B):
            v = _cond_div(CrdVariant.CSISZAR, Ps[i], blp[i][1], pxs[i], a)
            if v < csz[i][0]:
                csz[i] = (v, blp[i][1])
    return [{CrdVariant.SIBSON: sib[i], CrdVariant.CSISZAR: csz[i], CrdVariant.BLP: blp[i]} for i in range(B)]


def mutual_informations(joints, alpha, *, seed: int = 0, starts: int = N_STARTS, polish: bool = True):
    """All three MIs for a list of joints; instances of equal shape are solved as one batch.

    Returns one dict per joint mapping each ``CrdVariant`` to its value in bits.
    ``polish=False`` skips the final softmax-coordinate refinement, which is
    only needed when the minimizer has coordinates of very different scales.
    """
    a = order_value(alpha)
    js = [as_joint(j) for j in joints]
    out = [None] * len(js)
    groups = {}
    for k, j in enumerate(js):
        groups.setdefault(j.shape, []).append(k)
    for idx in groups.values():
        Ps = np.array([condition_on_x(js[k]) for k in idx])
        pxs = np.array([marginal_x(js[k]) for k in idx])
        res = _all_mi(Ps, pxs, a, [[] for _ in idx], seed, starts, polish)
        for k, r in zip(idx, res):
            out[k] = {v: val + 0.0 for v, (val, _) in r.items()}
    return out


def variant_mi_details(variant, j, alpha, *, seeds=(), seed: int = 0, starts: int = N_STARTS):
    """Return (value, minimizing q_G) for the chosen variant's mutual information."""
    variant = CrdVariant.parse(variant)
    j = as_joint(j)
    a = order_value(alpha)
    P, px = condition_on_x(j), marginal_x(j)
    if variant is CrdVariant.SIBSON:
        val, q = _sibson_details(P, px, a, list(seeds), np.random.default_rng(seed), starts)
        return val + 0.0, q
    val, q = _all_mi(P[None], px[None], a, [list(seeds)], seed, starts)[0][variant]
    return val + 0.0, q


def variant_mi(variant, j, alpha, *, seed: int = 0, starts: int = N_STARTS) -> float:
    """Sibson, Csiszár or BLP mutual information: min over q_G of the conditional divergence."""
    return variant_mi_details(variant, j, alpha, seed=seed, starts=starts)[0]


# capacity ---------------------------------------------------------------------


def _clamped_power(x, a, cap=1e300):
    """x**a with zeros kept at 0 for a > 0 and negative powers capped at ``cap``."""
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(x > 0, np.where(x > 0, x, 1.0) ** a, 0.0 if a > 0 else np.inf)
    return np.minimum(out, cap)


def _sibson_capacity(W, a, rng):
    """max_r I^S(r): a convex program in r for every finite order."""
    nx = W.shape[0]
    if a == math.inf:
        return math.log2(W.max(axis=0).sum()), np.full(nx, 1.0 / nx)
    if a == -math.inf:
        floor = W.min(axis=0).sum()
        return (-math.log2(floor) if floor > 0 else math.inf), np.full(nx, 1.0 / nx)
    if a == 1.0:

        def fun(R):
            q = R @ W
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(W > 0, W * np.log(W / q[:, None, :]), 0.0).sum(axis=2)
            return -np.einsum("rx,rx->r", R, t) / LN2

        def grad(R):
            q = R @ W
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(W > 0, W * np.log(W / q[:, None, :]), 0.0).sum(axis=2)
            return -t / LN2

    else:
        V = _clamped_power(W, a)
        c = abs(a) / (a - 1.0) / LN2

        def fun(R):
            A = R @ V
            with np.errstate(divide="ignore", over="ignore"):
                return -c * np.log((A ** (1.0 / a)).sum(axis=1))

        def grad(R):
            A = R @ V
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                T = (A ** (1.0 / a)).sum(axis=1)
                w = A ** (1.0 / a - 1.0) / a
                return -c * (w @ V.T) / T[:, None]

    res = minimize_rows(fun, grad, simplex_starts(nx, rng))
    k = int(np.nanargmin(res.fun))
    r = res.x[k]
    return sibson_mi_closed_form(W, r, a), r


def _arimoto_mi_logweights(logp, W, a) -> float:
    """Arimoto MI of the joint p(x)W(g|x) from log-weights; exact for extreme inputs."""
    logp = logp - logsumexp(logp)
    with np.errstate(divide="ignore"):
        lw = np.log(W)
    if a == 1.0:
        return shannon_mi(joint_from(np.exp(logp), W))
    log_px = logsumexp(a * logp) / (a - 1.0)
    terms = a * (logp[:, None] + lw)
    if a < 0:
        terms = np.where(W > 0, terms, np.inf)
    inner = logsumexp(terms, axis=0) / a
    log_cond = a / (a - 1.0) * logsumexp(inner)
    return sgn(a) * float(log_cond - log_px) / LN2


def _arimoto_ascent(W, a, starts):
    """Projected-gradient ascent on Arimoto's MI directly in p (non-convex)."""
    V = _clamped_power(W, a)

    def fun(R):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            Ra = _clamped_power(R, a)
            T = ((Ra @ V) ** (1.0 / a)).sum(axis=1)
            val = sgn(a) / (a - 1.0) * (a * np.log(T) - np.log(Ra.sum(axis=1))) / LN2
        return np.where(np.isfinite(val), -val, np.inf)

    def grad(R):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            Rc = np.maximum(R, 1e-300)
            Ra = _clamped_power(R, a)
            A = Ra @ V
            N = A ** (1.0 / a)
            T = N.sum(axis=1)
            dlogT = (Rc ** (a - 1.0)) * ((N ** (1.0 - a)) @ V.T) / T[:, None]
            dlogS = a * Rc ** (a - 1.0) / Ra.sum(axis=1)[:, None]
            g = sgn(a) / (a - 1.0) * (a * dlogT - dlogS) / LN2
        return np.nan_to_num(-g, nan=0.0, posinf=1e300, neginf=-1e300)

    res = minimize_rows(fun, grad, starts, max_iter=300)
    return res.x


def renyi_capacity(p_gx, alpha, *, seed: int = 0):
    """Rényi capacity C_α of a channel p(g|x) and an Arimoto-optimal input.

    The value is the maximum of Arimoto's MI over input PMFs. It is computed
    through two routes and they must agree to 1e-6: the convex Sibson problem
    and Arimoto's MI evaluated at its own ascent iterates plus the image of
    the Sibson optimizer under p ∝ r^{1/α}.
    """
    W = as_cond(p_gx, "p_gx")
    a = order_value(alpha)
    if a == 0.0:
        raise InputError("capacity at order 0 is not supported")
    rng = np.random.default_rng(seed)
    c_sib, r = _sibson_capacity(W, a, rng)
    nx = W.shape[0]
    if a in (math.inf, -math.inf):
        c_ari = _arimoto_mi_inf(W, a)
        p_star = np.full(nx, 1.0 / nx)
    else:
        cands = []
        if a == 1.0:
            cands.append(np.log(np.clip(r, 1e-300, None)))
        else:
            cands.append(np.log(np.clip(r, 1e-300, None)) / a)
        starts = simplex_starts(nx, rng, count=4)
        for p in _arimoto_ascent(W, a, starts) if a != 1.0 else starts:
            cands.append(np.log(np.clip(p, 1e-300, None)))
        vals = [_arimoto_mi_logweights(lp, W, a) for lp in cands]
        k = int(np.argmax(vals))
        c_ari = vals[k]
        lp = cands[k] - logsumexp(cands[k])
        p_star = np.exp(lp)
    # both routes report +inf when some input row can be excluded outright (α < 0)
    if not (c_ari == c_sib or abs(c_ari - c_sib) <= CAPACITY_TOL):
        raise OptimizerDidNotConverge(
            f"Arimoto ({c_ari!r}) and Sibson ({c_sib!r}) capacities differ", best=(c_sib, r)
        )
    return float(c_ari) + 0.0, p_star


def _arimoto_mi_inf(W, a):
    nx = W.shape[0]
    from .prob_core import arimoto_mi

    return arimoto_mi(joint_from(np.full(nx, 1.0 / nx), W), a, strict=False)


def sibson_capacity(p_gx, alpha, *, seed: int = 0):
    """max over p_X of Sibson's MI and the maximizing input."""
    W = as_cond(p_gx, "p_gx")
    a = order_value(alpha)
    if a == 0.0:
        raise InputError("capacity at order 0 is not supported")
    return _sibson_capacity(W, a, np.random.default_rng(seed))
