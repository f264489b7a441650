"""Multi-start ascent over POVMs and over ensembles of pure states.

POVMs with ``n`` outcomes on C^d are parametrized by unconstrained complex
vectors a_g, mapped to M_g = S^{-1/2} a_g a_g† S^{-1/2} with S = Σ a_g a_g†.
Rank-one elements lose nothing for the objectives used here: splitting an
element into rank-one pieces is a fine-graining, and information does not
decrease under fine-graining. Ensembles use unnormalized complex vectors
(normalized on the fly) and a softmax prior.

Objectives are functions of the conditional p(g|x) (and, for ensembles, of
the prior) returning the value together with its partial derivatives; the
chain rule to the parameters is analytic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InputError, OptimizerDidNotConverge
from .quantum_core import Ensemble, as_povm

POVM_STARTS = 30
ENSEMBLE_STARTS = 12
FD_STEP = 1e-7


@dataclass
class SearchResult:
    value: float
    x: object
    starts: int
    failures: int


def _outer(vecs):
    return np.einsum("gi,gj->gij", vecs, vecs.conj())


def _split_complex(theta, count, d):
    return (theta[: count * d] + 1j * theta[count * d : 2 * count * d]).reshape(count, d)


def _inv_sqrt_parts(s):
    lam, u = np.linalg.eigh(s)
    if lam.min() <= 1e-14 * max(lam.max(), 1e-300):
        raise np.linalg.LinAlgError("POVM parameters do not span the space")
    r = np.sqrt(lam)
    t = (u / r) @ u.conj().T
    # divided differences of λ^{-1/2}, written without cancellation
    k = -1.0 / (np.outer(r, r) * (r[:, None] + r[None, :]))
    return t, u, k


def povm_from_params(theta, d: int, n: int) -> np.ndarray:
    vecs = _split_complex(np.asarray(theta, dtype=float), n, d)
    a = _outer(vecs)
    t, _, _ = _inv_sqrt_parts(a.sum(axis=0))
    m = t[None] @ a @ t[None]
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def params_from_povm(m, n: int, rng: np.random.Generator, jitter: float = 1e-4) -> np.ndarray:
    """Rank-one split of ``m`` padded to ``n`` outcomes with small random vectors."""
    m = as_povm(m)
    d = m.shape[1]
    pieces = []
    for el in m:
        w, v = np.linalg.eigh(el)
        for k in range(d):
            if w[k] > 1e-12:
                pieces.append(np.sqrt(w[k]) * v[:, k])
    if len(pieces) > n:
        raise InputError(f"POVM needs {len(pieces)} rank-one pieces, more than {n} outcomes")
    while len(pieces) < n:
        pieces.append(jitter * (rng.normal(size=d) + 1j * rng.normal(size=d)))
    vecs = np.array(pieces)
    return np.concatenate([vecs.real.ravel(), vecs.imag.ravel()])


def povm_value_and_grad(theta, states, n, objective):
    """Objective value and its gradient in the POVM parameters.

    With G = ∂F/∂p(g|x) and Y_g = Σ_x G[x, g] ρ_x, the derivative of
    Σ_g tr[M_g Y_g] in a_g is 2 H_g a_g with H_g = T Y_g T + W, where T = S^{-1/2}
    and W carries the derivative of T (Daleckii-Krein formula).
    """
    d = states.shape[1]
    vecs = _split_complex(theta, n, d)
    a = _outer(vecs)
    t, u, k = _inv_sqrt_parts(a.sum(axis=0))
    m = t[None] @ a @ t[None]
    m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    p = np.einsum("gij,xji->xg", m, states).real
    p = np.clip(p, 0.0, None)
    p = p / p.sum(axis=1, keepdims=True)
    val, gp = objective(p)
    y = np.einsum("xg,xij->gij", gp, states)
    ty = t[None] @ y
    z = np.einsum("gij,gjk->ik", a, ty) + np.einsum("gij,jk,gkl->il", y, t, a)
    w = u @ ((u.conj().T @ z @ u) * k) @ u.conj().T
    h = ty @ t[None] + w[None]
    ha = np.einsum("gij,gj->gi", h, vecs)
    grad = np.concatenate([2 * ha.real.ravel(), 2 * ha.imag.ravel()])
    return float(val), grad


def fd_cond_gradient(f, p, step=FD_STEP):
    """Central differences of ``f`` in each entry of ``p`` (no renormalization)."""
    g = np.zeros_like(p)
    for idx in np.ndindex(p.shape):
        e = np.zeros_like(p)
        e[idx] = step
        g[idx] = (f(p + e) - f(p - e)) / (2 * step)
    return g


def _lbfgs_max(fg, theta0, max_iter):
    def obj(theta):
        try:
            v, g = fg(theta)
        except (np.linalg.LinAlgError, FloatingPointError):
            return 1e300, np.zeros_like(theta)
        if not np.isfinite(v) or not np.all(np.isfinite(g)):
            return 1e300, np.zeros_like(theta)
        return -v, -g

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(obj, theta0, jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "gtol": 1e-11, "ftol": 1e-15})
    return res.x, -float(res.fun)


def maximize_over_povms(objective, states, *, outcomes: int | None = None, starts: int = POVM_STARTS,
                        seed: int = 0, seeds=(), max_iter: int = 500) -> SearchResult:
    """Maximize ``objective`` over POVMs acting on ``states`` (a stack of density matrices).

    ``objective(p_gx)`` returns (value, ∂value/∂p_gx) for p(g|x) = tr[M_g ρ_x].
    For an inner maximum (such as the best betting strategy) the partial
    derivative at the inner optimizer is a valid gradient (Danskin).
    ``outcomes`` defaults to d²; ``seeds`` are POVMs used as extra starts.
    """
    states = np.asarray(states, dtype=complex)
    d = states.shape[1]
    n = d * d if outcomes is None else outcomes
    rng = np.random.default_rng(seed)
    inits = [params_from_povm(m, n, rng) for m in seeds]
    inits += [rng.normal(size=2 * n * d) for _ in range(starts)]
    fg = lambda th: povm_value_and_grad(th, states, n, objective)  # noqa: E731
    best_v, best_t, failures = -np.inf, None, 0
    for theta0 in inits:
        theta, v = _lbfgs_max(fg, theta0, max_iter)
        if v >= 1e299 or not np.isfinite(v) or v <= -1e299:
            failures += 1
            continue
        if v > best_v:
            best_v, best_t = v, theta
    if best_t is None:
        raise OptimizerDidNotConverge("POVM ascent failed from every start", best=None)
    return SearchResult(best_v, povm_from_params(best_t, d, n), len(inits), failures)


def _ensemble_parts(theta, k, d):
    vecs = _split_complex(theta, k, d)
    norms = np.linalg.norm(vecs, axis=1)
    z = theta[2 * k * d :]
    w = np.exp(z - z.max())
    return vecs, norms, w / w.sum()


def ensemble_from_params(theta, d: int, k: int) -> Ensemble:
    vecs, norms, prior = _ensemble_parts(np.asarray(theta, dtype=float), k, d)
    return Ensemble(_outer(vecs / norms[:, None]), prior)


def ensemble_value_and_grad(theta, m, k, objective):
    """Value and gradient of ``objective(p_gx, prior)`` over pure-state ensembles.

    p(g|x) = v_x† M_g v_x / v_x† v_x, so ∂/∂v_x of Σ_g G[x, g] p(g|x) is
    2 (Σ_g G[x, g] M_g v_x - (Σ_g G[x, g] p(g|x)) v_x) / |v_x|².
    """
    d = m.shape[1]
    vecs, norms, prior = _ensemble_parts(theta, k, d)
    mv = np.einsum("gij,xj->xgi", m, vecs)
    p = np.einsum("xi,xgi->xg", vecs.conj(), mv).real / norms[:, None] ** 2
    p = np.clip(p, 0.0, None)
    p = p / p.sum(axis=1, keepdims=True)
    val, gp, gprior = objective(p, prior)
    gv = 2 * (np.einsum("xg,xgi->xi", gp, mv) - (gp * p).sum(axis=1)[:, None] * vecs) / norms[:, None] ** 2
    gz = prior * (gprior - np.dot(prior, gprior))
    return float(val), np.concatenate([gv.real.ravel(), gv.imag.ravel(), gz])


def maximize_over_ensembles(objective, m, *, size: int | None = None, starts: int = ENSEMBLE_STARTS,
                            seed: int = 0, seeds=(), max_iter: int = 500) -> SearchResult:
    """Maximize ``objective`` over ensembles of ``size`` pure states (default d²) measured by ``m``.

    ``objective(p_gx, prior)`` returns (value, ∂/∂p_gx, ∂/∂prior).
    ``seeds`` are (state vectors, prior) pairs used as extra starts.
    """
    m = np.asarray(m, dtype=complex)
    d = m.shape[1]
    k = d * d if size is None else size
    rng = np.random.default_rng(seed)
    inits = []
    for vecs, prior in seeds:
        vecs = np.asarray(vecs, dtype=complex)
        prior = np.clip(np.asarray(prior, dtype=float), 1e-12, None)
        if vecs.shape != (k, d):
            raise InputError(f"ensemble seed must hold {k} vectors of dimension {d}")
        inits.append(np.concatenate([vecs.real.ravel(), vecs.imag.ravel(), np.log(prior)]))
    inits += [np.concatenate([rng.normal(size=2 * k * d), 0.1 * rng.normal(size=k)]) for _ in range(starts)]
    fg = lambda th: ensemble_value_and_grad(th, m, k, objective)  # noqa: E731
    best_v, best_t, failures = -np.inf, None, 0
    for theta0 in inits:
        theta, v = _lbfgs_max(fg, theta0, max_iter)
        if abs(v) >= 1e299 or not np.isfinite(v):
            failures += 1
            continue
        if v > best_v:
            best_v, best_t = v, theta
    if best_t is None:
        raise OptimizerDidNotConverge("ensemble ascent failed from every start", best=None)
    return SearchResult(best_v, ensemble_from_params(best_t, d, k), len(inits), failures)
