"""Optimization on products of probability simplices.

The workhorse is a batched projected-gradient minimizer: every row of the
iterate matrix is an independent problem (or an independent start of the same
problem), with its own Barzilai-Borwein step and Armijo backtracking.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import warnings

import numpy as np
from scipy.optimize import minimize

N_STARTS = 20
GRAD_CAP = 1e20
_OFF_FACE = -1e18  # sorts last in the projection, so the coordinate is zeroed


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row of ``v`` onto the probability simplex."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    n = v.shape[1]
    u = -np.sort(-v, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, n + 1)
    cond = u - css / idx > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(v.shape[0]), rho] / (rho + 1)
    return np.maximum(v - theta[:, None], 0.0)


def simplex_starts(n: int, rng: np.random.Generator, count: int = N_STARTS, interior: float = 1e-3):
    """Uniform point, (slightly interior) vertices, then Dirichlet draws."""
    starts = [np.full(n, 1.0 / n)]
    for k in range(n):
        if len(starts) >= count:
            break
        e = np.zeros(n)
        e[k] = 1.0
        starts.append((1 - interior) * e + interior / n)
    while len(starts) < count:
        starts.append(rng.dirichlet(np.ones(n)))
    return np.array(starts[:count])


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: np.ndarray
    iterations: int
    converged: np.ndarray


def minimize_rows(fun, grad, x0, *, max_iter=10_000, gtol=1e-9, sigma=1e-4, indexed=False, allowed=None) -> SimplexResult:
    """Minimize row-wise objectives over the simplex by projected gradient.

    ``fun(X)`` returns one value per row and ``grad(X)`` the matching gradient
    rows. With ``indexed=True`` both are called as ``fun(X, rows)`` where
    ``rows`` gives the batch index of each row of ``X``, so that different rows
    may carry different problems. Rows are frozen once the projected-gradient
    norm drops below ``gtol`` or the step stalls at machine precision.
    ``allowed`` (boolean, shaped like ``x0``) confines each row to a face of
    the simplex; each row needs at least one allowed coordinate.
    """
    if not indexed:
        fun_i, grad_i = (lambda X, rows: fun(X)), (lambda X, rows: grad(X))
    else:
        fun_i, grad_i = fun, grad
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    if allowed is None:
        face = np.ones(x0.shape, dtype=bool)
        proj = lambda v, rows: project_simplex(v)  # noqa: E731
    else:
        face = np.broadcast_to(np.asarray(allowed, dtype=bool), x0.shape)
        proj = lambda v, rows: project_simplex(np.where(face[rows], v, _OFF_FACE))  # noqa: E731
    x = proj(x0, slice(None))
    b = x.shape[0]
    every = np.arange(b)
    f = np.asarray(fun_i(x, every), dtype=float)
    g, wild = _finite(np.where(face, grad_i(x, every), 0.0))
    t = _cap_step(np.full(b, 1.0), g)
    active = np.isfinite(f)
    converged = np.zeros(b, dtype=bool)
    it = 0
    for it in range(1, max_iter + 1):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        xa, fa, ga, ta, wa = x[idx], f[idx], g[idx], t[idx], wild[idx]
        ok = np.zeros(idx.size, dtype=bool)
        stuck = np.zeros(idx.size, dtype=bool)
        xn = xa.copy()
        fn = fa.copy()
        for k in range(80):
            todo = ~ok & ~stuck
            if not todo.any():
                break
            cand = proj(xa[todo] - ta[todo, None] * ga[todo], idx[todo])
            d = cand - xa[todo]
            # a candidate that no longer moves cannot produce a decrease
            still = np.abs(d).max(axis=1) <= 1e-17
            stuck[np.flatnonzero(todo)[still]] = True
            fc = np.asarray(fun_i(cand, idx[todo]), dtype=float)
            dec = fa[todo] - sigma / ta[todo] * np.sum(d * d, axis=1)
            # a clipped gradient has no meaningful scale; accept plain decrease
            dec = np.where(wa[todo], fa[todo] - 1e-12 * (1.0 + np.abs(fa[todo])), dec)
            good = np.isfinite(fc) & (fc <= dec + 1e-15 * np.abs(fa[todo]))
            sub = np.flatnonzero(todo)
            xn[sub[good]] = cand[good]
            fn[sub[good]] = fc[good]
            ok[sub[good]] = True
            # halve at first, then shrink fast: long searches mean a badly scaled step
            ta[sub[~good]] *= 0.5 if k < 4 else 0.05
        gn, wn = _finite(np.where(face[idx], grad_i(xn, idx), 0.0))
        s = xn - xa
        step = np.sqrt(np.sum(s * s, axis=1))
        pg = step / ta
        y = gn - ga
        sy = np.sum(s * y, axis=1)
        ss = np.sum(s * s, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            bb = np.where(sy > 0, ss / sy, ta * 4.0)
        t[idx] = _cap_step(np.clip(bb, 1e-14, 1e14), gn)
        x[idx], f[idx], g[idx], wild[idx] = xn, fn, gn, wn
        done = (pg <= gtol) | (step <= 1e-16) | ~ok
        converged[idx[done & ok]] = True
        converged[idx[~ok]] = True  # no descent possible at machine precision
        active[idx[done]] = False
    return SimplexResult(x=x, fun=f, iterations=it, converged=converged)


def polish_softmax(fun, grad, q0, row, face=None, max_iter=500):
    """Refine one row by L-BFGS in softmax coordinates on the allowed face.

    Projected gradient stalls when the optimum has coordinates many orders of
    magnitude apart; logarithmic coordinates remove that scaling. ``fun`` and
    ``grad`` use the indexed convention of ``minimize_rows``.
    """
    q0 = np.asarray(q0, dtype=float)
    idx = np.flatnonzero(np.ones(q0.size, dtype=bool) if face is None else face)
    rows = np.array([row])
    n = q0.size

    def to_q(z):
        q = np.zeros(n)
        w = np.exp(z - z.max())
        q[idx] = w / w.sum()
        return q

    # tolerances below are absolute; work at unit scale
    f0 = float(fun(q0[None], rows)[0])
    scale = abs(f0) if np.isfinite(f0) and f0 != 0 else 1.0

    def obj(z):
        q = to_q(z)
        f = float(fun(q[None], rows)[0]) / scale
        if not np.isfinite(f):
            return 1e300, np.zeros_like(z)
        g = np.asarray(grad(q[None], rows), dtype=float)[0][idx] / scale
        if not np.all(np.isfinite(g)):
            return f, np.zeros_like(z)
        qi = q[idx]
        return f, qi * (g - np.dot(qi, g))

    # near-zero coordinates barely move in these coordinates; start inside
    z0 = np.log(0.999 * q0[idx] / q0[idx].sum() + 1e-3 / idx.size)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(obj, z0, jac=True, method="L-BFGS-B", options={"maxiter": max_iter, "ftol": 1e-16, "gtol": 1e-16})
    return to_q(res.x)


def _cap_step(t, g):
    # steps far beyond the simplex diameter only cost projection accuracy
    gmax = np.abs(g).max(axis=-1)
    with np.errstate(divide="ignore"):
        return np.minimum(t, np.where(gmax > 0, 10.0 / gmax, np.inf))


def _finite(g):
    # infinite slopes at the boundary only carry a direction; the clip keeps
    # them within reach of the 80 backtracking halvings
    g = np.nan_to_num(np.asarray(g, dtype=float), nan=0.0, posinf=np.inf, neginf=-np.inf)
    wild = np.any(np.abs(g) > GRAD_CAP, axis=-1)
    return np.clip(g, -GRAD_CAP, GRAD_CAP), wild


def vertices(n: int) -> np.ndarray:
    return np.eye(n)


def simplex_grid(n: int, step: float = 1e-3) -> np.ndarray:
    """All points of the simplex whose coordinates are multiples of ``step``."""
    m = int(round(1.0 / step))
    if n == 1:
        return np.ones((1, 1))
    # stars and bars: choose n-1 bar positions among m + n - 1 slots
    if n == 2:
        k = np.arange(m + 1)
        return np.stack([k, m - k], axis=1) / m
    if n == 3:
        a, b = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
        keep = a + b <= m
        a, b = a[keep], b[keep]
        return np.stack([a, b, m - a - b], axis=1) / m
    pts = []
    for bars in combinations(range(m + n - 1), n - 1):
        edges = (-1,) + bars + (m + n - 1,)
        pts.append([edges[i + 1] - edges[i] - 1 for i in range(n)])
    return np.array(pts, dtype=float) / m
