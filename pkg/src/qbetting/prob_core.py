"""Finite-alphabet PMFs and the Rényi / Arimoto entropy family.

All logarithms are base 2. Orders live on the extended real line; ``inf`` and
``-inf`` select the max/min extensions and ``0``/``1`` the Hartley and Shannon
cases. Distributions are plain numpy arrays; joints are indexed ``[x, g]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DivergentEntropy, InputError

SUPPORT_TOL = 1e-12
NORM_TOL = 1e-12
MAX_ALPHABET = 64
LN2 = math.log(2.0)


class OrderClass(enum.Enum):
    NEG_INF = "neg_inf"
    NEGATIVE = "negative"
    ZERO = "zero"
    ZERO_ONE = "zero_one"
    ONE = "one"
    GT_ONE = "gt_one"
    POS_INF = "pos_inf"


@dataclass(frozen=True)
class Order:
    """An extended-real Rényi order."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v):
            raise InputError("order must not be NaN")
        object.__setattr__(self, "value", v)

    @classmethod
    def parse(cls, raw) -> "Order":
        if isinstance(raw, Order):
            return raw
        if isinstance(raw, str):
            text = raw.strip().lower()
            if text in ("inf", "+inf", "infinity", "+infinity"):
                return cls(math.inf)
            if text in ("-inf", "-infinity"):
                return cls(-math.inf)
            try:
                return cls(float(text))
            except ValueError as exc:
                raise InputError(f"cannot parse order {raw!r}") from exc
        return cls(float(raw))

    def classify(self) -> OrderClass:
        a = self.value
        if a == math.inf:
            return OrderClass.POS_INF
        if a == -math.inf:
            return OrderClass.NEG_INF
        if a == 0.0:
            return OrderClass.ZERO
        if a == 1.0:
            return OrderClass.ONE
        if a < 0:
            return OrderClass.NEGATIVE
        if a < 1:
            return OrderClass.ZERO_ONE
        return OrderClass.GT_ONE

    def risk(self) -> float:
        """R = 1/α. ``+inf`` maps to ``+0.0`` and ``-inf`` to ``-0.0``."""
        if self.value == 0.0:
            raise InputError("order 0 has unbounded risk parameter")
        return 1.0 / self.value

    def to_json(self):
        if math.isinf(self.value):
            return "inf" if self.value > 0 else "-inf"
        return self.value

    def __float__(self):
        return self.value


def order_value(alpha) -> float:
    return Order.parse(alpha).value


def sgn(w) -> int:
    """+1 for w >= 0 and -1 otherwise."""
    return 1 if w >= 0 else -1


# validation ------------------------------------------------------------------


def as_pmf(p, name="pmf") -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"{name} must be a non-empty vector")
    if arr.size > MAX_ALPHABET:
        raise InputError(f"{name} alphabet exceeds {MAX_ALPHABET}")
    if not np.all(np.isfinite(arr)) or np.any(arr < -NORM_TOL):
        raise InputError(f"{name} has negative or non-finite entries")
    if abs(arr.sum() - 1.0) > 1e-9:
        raise InputError(f"{name} sums to {float(arr.sum())!r}, not 1")
    return np.clip(arr, 0.0, None)


def as_joint(j, name="joint") -> np.ndarray:
    arr = np.asarray(j, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise InputError(f"{name} must be a non-empty matrix")
    if max(arr.shape) > MAX_ALPHABET:
        raise InputError(f"{name} alphabet exceeds {MAX_ALPHABET}")
    if not np.all(np.isfinite(arr)) or np.any(arr < -NORM_TOL):
        raise InputError(f"{name} has negative or non-finite entries")
    if abs(arr.sum() - 1.0) > 1e-9:
        raise InputError(f"{name} sums to {float(arr.sum())!r}, not 1")
    return np.clip(arr, 0.0, None)


def as_cond(c, name="conditional") -> np.ndarray:
    """Row-stochastic matrix; row i is a PMF."""
    arr = np.asarray(c, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise InputError(f"{name} must be a non-empty matrix")
    if max(arr.shape) > MAX_ALPHABET:
        raise InputError(f"{name} alphabet exceeds {MAX_ALPHABET}")
    if not np.all(np.isfinite(arr)) or np.any(arr < -NORM_TOL):
        raise InputError(f"{name} has negative or non-finite entries")
    if np.any(np.abs(arr.sum(axis=1) - 1.0) > 1e-9):
        raise InputError(f"rows of {name} must sum to 1")
    return np.clip(arr, 0.0, None)


def support(p) -> np.ndarray:
    return np.flatnonzero(np.asarray(p) > SUPPORT_TOL)


def marginal_x(j) -> np.ndarray:
    return np.asarray(j).sum(axis=1)


def marginal_g(j) -> np.ndarray:
    return np.asarray(j).sum(axis=0)


def joint_from(p_x, p_gx) -> np.ndarray:
    """p(x, g) = p(x) p(g|x)."""
    return np.asarray(p_x)[:, None] * np.asarray(p_gx)


def condition_on_x(j) -> np.ndarray:
    """p(g|x); rows with zero mass become uniform."""
    j = np.asarray(j, dtype=float)
    px = j.sum(axis=1, keepdims=True)
    out = np.full_like(j, 1.0 / j.shape[1])
    np.divide(j, px, out=out, where=px > SUPPORT_TOL)
    return out


def condition_on_g(j) -> np.ndarray:
    """p(x|g) returned with rows indexed by g; empty columns become uniform."""
    return condition_on_x(np.asarray(j).T)


# entropies -------------------------------------------------------------------


def _positive_logs(p):
    p = np.asarray(p, dtype=float)
    mask = p > SUPPORT_TOL
    out = np.full(p.shape, -np.inf)
    out[mask] = np.log(p[mask])
    return out, mask


def _log2_renyi_prob(p: np.ndarray, a: float) -> float:
    logs, mask = _positive_logs(p)
    if a < 0 and not mask.all():
        raise DivergentEntropy("negative order with a zero-probability entry")
    vals = logs[mask]
    if a == math.inf:
        return vals.max() / LN2
    if a == -math.inf:
        return vals.min() / LN2
    if a == 0.0:
        return -math.log2(vals.size)
    if a == 1.0:
        return float(np.sum(np.exp(vals) * vals)) / LN2
    return float(logsumexp(a * vals)) / (a - 1.0) / LN2


def renyi_probability(p, alpha) -> float:
    """p_α(X) = (Σ p^α)^{1/(α-1)}, so that H_α = -log p_α."""
    return 2.0 ** _log2_renyi_prob(as_pmf(p), order_value(alpha))


def renyi_entropy(p, alpha) -> float:
    """Rényi entropy of order α in bits."""
    return -_log2_renyi_prob(as_pmf(p), order_value(alpha)) + 0.0


def _log2_cond_renyi_prob(j: np.ndarray, a: float, strict: bool = True) -> float:
    rows = support(j.sum(axis=1))
    cols = support(j.sum(axis=0))
    sub = j[np.ix_(rows, cols)]
    logs, mask = _positive_logs(sub)
    if a < 0 and not mask.all():
        if strict:
            raise DivergentEntropy("negative order with a zero joint entry on the support")
        # by continuity a column with a zero entry has vanishing α-norm
        if not mask.all(axis=0).any():
            return -math.inf
        sub, logs, mask = sub[:, mask.all(axis=0)], logs[:, mask.all(axis=0)], mask[:, mask.all(axis=0)]
    if a == math.inf:
        return math.log2(sub.max(axis=0).sum())
    if a == -math.inf:
        return math.log2(sub.min(axis=0).sum())
    if a == 0.0:
        return -math.log2(mask.sum(axis=0).max())
    if a == 1.0:
        pg = sub.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(mask, sub * (logs - np.log(pg)[None, :]), 0.0)
        return float(terms.sum()) / LN2
    inner = logsumexp(a * logs, axis=0) / a
    return a / (a - 1.0) * float(logsumexp(inner)) / LN2


def cond_renyi_probability(j, alpha) -> float:
    """p_α(X|G) = 2^{-H_α(X|G)}."""
    return 2.0 ** _log2_cond_renyi_prob(as_joint(j), order_value(alpha))


def arimoto_cond_entropy(j, alpha, *, strict: bool = True) -> float:
    """Arimoto-Rényi conditional entropy H_α(X|G) in bits; ``j`` is indexed [x, g].

    With ``strict=False`` a zero joint entry at negative order is evaluated by
    continuity instead of raising ``DivergentEntropy``.
    """
    return -_log2_cond_renyi_prob(as_joint(j), order_value(alpha), strict) + 0.0


def arimoto_mi(j, alpha, *, strict: bool = True) -> float:
    """Arimoto mutual information sgn(α)[H_α(X) - H_α(X|G)] in bits.

    ``strict`` is passed to the conditional entropy; the marginal of X must
    still have full support at negative orders.
    """
    j = as_joint(j)
    a = order_value(alpha)
    diff = _log2_cond_renyi_prob(j, a, strict) - _log2_renyi_prob(marginal_x(j), a)
    return sgn(a) * diff + 0.0


def shannon_entropy(p) -> float:
    return renyi_entropy(p, 1.0)


def shannon_mi(j) -> float:
    """Direct Shannon MI Σ p log p/(p_x p_g), independent of the Rényi code path."""
    j = as_joint(j)
    outer = np.outer(j.sum(axis=1), j.sum(axis=0))
    mask = j > SUPPORT_TOL
    return float(np.sum(j[mask] * np.log2(j[mask] / outer[mask])))
