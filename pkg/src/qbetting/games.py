"""Quantum state and channel betting games and Arimoto information gaps.

A quantum state betting (QSB) game pairs constant-signed odds with an
ensemble {ρ_x, p(x)}; a measurement turns it into a horse betting game with
side information p(x, g) = p(x) tr[M_g ρ_x]. Noisy games insert a channel
before the measurement and channel betting (QCB) games send a fixed probe
state through one of several channels Λ_x.

Orders map to risk by R = 1/α and the odds carry the sign of α, so α = 0 is
not a valid game order.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .betting import (
    NUMERIC_STARTS,
    as_odds,
    constant_odds,
    ice,
    ice_joint_gradient,
    numeric_optimal_ice,
    optimal_ice,
)
from .errors import EmptyFreeSet, InputError, QBettingError, ShapeMismatch
from .prob_core import LN2, Order, arimoto_mi, joint_from, order_value, sgn
from .quantum_core import (
    Ensemble,
    KrausChannel,
    adjoint_apply,
    apply_channel,
    as_density,
    as_povm,
    born_cond_pmf,
    born_joint,
)
from .search import POVM_STARTS, fd_cond_gradient, maximize_over_povms

NESTED_TOL = 1e-5
SINGLE_TOL = 1e-6
CPP_ORACLE_MAX = 4
INNER_STARTS = 2


def _game_risk(alpha) -> tuple[float, float]:
    a = order_value(alpha)
    if a == 0.0:
        raise InputError("betting games need a nonzero order (R = 1/α)")
    return a, Order(a).risk()


# free sets and games ----------------------------------------------------------


class FreeKind(enum.Enum):
    UNINFORMATIVE_MEASUREMENTS = "uninformative_measurements"
    CONSTANT_CHANNELS = "constant_channels"
    EXPLICIT_MEASUREMENTS = "explicit_measurements"
    EXPLICIT_CHANNELS = "explicit_channels"
    EXPLICIT_STATES = "explicit_states"


_BUILT_IN = (FreeKind.UNINFORMATIVE_MEASUREMENTS, FreeKind.CONSTANT_CHANNELS)


@dataclass(frozen=True)
class FreeSet:
    """A set of free objects: one of the two built-ins or an explicit finite list."""

    kind: FreeKind
    members: tuple = field(default=())

    def __post_init__(self):
        kind = FreeKind(self.kind)
        object.__setattr__(self, "kind", kind)
        members = tuple(self.members)
        if kind in _BUILT_IN:
            if members:
                raise InputError(f"{kind.value} is a built-in set and takes no members")
        elif not members:
            raise EmptyFreeSet(f"{kind.value} needs at least one member")
        elif kind is FreeKind.EXPLICIT_MEASUREMENTS:
            members = tuple(as_povm(m, f"free POVM {k}") for k, m in enumerate(members))
        elif kind is FreeKind.EXPLICIT_CHANNELS:
            if not all(isinstance(n, KrausChannel) for n in members):
                raise InputError("explicit channel members must be KrausChannel objects")
        else:
            members = tuple(as_density(s, f"free state {k}") for k, s in enumerate(members))
        object.__setattr__(self, "members", members)

    @classmethod
    def uninformative(cls):
        return cls(FreeKind.UNINFORMATIVE_MEASUREMENTS)

    @classmethod
    def constant_channels(cls):
        return cls(FreeKind.CONSTANT_CHANNELS)

    @classmethod
    def measurements(cls, povms):
        return cls(FreeKind.EXPLICIT_MEASUREMENTS, tuple(povms))

    @classmethod
    def channels(cls, chans):
        return cls(FreeKind.EXPLICIT_CHANNELS, tuple(chans))

    @classmethod
    def states(cls, rhos):
        return cls(FreeKind.EXPLICIT_STATES, tuple(rhos))

    @property
    def built_in(self) -> bool:
        return self.kind in _BUILT_IN


def _expect(free: FreeSet, *kinds):
    if free.kind not in kinds:
        raise InputError(f"free set of kind {free.kind.value} does not fit here")


@dataclass(frozen=True)
class QsbGame:
    odds: np.ndarray
    ensemble: Ensemble

    def __post_init__(self):
        if not isinstance(self.ensemble, Ensemble):
            raise InputError("a QSB game needs an Ensemble")
        absodds, s = as_odds(self.odds, len(self.ensemble))
        object.__setattr__(self, "odds", s * absodds)

    @classmethod
    def constant(cls, alpha, ensemble: Ensemble, C: float = 1.0) -> "QsbGame":
        """Odds sgn(α)·C on every state, the games behind the Arimoto identities."""
        a, _ = _game_risk(alpha)
        return cls(constant_odds(sgn(a), C, len(ensemble)), ensemble)

    @property
    def sign(self) -> int:
        return 1 if self.odds[0] > 0 else -1


# information quantities -------------------------------------------------------


def arimoto_mi_quantum(e: Ensemble, m, alpha, *, strict: bool = True) -> float:
    """I_α(X;G) of the joint p(x) tr[M_g ρ_x]."""
    return arimoto_mi(born_joint(e, as_povm(m)), alpha, strict=strict)


def _through(e: Ensemble, n: KrausChannel) -> Ensemble:
    if e.dim != n.dim_in:
        raise ShapeMismatch(f"channel input {n.dim_in} vs ensemble dimension {e.dim}")
    return Ensemble(apply_channel(n, e.states), e.probs)


def noisy_arimoto_mi(e: Ensemble, m, n: KrausChannel, alpha, *, strict: bool = True) -> float:
    """I_α(X;G) of p(g|x) = tr[M_g N(ρ_x)]."""
    return arimoto_mi_quantum(_through(e, n), m, alpha, strict=strict)


def arimoto_objective(px, alpha):
    """I_α as a function of p(g|x) with its gradient, for the POVM ascent."""
    a = order_value(alpha)
    px = np.asarray(px, dtype=float)

    def value(p):
        return arimoto_mi(joint_from(px, p), a, strict=False)

    if a in (0.0, 1.0) or math.isinf(a):
        if math.isinf(a) or a == 0.0:
            raise InputError("the POVM ascent needs a finite nonzero order")
        return lambda p: (value(p), fd_cond_gradient(value, p))

    c = sgn(a) * a / (a - 1.0) / LN2

    def fg(p):
        j = px[:, None] * p
        pos = j > 0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            jp = np.where(pos, np.where(pos, j, 1.0) ** a, 0.0 if a > 0 else np.inf)
            norms = jp.sum(axis=0) ** (1.0 / a)
            total = norms.sum()
            w = np.where(pos & (norms > 0)[None, :], norms[None, :] ** (1.0 - a) * np.where(pos, j, 1.0) ** (a - 1.0), 0.0)
        return value(p), c * px[:, None] * w / total

    return fg


def max_noisy_arimoto_mi(e: Ensemble, n: KrausChannel | None, alpha, *, starts: int = POVM_STARTS,
                         seed: int = 0, seeds=()):
    """max over POVMs of I_α(X;G) after the channel (identity when ``n`` is None).

    Returns (value, achieving POVM). Finite nonzero orders only.
    """
    e2 = e if n is None else _through(e, n)
    res = maximize_over_povms(arimoto_objective(e2.probs, alpha), e2.states, starts=starts, seed=seed, seeds=seeds)
    return res.value, res.x


# game values ------------------------------------------------------------------


def _value(odds, dist, R, numeric: bool, seed: int):
    if numeric:
        return numeric_optimal_ice(odds, dist, R, seed=seed)[0]
    return optimal_ice(odds, dist, R)


def qsb_value(game: QsbGame, m, alpha, *, numeric: bool = False, seed: int = 0) -> float:
    """Best ICE over betting strategies when the Gambler measures ``m``.

    ``numeric=True`` uses the simplex optimizer instead of the closed-form
    strategy.
    """
    _, R = _game_risk(alpha)
    return _value(game.odds, born_joint(game.ensemble, as_povm(m)), R, numeric, seed)


def no_side_information_value(game: QsbGame, alpha, *, numeric: bool = False, seed: int = 0) -> float:
    """Best ICE when betting on the prior alone."""
    _, R = _game_risk(alpha)
    return _value(game.odds, game.ensemble.probs, R, numeric, seed)


def best_free_qsb_value(game: QsbGame, free: FreeSet, alpha, *, numeric: bool = False, seed: int = 0) -> float:
    """Best QSB value over free measurements (or behind free channels).

    Uninformative measurements and constant channels both leave p(g|x)
    independent of x, which reduces the game to betting on the prior alone.
    """
    _expect(free, FreeKind.UNINFORMATIVE_MEASUREMENTS, FreeKind.CONSTANT_CHANNELS, FreeKind.EXPLICIT_MEASUREMENTS)
    if free.built_in:
        return no_side_information_value(game, alpha, numeric=numeric, seed=seed)
    return max(qsb_value(game, m, alpha, numeric=numeric, seed=seed) for m in free.members)


def nqsb_value(game: QsbGame, m, n: KrausChannel, alpha, *, numeric: bool = False, seed: int = 0) -> float:
    """QSB value with the channel moved onto the measurement, N†(M)."""
    return qsb_value(game, adjoint_apply(n, as_povm(m)), alpha, numeric=numeric, seed=seed)


def induced_ensemble(prior, channels, rho) -> Ensemble:
    """{Λ_x(ρ), p(x)} for the channel betting game."""
    rho = as_density(rho)
    chans = list(channels)
    if len(chans) != np.asarray(prior).size:
        raise ShapeMismatch("one channel per prior entry is required")
    for ch in chans:
        if not isinstance(ch, KrausChannel):
            raise InputError("channels must be KrausChannel objects")
        if ch.subnormalized:
            raise InputError("channel betting needs trace-preserving channels")
    return Ensemble(np.array([apply_channel(ch, rho) for ch in chans]), prior)


def qcb_value(odds, prior, channels, rho, m, alpha, *, numeric: bool = False, seed: int = 0) -> float:
    """Channel betting value: the QSB value of the induced ensemble."""
    return qsb_value(QsbGame(odds, induced_ensemble(prior, channels, rho)), m, alpha, numeric=numeric, seed=seed)


def discrimination_exclusion(e: Ensemble, m):
    """(P_succ, P_err): best success probability of discrimination and least error of exclusion.

    The optimal classical post-processing guesses (excludes) the label with the
    largest (smallest) joint probability for each outcome.
    """
    j = born_joint(e, as_povm(m))
    return float(j.max(axis=0).sum()), float(j.min(axis=0).sum())


def cpp_bruteforce(e: Ensemble, m):
    """(P_succ, P_err) by enumerating every deterministic map from outcomes to labels."""
    j = born_joint(e, as_povm(m))
    nx, ng = j.shape
    if nx > CPP_ORACLE_MAX or ng > CPP_ORACLE_MAX:
        raise InputError(f"exhaustive post-processing is limited to {CPP_ORACLE_MAX} labels and outcomes")
    best, worst = -np.inf, np.inf
    cols = np.arange(ng)
    for f in itertools.product(range(nx), repeat=ng):
        v = float(j[list(f), cols].sum())
        best, worst = max(best, v), min(worst, v)
    return best, worst


# gaps -------------------------------------------------------------------------


class GapKind(enum.Enum):
    MEASUREMENT = "measurement"
    CHANNEL = "channel"
    STATE = "state"
    STATE_MEASUREMENT = "state_measurement"


def arimoto_gap(kind, fixed: dict, free, alpha, *, starts: int = POVM_STARTS, seed: int = 0) -> float:
    """I_α of the fixed objects minus the best I_α over free objects.

    ``fixed`` holds, per kind:
    MEASUREMENT: ``ensemble``, ``povm``; CHANNEL: ``ensemble``, ``channel``;
    STATE and STATE_MEASUREMENT: ``prior``, ``channels``, ``state``, ``povm``.
    ``free`` is a FreeSet, or a (states, measurements) pair of FreeSets for
    STATE_MEASUREMENT. Channel gaps maximize over decoding POVMs by ascent.
    """
    kind = GapKind(kind)
    if kind is GapKind.MEASUREMENT:
        _expect(free, FreeKind.UNINFORMATIVE_MEASUREMENTS, FreeKind.EXPLICIT_MEASUREMENTS)
        e = fixed["ensemble"]
        lhs = arimoto_mi_quantum(e, fixed["povm"], alpha)
        if free.built_in:
            return lhs
        return lhs - max(arimoto_mi_quantum(e, m, alpha) for m in free.members)
    if kind is GapKind.CHANNEL:
        _expect(free, FreeKind.CONSTANT_CHANNELS, FreeKind.EXPLICIT_CHANNELS)
        e = fixed["ensemble"]
        lhs, _ = max_noisy_arimoto_mi(e, fixed["channel"], alpha, starts=starts, seed=seed)
        if free.built_in:
            return lhs
        return lhs - max(max_noisy_arimoto_mi(e, n, alpha, starts=starts, seed=seed)[0] for n in free.members)
    prior, chans, m = fixed["prior"], fixed["channels"], fixed["povm"]
    lhs = arimoto_mi_quantum(induced_ensemble(prior, chans, fixed["state"]), m, alpha)
    if kind is GapKind.STATE:
        _expect(free, FreeKind.EXPLICIT_STATES)
        return lhs - max(arimoto_mi_quantum(induced_ensemble(prior, chans, s), m, alpha) for s in free.members)
    states, meas = free
    _expect(states, FreeKind.EXPLICIT_STATES)
    _expect(meas, FreeKind.UNINFORMATIVE_MEASUREMENTS, FreeKind.EXPLICIT_MEASUREMENTS)
    if meas.built_in:
        return lhs
    return lhs - max(
        arimoto_mi_quantum(induced_ensemble(prior, chans, s), n, alpha) for s in states.members for n in meas.members
    )


# result checks ----------------------------------------------------------------


@dataclass
class ResultReport:
    result: str
    alpha: float
    lhs: float
    rhs: float
    abs_err: float
    passed: bool
    seed: int

    def to_json(self) -> dict:
        return {
            "result": self.result,
            "alpha": Order(self.alpha).to_json(),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_err": self.abs_err,
            "pass": self.passed,
            "seed": self.seed,
        }


def _log_ratio(a: float, top: float, bottom: float) -> float:
    # both values carry the sign of α, so the ratio is positive
    return sgn(a) * math.log2(top / bottom)


def _numeric(odds, dist, R, seed):
    return numeric_optimal_ice(odds, dist, R, seed=seed)[0]


def ice_objective(odds, px, R, *, seed: int = 0, starts: int = INNER_STARTS):
    """Best ICE as a function of p(g|x), with the Danskin gradient at the numeric optimizer.

    The inner strategy comes from the simplex optimizer, warm-started from the
    previous call; the gradient is the partial derivative of the ICE in
    p(g|x) at that fixed strategy.
    """
    px = np.asarray(px, dtype=float)
    state = {"warm": None}

    def fg(p):
        j = joint_from(px, p)
        v, b = numeric_optimal_ice(odds, j, R, seed=seed, starts=starts, warm=state["warm"])
        state["warm"] = b
        return v, px[:, None] * ice_joint_gradient(b, odds, j, R)

    return fg


def _best_numeric_noisy(game: QsbGame, n, R, *, starts, seed, seeds):
    e2 = game.ensemble if n is None else _through(game.ensemble, n)
    res = maximize_over_povms(ice_objective(game.odds, e2.probs, R, seed=seed), e2.states,
                              starts=starts, seed=seed + 1, seeds=seeds)
    # the ascent runs on cheap inner solves; settle the winner with the full one
    full = _numeric(game.odds, born_joint(e2, res.x), R, seed)
    return max(res.value, full), res.x


def result_check(which: str, instance: dict, alpha, *, tol: float | None = None, seed: int = 0,
                 C: float = 1.0, starts: int = POVM_STARTS, rhs_starts: int = 4) -> ResultReport:
    """Compare an information quantity (LHS) with a log-ratio of optimal game values (RHS).

    The RHS never uses the closed-form strategies; every inner betting
    optimum comes from ``numeric_optimal_ice``. Instances:

    R1: ``ensemble``, ``povm``. R2: ``ensemble``, ``channel``.
    R3: ``ensemble`` and either ``povm`` with ``free`` measurements, or
    ``channel`` with ``free`` channels. R4: ``prior``, ``channels``, ``state``,
    ``povm`` and ``free_states`` (plus optional ``free_measurements``).
    R5: ``joint``.

    Searches over POVMs (R2, and R3 on channels) seed the RHS with the LHS
    maximizer and add ``rhs_starts`` starts of its own; default tolerances are
    1e-6 without and 1e-5 with such a nested search.
    """
    which = which.upper()
    a, R = _game_risk(alpha)
    s = sgn(a)
    nested = which == "R2" or (which == "R3" and "channel" in instance)
    tol = (NESTED_TOL if nested else SINGLE_TOL) if tol is None else tol
    try:
        if which == "R5":
            j = np.asarray(instance["joint"], dtype=float)
            odds = constant_odds(s, C, j.shape[0])
            lhs = arimoto_mi(j, a)
            rhs = _log_ratio(a, _numeric(odds, j, R, seed), _numeric(odds, j.sum(axis=1), R, seed))
        elif which == "R4":
            prior = np.asarray(instance["prior"], dtype=float)
            chans, m = instance["channels"], instance["povm"]
            states = FreeSet.states(instance["free_states"])
            meas = instance.get("free_measurements")
            game = QsbGame(constant_odds(s, C, prior.size), induced_ensemble(prior, chans, instance["state"]))
            fixed = {"prior": prior, "channels": chans, "state": instance["state"], "povm": m}
            if meas is None:
                lhs = arimoto_gap(GapKind.STATE, fixed, states, a)
                pairs = [(sig, m) for sig in states.members]
            else:
                meas = FreeSet.measurements(meas) if not isinstance(meas, FreeSet) else meas
                lhs = arimoto_gap(GapKind.STATE_MEASUREMENT, fixed, (states, meas), a)
                if meas.built_in:
                    pairs = None
                else:
                    pairs = [(sig, n) for sig in states.members for n in meas.members]
            top = _numeric(game.odds, born_joint(game.ensemble, m), R, seed)
            if pairs is None:
                bottom = _numeric(game.odds, prior, R, seed)
            else:
                bottom = max(_numeric(game.odds, born_joint(induced_ensemble(prior, chans, sig), n), R, seed)
                             for sig, n in pairs)
            rhs = _log_ratio(a, top, bottom)
        else:
            e = instance["ensemble"]
            game = QsbGame(constant_odds(s, C, len(e)), e)
            no_side = _numeric(game.odds, e.probs, R, seed)
            if which == "R1":
                m = instance["povm"]
                lhs = arimoto_mi_quantum(e, m, a)
                rhs = _log_ratio(a, _numeric(game.odds, born_joint(e, m), R, seed), no_side)
            elif which == "R2":
                lhs, best_m = max_noisy_arimoto_mi(e, instance["channel"], a, starts=starts, seed=seed)
                top, _ = _best_numeric_noisy(game, instance["channel"], R, starts=rhs_starts, seed=seed, seeds=[best_m])
                rhs = _log_ratio(a, top, no_side)
            elif which == "R3" and "povm" in instance:
                free = instance["free"]
                free = free if isinstance(free, FreeSet) else FreeSet.measurements(free)
                m = instance["povm"]
                lhs = arimoto_gap(GapKind.MEASUREMENT, {"ensemble": e, "povm": m}, free, a)
                top = _numeric(game.odds, born_joint(e, m), R, seed)
                if free.built_in:
                    bottom = no_side
                else:
                    bottom = max(_numeric(game.odds, born_joint(e, n), R, seed) for n in free.members)
                rhs = _log_ratio(a, top, bottom)
            elif which == "R3":
                free = instance["free"]
                free = free if isinstance(free, FreeSet) else FreeSet.channels(free)
                n = instance["channel"]
                lhs_top, m_top = max_noisy_arimoto_mi(e, n, a, starts=starts, seed=seed)
                top, _ = _best_numeric_noisy(game, n, R, starts=rhs_starts, seed=seed, seeds=[m_top])
                if free.built_in:
                    lhs, bottom = lhs_top, no_side
                else:
                    lhs_free, bottom = -math.inf, -math.inf
                    for ch in free.members:
                        v, m_ch = max_noisy_arimoto_mi(e, ch, a, starts=starts, seed=seed)
                        lhs_free = max(lhs_free, v)
                        bottom = max(bottom, _best_numeric_noisy(game, ch, R, starts=rhs_starts, seed=seed,
                                                                 seeds=[m_ch])[0])
                    lhs = lhs_top - lhs_free
                rhs = _log_ratio(a, top, bottom)
            else:
                raise InputError(f"unknown result {which!r}; expected R1 to R5")
    except QBettingError as exc:
        exc.sub_instance = {"result": which, "alpha": a, "seed": seed}
        raise
    err = abs(lhs - rhs)
    return ResultReport(which, a, float(lhs), float(rhs), float(err), bool(err <= tol), seed)
