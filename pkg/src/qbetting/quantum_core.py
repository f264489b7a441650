"""Finite-dimensional states, POVMs, ensembles and Kraus channels.

POVMs are stacks of matrices with shape ``(outcomes, d, d)``; a state set is
a stack ``(n, d, d)``. Validation uses the Jacobi eigensolver and a 1e-10
tolerance throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InputError, ShapeMismatch
from .linalg import eigvalsh, inv_sqrt_psd
from .prob_core import as_cond, as_pmf

MAT_TOL = 1e-10
MAX_RANDOM_DIM = 4
MAX_RANDOM_COUNT = 6


def _herm_psd_check(m: np.ndarray, what: str):
    if np.abs(m - m.conj().T).max() > MAT_TOL:
        raise InputError(f"{what} is not Hermitian")
    if eigvalsh(m).min() < -MAT_TOL:
        raise InputError(f"{what} is not positive semidefinite")


def as_density(rho, name="state") -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InputError(f"{name} must be a square matrix")
    _herm_psd_check(rho, name)
    if abs(np.trace(rho) - 1.0) > MAT_TOL:
        raise InputError(f"{name} must have unit trace")
    return rho


def as_states(states, name="states") -> np.ndarray:
    arr = np.asarray(states, dtype=complex)
    if arr.ndim != 3:
        raise InputError(f"{name} must be a stack of matrices")
    for k, rho in enumerate(arr):
        as_density(rho, f"{name}[{k}]")
    return arr


def as_povm(m, name="povm") -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] == 0:
        raise InputError(f"{name} must be a non-empty stack of square matrices")
    for k, el in enumerate(arr):
        _herm_psd_check(el, f"{name}[{k}]")
    if np.abs(arr.sum(axis=0) - np.eye(arr.shape[1])).max() > MAT_TOL:
        raise InputError(f"{name} elements must sum to the identity")
    return arr


@dataclass(frozen=True)
class Ensemble:
    states: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        states = as_states(self.states)
        probs = as_pmf(self.probs, "ensemble priors")
        if states.shape[0] != probs.size:
            raise ShapeMismatch("ensemble states and priors differ in length")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "probs", probs)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True)
class KrausChannel:
    """Kraus operators with shape ``(k, d_out, d_in)``.

    ``subnormalized`` marks a trace non-increasing map (Σ K†K <= I).
    """

    kraus: np.ndarray
    subnormalized: bool = False

    def __post_init__(self):
        ks = np.asarray(self.kraus, dtype=complex)
        if ks.ndim == 2:
            ks = ks[None]
        if ks.ndim != 3:
            raise InputError("Kraus operators must form a stack of matrices")
        object.__setattr__(self, "kraus", ks)
        gram = np.einsum("kij,kil->jl", ks.conj(), ks)
        eye = np.eye(ks.shape[2])
        if self.subnormalized:
            if eigvalsh(eye - gram).min() < -MAT_TOL:
                raise InputError("sub-channel Kraus operators exceed the identity")
        elif np.abs(gram - eye).max() > MAT_TOL:
            raise InputError("Kraus operators are not trace preserving")

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]


# bridges ----------------------------------------------------------------------


def born_cond_pmf(m, states) -> np.ndarray:
    """p(g|x) = tr[M_g ρ_x] with rows indexed by the state label x."""
    m = np.asarray(m, dtype=complex)
    states = np.asarray(states.states if isinstance(states, Ensemble) else states, dtype=complex)
    if m.shape[1:] != states.shape[1:]:
        raise DimensionMismatch(f"POVM dimension {m.shape[1]} vs state dimension {states.shape[1]}")
    p = np.einsum("gij,xji->xg", m, states).real
    p = np.where(p < 0, 0.0, p)
    return p / p.sum(axis=1, keepdims=True)


def born_joint(ensemble: Ensemble, m) -> np.ndarray:
    """p(x, g) = p(x) tr[M_g ρ_x]."""
    return ensemble.probs[:, None] * born_cond_pmf(m, ensemble.states)


def apply_channel(n: KrausChannel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-1] != n.dim_in:
        raise DimensionMismatch(f"channel input {n.dim_in} vs state {rho.shape[-1]}")
    return np.einsum("kij,...jl,kml->...im", n.kraus, rho, n.kraus.conj())


def adjoint_apply(n: KrausChannel, m) -> np.ndarray:
    """Heisenberg picture N†(M_g) = Σ_k K_k† M_g K_k for every element."""
    m = np.asarray(m, dtype=complex)
    if m.shape[-1] != n.dim_out:
        raise DimensionMismatch(f"channel output {n.dim_out} vs POVM {m.shape[-1]}")
    return np.einsum("kji,gjl,klm->gim", n.kraus.conj(), m, n.kraus)


def is_uninformative(m, tol: float = 1e-6):
    """True iff every element is within ``tol`` of q(a)·I with q(a) = tr[M_a]/d."""
    m = np.asarray(m, dtype=complex)
    d = m.shape[1]
    q = np.trace(m, axis1=1, axis2=2).real / d
    dev = np.abs(m - q[:, None, None] * np.eye(d)[None]).max()
    return bool(dev <= tol), q


def simulate_measurement(m, post) -> np.ndarray:
    """N_x = Σ_a q(x|a) M_a; ``post`` has one row per outcome a of ``m``."""
    m = np.asarray(m, dtype=complex)
    post = as_cond(post, "post-processing")
    if post.shape[0] != m.shape[0]:
        raise ShapeMismatch(f"post-processing has {post.shape[0]} rows, POVM has {m.shape[0]} outcomes")
    return np.einsum("ax,aij->xij", post, m)


# constructors -----------------------------------------------------------------


def ket(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    return v / np.linalg.norm(v)


def pure_state(vec) -> np.ndarray:
    v = ket(vec)
    return np.outer(v, v.conj())


def computational_povm(d: int = 2) -> np.ndarray:
    return np.array([np.diag(np.eye(d)[k]).astype(complex) for k in range(d)])


def uninformative_povm(q, d: int) -> np.ndarray:
    q = as_pmf(q, "q")
    return q[:, None, None] * np.eye(d, dtype=complex)[None]


def trine_povm() -> np.ndarray:
    """Three qubit elements (2/3)|θ_k⟩⟨θ_k| at Bloch angles 0, 120 and 240 degrees."""
    out = []
    for k in range(3):
        theta = 2 * np.pi * k / 3
        v = np.array([np.cos(theta / 2), np.sin(theta / 2)])
        out.append(2.0 / 3.0 * np.outer(v, v).astype(complex))
    return np.array(out)


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel(np.eye(d, dtype=complex)[None])


def unitary_channel(u) -> KrausChannel:
    return KrausChannel(np.asarray(u, dtype=complex)[None])


def replacement_channel(sigma, d_in: int) -> KrausChannel:
    """The constant channel ρ ↦ σ, with Kraus operators sqrt(λ_i)|v_i⟩⟨j|."""
    sigma = as_density(sigma)
    w, v = np.linalg.eigh(sigma)
    ks = []
    for i, lam in enumerate(w):
        if lam <= 1e-15:
            continue
        for j in range(d_in):
            k = np.zeros((sigma.shape[0], d_in), dtype=complex)
            k[:, j] = np.sqrt(lam) * v[:, i]
            ks.append(k)
    return KrausChannel(np.array(ks))


def depolarizing_channel(d: int, p: float) -> KrausChannel:
    """ρ ↦ (1-p)ρ + p·I/d via the Weyl (clock and shift) operators."""
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(omega ** np.arange(d))
    ks = []
    for a in range(d):
        for b in range(d):
            w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            weight = 1 - p + p / d**2 if (a, b) == (0, 0) else p / d**2
            ks.append(np.sqrt(weight) * w)
    return KrausChannel(np.array(ks, dtype=complex))


def bit_flip_channel(p: float) -> KrausChannel:
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    return KrausChannel(np.array([np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * x]))


# random instances -------------------------------------------------------------


def _ginibre(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    g = _ginibre(rng, d, d)
    w = g @ g.conj().T
    return w / np.trace(w).real


def random_pure_state(rng: np.random.Generator, d: int) -> np.ndarray:
    return pure_state(_ginibre(rng, d))


def random_povm(rng: np.random.Generator, d: int, outcomes: int) -> np.ndarray:
    g = _ginibre(rng, outcomes, d, d)
    a = g @ np.conj(np.swapaxes(g, -1, -2))
    s = inv_sqrt_psd(a.sum(axis=0))
    m = s[None] @ a @ s[None]
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def random_channel(rng: np.random.Generator, d_in: int, n_kraus: int, d_out: int | None = None) -> KrausChannel:
    d_out = d_in if d_out is None else d_out
    q, r = np.linalg.qr(_ginibre(rng, n_kraus * d_out, d_in))
    q = q * (np.diag(r) / np.abs(np.diag(r)))[None, :]
    return KrausChannel(q.reshape(n_kraus, d_out, d_in))


def random_ensemble(rng: np.random.Generator, d: int, n_states: int) -> Ensemble:
    states = np.array([random_state(rng, d) for _ in range(n_states)])
    return Ensemble(states, rng.dirichlet(np.ones(n_states)))


def random_instance(seed: int, d: int = 2, counts=(3, 3, 2)):
    """Seeded (Ensemble, POVM, channel) triple; ``counts`` = (states, outcomes, Kraus ops)."""
    n_states, outcomes, n_kraus = counts
    if d > MAX_RANDOM_DIM or max(counts) > MAX_RANDOM_COUNT:
        raise InputError(f"random instances are capped at d <= {MAX_RANDOM_DIM} and counts <= {MAX_RANDOM_COUNT}")
    rng = np.random.default_rng(seed)
    ens = random_ensemble(rng, d, n_states)
    povm = random_povm(rng, d, outcomes)
    chan = random_channel(rng, d, n_kraus)
    return ens, povm, chan
