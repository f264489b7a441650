"""Small dense Hermitian linear algebra.

A cyclic Jacobi eigensolver serves the d <= 8 matrices of the quantum layer
(eigenvalue extremes, PSD checks). Batched hot loops in the optimizers use
``numpy.linalg.eigh`` instead; the two are cross-checked in the tests.
"""

from __future__ import annotations

import numpy as np

JACOBI_MAX_DIM = 8


def jacobi_eigh(a, *, tol: float = 1e-15, max_sweeps: int = 100):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    Each rotation zeroes one off-diagonal pair. Complex entries are first made
    real by a diagonal phase, which turns the 2x2 subproblem into the
    classical real symmetric rotation.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    scale = max(np.abs(a).max(), 1e-300)
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[offmask]) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2 * mag, aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                # unitary acting on columns p, q: [[c, s*phase], [-s*conj(phase), c]]^H style
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s * phase
                rot[q, p] = -s * np.conj(phase)
                a = rot.conj().T @ a @ rot
                v = v @ rot
        # keep the diagonal exactly real
        a[np.diag_indices(n)] = a.diagonal().real
    w = a.diagonal().real
    order = np.argsort(w)
    return w[order], v[:, order]


def eigvalsh(a) -> np.ndarray:
    a = np.asarray(a)
    if a.shape[0] <= JACOBI_MAX_DIM:
        return jacobi_eigh(a)[0]
    return np.linalg.eigvalsh(a)


def inv_sqrt_psd(s: np.ndarray) -> np.ndarray:
    """S^{-1/2} for a stack of positive definite matrices (batched, via eigh)."""
    w, v = np.linalg.eigh(s)
    w = np.clip(w, 1e-300, None)
    return (v * (1.0 / np.sqrt(w))[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
