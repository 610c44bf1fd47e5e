"""Hermitian matrix helpers: symmetrization, top eigenpair with a fixed
phase convention, and the complex <-> real-symmetric embedding used to
feed complex Hermitian programs to the real SDP solver.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "hermitize",
    "assert_hermitian",
    "top_eigenpair",
    "complex_to_real",
    "real_to_complex",
]


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def assert_hermitian(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    resid = np.max(np.abs(m - m.conj().T))
    scale = max(1.0, float(np.max(np.abs(m))))
    if resid > tol * scale:
        raise ValueError(f"matrix not Hermitian, residual {resid}")
    return hermitize(m)


def top_eigenpair(h: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a unit eigenvector of a Hermitian matrix.

    Phase convention: the first component of the eigenvector with
    magnitude above 1e-12 of the max is made real positive, so repeated
    calls on identical input return identical vectors.
    """
    h = np.asarray(h)
    if not np.all(np.isfinite(h)):
        raise ValueError("non-finite entries in matrix")
    h = hermitize(h)
    vals, vecs = np.linalg.eigh(h)
    v = vecs[:, -1]
    mags = np.abs(v)
    lead = int(np.argmax(mags > 1e-12 * mags.max()))
    phase = v[lead] / abs(v[lead])
    v = v / phase
    v = v / np.linalg.norm(v)
    return float(vals[-1]), v


def complex_to_real(m: np.ndarray) -> np.ndarray:
    """Embed a complex n x n matrix as the real 2n x 2n block matrix
    [[Re, -Im], [Im, Re]]; Hermitian input gives symmetric output."""
    x, y = m.real, m.imag
    return np.block([[x, -y], [y, x]])


def real_to_complex(s: np.ndarray) -> np.ndarray:
    """Inverse of :func:`complex_to_real` up to the structure average.

    For an arbitrary symmetric s this returns the Hermitian matrix whose
    embedding is the structure-symmetrized part of s; PSD-ness and inner
    products against embedded matrices are preserved.
    """
    n = s.shape[0] // 2
    x = 0.5 * (s[:n, :n] + s[n:, n:])
    y = 0.5 * (s[n:, :n] - s[:n, n:])
    return hermitize(x + 1j * y)
