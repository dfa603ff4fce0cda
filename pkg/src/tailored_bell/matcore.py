"""Dense complex linear algebra used throughout the package.

All matrices are plain ``numpy.ndarray`` objects.  Functions never mutate
their inputs.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NonSquare, NotHermitian

HERMITIAN_TOL = 1e-10


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = np.asarray(m)
    _check_square(m)
    if not np.all(np.isfinite(m)):
        raise NotHermitian("matrix has non-finite entries")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise NotHermitian(f"max |m - m^dagger| = {dev:.3e} exceeds {tol:.1e}")
    return m


def eig_hermitian(m) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    m = check_hermitian(m)
    # symmetrise so the solver sees an exactly Hermitian input
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return HermitianEig(w, v)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def partial_trace(m, side: str, dims: tuple[int, int]) -> np.ndarray:
    """Trace out subsystem ``side`` ("A" or "B") of an operator on C^dA (x) C^dB."""
    m = np.asarray(m)
    d_a, d_b = dims
    if m.ndim != 2 or m.shape != (d_a * d_b, d_a * d_b):
        raise DimensionMismatch(f"shape {m.shape} does not match dims {dims}")
    t = m.reshape(d_a, d_b, d_a, d_b)
    side = side.upper()
    if side == "A":
        return np.einsum("ikil->kl", t)
    if side == "B":
        return np.einsum("ikjk->ij", t)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def expm_hermitian(h) -> np.ndarray:
    """Return exp(iH) for Hermitian H via its spectral decomposition."""
    w, v = eig_hermitian(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def haar_unitary(d: int, seed=None) -> np.ndarray:
    """Sample a d x d unitary from the Haar measure.

    Uses the QR decomposition of a complex Ginibre matrix with the phases of
    R's diagonal absorbed into Q (Mezzadri's construction).  ``seed`` may be
    an integer or a ``numpy.random.Generator``.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def projector(v) -> np.ndarray:
    v = np.asarray(v)
    return np.outer(v, v.conj())


def max_entangled(d: int) -> np.ndarray:
    """State vector of (1/sqrt d) sum_k |k,k>."""
    psi = np.zeros(d * d, dtype=complex)
    psi[:: d + 1] = 1.0 / np.sqrt(d)
    return psi


def max_entangled_dm(d: int) -> np.ndarray:
    return projector(max_entangled(d))


def fourier_matrix(d: int) -> np.ndarray:
    """Unitary DFT matrix, columns form a basis unbiased to the computational one."""
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)


def closest_unitary(m) -> np.ndarray:
    """Unitary factor of the polar decomposition of ``m``."""
    u, _, vh = np.linalg.svd(np.asarray(m))
    return u @ vh
