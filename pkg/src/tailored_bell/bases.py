"""Basis pairs, overlap matrices and the special overlap families.

Indices are zero-based everywhere in the Python API.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    EvenDimension,
    FullyCompatible,
    NotBistochastic,
    NotUnitary,
    OddDimension,
    UnsupportedStructure,
)
from .matcore import closest_unitary, fourier_matrix, is_unitary

NORM_TOL = 1e-9
UNIT_TOL = 1e-9
ZERO_TOL = 1e-9


@dataclass(frozen=True)
class BasisPair:
    """Two orthonormal bases of C^d stored as the columns of two unitaries."""

    e_basis: np.ndarray
    f_basis: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.e_basis, dtype=complex)
        f = np.asarray(self.f_basis, dtype=complex)
        if e.shape != f.shape:
            raise NotUnitary(f"basis shapes differ: {e.shape} vs {f.shape}")
        for name, m in (("e_basis", e), ("f_basis", f)):
            if not is_unitary(m, 1e-10):
                raise NotUnitary(f"{name} is not unitary within 1e-10")
        object.__setattr__(self, "e_basis", e)
        object.__setattr__(self, "f_basis", f)

    @property
    def dim(self) -> int:
        return self.e_basis.shape[0]

    def change_of_basis(self) -> np.ndarray:
        """Matrix of inner products <e_j|f_k>."""
        return self.e_basis.conj().T @ self.f_basis


@dataclass(frozen=True)
class OverlapMatrix:
    """Entrywise moduli O_jk of a change-of-basis unitary.

    Rows and columns have unit l2 norm, so ``squared`` is bistochastic.
    """

    entries: np.ndarray

    def __post_init__(self):
        o = np.array(self.entries, dtype=float)
        if o.ndim != 2 or o.shape[0] != o.shape[1] or o.shape[0] < 1:
            raise NotBistochastic(f"overlap matrix must be square, got shape {o.shape}")
        if not np.all(np.isfinite(o)):
            raise NotBistochastic("overlap matrix has non-finite entries")
        if o.min() < -NORM_TOL or o.max() > 1 + NORM_TOL:
            raise NotBistochastic("overlap entries must lie in [0, 1]")
        o = np.clip(o, 0.0, 1.0)
        t = o**2
        dev = max(np.max(np.abs(t.sum(axis=0) - 1)), np.max(np.abs(t.sum(axis=1) - 1)))
        if dev > NORM_TOL:
            raise NotBistochastic(f"rows/columns not unit norm (deviation {dev:.2e})")
        o.setflags(write=False)
        object.__setattr__(self, "entries", o)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def squared(self) -> np.ndarray:
        return self.entries**2

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, OverlapMatrix):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(
            np.array_equal(self.entries, other.entries)
        )

    __hash__ = None


@dataclass(frozen=True)
class PreprocessReport:
    effective_dim: int
    removed_pairs: list[tuple[int, int]]
    truncated: BasisPair
    overlap: OverlapMatrix
    kept_rows: list[int] = field(default_factory=list)
    kept_cols: list[int] = field(default_factory=list)


class Unistochasticity(Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def overlap_of(pair: BasisPair) -> OverlapMatrix:
    return OverlapMatrix(np.abs(pair.change_of_basis()))


def preprocess(pair: BasisPair, unit_tol: float = UNIT_TOL) -> PreprocessReport:
    """Discard the subspace on which the two bases share vectors.

    Every pair (j, k) with O_jk >= 1 - unit_tol marks a shared vector; row j
    and column k are dropped.  The remaining vectors of the first basis span
    the complement and are used as its coordinates, so the truncated first
    basis is the identity and the second is the (re-unitarised) block of
    inner products.
    """
    if not 0 < unit_tol <= 1e-3:
        raise ValueError("unit_tol must lie in (0, 1e-3]")
    full = overlap_of(pair)
    o = full.entries
    removed = [(int(j), int(k)) for j, k in zip(*np.nonzero(o >= 1 - unit_tol))]
    if not removed:
        if pair.dim < 2:
            raise FullyCompatible("dimension 1 carries no incompatibility")
        return PreprocessReport(pair.dim, [], pair, full, list(range(pair.dim)), list(range(pair.dim)))
    rows = [j for j in range(pair.dim) if j not in {r for r, _ in removed}]
    cols = [k for k in range(pair.dim) if k not in {c for _, c in removed}]
    if len(rows) < 2:
        raise FullyCompatible(
            f"only {len(rows)} dimension(s) left after removing {len(removed)} shared vector(s)"
        )
    block = pair.change_of_basis()[np.ix_(rows, cols)]
    d = len(rows)
    truncated = BasisPair(np.eye(d, dtype=complex), closest_unitary(block))
    # verbatim submatrix; its rows may miss unit norm by up to ~2*unit_tol
    sub = _overlap_from_trusted(o[np.ix_(rows, cols)])
    return PreprocessReport(d, removed, truncated, sub, rows, cols)


def _overlap_from_trusted(o: np.ndarray) -> OverlapMatrix:
    obj = object.__new__(OverlapMatrix)
    o = np.array(o, dtype=float)
    o.setflags(write=False)
    object.__setattr__(obj, "entries", o)
    return obj


def _is_bistochastic(t: np.ndarray, tol: float) -> bool:
    return bool(
        np.all(t >= -tol)
        and np.max(np.abs(t.sum(axis=0) - 1)) <= tol
        and np.max(np.abs(t.sum(axis=1) - 1)) <= tol
    )


def chain_links(t) -> np.ndarray:
    """Moduli sqrt(T_1j T_2j) of the terms in the orthogonality sum of rows 1, 2."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(np.clip(t[0] * t[1], 0.0, None))


def is_unistochastic_3x3(t, tol: float = 1e-9) -> Unistochasticity:
    """Classify a 3x3 bistochastic matrix against the unistochastic set.

    Rows one and two of a unitary are orthogonal, so the three complex terms
    U_1j conj(U_2j) close into a triangle whose sides are the chain links.
    The matrix is unistochastic iff the links obey the triangle inequality;
    it lies on the boundary when the triangle degenerates.
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (3, 3):
        raise NotBistochastic(f"expected a 3x3 matrix, got shape {t.shape}")
    if not _is_bistochastic(t, tol):
        raise NotBistochastic("matrix is not bistochastic within tolerance")
    links = chain_links(t)
    slack = links.sum() - 2 * links.max()
    if slack > tol:
        return Unistochasticity.INSIDE
    if slack >= -tol:
        return Unistochasticity.BOUNDARY
    return Unistochasticity.OUTSIDE


def mub_overlap(d: int) -> OverlapMatrix:
    if d < 2:
        raise ValueError("d must be >= 2")
    return OverlapMatrix(np.full((d, d), 1 / np.sqrt(d)))


def _direct_sum(blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.result_type(*blocks))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


_J2 = np.full((2, 2), 1 / np.sqrt(2))


def qubit_mub_blocks(d: int) -> OverlapMatrix:
    if d % 2 or d < 2:
        raise OddDimension(f"qubit MUB blocks need an even d >= 2, got {d}")
    return OverlapMatrix(_direct_sum([_J2] * (d // 2)))


_O_CONJ = np.array([[1, 2, 2], [2, 1, 2], [2, 2, 1]]) / 3.0


def conj_overlap_3() -> OverlapMatrix:
    """3x3 overlap matrix with 1/3 on the diagonal and 2/3 elsewhere."""
    return OverlapMatrix(_O_CONJ)


def odd_counterexample(d: int) -> OverlapMatrix:
    """(floor(d/2) - 1) qubit MUB blocks direct-summed with the 3x3 conjectured optimum."""
    if d % 2 == 0 or d < 3:
        raise EvenDimension(f"need an odd d >= 3, got {d}")
    return OverlapMatrix(_direct_sum([_J2] * (d // 2 - 1) + [_O_CONJ]))


@lru_cache(maxsize=None)
def _conj_preimage() -> np.ndarray:
    # Householder reflection (2/3)J - I: real orthogonal with |entries| = O_conj
    u = 2.0 / 3.0 * np.ones((3, 3)) - np.eye(3)
    u.setflags(write=False)
    return u


_HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def basis_pair_from_overlap_blocks(o: OverlapMatrix, tol: float = 1e-9) -> BasisPair:
    """Realise a block-structured overlap matrix by an explicit basis pair.

    Supported blocks (after grouping the support of ``o`` into connected
    components): 1x1 unit entries, 2x2 blocks of 1/sqrt2, and 3x3 blocks equal
    to the conjectured d=3 optimum up to row/column permutation.  The first
    basis is always the computational one.
    """
    o = o.entries if isinstance(o, OverlapMatrix) else np.asarray(o, dtype=float)
    d = o.shape[0]
    support = o > ZERO_TOL
    # bipartite graph: rows 0..d-1, columns d..2d-1
    adj = np.zeros((2 * d, 2 * d), dtype=bool)
    adj[:d, d:] = support
    adj[d:, :d] = support.T
    ncomp, labels = connected_components(adj, directed=False)
    f = np.zeros((d, d), dtype=complex)
    for c in range(ncomp):
        rows = np.flatnonzero(labels[:d] == c)
        cols = np.flatnonzero(labels[d:] == c)
        if len(rows) != len(cols):
            raise UnsupportedStructure("block with unequal numbers of rows and columns")
        sub = o[np.ix_(rows, cols)]
        f[np.ix_(rows, cols)] = _block_preimage(sub, tol)
    pair = BasisPair(np.eye(d, dtype=complex), f)
    if np.max(np.abs(np.abs(f) - o)) > tol:
        raise UnsupportedStructure("reconstructed overlap does not match")
    return pair


def _block_preimage(sub: np.ndarray, tol: float) -> np.ndarray:
    n = sub.shape[0]
    if n == 1 and abs(sub[0, 0] - 1) <= tol:
        return np.ones((1, 1))
    if n == 2 and np.max(np.abs(sub - 1 / np.sqrt(2))) <= tol:
        return _HADAMARD
    if n == 3:
        small = np.abs(sub - 1 / 3) <= tol
        large = np.abs(sub - 2 / 3) <= tol
        if np.all(small | large) and np.all(small.sum(axis=0) == 1) and np.all(small.sum(axis=1) == 1):
            # column k of the block takes the preimage column whose 1/3 sits in the same row
            perm = np.argmax(small, axis=0)
            return _conj_preimage()[:, perm]
    raise UnsupportedStructure(f"unsupported {n}x{n} block in overlap matrix")


def mub_pair(d: int) -> BasisPair:
    """Computational and Fourier bases."""
    return BasisPair(np.eye(d, dtype=complex), fourier_matrix(d))


def pair_from_unitary(u) -> BasisPair:
    """Computational basis paired with the columns of ``u``."""
    u = np.asarray(u, dtype=complex)
    return BasisPair(np.eye(u.shape[0], dtype=complex), u)
