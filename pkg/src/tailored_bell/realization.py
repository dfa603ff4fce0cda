"""Optimal realizations of the tailored functional and their certification."""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .bases import BasisPair, OverlapMatrix, UNIT_TOL, overlap_of
from .errors import (
    ConditionsNotSatisfied,
    NotBlockDiagonal,
    ShapeMismatch,
    UnitOverlapPresent,
    VisibilityOutOfRange,
    ZeroOverlapInColumn,
)
from .functional import (
    QuantumRealization,
    born_behavior,
    evaluate_realization,
    functional_from_overlap,
    weights_from_overlap,
)
from .matcore import haar_unitary, max_entangled, max_entangled_dm, partial_trace, projector

CERTIFICATION_TOL = 1e-9


def _entries(o) -> np.ndarray:
    return o.entries if isinstance(o, OverlapMatrix) else np.asarray(o, dtype=float)


@dataclass(frozen=True)
class CanonicalRealization(QuantumRealization):
    pair: BasisPair = None
    overlap: OverlapMatrix = None


def rank_one_projectors(basis) -> np.ndarray:
    basis = np.asarray(basis, dtype=complex)
    return np.einsum("ik,jk->kij", basis, basis.conj())


def canonical_observables(bob_P, bob_Q, lam) -> np.ndarray:
    """A_x = (P_x1 - Q_x2)^T / lambda_x."""
    diff = bob_P[:, None] - bob_Q[None, :]
    return np.swapaxes(diff, -1, -2) / lam[:, :, None, None]


def canonical(pair: BasisPair) -> CanonicalRealization:
    """Rank-one projectors for Bob, rescaled transposed differences for Alice, Phi_d^+."""
    o = overlap_of(pair)
    e = o.entries
    if np.any(e >= 1 - UNIT_TOL):
        j, k = np.argwhere(e >= 1 - UNIT_TOL)[0]
        raise UnitOverlapPresent(f"O[{j},{k}] = 1; preprocess the basis pair first")
    p = rank_one_projectors(pair.e_basis)
    q = rank_one_projectors(pair.f_basis)
    alice = canonical_observables(p, q, weights_from_overlap(e))
    return CanonicalRealization(max_entangled_dm(pair.dim), alice, p, q, pair=pair, overlap=o)


def projector_sum_residual(bob_P, bob_Q) -> float:
    """max-norm of sum_x (P_x1 - Q_x2)^2 - 2(d-1) 1."""
    d = bob_P.shape[0]
    diff = bob_P[:, None] - bob_Q[None, :]
    total = np.einsum("xyij,xyjk->ik", diff, diff)
    return float(np.abs(total - 2 * (d - 1) * np.eye(bob_P.shape[-1])).max())


def isotropic_realization(c: QuantumRealization, nu: float) -> QuantumRealization:
    if not 0 <= nu <= 1:
        raise VisibilityOutOfRange(f"visibility {nu} outside [0, 1]")
    d_a, d_b = c.dims
    n = d_a * d_b
    if d_a != d_b:
        raise ShapeMismatch("isotropic noise needs equal local dimensions")
    state = nu * max_entangled_dm(d_a) + (1 - nu) * np.eye(n) / n
    return c.with_state(state) if not isinstance(c, CanonicalRealization) else replace(c, state=state)


@dataclass(frozen=True)
class SpectrumReport:
    max_spectrum_deviation: float
    kernel_dims: np.ndarray
    projector_sum_residual: float
    saturation_residual: float
    value: float


def spectrum_report(c: CanonicalRealization) -> SpectrumReport:
    """Checks on the canonical construction: trinary spectra, rank-two differences, projector sum, saturation."""
    w = np.linalg.eigvalsh(c.alice)
    dev = np.min(np.abs(w[..., None] - np.array([-1.0, 0.0, 1.0])), axis=-1).max()
    kernel = (np.abs(w) < 0.5).sum(axis=-1)
    f = functional_from_overlap(c.overlap)
    d_a, d_b = c.dims
    sat = 0.0
    for x1 in range(c.d):
        for x2 in range(c.d):
            lhs = f.weights[x1, x2] * np.kron(c.alice[x1, x2], np.eye(d_b)) @ c.state
            rhs = np.kron(np.eye(d_a), c.bob_P[x1] - c.bob_Q[x2]) @ c.state
            sat = max(sat, float(np.abs(lhs - rhs).max()))
    return SpectrumReport(
        float(dev), kernel, projector_sum_residual(c.bob_P, c.bob_Q), sat, evaluate_realization(f, c)[1]
    )


# -- measurement certification ----------------------------------------------


@dataclass(frozen=True)
class CertificationReport:
    max_residual_P: float
    max_residual_Q: float
    projectivity_residuals: tuple[float, ...]
    completeness_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        worst = max((self.max_residual_P, self.max_residual_Q, self.completeness_residual) + self.projectivity_residuals)
        return worst < self.tol


def _check_shapes(bob_P, bob_Q, o) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p = np.asarray(bob_P, dtype=complex)
    q = np.asarray(bob_Q, dtype=complex)
    e = _entries(o)
    d = e.shape[0]
    if p.shape != q.shape or p.ndim != 3 or p.shape[0] != d or p.shape[1] != p.shape[2]:
        raise ShapeMismatch(f"measurement shapes {p.shape}, {q.shape} do not fit d = {d}")
    return p, q, e


def certify_measurements(bob_P, bob_Q, o, tol: float = CERTIFICATION_TOL) -> CertificationReport:
    """Residuals of O^2 P = P Q P and O^2 Q = Q P Q.

    The relations only see overlaps, so ``passed`` also requires every
    operator to be a projector and each measurement to sum to the identity.
    """
    p, q, e = _check_shapes(bob_P, bob_Q, o)
    t = e**2
    pqp = np.einsum("xij,yjk,xkl->xyil", p, q, p)
    qpq = np.einsum("yij,xjk,ykl->xyil", q, p, q)
    res_p = np.abs(t[:, :, None, None] * p[:, None] - pqp).max()
    res_q = np.abs(t[:, :, None, None] * q[None, :] - qpq).max()
    proj = tuple(float(np.abs(m @ m - m).max()) for m in np.concatenate([p, q]))
    eye = np.eye(p.shape[-1])
    comp = max(np.abs(p.sum(axis=0) - eye).max(), np.abs(q.sum(axis=0) - eye).max())
    return CertificationReport(float(res_p), float(res_q), proj, float(comp), tol)


@dataclass(frozen=True)
class CompletenessReport:
    n: int
    D: int
    spectrum_ok: bool
    max_spectrum_deviation: float
    value: float


def certification_completeness_check(bob_P, bob_Q, o, tol: float = CERTIFICATION_TOL) -> CompletenessReport:
    """Rebuild an optimal realization from measurements obeying the certified relations.

    Requires equal integer ranks n, the spectrum of P - Q in {0, +-lambda} with
    n-fold +-lambda, and evaluates the rebuilt realization on Phi_D^+.
    """
    p, q, e = _check_shapes(bob_P, bob_Q, o)
    rep = certify_measurements(p, q, e, tol)
    if not rep.passed:
        raise ConditionsNotSatisfied(
            f"relations violated: residuals P {rep.max_residual_P:.2e}, Q {rep.max_residual_Q:.2e}"
        )
    d = e.shape[0]
    big_d = p.shape[-1]
    traces = np.concatenate([np.einsum("xii->x", p), np.einsum("xii->x", q)]).real
    n = int(round(traces[0]))
    if n < 1 or np.abs(traces - n).max() > 1e-6 or n * d != big_d:
        raise ConditionsNotSatisfied(f"projector ranks {np.round(traces, 6)} are not a common n with D = d n")
    lam = weights_from_overlap(e)
    worst = 0.0
    ok = True
    for x1 in range(d):
        for x2 in range(d):
            w = np.linalg.eigvalsh(p[x1] - q[x2])
            l = lam[x1, x2]
            dist = np.min(np.abs(w[:, None] - np.array([-l, 0.0, l])), axis=1)
            worst = max(worst, float(dist.max()))
            if l > 1e-6:
                ok &= int(np.sum(np.abs(w - l) < 1e-6)) == n and int(np.sum(np.abs(w + l) < 1e-6)) == n
    alice = canonical_observables(p, q, lam)
    realization = QuantumRealization(max_entangled_dm(big_d), alice, p, q)
    value = evaluate_realization(functional_from_overlap(OverlapMatrix(e)), realization)[1]
    return CompletenessReport(n, big_d, bool(ok and worst < 1e-6), worst, value)


# -- state extraction ---------------------------------------------------------


def shift_unitaries(bob_P, bob_Q, o, column_j: int) -> list[np.ndarray]:
    """U_k = sum_i P_i Q_j P_{i+k} / (O_ij O_{i+k,j}), indices mod d, k = 0..d-1.

    U_k P_i U_k^dagger = P_{i-k}; U_0 is the identity.
    """
    p, q, e = _check_shapes(bob_P, bob_Q, o)
    d = e.shape[0]
    col = e[:, column_j]
    if np.any(col <= 1e-9):
        raise ZeroOverlapInColumn(f"column {column_j} of the overlap matrix contains a zero")
    out = []
    for k in range(d):
        u = sum(p[i] @ q[column_j] @ p[(i + k) % d] / (col[i] * col[(i + k) % d]) for i in range(d))
        out.append(u)
    return out


def _stack_isometry(blocks) -> np.ndarray:
    """sum_i |i> (x) B_i as a (d * n) x n matrix."""
    return np.concatenate(blocks, axis=0)


@dataclass(frozen=True)
class IsometryPair:
    V_A: np.ndarray
    V_B: np.ndarray

    def residuals(self) -> tuple[float, float]:
        return tuple(
            float(np.abs(v.conj().T @ v - np.eye(v.shape[1])).max()) for v in (self.V_A, self.V_B)
        )


def alice_tilde_operators(alice, lam) -> tuple[np.ndarray, np.ndarray]:
    """P~_x1 = (1 + sum_x2 lambda A)/d and Q~_x2 = (1 - sum_x1 lambda A)/d."""
    d = alice.shape[0]
    eye = np.eye(alice.shape[-1])
    weighted = lam[:, :, None, None] * alice
    return (eye + weighted.sum(axis=1)) / d, (eye - weighted.sum(axis=0)) / d


def extraction_isometries(bob_P, bob_Q, o, column_j: int, alice_observables) -> IsometryPair:
    p, q, e = _check_shapes(bob_P, bob_Q, o)
    if e[:, column_j].min() <= 1e-9:
        raise ZeroOverlapInColumn(f"column {column_j} of the overlap matrix contains a zero")
    if not certify_measurements(p, q, e).passed:
        raise ConditionsNotSatisfied("Bob's measurements violate the certified relations")
    d = e.shape[0]
    us = shift_unitaries(p, q, e, column_j)
    v_b = _stack_isometry([us[i] @ p[i] for i in range(d)])
    pt, qt = alice_tilde_operators(np.asarray(alice_observables, dtype=complex), weights_from_overlap(e))
    ut = shift_unitaries(pt, qt, e, column_j)
    v_a = _stack_isometry([ut[i] @ pt[i] for i in range(d)])
    return IsometryPair(v_a, v_b)


@dataclass(frozen=True)
class ExtractionReport:
    isometries: IsometryPair
    extracted_state: np.ndarray
    aux_state: np.ndarray
    fidelity: float
    product_residual: float
    marginals_P: np.ndarray
    marginals_Q: np.ndarray
    isometry_residuals: tuple[float, float]


def extract_state(r: QuantumRealization, o, column_j: int) -> ExtractionReport:
    """Apply the extraction isometries and compare the extracted registers with Phi_d^+.

    Fidelity is <Phi_d^+| rho_ext |Phi_d^+>, i.e. the Uhlmann fidelity against a pure target.
    """
    e = _entries(o)
    d = e.shape[0]
    iso = extraction_isometries(r.bob_P, r.bob_Q, e, column_j, r.alice)
    d_a, d_b = r.dims
    v = np.kron(iso.V_A, iso.V_B)
    out = (v @ r.state @ v.conj().T).reshape(d, d_a, d, d_b, d, d_a, d, d_b)
    ext = np.einsum("iajbkalb->ijkl", out).reshape(d * d, d * d)
    aux = np.einsum("iajbicjd->abcd", out).reshape(d_a * d_b, d_a * d_b)
    # reorder (A', A, B', B) -> (A', B', A, B) to compare with Phi (x) aux
    full = out.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(d * d * d_a * d_b, -1)
    phi = max_entangled(d)
    fid = float(np.real(phi.conj() @ ext @ phi))
    prod_res = float(np.abs(full - np.kron(projector(phi), aux)).max())
    rho_b = partial_trace(r.state, "A", (d_a, d_b))
    marg_p = np.einsum("xij,ji->x", r.bob_P, rho_b).real
    marg_q = np.einsum("xij,ji->x", r.bob_Q, rho_b).real
    return ExtractionReport(iso, ext, aux, fid, prod_res, marg_p, marg_q, iso.residuals())


# -- exceptional block states -------------------------------------------------


def _check_blocks(o: np.ndarray, blocks) -> list[list[int]]:
    d = o.shape[0]
    blocks = [sorted(int(i) for i in b) for b in blocks]
    flat = sorted(i for b in blocks for i in b)
    if flat != list(range(d)):
        raise NotBlockDiagonal(f"blocks {blocks} do not partition range({d})")
    label = np.empty(d, dtype=int)
    for k, b in enumerate(blocks):
        label[b] = k
    off = label[:, None] != label[None, :]
    if off.any() and o[off].max() > 1e-9:
        raise NotBlockDiagonal("overlap has weight outside the given blocks")
    return blocks


def exceptional_block_state(pair: BasisPair, blocks) -> CanonicalRealization:
    """Canonical measurements on sum_k (1 (x) Pi_k) Phi_d^+ (1 (x) Pi_k), Pi_k spanning block k of the first basis."""
    c = canonical(pair)
    blocks = _check_blocks(c.overlap.entries, blocks)
    phi = max_entangled_dm(pair.dim)
    state = np.zeros_like(phi)
    for b in blocks:
        pi = np.kron(np.eye(pair.dim), c.bob_P[b].sum(axis=0))
        state += pi @ phi @ pi
    return replace(c, state=state)


@dataclass(frozen=True)
class ExceptionalReport:
    value: float
    max_behavior_deviation: float
    block_weights: tuple[float, ...]
    distinct_from_phi: float


def exceptional_report(pair: BasisPair, blocks) -> ExceptionalReport:
    r = exceptional_block_state(pair, blocks)
    ref = canonical(pair)
    value = evaluate_realization(functional_from_overlap(r.overlap), r)[1]
    dev = float(np.abs(born_behavior(r).p - born_behavior(ref).p).max())
    rho_b = partial_trace(r.state, "A", r.dims)
    weights = tuple(float(np.trace(r.bob_P[b].sum(axis=0) @ rho_b).real) for b in _check_blocks(r.overlap.entries, blocks))
    return ExceptionalReport(value, dev, weights, float(np.abs(r.state - ref.state).max()))


# -- helpers for N bases and random instances ---------------------------------


def canonical_n_realization(bases):
    """State, observables per pair and Bob's N rank-one measurements saturating the N-basis bound."""
    bases = [np.asarray(b, dtype=complex) for b in bases]
    d = bases[0].shape[0]
    bob = [rank_one_projectors(b) for b in bases]
    observables = {}
    for j, k in combinations(range(len(bases)), 2):
        lam = weights_from_overlap(np.abs(bases[j].conj().T @ bases[k]))
        observables[(j, k)] = canonical_observables(bob[j], bob[k], lam)
    return max_entangled_dm(d), observables, bob


def random_state(n: int, rng, rank: int | None = None) -> np.ndarray:
    g = rng.standard_normal((n, rank or n)) + 1j * rng.standard_normal((n, rank or n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_trinary_observable(n: int, rng) -> np.ndarray:
    u = haar_unitary(n, rng)
    w = rng.integers(-1, 2, size=n).astype(float)
    return (u * w) @ u.conj().T


def random_povm(d: int, n: int, rng, projective: bool = False) -> np.ndarray:
    """d-outcome measurement on C^n; projective ones assign eigenvectors of a Haar unitary to outcomes."""
    if projective:
        u = haar_unitary(n, rng)
        labels = rng.integers(0, d, size=n)
        return np.stack([u[:, labels == b] @ u[:, labels == b].conj().T for b in range(d)])
    g = rng.standard_normal((d, n, n)) + 1j * rng.standard_normal((d, n, n))
    ops = np.einsum("bij,bkj->bik", g, g.conj())
    w, v = np.linalg.eigh(ops.sum(axis=0))
    s = (v / np.sqrt(w)) @ v.conj().T
    return np.einsum("ij,bjk,kl->bil", s, ops, s)


def random_realization(d: int, d_a: int, d_b: int, seed=None, projective_bob: bool = False) -> QuantumRealization:
    rng = np.random.default_rng(seed)
    alice = np.stack([[random_trinary_observable(d_a, rng) for _ in range(d)] for _ in range(d)])
    return QuantumRealization(
        random_state(d_a * d_b, rng),
        alice,
        random_povm(d, d_b, rng, projective_bob),
        random_povm(d, d_b, rng, projective_bob),
    )
