"""The tailored Bell functional and its evaluation.

Scenario: Alice receives x = (x1, x2) in [d]^2 and answers a in {1, 2, bot};
Bob receives y in {1, 2} and answers b in [d].  Behaviors are dense arrays
``p[y, x1, x2, a, b]`` with Alice's outcome axis ordered (1, 2, bot), i.e.
index 0 is outcome 1, index 1 is outcome 2 and index 2 is "no answer".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .bases import OverlapMatrix, UNIT_TOL
from .errors import InvalidRealization, ShapeMismatch, SpectrumNotTrinary, UnitOverlapPresent

PROB_TOL = 1e-9
SPECTRUM_TOL = 1e-8
A_ONE, A_TWO, A_BOT = 0, 1, 2


@dataclass(frozen=True)
class Scenario:
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("scenario needs d >= 2")

    @property
    def behavior_shape(self) -> tuple[int, ...]:
        return (2, self.d, self.d, 3, self.d)


@dataclass(frozen=True)
class BellFunctional:
    scenario: Scenario
    weights: np.ndarray  # lambda_x indexed [x1, x2]
    overlap: OverlapMatrix | None = None

    @property
    def d(self) -> int:
        return self.scenario.d

    @property
    def quantum_value(self) -> float:
        return float(self.d - 1)


def weights_from_overlap(o) -> np.ndarray:
    o = o.entries if isinstance(o, OverlapMatrix) else np.asarray(o, dtype=float)
    return np.sqrt(np.clip(1.0 - o**2, 0.0, None))


def functional_from_overlap(o: OverlapMatrix) -> BellFunctional:
    """Build F_d with weights lambda_x = sqrt(1 - O_{x1 x2}^2)."""
    e = o.entries if isinstance(o, OverlapMatrix) else np.asarray(o, dtype=float)
    bad = np.argwhere(e >= 1 - UNIT_TOL)
    if bad.size:
        j, k = bad[0]
        raise UnitOverlapPresent(f"O[{j},{k}] = {e[j, k]:.12g} is 1; preprocess the bases first")
    if not isinstance(o, OverlapMatrix):
        o = OverlapMatrix(e)
    return BellFunctional(Scenario(e.shape[0]), weights_from_overlap(e), o)


# -- behaviors ---------------------------------------------------------------


@dataclass(frozen=True)
class Behavior:
    """Conditional distribution p[y, x1, x2, a, b]."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 5 or p.shape[0] != 2 or p.shape[3] != 3 or not (p.shape[1] == p.shape[2] == p.shape[4]):
            raise ShapeMismatch(f"behavior must have shape (2, d, d, 3, d), got {p.shape}")
        object.__setattr__(self, "p", p)

    @property
    def d(self) -> int:
        return self.p.shape[1]

    def alice_marginal(self) -> np.ndarray:
        """p(a | x, y) with axes [y, x1, x2, a]."""
        return self.p.sum(axis=4)

    def bob_marginal(self) -> np.ndarray:
        """p(b | x, y) with axes [y, x1, x2, b]."""
        return self.p.sum(axis=3)

    def validation_errors(self, tol: float = PROB_TOL) -> list[str]:
        p = self.p
        errors = []
        if p.min() < -tol:
            errors.append(f"negative probability {p.min():.3e}")
        norm = np.abs(p.sum(axis=(3, 4)) - 1).max()
        if norm > tol:
            errors.append(f"normalisation off by {norm:.3e}")
        pa = self.alice_marginal()
        if np.abs(pa[0] - pa[1]).max() > tol:
            errors.append("Alice's marginal depends on y")
        pb = self.bob_marginal()
        if np.abs(pb - pb[:, :1, :1, :]).max() > tol:
            errors.append("Bob's marginal depends on x")
        return errors

    def validate(self, tol: float = PROB_TOL) -> "Behavior":
        errors = self.validation_errors(tol)
        if errors:
            raise InvalidRealization("; ".join(errors))
        return self

    @classmethod
    def deterministic(cls, d: int, u: int, v: int, alice) -> "Behavior":
        """Bob answers u to y=1 and v to y=2; Alice maps +1, -1, 0 to outcomes 1, 2, bot."""
        alice = np.asarray(alice)
        p = np.zeros((2, d, d, 3, d))
        a_idx = np.where(alice > 0, A_ONE, np.where(alice < 0, A_TWO, A_BOT))
        for x1 in range(d):
            for x2 in range(d):
                p[0, x1, x2, a_idx[x1, x2], u] = 1.0
                p[1, x1, x2, a_idx[x1, x2], v] = 1.0
        return cls(p)

    def mix(self, other: "Behavior", alpha: float) -> "Behavior":
        return Behavior(alpha * self.p + (1 - alpha) * other.p)


def evaluate_behavior(f: BellFunctional, beh: Behavior) -> tuple[float, float]:
    """Return (C_d, F_d) for a behavior."""
    d = f.d
    if beh.p.shape != f.scenario.behavior_shape:
        raise ShapeMismatch(f"behavior shape {beh.p.shape} does not match d = {d}")
    p = beh.p
    lam = f.weights
    idx = np.arange(d)
    # b = x_y: pick b = x1 for y = 1 and b = x2 for y = 2
    hit1 = p[0][idx[:, None], idx[None, :], :, idx[:, None]]  # [x1, x2, a]
    hit2 = p[1][idx[:, None], idx[None, :], :, idx[None, :]]
    corr = (hit1[..., A_ONE] - hit1[..., A_TWO]) + (hit2[..., A_TWO] - hit2[..., A_ONE])
    c = float(np.sum(lam * corr))
    pa = beh.alice_marginal().mean(axis=0)  # no-signalling: average over y
    played = pa[..., A_ONE] + pa[..., A_TWO]
    return c, c - 0.5 * float(np.sum(lam**2 * played))


# -- quantum realizations ---------------------------------------------------


@dataclass(frozen=True)
class QuantumRealization:
    """State on C^dA (x) C^dB, Alice's observables A[x1, x2] and Bob's two measurements."""

    state: np.ndarray
    alice: np.ndarray  # shape (d, d, dA, dA)
    bob_P: np.ndarray  # shape (d, dB, dB)
    bob_Q: np.ndarray

    def __post_init__(self):
        for name in ("state", "alice", "bob_P", "bob_Q"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))

    @property
    def d(self) -> int:
        return self.bob_P.shape[0]

    @property
    def dims(self) -> tuple[int, int]:
        return self.alice.shape[-1], self.bob_P.shape[-1]

    def validation_errors(self, tol: float = PROB_TOL) -> list[str]:
        errors = []
        d = self.d
        d_a, d_b = self.dims
        rho = self.state
        if self.alice.shape[:2] != (d, d) or self.bob_Q.shape != self.bob_P.shape:
            return [f"inconsistent shapes: alice {self.alice.shape}, P {self.bob_P.shape}, Q {self.bob_Q.shape}"]
        if rho.shape != (d_a * d_b, d_a * d_b):
            return [f"state shape {rho.shape} does not match dims ({d_a}, {d_b})"]
        if np.abs(rho - rho.conj().T).max() > tol:
            errors.append("state not Hermitian")
        if abs(np.trace(rho) - 1) > tol:
            errors.append("state trace is not 1")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
            errors.append("state not positive semidefinite")
        a = self.alice
        if np.abs(a - np.swapaxes(a, -1, -2).conj()).max() > tol:
            errors.append("Alice observable not Hermitian")
        else:
            w = np.linalg.eigvalsh(a)
            if np.min(np.abs(w[..., None] - np.array([-1.0, 0.0, 1.0])), axis=-1).max() > SPECTRUM_TOL:
                errors.append("Alice observable spectrum outside {-1, 0, 1}")
        eye = np.eye(d_b)
        for name, m in (("P", self.bob_P), ("Q", self.bob_Q)):
            if np.abs(m.sum(axis=0) - eye).max() > tol:
                errors.append(f"Bob's {name} operators do not sum to identity")
            if np.abs(m - np.swapaxes(m, -1, -2).conj()).max() > tol:
                errors.append(f"Bob's {name} operator not Hermitian")
            elif np.linalg.eigvalsh(m).min() < -tol:
                errors.append(f"Bob's {name} operator not positive semidefinite")
        return errors

    def validate(self, tol: float = PROB_TOL) -> "QuantumRealization":
        errors = self.validation_errors(tol)
        if errors:
            raise InvalidRealization("; ".join(errors))
        return self

    def with_state(self, state) -> "QuantumRealization":
        return QuantumRealization(state, self.alice, self.bob_P, self.bob_Q)


def _bob_reduced(rho: np.ndarray, dims, ops: np.ndarray) -> np.ndarray:
    """tr_B[(1 (x) M) rho] for a stack of Bob operators M."""
    d_a, d_b = dims
    r = rho.reshape(d_a, d_b, d_a, d_b)
    return np.einsum("...lk,ikjl->...ij", ops, r)


def _pair_score(lam, rho, dims, alice, bob_p, bob_q) -> tuple[float, float]:
    """(C, F) computed from operator expectations."""
    diff = bob_p[:, None] - bob_q[None, :]  # [x1, x2] stack of P - Q
    sigma = _bob_reduced(rho, dims, diff)  # Alice-side operators tr_B[(1 (x) B) rho]
    corr = np.einsum("xyij,xyji->xy", alice, sigma).real
    c = float(np.sum(lam * corr))
    rho_a = _bob_reduced(rho, dims, np.eye(dims[1]))
    sq = np.einsum("xyij,xyjk,ki->xy", alice, alice, rho_a).real
    return c, c - 0.5 * float(np.sum(lam**2 * sq))


def evaluate_realization(f: BellFunctional, r: QuantumRealization) -> tuple[float, float]:
    """(C_d, F_d) of a realization; F uses tr[(A_x^2 (x) 1) rho] for the penalty."""
    r.validate()
    if r.d != f.d:
        raise InvalidRealization(f"realization has d = {r.d}, functional has d = {f.d}")
    return _pair_score(f.weights, r.state, r.dims, r.alice, r.bob_P, r.bob_Q)


def spectral_projectors(a: np.ndarray) -> np.ndarray:
    """Projectors onto eigenvalues +1, -1 and 0 of a trinary observable, in outcome order (1, 2, bot)."""
    w, v = np.linalg.eigh(a)
    if np.min(np.abs(w[:, None] - np.array([-1.0, 0.0, 1.0])), axis=1).max() > SPECTRUM_TOL:
        raise SpectrumNotTrinary(f"eigenvalues {np.round(w, 10)} not in {{-1, 0, 1}}")
    out = np.empty((3,) + a.shape, dtype=complex)
    for k, mask in enumerate((w > 0.5, w < -0.5, np.abs(w) <= 0.5)):
        vk = v[:, mask]
        out[k] = vk @ vk.conj().T
    return out


def born_behavior(r: QuantumRealization) -> Behavior:
    """p(a, b | x, y) = tr[(A_x^(a) (x) M_y^(b)) rho]."""
    d = r.d
    d_a, d_b = r.dims
    alice_proj = np.empty((d, d, 3, d_a, d_a), dtype=complex)
    for x1 in range(d):
        for x2 in range(d):
            alice_proj[x1, x2] = spectral_projectors(r.alice[x1, x2])
    bob = np.stack([r.bob_P, r.bob_Q])  # [y, b]
    sigma = _bob_reduced(r.state, r.dims, bob)  # [y, b, dA, dA]
    p = np.einsum("xzaij,ybji->yxzab", alice_proj, sigma).real
    return Behavior(p)


# -- N-basis extension --------------------------------------------------------


@dataclass(frozen=True)
class NScenarioFunctional:
    d: int
    bases: tuple
    weights: dict = field(default_factory=dict)  # (j, k) -> lambda^{(j,k)} indexed [x_j, x_k]

    @property
    def n_bases(self) -> int:
        return len(self.bases)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(combinations(range(self.n_bases), 2))

    @property
    def quantum_value(self) -> float:
        n = self.n_bases
        return 0.5 * n * (n - 1) * (self.d - 1)


def n_functional(bases) -> NScenarioFunctional:
    """Sum of pairwise tailored functionals over N bases (columns of unitaries)."""
    bases = tuple(np.asarray(b, dtype=complex) for b in bases)
    if len(bases) < 2:
        raise ValueError("need at least two bases")
    d = bases[0].shape[0]
    if any(b.shape != (d, d) for b in bases):
        raise ShapeMismatch("all bases must be d x d")
    weights = {}
    for j, k in combinations(range(len(bases)), 2):
        o = np.abs(bases[j].conj().T @ bases[k])
        bad = np.argwhere(o >= 1 - UNIT_TOL)
        if bad.size:
            raise UnitOverlapPresent(f"bases {j} and {k} share a vector at {tuple(bad[0])}")
        weights[(j, k)] = weights_from_overlap(o)
    return NScenarioFunctional(d, bases, weights)


def evaluate_n_realization(nf: NScenarioFunctional, state, observables, bob_measurements) -> float:
    """Sum over pairs j < k of F^{(j,k)} with Bob's measurements j and k in the roles of P and Q.

    ``observables`` maps (j, k) to an array (d, d, dA, dA) indexed [x_j, x_k].
    """
    state = np.asarray(state, dtype=complex)
    bob = [np.asarray(m, dtype=complex) for m in bob_measurements]
    if len(bob) != nf.n_bases:
        raise ShapeMismatch(f"expected {nf.n_bases} measurements, got {len(bob)}")
    d_b = bob[0].shape[-1]
    total = 0.0
    for pair in nf.pairs:
        a = np.asarray(observables[pair], dtype=complex)
        d_a = a.shape[-1]
        if a.shape != (nf.d, nf.d, d_a, d_a) or state.shape != (d_a * d_b, d_a * d_b):
            raise ShapeMismatch(f"observables for pair {pair} have shape {a.shape}")
        j, k = pair
        total += _pair_score(nf.weights[pair], state, (d_a, d_b), a, bob[j], bob[k])[1]
    return total
