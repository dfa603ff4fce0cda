"""Local value of the tailored functional and the lower-bound machinery.

For Bob's deterministic strategy (u, v) Alice's best response is known in
closed form, which reduces the local value to a maximum over d^2 strategy
scores.  ``local_value_oracle`` recomputes it by exhaustive enumeration of
Alice's three options per input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._backend import kernels
from .bases import OverlapMatrix
from .errors import DimensionTooLarge, DomainError, IndexOutOfRange, Infeasible

ORACLE_MAX_DIM = 6


@dataclass(frozen=True)
class DeterministicStrategy:
    u: int
    v: int
    alice: np.ndarray  # d x d table with entries in {-1, 0, +1}


@dataclass(frozen=True)
class LocalValueReport:
    beta_L: float
    best_strategy: DeterministicStrategy
    per_strategy_scores: np.ndarray
    nu_star: float

    @property
    def dim(self) -> int:
        return self.per_strategy_scores.shape[0]


@dataclass(frozen=True)
class SimplexExtremal:
    tau: float
    n_coords: int
    vector: tuple[float, ...]


def _entries(o) -> np.ndarray:
    if isinstance(o, OverlapMatrix):
        return np.ascontiguousarray(o.entries, dtype=float)
    return np.ascontiguousarray(o, dtype=float)


def best_response(d: int, u: int, v: int) -> np.ndarray:
    """Alice's optimal table A_x = delta(x1, u) - delta(x2, v)."""
    idx = np.arange(d)
    return (idx[:, None] == u).astype(int) - (idx[None, :] == v).astype(int)


def strategy_scores(o) -> np.ndarray:
    """d x d table of s(u, v)."""
    return np.asarray(kernels.strategy_scores(_entries(o)))


def strategy_score(o, u: int, v: int) -> float:
    """s(u, v): sum of lambda - lambda^2/2 over row u and column v, cell (u, v) excluded."""
    e = _entries(o)
    d = e.shape[0]
    if not (0 <= u < d and 0 <= v < d):
        raise IndexOutOfRange(f"strategy ({u}, {v}) outside [0, {d})")
    return float(strategy_scores(e)[u, v])


def nu_threshold(beta_l: float, d: int) -> float:
    """Visibility at which (d-1)(2nu-1) reaches beta_L."""
    return 0.5 * (1.0 + beta_l / (d - 1))


def local_value(o) -> LocalValueReport:
    e = _entries(o)
    d = e.shape[0]
    scores = strategy_scores(e)
    # argmax returns the first maximum in row-major order: lexicographic tie-break
    u, v = divmod(int(np.argmax(scores)), d)
    beta = float(scores[u, v])
    strategy = DeterministicStrategy(u, v, best_response(d, u, v))
    return LocalValueReport(beta, strategy, scores, nu_threshold(beta, d))


def local_value_oracle(o) -> float:
    e = _entries(o)
    if e.shape[0] > ORACLE_MAX_DIM:
        raise DimensionTooLarge(f"brute force limited to d <= {ORACLE_MAX_DIM}")
    return float(kernels.local_value_oracle(e))


def mub_local_value(d: int) -> float:
    if d < 2:
        raise ValueError("d must be >= 2")
    return 2 * (d - 1) * math.sqrt((d - 1) / d) - (d - 1) ** 2 / d


def lower_bound(d: int) -> float:
    """Universal floor d + sqrt2 - 5/2 on the local value."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return d + math.sqrt(2) - 2.5


def conj_local_value() -> float:
    return (6 * (math.sqrt(8) + math.sqrt(5)) - 13) / 9


def simplex_extremals(tau: float, n: int, total: float = 1.0) -> list[SimplexExtremal]:
    """Vertices of {t >= 0, sum t = total, t_i <= tau}.

    Each vertex holds floor(total/tau) copies of tau, one remainder entry and
    zeros; all distinct arrangements are returned in lexicographic order of
    the tau positions.
    """
    if not (tau > 0 and 0 < total <= 1 and n >= 1):
        raise DomainError("need tau > 0, 0 < total <= 1 and n >= 1")
    if n * tau < total - 1e-12:
        raise Infeasible(f"n * tau = {n * tau} < total = {total}")
    k = min(int(math.floor(total / tau + 1e-12)), n)
    rem = total - k * tau
    if abs(rem) < 1e-12:
        rem = 0.0
    out = []
    for tau_pos in combinations(range(n), k):
        rest = [i for i in range(n) if i not in tau_pos]
        for rem_pos in (rest if rem > 0 else [None]):
            vec = [0.0] * n
            for i in tau_pos:
                vec[i] = tau
            if rem_pos is not None:
                vec[rem_pos] = rem
            out.append(SimplexExtremal(tau, n, tuple(vec)))
    return out


def s_tau(tau: float) -> float:
    if not 0 < tau <= 1:
        raise DomainError(f"tau must lie in (0, 1], got {tau}")
    m = math.floor((1 - tau) / tau)
    return 2 * m * (math.sqrt(1 - tau) - 1) + 2 * math.sqrt(tau * (1 + m)) - tau - 2


def g_of_n(n: float) -> float:
    """s(1/n) written for real n >= 1."""
    return 2 * (n - 1) * (math.sqrt(1 - 1 / n) - 1) - 1 / n


def g_min() -> tuple[float, int, float]:
    """Critical point of g on the reals, its best integer neighbour and g there."""
    n_star = (1 + math.sqrt(5)) / 2
    candidates = {math.floor(n_star), math.ceil(n_star)}
    best = min(candidates, key=g_of_n)
    return n_star, best, s_tau(1 / best)
