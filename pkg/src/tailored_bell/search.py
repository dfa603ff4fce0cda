"""Multistart direct search for overlap matrices with small local value.

Candidates are unitaries, so every visited overlap |U| is a genuine overlap
matrix.  Each restart starts from a Haar unitary and runs a compass-style
search along random Hermitian directions: poll exp(+-i step H) U, widen the
step on success, halve it after ``patience`` failed polls.

The objective max_{u,v} s(u, v) has kinks where the maximizing strategy
switches, which stalls a plain direct search.  The early stages therefore
minimize the soft maximum T log sum exp(s/T) for a decreasing list of
temperatures; the final stage uses the exact local value.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._backend import kernels
from .bases import OverlapMatrix, mub_overlap, odd_counterexample, qubit_mub_blocks
from .errors import InvalidConfig, NotUnitary
from .localvalue import local_value, lower_bound, nu_threshold
from .matcore import haar_unitary, is_unitary

FLOOR_TOL = 1e-9


@dataclass(frozen=True)
class SearchConfig:
    d: int
    restarts: int = 100
    max_iters: int = 2000
    step_init: float = 0.5
    step_min: float = 1e-7
    seed: int = 0
    temperatures: tuple[float, ...] = (0.05, 0.005)
    patience: int | None = None  # failed polls before halving; default d^2
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "temperatures", tuple(float(t) for t in self.temperatures))
        if self.d < 2:
            raise InvalidConfig(f"d must be >= 2, got {self.d}")
        if self.restarts < 1 or self.max_iters < 1:
            raise InvalidConfig("restarts and max_iters must be >= 1")
        if not 0 < self.step_min < self.step_init:
            raise InvalidConfig("need 0 < step_min < step_init")
        if any(t <= 0 for t in self.temperatures):
            raise InvalidConfig("temperatures must be positive")
        if self.patience is not None and self.patience < 1:
            raise InvalidConfig("patience must be >= 1")
        if self.workers < 1:
            raise InvalidConfig("workers must be >= 1")

    @property
    def effective_patience(self) -> int:
        return self.patience or self.d * self.d


@dataclass(frozen=True)
class SearchResult:
    best_beta_L: float
    best_unitary: np.ndarray
    best_overlap: OverlapMatrix
    trajectory: list[tuple[int, float]]
    restart_values: list[float]
    best_restart: int = 0
    config: SearchConfig | None = field(default=None, compare=False)


class FamilyRow(NamedTuple):
    family: str
    beta_L: float
    nu_star: float


def random_hermitian_direction(d: int, rng) -> np.ndarray:
    """GUE sample scaled to unit spectral norm."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (g + g.conj().T)
    return h / np.abs(np.linalg.eigvalsh(h)).max()


def _rotate(u, h, step):
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * step * w)) @ v.conj().T @ u


def perturb_unitary(u, step: float, seed=None) -> np.ndarray:
    """exp(i step H) u for a seeded random Hermitian H of unit spectral norm."""
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, 1e-10):
        raise NotUnitary("input is not unitary within 1e-10")
    if step == 0:
        return u.copy()
    h = random_hermitian_direction(u.shape[0], np.random.default_rng(seed))
    return _rotate(u, h, step)


def _check_floor(value: float, floor: float) -> None:
    if value < floor - FLOOR_TOL:
        raise AssertionError(f"local value {value!r} below the universal floor {floor!r}")


def _objective(u, temperature, floor):
    if temperature is None:
        hard = kernels.beta_l_of_unitary(u)
        soft = hard
    else:
        soft, hard = kernels.soft_beta_l_of_unitary(u, temperature)
    _check_floor(hard, floor)
    return soft, hard


def _run_restart(cfg: SearchConfig, r: int):
    rng = np.random.default_rng(cfg.seed + r)
    floor = lower_bound(cfg.d)
    u = np.ascontiguousarray(haar_unitary(cfg.d, rng))
    stages = list(cfg.temperatures) + [None]
    budget = [cfg.max_iters // len(stages)] * len(stages)
    budget[-1] += cfg.max_iters - sum(budget)
    patience = cfg.effective_patience
    it_total = 0
    trajectory = []
    for temperature, n_iter in zip(stages, budget):
        f, hard = _objective(u, temperature, floor)
        trajectory.append((it_total, hard))
        step, fails = cfg.step_init, 0
        for _ in range(n_iter):
            it_total += 1
            h = random_hermitian_direction(cfg.d, rng)
            accepted = False
            for sign in (1.0, -1.0):
                cand = np.ascontiguousarray(_rotate(u, h, sign * step))
                fc, hc = _objective(cand, temperature, floor)
                if fc < f:
                    u, f, hard, accepted = cand, fc, hc, True
                    break
            if accepted:
                trajectory.append((it_total, hard))
                step, fails = min(2 * step, cfg.step_init), 0
            else:
                fails += 1
                if fails >= patience:
                    step, fails = step / 2, 0
                    if step < cfg.step_min:
                        break
    return float(kernels.beta_l_of_unitary(u)), u, trajectory


def minimize_local_value(cfg: SearchConfig) -> SearchResult:
    """Best overlap found over all restarts; deterministic for a fixed config."""
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            runs = list(pool.map(_run_restart, [cfg] * cfg.restarts, range(cfg.restarts)))
    else:
        runs = [_run_restart(cfg, r) for r in range(cfg.restarts)]
    values = [v for v, _, _ in runs]
    best = min(range(cfg.restarts), key=lambda r: (values[r], r))
    _, u, traj = runs[best]
    overlap = OverlapMatrix(np.abs(u))
    beta = local_value(overlap).beta_L
    return SearchResult(beta, u, overlap, traj, values, best, cfg)


def permutation_distance(a, b) -> float:
    """min over row and column permutations of max |a - P b Q|.

    Row permutations are enumerated; for each, the column matching minimizes
    the summed deviation, and its max entry is reported.  Exact for the max
    norm whenever the matched distance is small, which is the case of interest.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return float("inf")
    best = float("inf")
    for perm in permutations(range(a.shape[0])):
        pa = a[list(perm)]
        cost = np.abs(pa[:, :, None] - b[:, None, :]).sum(axis=0)
        rows, cols = linear_sum_assignment(cost)
        best = min(best, float(np.abs(pa[:, rows] - b[:, cols]).max()))
    return best


def permutation_equivalent(a, b, tol: float = 1e-3) -> bool:
    return permutation_distance(a, b) <= tol


def compare_families(d: int, cfg: SearchConfig | None = None) -> list[FamilyRow]:
    """Local value and visibility threshold of the MUB, block and searched overlaps."""
    if d < 2:
        raise ValueError("d must be >= 2")
    rows = []
    families = [("mub", mub_overlap(d))]
    if d % 2 == 0:
        families.append(("qubit_mub_blocks", qubit_mub_blocks(d)))
    else:
        families.append(("odd_blocks", odd_counterexample(d)))
    result = minimize_local_value(cfg or SearchConfig(d, restarts=20, seed=0))
    families.append(("searched", result.best_overlap))
    for name, o in families:
        beta = local_value(o).beta_L
        rows.append(FamilyRow(name, beta, nu_threshold(beta, d)))
    return sorted(rows, key=lambda row: (row.beta_L, row.family))
