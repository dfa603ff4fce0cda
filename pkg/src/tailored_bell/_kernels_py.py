"""Pure-Python/numpy kernels, used when the compiled extension is unavailable."""

import numpy as np

BACKEND = "python"


def _gain(o2):
    l2 = np.clip(1.0 - o2, 0.0, None)
    return np.sqrt(l2) - 0.5 * l2


def strategy_scores(o):
    g = _gain(np.asarray(o, dtype=float) ** 2)
    return g.sum(axis=1)[:, None] + g.sum(axis=0)[None, :] - 2.0 * g


def local_value_oracle(o):
    o = np.asarray(o, dtype=float)
    d = o.shape[0]
    best = -np.inf
    for u in range(d):
        for v in range(d):
            total = 0.0
            for x1 in range(d):
                for x2 in range(d):
                    lam = float(np.sqrt(max(1.0 - o[x1, x2] ** 2, 0.0)))
                    c = lam * ((x1 == u) - (x2 == v))
                    total += max(c * a - 0.5 * lam * lam * a * a for a in (-1, 0, 1))
            best = max(best, total)
    return best


def beta_l_of_unitary(u):
    u = np.asarray(u)
    return float(strategy_scores(np.abs(u)).max())


def soft_beta_l_of_unitary(u, temperature):
    s = strategy_scores(np.abs(np.asarray(u)))
    best = float(s.max())
    return best + temperature * float(np.log(np.exp((s - best) / temperature).sum())), best
