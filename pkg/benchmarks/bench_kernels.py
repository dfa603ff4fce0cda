"""Compare the compiled and pure-Python local-value kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from tailored_bell._backend import available_backends
from tailored_bell.matcore import haar_unitary


def bench(fn, *args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--search", action="store_true", help="also time a short end-to-end search")
    args = parser.parse_args()
    backends = available_backends()
    rows = []
    for d in (3, 4, 6, 8):
        u = np.ascontiguousarray(haar_unitary(d, d))
        o = np.ascontiguousarray(np.abs(u))
        cases = [
            ("beta_l_of_unitary", (u,)),
            ("soft_beta_l_of_unitary", (u, 0.01)),
            ("strategy_scores", (o,)),
        ]
        if d <= 4:
            cases.append(("local_value_oracle", (o,)))
        for name, fargs in cases:
            times = {b: bench(getattr(mod, name), *fargs, repeat=args.repeat) for b, mod in backends.items()}
            rows.append((name, d, times))
    names = sorted(backends)
    print(f"{'kernel':<24}{'d':>3}" + "".join(f"{n + ' [us]':>16}" for n in names) + f"{'speedup':>10}")
    for name, d, times in rows:
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<24}{d:>3}" + "".join(f"{times[n] * 1e6:>16.2f}" for n in names) + f"{speed:>10.1f}")
    if args.search:
        bench_search()


SEARCH_SNIPPET = """
import time
from tailored_bell.search import SearchConfig, minimize_local_value
t = time.perf_counter()
minimize_local_value(SearchConfig(3, restarts=5, seed=0))
print(time.perf_counter() - t)
"""


def bench_search():
    """Wall time of a small d=3 search under each backend (selected at import, so run in subprocesses)."""
    out = {}
    for name, flag in (("cython", "0"), ("python", "1")):
        env = dict(os.environ, TAILORED_BELL_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", SEARCH_SNIPPET], env=env, capture_output=True, text=True, check=True)
        out[name] = float(res.stdout.strip())
    print(f"search d=3, 5 restarts: cython {out['cython']:.2f}s, python {out['python']:.2f}s")


if __name__ == "__main__":
    main()
