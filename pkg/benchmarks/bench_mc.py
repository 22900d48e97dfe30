"""Compare the numba and numpy Monte Carlo kernels.

    python3 benchmarks/bench_mc.py [--trials N]
"""
import argparse
import time

from repkey import _jit
from repkey.oracle import mc_repeater

CASES = [
    # p0, p_es, n
    (0.1, [0.9, 0.9], 2),
    (0.01, [0.95, 0.95], 2),
    (0.05, [0.95, 0.95, 0.95], 3),
]


def timed(**kw):
    t = time.perf_counter()
    est = mc_repeater(**kw)
    return time.perf_counter() - t, est


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=20000)
    args = ap.parse_args()
    backends = [False] + ([True] if _jit.numba is not None else [])
    if True in backends:
        # compile outside the timed region
        for strategy in ("waitall", "immediate"):
            mc_repeater(0.5, [0.9], 1, 10, 0, strategy=strategy, use_numba=True)
    print(f"{'strategy':<10} {'p0':>5} {'n':>2} {'backend':<6} {'seconds':>8} {'mean':>10}")
    for strategy in ("waitall", "immediate"):
        for p0, p_es, n in CASES:
            for use_numba in backends:
                dt, est = timed(p0=p0, p_es=p_es, n=n, trials=args.trials, seed=1,
                                strategy=strategy, use_numba=use_numba)
                print(f"{strategy:<10} {p0:>5} {n:>2} {est.backend:<6} {dt:8.3f} {est.mean_attempts:10.3f}")


if __name__ == "__main__":
    main()
