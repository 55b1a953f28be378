"""Time the numba and numpy row-reduction kernels on random dense matrices over F_p.

    python benchmarks/bench_kernels.py [--sizes 50 100 200] [--p 2 32003] [--repeat 3]

Both kernels must return the same RREF; the script checks that before timing.
"""

import argparse
import time

import numpy as np

from levellab.fieldlin import _kernels


def best_time(fn, a, p, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(a, p)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--p", type=int, nargs="+", default=[2, 32003])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    if _kernels.rref_mod_p_jit is None:
        print("numba unavailable (or LEVELLAB_DISABLE_JIT set); timing numpy only")
    else:
        _kernels.rref_mod_p_jit(np.eye(2, dtype=np.int64), 2)  # compile outside the timing
    print(f"{'p':>6} {'n':>5} {'numpy s':>10} {'numba s':>10} {'speedup':>8}")
    for p in args.p:
        for n in args.sizes:
            a = rng.integers(0, p, size=(n, n + n // 2), dtype=np.int64)
            t_np = best_time(_kernels.rref_mod_p_numpy, a, p, args.repeat)
            if _kernels.rref_mod_p_jit is None:
                print(f"{p:>6} {n:>5} {t_np:>10.4f} {'-':>10} {'-':>8}")
                continue
            r1, piv1 = _kernels.rref_mod_p_numpy(a, p)
            r2, piv2 = _kernels.rref_mod_p_jit(a, p)
            assert np.array_equal(r1, r2) and list(piv1) == list(piv2), "backends disagree"
            t_jit = best_time(_kernels.rref_mod_p_jit, a, p, args.repeat)
            print(f"{p:>6} {n:>5} {t_np:>10.4f} {t_jit:>10.4f} {t_np / t_jit:>8.1f}")


if __name__ == "__main__":
    main()
