"""Compare the compiled and pure-Python subset-DP kernels.

    python benchmarks/bench_kernels.py --hk 8 10 12 14 --match 8 12 16 --repeat 3

Each row times one kernel on a random symmetric matrix and checks that both
backends return identical tables.
"""
import argparse
import time

import numpy as np

from pctsp.kernels import backends


def _best_of(fn, arg, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(arg)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _matrix(k, rng):
    a = rng.uniform(0, 1, (k, k))
    a = a + a.T
    np.fill_diagonal(a, 0.0)
    return np.ascontiguousarray(a)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hk", type=int, nargs="*", default=[8, 10, 12, 14], help="Held-Karp vertex counts")
    ap.add_argument("--match", type=int, nargs="*", default=[8, 12, 16], help="matching sizes (even)")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = backends()
    if "cython" not in impls:
        print("compiled extension not built; only the Python backend is available")
    rng = np.random.default_rng(args.seed)
    jobs = [("held_karp", n, _matrix(n, rng)) for n in args.hk]
    jobs += [("matching_dp", k, _matrix(k, rng)) for k in args.match]

    print(f"{'kernel':<12} {'size':>4} " + " ".join(f"{name + ' s':>12}" for name in impls) + f" {'speedup':>8}  same")
    for kernel, size, mat in jobs:
        times, outs = {}, {}
        for name, mod in impls.items():
            times[name], outs[name] = _best_of(getattr(mod, kernel), mat, args.repeat)
        ref = outs["python"]
        same = all(
            all(np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(o, ref))
            for o in outs.values()
        )
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        cols = " ".join(f"{times[name]:>12.5f}" for name in impls)
        print(f"{kernel:<12} {size:>4} {cols} {speed:>8.1f}  {same}")


if __name__ == "__main__":
    main()
