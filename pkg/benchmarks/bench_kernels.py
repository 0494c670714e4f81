"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--depths 10 12 14] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from twoweight import kernels
from twoweight.youngfn import YoungFunction


def cases(depth, rng):
    n = 1 << depth
    g = rng.lognormal(0.0, 1.0, n)
    m = np.full(n, 1.0 / n)
    offsets = np.array([0, n // 3], dtype=np.int64)
    heap = rng.random(2 * n)
    out = {}
    for name, A in (("power2", YoungFunction.power(2.0)), ("power2.5", YoungFunction.power(2.5)),
                    ("logbump", YoungFunction.log_bump(2.0, 1.0))):
        code, params, tt, ta = A.kernel_spec()
        out[f"luxemburg/{name}"] = lambda mod, code=code, params=params, tt=tt, ta=ta: [
            mod.luxemburg_blocks(g, m, n >> l, code, params, tt, ta, 1e-10) for l in range(depth + 1)]
    out["heap_sums"] = lambda mod: mod.heap_sums(g)
    out["heap_to_cells_max"] = lambda mod: mod.heap_to_cells_max(heap, n // 3, np.full(n, -np.inf))
    out["hl_maximal"] = lambda mod: mod.hl_maximal(g, m, offsets)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--depths", type=int, nargs="+", default=[10, 12, 14])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.compiled is None:
        print("compiled kernels not built; only the fallback is available")
    backends = [("python", kernels.python)]
    if kernels.compiled is not None:
        backends.append(("compiled", kernels.compiled))
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'N':>6s} " + " ".join(f"{b:>12s}" for b, _ in backends) + "  speedup")
    for depth in args.depths:
        for name, fn in cases(depth, rng).items():
            times = []
            for _, mod in backends:
                number = 3
                t = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
                times.append(t)
            sp = f"{times[0] / times[1]:7.2f}x" if len(times) == 2 else ""
            print(f"{name:28s} {1 << depth:6d} " + " ".join(f"{t * 1e3:10.3f}ms" for t in times) + "  " + sp)


if __name__ == "__main__":
    main()
