"""Compare the compiled peeling kernel with the numpy fallback.

    python benchmarks/bench_peel.py [--repeat 20]
"""

import argparse
import time

import numpy as np

from ecclab import _peel_py
from ecclab.scldpc import EnsembleParams, sample_graph

try:
    from ecclab import _kernels
except ImportError:
    _kernels = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    cases = [("bec eps=0.2, (3,6,3,64,128)", EnsembleParams(3, 6, 3, 128, 64), 0.2),
             ("bec eps=0.45, (3,6,3,64,128)", EnsembleParams(3, 6, 3, 128, 64), 0.45),
             ("spbc, (3,6,3,20,400)", EnsembleParams(3, 6, 3, 400, 20), None)]
    print(f"{'case':34s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, p, eps in cases:
        g = sample_graph(p, rng)
        if eps is None:
            mask = np.zeros(g.n_vn, dtype=np.uint8)
            z = (p.L + 1) // 2
            mask[(z - 1) * p.M:z * p.M] = 1
        else:
            mask = (rng.random(g.n_vn) < eps).astype(np.uint8)
        t_py = timeit(lambda: _peel_py.peel_residual(g.vn_cn, g.n_cn, mask), args.repeat)
        if _kernels is None:
            print(f"{name:34s} {t_py * 1e3:11.3f} {'n/a':>12s}")
            continue
        r1 = _peel_py.peel_residual(g.vn_cn, g.n_cn, mask)
        r2 = _kernels.peel_residual(g.vn_cn, g.n_cn, mask)
        assert np.array_equal(r1, r2), "backends disagree"
        t_c = timeit(lambda: _kernels.peel_residual(g.vn_cn, g.n_cn, mask), args.repeat)
        print(f"{name:34s} {t_py * 1e3:11.3f} {t_c * 1e3:12.3f} {t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
