"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each workload is run on both backends with identical inputs; the table
reports the best wall time per call and the speedup.
"""
import argparse
import timeit

import numpy as np

from ibkit._backend import get_kernels
from ibkit.ib_discrete import random_encoder, restart_rng
from ibkit.oracle import GridSpec
from ibkit.prob import validate_joint


def workloads():
    rng = np.random.default_rng(0)
    j = validate_joint(rng.dirichlet(np.ones(64)).reshape(8, 8))
    px, pyx, pxy = j.p_x, np.ascontiguousarray(j.p_y_given_x), np.ascontiguousarray(j.p)
    enc0 = np.ascontiguousarray(random_encoder(8, 9, restart_rng(0, 0)).rows)
    yield "ba_solve 8x8 |U|=9", lambda k: k.ba_solve(px, pyx, enc0, 5.0, 1e-10, 2000)

    j3 = validate_joint(rng.dirichlet(np.ones(9)).reshape(3, 3))
    cand = np.ascontiguousarray(GridSpec(1 / 25, 3).rows())
    px3, pxy3 = j3.p_x, np.ascontiguousarray(j3.p)
    yield "ib_grid_block 3x3 step 1/25", lambda k: k.ib_grid_block(px3, pxy3, cand, 0, 4)

    rows = GridSpec(1 / 40, 2).rows()
    chan = np.array([[0.9, 0.1], [0.1, 0.9]])
    tabs = np.ascontiguousarray(np.einsum("yx,nxu->nyu", chan, rows[np.indices((rows.shape[0],) * 2).reshape(2, -1).T]))
    py = np.array([0.5, 0.5])
    yield "dib_pair_block 2 views step 1/40", lambda k: k.dib_pair_block(py, tabs, tabs, 0, 64)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    py = get_kernels("python")
    try:
        cy = get_kernels("cython")
    except ImportError:
        cy = None
        print("compiled kernels not built; timing the fallback only")
    print(f"{'workload':34s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in workloads():
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        if cy is None:
            print(f"{name:34s} {t_py:12.3f} {'-':>12s} {'-':>8s}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:34s} {t_py:12.3f} {t_cy:12.3f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
