"""Timing comparison of the jitted kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_backends.py [--samples N]

Covers the three hot paths: batched field matmul, batched Gram-Schmidt
(the Haar sampler core), and one full transform-average call.
"""

import argparse
import time

import numpy as np

from grassradon import backend, fields
from grassradon import algebra as la
from grassradon import operators as op
from grassradon import sampling


def timeit(fn, repeats=5):
    fn()  # warm (and JIT-compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=200_000)
    args = ap.parse_args()
    S = args.samples

    rows = []
    for name in ("numpy", "numba"):
        try:
            backend.set_backend(name)
        except ValueError:
            print(f"{name}: unavailable, skipped")
            continue
        for field in fields.ALL_FIELDS:
            rng = sampling.stream(0)
            A = rng.standard_normal((S, 3, 3, field.d))
            B = rng.standard_normal((S, 3, 2, field.d))
            X = rng.standard_normal((S, 4, 2, field.d))
            t_mm = timeit(lambda: backend.matmul_batch(A, B, field.d))
            t_gs = timeit(lambda: backend.orthonormalize_batch(X, field.d))

            a = rng.standard_normal((4, 4, field.d))
            a = 0.5 * (a + la.adjoint(a))
            f = op.trace_quadratic(field, 4, 1, a)
            phi = op.radon_function(f, 2)
            x = sampling.haar_stiefel(field, 4, 1, sampling.stream(1), 1)[0]
            b = la.scalar(field, np.sqrt(0.5))
            t_op = timeit(lambda: op.t_op(phi, b, x, S, seed=2), repeats=2)
            rows.append((name, field.name, t_mm, t_gs, t_op))

    print(f"\nbatch size {S}, times in ms")
    print(f"{'backend':8s} {'field':5s} {'matmul':>10s} {'gram-schmidt':>14s} {'t_op call':>12s}")
    for name, fld, t_mm, t_gs, t_call in rows:
        print(f"{name:8s} {fld:5s} {1e3*t_mm:10.1f} {1e3*t_gs:14.1f} {1e3*t_call:12.1f}")
    base = {(r[0], r[1]): r for r in rows}
    if any(r[0] == "numba" for r in rows) and any(r[0] == "numpy" for r in rows):
        print("\nspeedup (numpy / numba)")
        for fld in ("R", "C", "H"):
            if ("numba", fld) in base and ("numpy", fld) in base:
                np_row, nb_row = base[("numpy", fld)], base[("numba", fld)]
                print(f"  {fld}: matmul {np_row[2]/nb_row[2]:4.1f}x   "
                      f"gram-schmidt {np_row[3]/nb_row[3]:4.1f}x   "
                      f"t_op {np_row[4]/nb_row[4]:4.1f}x")


if __name__ == "__main__":
    main()
