"""Compare the compiled lattice-state kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--width 60]

Times ball enumeration and the straddled overlap on a few lattices and
checks that both backends return the same answer.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from sunitkit import _kernels_py
from sunitkit.qsim import KERNEL_BACKEND, GaussParams, gauss_state, kernels

LATTICES = {
    "Z^2": np.eye(2),
    "skew2": np.array([[1.0, 0.0], [0.37, 1.13]]),
    "Z[i]": math.sqrt(2) * np.eye(2),
    "skew3": np.array([[1.0, 0.0, 0.0], [0.5, 1.2, 0.0], [0.1, 0.3, 0.9]]),
}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def bench_enum(basis, radius, repeat):
    fast, a = best_of(lambda: kernels().enum_ball(basis, radius, 10 ** 8), repeat)
    slow, b = best_of(lambda: _kernels_py.enum_ball(basis, radius, 10 ** 8), repeat)
    same = sorted(map(tuple, a.tolist())) == sorted(map(tuple, b.tolist()))
    return fast, slow, len(a), same


def bench_overlap(basis, width, repeat):
    gp = GaussParams(s=width, nu=0.05)
    a = gauss_state(basis, gp)
    b = gauss_state(basis @ np.diag([1.003] + [1.0] * (basis.shape[1] - 1)), gp)
    fast, x = best_of(lambda: a.inner(b), repeat)
    slow, y = best_of(lambda: a.inner(b, "python"), repeat)
    return fast, slow, len(a), abs(x - y) < 1e-10


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--width", type=float, default=40.0, help="Gaussian width for the 2-dimensional overlaps")
    args = ap.parse_args(argv)
    print(f"default backend: {KERNEL_BACKEND}")
    if KERNEL_BACKEND != "cython":
        print("compiled kernels are not built; both columns time the numpy fallback")
    header = f"{'kernel':<18}{'lattice':<8}{'points':>9}{'compiled s':>12}{'numpy s':>10}{'speedup':>9}  agree"
    print(header)
    print("-" * len(header))
    for name, basis in LATTICES.items():
        radius = 120.0 if basis.shape[0] == 2 else 25.0
        fast, slow, npts, same = bench_enum(basis, radius, args.repeat)
        print(f"{'enum_ball':<18}{name:<8}{npts:>9}{fast:>12.4f}{slow:>10.4f}{slow / fast:>9.1f}  {same}")
    for name, basis in LATTICES.items():
        width = args.width if basis.shape[0] == 2 else args.width / 4
        fast, slow, npts, same = bench_overlap(basis, width, args.repeat)
        print(f"{'straddle_overlap':<18}{name:<8}{npts:>9}{fast:>12.4f}{slow:>10.4f}{slow / fast:>9.1f}  {same}")


if __name__ == "__main__":
    main()
