"""Compiled vs pure-Python grid kernels: timing and agreement.

Usage::

    python3 benchmarks/bench_kernels.py [--points 4096] [--repeat 3]
"""

import argparse
import time

import numpy as np

from kerrkitten.fock_state import ModelParams, build_state, density, evolve
from kerrkitten.kernels import get_backend


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(n_points):
    rng = np.random.default_rng(7)
    beta = np.ascontiguousarray(rng.uniform(-4, 4, n_points) + 1j * rng.uniform(-4, 4, n_points))
    p = ModelParams(alpha=2.0, r=0.5, kappa=1)
    psi = evolve(build_state(p), p, np.pi / 8)
    rho = np.ascontiguousarray(density(psi).elements)
    pops = np.ascontiguousarray(np.abs(psi.coeffs) ** 2)
    c = np.ascontiguousarray(psi.coeffs)
    x = np.ascontiguousarray(rng.standard_normal(1_000_000))
    return [
        ("quasi_grid W (N=%d)" % rho.shape[0], lambda k: k.quasi_grid(rho, beta, 0.5)),
        ("quasi_grid R sigma=0.7", lambda k: k.quasi_grid(rho, beta, 0.7)),
        ("quasi_diag_grid W", lambda k: k.quasi_diag_grid(pops, beta, 0.5)),
        ("husimi_pure_grid", lambda k: k.husimi_pure_grid(c, beta)),
        ("pairwise_sum 1e6", lambda k: np.array([k.pairwise_sum(x)])),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--points", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    comp, py = get_backend("compiled"), get_backend("python")
    print(f"{'kernel':28s} {'compiled [s]':>13s} {'python [s]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fn in cases(args.points):
        tc, vc = _best(lambda: fn(comp), args.repeat)
        tp, vp = _best(lambda: fn(py), args.repeat)
        diff = float(np.max(np.abs(np.asarray(vc) - np.asarray(vp))))
        print(f"{name:28s} {tc:13.4f} {tp:11.4f} {tp / tc:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
