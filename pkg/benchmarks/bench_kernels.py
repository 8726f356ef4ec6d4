"""Time the numba and pure-numpy kernel paths side by side.

    python benchmarks/bench_kernels.py [--trials N] [--repeat R]
"""
import argparse
import time

import numpy as np

from noma_ee import kernels
from noma_ee._accel import HAVE_NUMBA
from noma_ee.channel import SystemConfig, make_rng, sample_gains
from noma_ee.ergodic import gcq_coefficients
from noma_ee.rates import PowerAllocation


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    cfg = SystemConfig(K=5, rho=100.0)
    alloc = PowerAllocation.linear(5)
    gains = sample_gains(cfg, args.trials, make_rng(0), antennas=1)
    coeffs = gcq_coefficients(50, 10.0, 2.0)
    x = np.sort(gains[:, 0])

    cases = {
        "mc_sum_rate_moments": (kernels._mc_sum_rate_moments_numpy,
                                kernels._mc_sum_rate_moments_numba,
                                (gains, cfg.rho, alloc.gamma, alloc.residual)),
        "exp_mixture": (kernels._exp_mixture_numpy, kernels._exp_mixture_numba,
                        (x, coeffs.delta / 10.0, coeffs.c)),
    }
    print(f"trials={args.trials} repeat={args.repeat} numba={'yes' if HAVE_NUMBA else 'no'}")
    print(f"{'kernel':<22}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, (np_fn, nb_fn, fargs) in cases.items():
        t_np = best_of(lambda: np_fn(*fargs), args.repeat)
        if HAVE_NUMBA:
            nb_fn(*fargs)  # compile outside the timed region
            t_nb = best_of(lambda: nb_fn(*fargs), args.repeat)
            print(f"{name:<22}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<22}{t_np:>12.4f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
