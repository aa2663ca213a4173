"""Numba vs numpy timing for the hot kernels.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

The numba timings exclude the first (compiling) call. Set
``RISSIM_DISABLE_NUMBA=1`` to make the simulator itself use the numpy path.
"""

import argparse
import time

import numpy as np

from rissim import _kernels


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _ray_case(links, rays, rx_shape, tx_shape, seed=0):
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal((links, rays)) + 1j * rng.standard_normal((links, rays))
    phases = [rng.uniform(-np.pi, np.pi, (links, rays)) for _ in range(4)]
    return (coef, *phases, rx_shape, tx_shape)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    cases = {
        "ray_sum BS->UE   (210 links, 241 rays, 1x40)": _ray_case(210, 241, (1, 1), (10, 4)),
        "ray_sum RIS->UE  (210 links, 241 rays, 1x256)": _ray_case(210, 241, (1, 1), (16, 16)),
        "ray_sum BS->RIS  (1 link, 161 rays, 256x40)": _ray_case(1, 161, (16, 16), (10, 4)),
    }
    print(f"{'kernel':48s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speed-up':>9s}")
    for name, case in cases.items():
        _kernels.ray_sum_numba(*case)  # compile
        a = _kernels.ray_sum_numpy(*case)
        b = _kernels.ray_sum_numba(*case)
        assert np.allclose(a, b, rtol=1e-9, atol=1e-9)
        t_np = _best_of(lambda: _kernels.ray_sum_numpy(*case), args.repeat)
        t_nb = _best_of(lambda: _kernels.ray_sum_numba(*case), args.repeat)
        print(f"{name:48s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:8.1f}x")

    rng = np.random.default_rng(1)
    casc = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    _kernels.exhaustive_best_numba(0.1 + 0j, casc, 8)
    t_np = _best_of(lambda: _kernels.exhaustive_best_numpy(0.1, casc, 8), args.repeat)
    t_nb = _best_of(lambda: _kernels.exhaustive_best_numba(0.1 + 0j, casc, 8), args.repeat)
    name = "exhaustive search (N=6, D=8, 262144 configs)"
    print(f"{name:48s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
