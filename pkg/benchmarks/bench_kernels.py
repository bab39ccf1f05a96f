"""Time the numba and numpy flavours of the hot loops on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Prints one line per kernel with the best wall time of each flavour, the
speed-up and the largest difference between their outputs.
"""

import argparse
import time

import numpy as np

from markovpin import _kernels, build_kernel, two_state_chain
from markovpin.homogeneous import _window
from markovpin.model import _cumulative_rows
from markovpin.spectral import build_A, chain_powers


def _cases():
    rng = np.random.default_rng(0)
    kernel = build_kernel(0.5)
    chain = two_state_chain(0.3)
    N = 8000
    rewards = 1.0 * np.where(rng.random(N) < 0.5, -1.0, 1.0) - 0.1
    powers = chain_powers(chain, kernel)
    t = np.arange(1, 2001)
    W = np.zeros((2001, 2, 2))
    W[1:] = kernel.K(t)[:, None, None] * powers.stack[powers.index(t)]
    A = build_A(kernel, chain, 1.0, 0.0).A
    cum = _cumulative_rows(chain.Q)
    u = rng.random(1_000_000)
    return {
        "renewal_logz (N=8000)": ("renewal_logz", (_window(kernel, N), rewards)),
        "matrix_renewal_logz (N=2000, S=2)": ("matrix_renewal_logz", (W, np.exp(chain.f), chain.mu0.copy())),
        "sample_states (10^6 steps)": ("sample_states", (cum, np.int64(0), u)),
        "power_iterate (2x2)": ("power_iterate", (A, np.ones(2), 1e-13, 100_000)),
    }


def _best(func, args, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = func(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _diff(a, b):
    if isinstance(a, tuple):
        return max(float(np.max(np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))))
                   for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    nb = _kernels.numba_kernels
    if nb is None:
        print("numba is not installed; timing the numpy flavour only")
    for label, (name, call) in _cases().items():
        t_np, out_np = _best(getattr(_kernels.numpy_kernels, name), call, args.repeat)
        if nb is None:
            print(f"{label:36s} numpy {t_np * 1e3:9.2f} ms")
            continue
        getattr(nb, name)(*call)  # compile outside the timed region
        t_nb, out_nb = _best(getattr(nb, name), call, args.repeat)
        print(f"{label:36s} numpy {t_np * 1e3:9.2f} ms  numba {t_nb * 1e3:8.2f} ms  "
              f"x{t_np / t_nb:7.1f}  max|diff| {_diff(out_np, out_nb):.1e}")


if __name__ == "__main__":
    main()
