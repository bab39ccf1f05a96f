"""Transfer-matrix partition functions for Model A and Monte Carlo averages.

All recursions run in the linear domain with a running log-shift (see
``_kernels``), which is as stable as a per-step log-sum-exp and much
cheaper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._parallel import map_ordered
from .exceptions import CapExceededError, ModelError
from .homogeneous import _window
from .model import DisorderChain, DisorderPath, RenewalKernel, sample_path
from .spectral import chain_powers

DEFAULT_CAP = 20_000
_W_MAX_ENTRIES = 50_000_000


@dataclass(frozen=True)
class PartitionResult:
    N: int
    logZ: float
    variant: str  # 'pinned-endpoint' | 'strip-constrained' | 'site-pinned'


def _omega(path) -> np.ndarray:
    if isinstance(path, DisorderPath):
        return np.asarray(path.omega, dtype=float)
    w = np.asarray(path, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ModelError("omega must be a non-empty vector")
    return w


def _check_cap(N, cap):
    if N > cap:
        raise CapExceededError(f"N={N} exceeds the dynamic-programming cap {cap}")


def log_partitions(kernel: RenewalKernel, omega, beta: float, h: float, cap: int = DEFAULT_CAP) -> np.ndarray:
    """``log Z_{n,beta,h,omega}`` for every prefix ``n = 0..N``."""
    w = _omega(omega)
    _check_cap(w.size, cap)
    return _kernels.renewal_logz(_window(kernel, w.size), beta * w + h)


def quenched_logZ(kernel: RenewalKernel, omega, beta: float, h: float, cap: int = DEFAULT_CAP) -> PartitionResult:
    """``log Z_{N,beta,h,omega}`` with the polymer pinned at ``N``.

    ``Z(n) = exp(beta omega_n + h) sum_{m=max(0, n-T_K)}^{n-1} Z(m) K(n-m)``,
    ``Z(0) = 1``; work is ``O(N min(N, T_K))``.
    """
    w = _omega(omega)
    return PartitionResult(w.size, float(log_partitions(kernel, w, beta, h, cap)[-1]), "pinned-endpoint")


def pinned_logZ(kernel: RenewalKernel, omega, beta: float, h: float, pin_sites,
                cap: int = DEFAULT_CAP, variant: str = "site-pinned") -> PartitionResult:
    """Partition function forced to contact every site in ``pin_sites``.

    By the renewal property it factorises into independent pinned segments
    between consecutive pins. ``pin_sites`` must be increasing, lie in
    ``1..N`` and contain ``N``.
    """
    w = _omega(omega)
    N = w.size
    _check_cap(N, cap)
    pins = np.asarray(pin_sites, dtype=np.int64)
    if pins.ndim != 1 or pins.size == 0 or pins[-1] != N:
        raise ValueError("pin_sites must be a non-empty increasing sequence ending at N")
    if pins[0] < 1 or np.any(np.diff(pins) <= 0):
        raise ValueError("pin_sites must be strictly increasing within 1..N")
    rewards = beta * w + h
    kern = _window(kernel, N)
    total = 0.0
    start = 0
    for stop in pins.tolist():
        seg = stop - start
        total += float(_kernels.renewal_logz(kern[:min(seg, kernel.support_cutoff) + 1], rewards[start:stop])[-1])
        start = stop
    return PartitionResult(N, total, variant)


def strip_constrained_logZ(kernel: RenewalKernel, path: DisorderPath, beta: float, h: float,
                           cap: int = DEFAULT_CAP) -> PartitionResult:
    """``Z^c``: pinned at every complete strip end ``L_1..L_{B_N}`` and at ``N``."""
    pins = np.append(np.asarray(path.strip_ends[1:], dtype=np.int64), path.N)
    return pinned_logZ(kernel, path, beta, h, pins, cap, variant="strip-constrained")


def annealed_logZ(kernel: RenewalKernel, chain: DisorderChain, beta: float, h: float, N: int,
                  cap: int = DEFAULT_CAP, split: int | None = None) -> float:
    """``log E Z_{N,beta,h}`` for Model A by the vector renewal recursion.

    ``V(n, y) = sum_{m<n} sum_x V(m, x) K(n-m) Q^{n-m}(x, y) exp(beta f(y) + h)``
    with ``V(0, .) = mu0``. Powers of ``Q`` come from the cached
    :func:`~markovpin.spectral.chain_powers`.
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    _check_cap(N, cap)
    S = chain.n_states
    if (N + 1) * S * S > _W_MAX_ENTRIES:
        raise CapExceededError(f"annealed recursion at N={N} with {S} states exceeds the memory cap")
    powers = chain_powers(chain, kernel, split)
    t = np.arange(1, N + 1)
    W = np.zeros((N + 1, S, S))
    W[1:] = kernel.K(t)[:, None, None] * powers.stack[powers.index(t)]
    tilt = np.exp(beta * np.asarray(chain.f) + h)
    out = _kernels.matrix_renewal_logz(W, tilt, np.asarray(chain.mu0, dtype=float))
    return float(out[N])


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    values: np.ndarray = field(repr=False)

    def __iter__(self):
        yield self.mean
        yield self.stderr


def summarize(values) -> tuple[float, float]:
    """Mean (numpy pairwise summation, fixed order) and standard error."""
    v = np.asarray(values, dtype=float)
    mean = float(np.mean(v))
    stderr = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return mean, stderr


def sample_seed(seed: int, index: int) -> list[int]:
    """Per-sample seed material; independent of scheduling order."""
    return [int(seed), int(index)]


def mc_quenched_free_energy(kernel: RenewalKernel, chain: DisorderChain, beta: float, h: float, N: int,
                            samples: int, seed: int, workers=None, cap: int = DEFAULT_CAP) -> MCEstimate:
    """Average of ``log Z_N / N`` over independent disorder paths.

    Sample ``i`` draws its path from ``default_rng([seed, i])``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    _check_cap(N, cap)

    def one(i):
        path = sample_path(chain, N, seed=sample_seed(seed, i))
        return quenched_logZ(kernel, path, beta, h, cap).logZ / N

    values = np.array(map_ordered(one, range(samples), workers))
    mean, stderr = summarize(values)
    return MCEstimate(mean, stderr, values)
