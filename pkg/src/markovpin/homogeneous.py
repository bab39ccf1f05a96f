"""Homogeneous pinning: free energy ``F(h)`` and constrained partition functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import CapExceededError, ConvergenceError
from .model import RenewalKernel

DEFAULT_CAP = 20_000
FD_STEP = 1e-5


@dataclass(frozen=True)
class HomogeneousSolution:
    h: float
    F: float
    implicit_residual: float


def _laplace(kernel: RenewalKernel, F: float) -> float:
    n = np.arange(1, kernel.support_cutoff + 1)
    return float(np.dot(kernel.probs, np.exp(-F * n)))


def homogeneous_free_energy(kernel: RenewalKernel, h: float) -> HomogeneousSolution:
    """Free energy of the homogeneous model with reward ``h``.

    Zero for ``h <= 0``; otherwise the root of
    ``sum_n K(n) exp(-F n) = exp(-h)``, bisected to float resolution on
    ``[0, h + log(1/K(1)) + 1]``. The residual of that equation is
    returned alongside.
    """
    h = float(h)
    if h <= 0.0:
        return HomogeneousSolution(h, 0.0, 0.0)
    target = -h

    def g(F):
        return math.log(_laplace(kernel, F)) - target

    lo, hi = 0.0, h + math.log(1.0 / kernel.probs[0]) + 1.0
    if not (g(lo) > 0.0 and g(hi) < 0.0):
        raise ConvergenceError(f"homogeneous free energy not bracketed on [0, {hi}] for h={h}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    F = lo if abs(g(lo)) <= abs(g(hi)) else hi
    return HomogeneousSolution(h, F, _laplace(kernel, F) - math.exp(-h))


def free_energy_curve(kernel: RenewalKernel, hs) -> np.ndarray:
    return np.array([homogeneous_free_energy(kernel, h).F for h in np.atleast_1d(hs)])


def _window(kernel: RenewalKernel, n_sites: int) -> np.ndarray:
    # only K(1..n_sites) can be reached inside a system of n_sites
    m = min(kernel.support_cutoff, n_sites)
    out = np.zeros(m + 1)
    out[1:] = kernel.probs[:m]
    return out


def homog_log_partitions(kernel: RenewalKernel, h: float, l: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """``log Z^c_{n,h}`` for every ``n = 0..l`` from one renewal recursion."""
    if int(l) != l or l < 1:
        raise ValueError(f"l must be a positive integer, got {l!r}")
    if l > cap:
        raise CapExceededError(f"l={l} exceeds the partition-function cap {cap}")
    return _kernels.renewal_logz(_window(kernel, int(l)), np.full(int(l), float(h)))


def exact_homog_partition(kernel: RenewalKernel, h: float, l: int, cap: int = DEFAULT_CAP) -> float:
    """``log Z^c_{l,h}``: polymer pinned at ``0`` and ``l`` with uniform reward ``h``."""
    return float(homog_log_partitions(kernel, h, l, cap)[int(l)])


def contact_fraction(kernel: RenewalKernel, h: float, l: int, step: float = FD_STEP,
                     cap: int = DEFAULT_CAP) -> float:
    """Contact density ``d/dh log Z^c_{l,h} / l`` by a centred difference."""
    if l < 2:
        raise ValueError("contact fraction needs l >= 2")
    up = exact_homog_partition(kernel, h + step, l, cap)
    down = exact_homog_partition(kernel, h - step, l, cap)
    return float(np.clip((up - down) / (2.0 * step * l), 0.0, 1.0))
