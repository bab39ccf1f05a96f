"""Brute-force references for small systems and closed-form special cases.

Nothing here touches the dynamic-programming or power-iteration code: sums
run over explicit renewal configurations and chain paths in plain float
arithmetic with compensated summation (``math.fsum``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import BudgetExceededError
from .model import DisorderChain, RenewalKernel


@dataclass(frozen=True)
class EnumerationBudget:
    max_N_renewal: int = 20
    max_N_paths: int = 12
    max_states: int = 3


DEFAULT_BUDGET = EnumerationBudget()


def _K(kernel: RenewalKernel, t: int) -> float:
    return float(kernel.probs[t - 1]) if 1 <= t <= kernel.support_cutoff else 0.0


def renewal_configurations(N: int, pins=()):
    """All ``0 < t_1 < ... < t_k = N`` (as tuples) containing ``pins``."""
    need = set(int(p) for p in pins)
    for mask in itertools.product((False, True), repeat=N - 1):
        times = tuple(i + 1 for i, keep in enumerate(mask) if keep) + (N,)
        if need and not need.issubset(times):
            continue
        yield times


def _check_renewal(N, budget):
    if N < 1 or N > budget.max_N_renewal:
        raise BudgetExceededError(f"N={N} outside the renewal enumeration budget 1..{budget.max_N_renewal}")


def enum_quenched_Z(kernel: RenewalKernel, omega, beta: float, h: float, pins=(),
                    budget: EnumerationBudget = DEFAULT_BUDGET) -> float:
    """``Z_{N,beta,h,omega}`` summed over all ``2^{N-1}`` renewal configurations.

    With ``pins`` only configurations visiting every pinned site count.
    """
    w = [float(x) for x in omega]
    N = len(w)
    _check_renewal(N, budget)
    terms = []
    for times in renewal_configurations(N, pins):
        weight = 1.0
        prev = 0
        for t in times:
            weight *= _K(kernel, t - prev) * math.exp(beta * w[t - 1] + h)
            prev = t
        terms.append(weight)
    return math.fsum(terms)


def enum_annealed_Z(kernel: RenewalKernel, chain: DisorderChain, beta: float, h: float, N: int,
                    budget: EnumerationBudget = DEFAULT_BUDGET) -> float:
    """``E Z_N`` summed over renewal configurations and chain states at the renewals.

    ``mu0(x_0) prod_i Q^{t_i - t_{i-1}}(x_{i-1}, x_i) K(t_i - t_{i-1}) exp(beta f(x_i) + h)``.
    """
    _check_renewal(N, budget)
    S = chain.n_states
    if S > budget.max_states:
        raise BudgetExceededError(f"{S} states exceed the enumeration budget {budget.max_states}")
    Q = np.asarray(chain.Q, dtype=float)
    powers = {t: np.linalg.matrix_power(Q, t).tolist() for t in range(1, N + 1)}
    mu0 = [float(x) for x in chain.mu0]
    boost = [math.exp(beta * float(fx) + h) for fx in chain.f]
    terms = []
    for times in renewal_configurations(N):
        gaps = [b - a for a, b in zip((0,) + times[:-1], times)]
        kprod = math.prod(_K(kernel, g) for g in gaps)
        for xs in itertools.product(range(S), repeat=len(times) + 1):
            weight = mu0[xs[0]] * kprod
            for i, g in enumerate(gaps):
                weight *= powers[g][xs[i]][xs[i + 1]] * boost[xs[i + 1]]
            terms.append(weight)
    return math.fsum(terms)


def enum_disorder_average(kernel: RenewalKernel, chain: DisorderChain, beta: float, h: float, N: int,
                          functional: str = "Z", budget: EnumerationBudget = DEFAULT_BUDGET) -> float:
    """Exact disorder average of ``Z_N`` or of ``log Z_N / N``.

    Enumerates all ``|Sigma|^{N+1}`` chain paths ``x_0..x_N`` weighted by
    ``mu0(x_0) prod Q(x_{n-1}, x_n)`` and evaluates the quenched partition
    function of ``omega_n = f(x_n)`` by :func:`enum_quenched_Z`.
    """
    if functional not in ("Z", "logZ/N"):
        raise ValueError("functional must be 'Z' or 'logZ/N'")
    S = chain.n_states
    if N < 1 or N > budget.max_N_paths:
        raise BudgetExceededError(f"N={N} outside the path enumeration budget 1..{budget.max_N_paths}")
    if S > budget.max_states:
        raise BudgetExceededError(f"{S} states exceed the enumeration budget {budget.max_states}")
    Q = np.asarray(chain.Q, dtype=float).tolist()
    mu0 = [float(x) for x in chain.mu0]
    f = [float(x) for x in chain.f]
    cache: dict[tuple, float] = {}
    terms = []
    for xs in itertools.product(range(S), repeat=N + 1):
        prob = mu0[xs[0]]
        for a, b in zip(xs[:-1], xs[1:]):
            prob *= Q[a][b]
        if prob == 0.0:
            continue
        omega = tuple(f[x] for x in xs[1:])
        if omega not in cache:
            cache[omega] = enum_quenched_Z(kernel, omega, beta, h, budget=budget)
        z = cache[omega]
        terms.append(prob * (z if functional == "Z" else math.log(z) / N))
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def two_state_p(kernel: RenewalKernel, eps: float) -> float:
    """``p(eps) = sum_t K(t) (1 + (2 eps - 1)^t) / 2`` by direct summation."""
    t = np.arange(1, kernel.support_cutoff + 1)
    return math.fsum(kernel.probs * (1.0 + (2.0 * eps - 1.0) ** t) / 2.0)


def two_state_critical_point(kernel: RenewalKernel, eps: float, beta: float) -> float:
    """Annealed critical point of the symmetric ``{-1, +1}`` chain."""
    p = two_state_p(kernel, eps)
    c = math.cosh(beta)
    return -math.log(p * c + math.sqrt(p * p * c * c - 2.0 * p + 1.0))


def two_state_lambda(kernel: RenewalKernel, eps: float, beta: float, h: float = 0.0, b: float = 0.0) -> float:
    """Largest root of the characteristic polynomial of the 2x2 series.

    With ``a = sum K(t) e^{-bt} (1 + r^t)/2``, ``c = sum K(t) e^{-bt} (1 - r^t)/2``
    and ``r = 2 eps - 1`` the matrix is ``e^h [[e^-beta a, e^beta c], [e^-beta c, e^beta a]]``,
    with trace ``2 a cosh(beta) e^h`` and determinant ``(a^2 - c^2) e^{2h}``.
    """
    t = np.arange(1, kernel.support_cutoff + 1)
    w = kernel.probs * np.exp(-b * t)
    r = (2.0 * eps - 1.0) ** t
    a = math.fsum(w * (1.0 + r) / 2.0)
    c = math.fsum(w * (1.0 - r) / 2.0)
    ch = math.cosh(beta)
    return math.exp(h) * (a * ch + math.sqrt(a * a * ch * ch - a * a + c * c))


def two_state_free_energy(kernel: RenewalKernel, eps: float, beta: float, h: float) -> float:
    """Scalar bisection of ``two_state_lambda(b) = 1`` (zero when delocalized)."""
    if two_state_lambda(kernel, eps, beta, h, 0.0) <= 1.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while two_state_lambda(kernel, eps, beta, h, hi) > 1.0:
        lo, hi = hi, 2.0 * hi
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid
        if two_state_lambda(kernel, eps, beta, h, mid) > 1.0:
            lo = mid
        else:
            hi = mid


def moving_average_lambda(kernel: RenewalKernel, a0: float, a1: float, beta: float) -> float:
    """Perron eigenvalue at ``b = h = 0`` for the order-one ``+-1`` moving average."""
    c0, c1 = math.cosh(a0 * beta), math.cosh(a1 * beta)
    k1 = float(kernel.probs[0])
    return c0 * c1 * (1.0 + k1 * (math.cosh((a0 + a1) * beta) / (c0 * c1) - 1.0))
