"""Annealed free energy of Model A through a Perron-Frobenius eigenvalue.

For a renewal kernel ``K`` and disorder chain ``(Q, f)`` the positive
matrix

    A(b, beta, h) = sum_{t >= 1} K(t) Q^t diag(exp(beta f + h)) exp(-b t)

has Perron-Frobenius eigenvalue ``lambda(b, beta, h)``. The annealed free
energy ``F_a`` solves ``lambda(F_a, beta, h) = 1`` when
``lambda(0, beta, h) > 1`` and is zero otherwise; the annealed critical
point is ``-log lambda(0, beta, 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .exceptions import CapExceededError, ConvergenceError, ModelError, TailBoundError
from .model import DisorderChain, RenewalKernel

DEFAULT_SPLIT = 512
TAIL_TOL = 1e-15
PERRON_TOL = 1e-13
PERRON_MAXITER = 100_000
_PERIPHERAL = 1e-12
_P_MAX_ENTRIES = 100_000_000


# ---------------------------------------------------------------------------
# Powers of Q with a periodic-limit closure
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QPowers:
    """``Q^t`` for ``t = 0..split`` plus a rule for ``t > split``.

    An irreducible chain of period ``d`` has ``d`` eigenvalues of modulus
    one; all others are at most ``rho`` in modulus. For ``t > split`` the
    power ``Q^t`` is replaced by the stored power with the same residue
    modulo ``d`` among the last ``d`` stored ones, an error of order
    ``rho ** (split - d + 1)``. Aperiodic chains have ``d = 1`` (stationary
    limit); for permutation-like chains (``rho = 0``) the rule is exact.
    """

    stack: np.ndarray = field(repr=False)
    split: int
    period: int
    rho: float

    def index(self, t):
        """Row of ``stack`` standing in for ``Q^t``."""
        t = np.asarray(t, dtype=np.int64)
        base = self.split - self.period + 1
        wrapped = base + np.mod(t - base, self.period)
        return np.where(t <= self.split, t, wrapped)

    def mixing_error(self) -> float:
        """Entrywise bound on ``|Q^t - stack[index(t)]|`` for ``t > split``."""
        return 2.0 * self.rho ** (self.split - self.period + 1)


def _spectrum(Q):
    moduli = np.sort(np.abs(np.linalg.eigvals(Q)))[::-1]
    period = int(np.count_nonzero(moduli > 1.0 - _PERIPHERAL))
    rest = moduli[period:]
    rho = float(rest[0]) if rest.size else 0.0
    return max(period, 1), min(rho, 1.0)


@lru_cache(maxsize=64)
def chain_powers(chain: DisorderChain, kernel: RenewalKernel, split: int | None = None) -> QPowers:
    """Cached :class:`QPowers` for ``chain`` up to the kernel support.

    With ``split=None`` the split starts at 512 and doubles until the
    neglected mixing error (weighted by the kernel tail) drops below
    ``TAIL_TOL``, or until it reaches the kernel support where the closure
    is not needed at all. An explicit split is used as given.
    """
    Q = np.asarray(chain.Q)
    T = kernel.support_cutoff
    period, rho = _spectrum(Q)
    if split is None:
        split = min(DEFAULT_SPLIT, T)
        while split < T and 2.0 * rho ** (split - period + 1) * kernel.tail[split] > TAIL_TOL:
            split = min(2 * split, T)
    split = int(min(max(split, period), T))
    S = Q.shape[0]
    stack = np.empty((split + 1, S, S))
    stack[0] = np.eye(S)
    for t in range(1, split + 1):
        stack[t] = stack[t - 1] @ Q
    stack.setflags(write=False)
    if split >= T:
        rho = 0.0
    return QPowers(stack, split, period, rho)


def _class_weights(kernel: RenewalKernel, powers: QPowers, b: float) -> np.ndarray:
    """Weights ``w[t']`` with ``sum_t K(t) e^{-bt} Q^t = sum_t' w[t'] stack[t']``."""
    T = kernel.support_cutoff
    t = np.arange(1, T + 1)
    w = kernel.probs * np.exp(-b * t) if b != 0.0 else np.array(kernel.probs)
    out = np.zeros(powers.split + 1)
    out[1:powers.split + 1] = w[:powers.split]
    if T > powers.split:
        idx = powers.index(t[powers.split:])
        out += np.bincount(idx, weights=w[powers.split:], minlength=powers.split + 1)
    return out


# ---------------------------------------------------------------------------
# M and A
# ---------------------------------------------------------------------------


def _tilt(chain: DisorderChain, beta: float, h: float) -> np.ndarray:
    return np.exp(beta * np.asarray(chain.f) + h)


def build_M(kernel: RenewalKernel, chain: DisorderChain, beta: float, h: float, t: int) -> np.ndarray:
    """``M(t)(x, y) = K(t) Q^t(x, y) exp(beta f(y) + h)`` with exact ``Q^t``."""
    if int(t) != t or not 1 <= t <= kernel.support_cutoff:
        raise ValueError(f"t must be an integer in 1..{kernel.support_cutoff}, got {t!r}")
    Qt = np.linalg.matrix_power(np.asarray(chain.Q), int(t))
    return kernel.probs[int(t) - 1] * Qt * _tilt(chain, beta, h)[None, :]


@dataclass(frozen=True, eq=False)
class TiltedSeries:
    kernel: RenewalKernel = field(repr=False)
    chain: DisorderChain = field(repr=False)
    beta: float
    h: float
    b: float
    A: np.ndarray
    tail_bound: float
    split: int


def build_A(kernel: RenewalKernel, chain: DisorderChain, beta: float, h: float, b: float = 0.0,
            split: int | None = None, tail_tol: float = 1e-12) -> TiltedSeries:
    """Sum the series ``A(b, beta, h)``.

    Terms with ``t <= split`` use exact powers of ``Q``; later ones use the
    periodic limit of :class:`QPowers` against exact kernel weights.
    ``tail_bound`` bounds the entrywise error of that closure; a bound
    above ``tail_tol`` times the largest entry raises
    :class:`TailBoundError` (pass a larger ``split``).
    """
    if not b >= 0.0:
        raise ValueError(f"b must be >= 0, got {b!r}")
    powers = chain_powers(chain, kernel, split)
    w = _class_weights(kernel, powers, b)
    tilt = _tilt(chain, beta, h)
    A = np.tensordot(w, powers.stack, axes=1) * tilt[None, :]
    T = kernel.support_cutoff
    if T > powers.split:
        t = np.arange(powers.split + 1, T + 1)
        neglected = float(np.dot(kernel.probs[powers.split:], np.exp(-b * t)))
    else:
        neglected = 0.0
    bound = powers.mixing_error() * neglected * float(tilt.max())
    if bound > tail_tol * float(A.max()):
        raise TailBoundError(
            f"series closure error {bound:.3g} exceeds {tail_tol:.1g}; increase split (now {powers.split})"
        )
    return TiltedSeries(kernel, chain, float(beta), float(h), float(b), A, bound, powers.split)


# ---------------------------------------------------------------------------
# Perron-Frobenius pair
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerronData:
    lam: float
    xi: np.ndarray
    residual: float
    iterations: int = 0

    @property
    def ratio_bounds(self) -> tuple[float, float]:
        """``(c, C) = (min xi / max xi, max xi / min xi)``."""
        lo, hi = float(self.xi.min()), float(self.xi.max())
        return lo / hi, hi / lo


def perron(A, x0=None, tol: float = PERRON_TOL, maxiter: int = PERRON_MAXITER) -> PerronData:
    """Perron-Frobenius eigenvalue and eigenvector of a positive matrix.

    Power iteration from the all-ones vector (or ``x0``) until successive
    Rayleigh quotients agree and the residual ``|A xi - lam xi|_inf`` falls
    below ``tol * max(1, lam)``. ``xi`` is normalised to max entry one.
    """
    A = np.ascontiguousarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ModelError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(A > 0.0) or not np.all(np.isfinite(A)):
        raise ModelError("Perron iteration needs a strictly positive finite matrix")
    start = np.ones(A.shape[0]) if x0 is None else np.array(x0, dtype=float)
    lam, xi, res, it = _kernels.power_iterate(A, start, tol, maxiter)
    if it >= maxiter:
        raise ConvergenceError(f"power iteration did not converge in {maxiter} steps (residual {res:.3g})")
    xi = np.asarray(xi) / np.max(xi)
    res = float(np.abs(A @ xi - lam * xi).max())
    return PerronData(float(lam), xi, res, int(it))


def _uniform_perron(kernel, chain, beta, b):
    """Exact pair when ``beta f`` is constant: ``A`` then has equal row sums."""
    g = beta * np.asarray(chain.f)
    if g.max() != g.min():
        return None
    t = np.arange(1, kernel.support_cutoff + 1)
    w = kernel.probs * np.exp(-b * t) if b != 0.0 else kernel.probs
    return PerronData(math.exp(g[0]) * math.fsum(w), np.ones(chain.n_states), 0.0, 0)


class _LambdaCurve:
    """``b -> PerronData`` of ``A(b, beta, 0)``, warm-starting successive calls."""

    def __init__(self, kernel, chain, beta, split=None):
        self.kernel, self.chain, self.beta, self.split = kernel, chain, beta, split
        self._x = None

    def __call__(self, b):
        exact = _uniform_perron(self.kernel, self.chain, self.beta, b)
        if exact is not None:
            return exact
        A = build_A(self.kernel, self.chain, self.beta, 0.0, b, split=self.split).A
        pd = perron(A, self._x)
        self._x = pd.xi
        return pd


def log_lambda(kernel, chain, beta, h, b=0.0, split=None) -> float:
    """``log lambda(b, beta, h) = h + log lambda(b, beta, 0)``."""
    return h + math.log(_LambdaCurve(kernel, chain, beta, split)(b).lam)


# ---------------------------------------------------------------------------
# Free energy and critical curve
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AnnealedSolution:
    kernel: RenewalKernel = field(repr=False)
    chain: DisorderChain = field(repr=False)
    beta: float
    h: float
    F_a: float
    h_c_a: float
    lambda0: float
    perron_at_root: PerronData = field(repr=False)
    regime: str
    split: int | None = field(default=None, repr=False)


def _regime(log_lam0, h):
    tol = 4 * np.finfo(float).eps * max(1.0, abs(h))
    if log_lam0 > tol:
        return "localized"
    if log_lam0 < -tol:
        return "delocalized"
    return "critical"


def solve_free_energy(kernel: RenewalKernel, chain: DisorderChain, beta: float, h: float,
                      split: int | None = None) -> AnnealedSolution:
    """Annealed free energy ``F_a(beta, h)`` by bisection on ``b``.

    ``lambda(b, beta, h)`` is continuous and strictly decreasing in ``b``;
    the root is bracketed by doubling and then bisected down to float
    resolution.
    """
    curve = _LambdaCurve(kernel, chain, beta, split)
    pd0 = curve(0.0)
    log_lam0 = h + math.log(pd0.lam)
    regime = _regime(log_lam0, h)
    h_c = -math.log(pd0.lam)
    scale = math.exp(h)
    if regime != "localized":
        pd = PerronData(pd0.lam * scale, pd0.xi, pd0.residual * scale, pd0.iterations)
        return AnnealedSolution(kernel, chain, float(beta), float(h), 0.0, h_c, math.exp(log_lam0),
                                pd, regime, split)

    def g(b):
        return h + math.log(curve(b).lam)

    lo, hi = 0.0, 1.0
    while g(hi) >= 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 2.0 ** 10:
            raise ConvergenceError(f"could not bracket the annealed free energy at beta={beta}, h={h}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= 1e-16 + 2 * np.finfo(float).eps * hi:
            break
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    F = 0.5 * (lo + hi)
    pd = curve(F)
    root = PerronData(pd.lam * scale, pd.xi, pd.residual * scale, pd.iterations)
    return AnnealedSolution(kernel, chain, float(beta), float(h), F, h_c, math.exp(log_lam0),
                            root, regime, split)


def annealed_lambdas(kernel: RenewalKernel, chain: DisorderChain, betas, split: int | None = None) -> np.ndarray:
    """``lambda(beta) = lambda(0, beta, 0)`` along a grid, warm-starting each solve."""
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    if np.any(betas < 0.0):
        raise ValueError("beta must be nonnegative")
    out = np.empty(betas.size)
    x = None
    for i, beta in enumerate(betas):
        pd = _uniform_perron(kernel, chain, beta, 0.0)
        if pd is None:
            pd = perron(build_A(kernel, chain, beta, 0.0, 0.0, split=split).A, x)
            x = pd.xi
        out[i] = pd.lam
    return out


def critical_curve(kernel: RenewalKernel, chain: DisorderChain, betas, split: int | None = None) -> np.ndarray:
    """``h_c^a(beta) = -log lambda(0, beta, 0)`` for each ``beta``."""
    return -np.log(annealed_lambdas(kernel, chain, betas, split))


# ---------------------------------------------------------------------------
# Markov renewal kernel at the root
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SemiMarkovKernel:
    """``p[x, y, t-1]``: jump ``x -> y`` after ``t`` steps, ``t = 1..T``."""

    p: np.ndarray = field(repr=False)
    defect: np.ndarray
    initial: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        return 1.0 - self.defect

    def steps(self, n_max: int) -> np.ndarray:
        """``W[t] = p[:, :, t-1]`` for ``t = 0..n_max`` (``W[0] = 0``)."""
        S, _, T = self.p.shape
        W = np.zeros((n_max + 1, S, S))
        m = min(n_max, T)
        W[1:m + 1] = np.moveaxis(self.p[:, :, :m], 2, 0)
        return W


def tilted_kernel(solution: AnnealedSolution, t_max: int | None = None, tol: float = 1e-10) -> SemiMarkovKernel:
    """``p(x, y, t) = M(t)(x, y) exp(-F_a t) xi(y) / xi(x)`` at the solved point.

    Rows sum to one in the localized and critical regimes and to
    ``lambda(0, beta, h) < 1`` in the delocalized one. Raises
    :class:`ConvergenceError` if a row sum exceeds one by more than ``tol``.
    """
    kernel, chain = solution.kernel, solution.chain
    T = kernel.support_cutoff if t_max is None else min(int(t_max), kernel.support_cutoff)
    S = chain.n_states
    if S * S * T > _P_MAX_ENTRIES:
        raise CapExceededError(f"semi-Markov kernel would hold {S * S * T} entries; pass a smaller t_max")
    powers = chain_powers(chain, kernel, solution.split)
    t = np.arange(1, T + 1)
    w = kernel.probs[:T] * np.exp(-solution.F_a * t)
    Qt = powers.stack[powers.index(t)]  # (T, S, S)
    xi = solution.perron_at_root.xi
    tilt = _tilt(chain, solution.beta, solution.h) * xi
    p = w[:, None, None] * Qt * tilt[None, None, :] / xi[None, :, None]
    p = np.ascontiguousarray(np.moveaxis(p, 0, 2))
    sums = p.sum(axis=(1, 2))
    defect = 1.0 - sums
    if np.any(defect < -tol):
        raise ConvergenceError(f"tilted kernel row sums exceed one: {sums}")
    return SemiMarkovKernel(p, defect, np.array(chain.mu0))


def renewal_mass(kernel: SemiMarkovKernel, N: int, cap: int = 20_000) -> float:
    """``P(N in tau_bar)`` for the Markov renewal process started from ``initial``.

    Dynamic programme ``u(n, y) = sum_{m<n} sum_x u(m, x) p(x, y, n - m)``,
    ``O(N^2 S^2)``.
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    if N > cap:
        raise CapExceededError(f"N={N} exceeds the renewal-mass cap {cap}")
    W = kernel.steps(int(N))
    out = _kernels.matrix_renewal_logz(W, np.ones(W.shape[1]), np.asarray(kernel.initial, dtype=float))
    return float(math.exp(out[int(N)]))
