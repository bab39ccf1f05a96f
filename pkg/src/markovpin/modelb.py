"""Model B: disorder chains whose switching rate vanishes with the system size.

For a base chain ``Q`` with invariant law ``mu`` the size-``N`` disorder
follows ``Q_N = I + N^{-gamma} (Q - I)``. The averaged quenched free energy
converges to ``sum_x mu(x) F(h + beta f(x))`` with ``F`` the homogeneous
free energy, which is non-analytic at every ``h = -beta x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._parallel import map_ordered
from .exceptions import ModelError
from .homogeneous import homogeneous_free_energy
from .model import DisorderChain, DisorderPath, RenewalKernel, build_chain, sample_states
from .quenched import DEFAULT_CAP, quenched_logZ, sample_seed, strip_constrained_logZ, summarize


@dataclass(frozen=True, eq=False)
class ScaledChainFamily:
    base: DisorderChain
    gamma: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ModelError(f"gamma must lie in (0, 1), got {self.gamma!r}")

    @property
    def mu(self) -> np.ndarray:
        return self.base.mu0

    @property
    def f(self) -> np.ndarray:
        return self.base.f


def scaled_family(labels, scores, Q, gamma: float) -> ScaledChainFamily:
    return ScaledChainFamily(build_chain(labels, scores, Q), float(gamma))


def two_state_family(gamma: float) -> ScaledChainFamily:
    """``{-1, +1}`` disorder flipping with probability ``N^{-gamma}`` per step."""
    return scaled_family((-1, 1), (-1.0, 1.0), [[0.0, 1.0], [1.0, 0.0]], gamma)


def scaled_matrix(family: ScaledChainFamily, N: int) -> np.ndarray:
    """``Q_N = I + N^{-gamma} (Q - I)``; rejects sizes where it would go negative."""
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N!r}")
    Q = np.asarray(family.base.Q)
    rate = float(N) ** (-family.gamma)
    if rate * float(np.max(1.0 - np.diag(Q))) > 1.0:
        raise ModelError(f"Q_N has negative entries at N={N}, gamma={family.gamma}")
    S = Q.shape[0]
    QN = np.eye(S) + rate * (Q - np.eye(S))
    return QN


def sample_scaled_path(family: ScaledChainFamily, N: int, seed=None, rng=None) -> DisorderPath:
    """Stationary path of length ``N`` under ``Q_N``."""
    if rng is None:
        rng = np.random.default_rng(seed)
    states = sample_states(scaled_matrix(family, N), family.mu, int(N), rng)
    return DisorderPath.from_omega(np.asarray(family.f)[states[1:]], states=states)


# ---------------------------------------------------------------------------
# limit free energy and phase diagram
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def _F(kernel: RenewalKernel, h: float) -> float:
    return homogeneous_free_energy(kernel, h).F


def _score_weights(family: ScaledChainFamily):
    """Distinct scores in increasing order with their total ``mu`` weight."""
    f = np.asarray(family.f)
    values = np.unique(f)
    weights = np.array([family.mu[f == v].sum() for v in values])
    return values, weights


@dataclass(frozen=True)
class LimitFreeEnergy:
    beta: float
    h: float
    F_limit: float
    branch: int  # number of scores x with h + beta x > 0


def limit_free_energy(family: ScaledChainFamily, kernel: RenewalKernel, beta: float, h: float) -> LimitFreeEnergy:
    """``sum_x mu(x) F(h + beta f(x))``.

    The branch tag counts the attractive scores; at a threshold
    ``h = -beta x`` the score ``x`` is not yet counted, so each closed
    threshold belongs to the piece on its left.
    """
    values, weights = _score_weights(family)
    total = 0.0
    branch = 0
    for v, wgt in zip(values, weights):
        reward = h + beta * v
        if reward > 0.0:
            branch += 1
            total += wgt * _F(kernel, float(reward))
    return LimitFreeEnergy(float(beta), float(h), float(total), branch)


def thresholds(family: ScaledChainFamily, beta: float) -> np.ndarray:
    """Non-analyticity points ``-beta x_n < ... < -beta x_1`` (merged if equal)."""
    values, _ = _score_weights(family)
    return np.unique(-beta * values)


@dataclass(frozen=True)
class PhaseDiagram:
    beta: float
    h: np.ndarray
    F_limit: np.ndarray
    branch: np.ndarray
    boundaries: np.ndarray  # grid h at which the branch tag changes (left end)

    def rows(self):
        for h, F, b in zip(self.h, self.F_limit, self.branch):
            yield float(h), float(F), int(b)


def phase_diagram(family: ScaledChainFamily, kernel: RenewalKernel, beta: float, h_grid) -> PhaseDiagram:
    """Tabulate ``F_limit`` and the branch tag along a sorted ``h`` grid.

    ``boundaries`` holds, for every change of branch between consecutive
    grid points, the largest grid value still on the left piece.
    """
    hs = np.asarray(h_grid, dtype=float)
    if hs.ndim != 1 or np.any(np.diff(hs) < 0.0):
        raise ValueError("h_grid must be a sorted 1-d sequence")
    lims = [limit_free_energy(family, kernel, beta, h) for h in hs]
    F = np.array([x.F_limit for x in lims])
    br = np.array([x.branch for x in lims], dtype=np.int64)
    change = np.flatnonzero(np.diff(br) != 0)
    return PhaseDiagram(float(beta), hs, F, br, hs[change])


# ---------------------------------------------------------------------------
# finite-N Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelBEstimate:
    N: int
    mean: float
    stderr: float
    mean_strips: float
    mean_strip_length: float
    values: np.ndarray = field(repr=False)
    strips: np.ndarray = field(repr=False)
    gaps: np.ndarray | None = field(default=None, repr=False)

    def __iter__(self):
        yield self.mean
        yield self.stderr


def _run(family, kernel, beta, h, N, samples, seed, workers, cap, constrained):
    if samples < 1:
        raise ValueError("samples must be >= 1")
    scaled_matrix(family, N)  # stochasticity check before any sampling

    def one(i):
        path = sample_scaled_path(family, N, seed=sample_seed(seed, i))
        free = quenched_logZ(kernel, path, beta, h, cap).logZ / N
        if not constrained:
            return free, None, path.n_strips
        con = strip_constrained_logZ(kernel, path, beta, h, cap).logZ / N
        return con, free - con, path.n_strips

    out = map_ordered(one, range(samples), workers)
    values = np.array([o[0] for o in out])
    strips = np.array([o[2] for o in out], dtype=float)
    gaps = np.array([o[1] for o in out]) if constrained else None
    mean, stderr = summarize(values)
    mean_b = float(np.mean(strips))
    return ModelBEstimate(int(N), mean, stderr, mean_b, N / (mean_b + 1.0), values, strips, gaps)


def finite_N_experiment(family: ScaledChainFamily, kernel: RenewalKernel, beta: float, h: float, N: int,
                        samples: int, seed: int, workers=None, cap: int = DEFAULT_CAP) -> ModelBEstimate:
    """Mean of ``F_N`` over ``samples`` stationary paths drawn from ``Q_N``.

    Also reports the mean number of complete strips ``B_N`` and the mean
    strip length ``N / (B_N + 1)``.
    """
    return _run(family, kernel, beta, h, N, samples, seed, workers, cap, constrained=False)


def constrained_experiment(family: ScaledChainFamily, kernel: RenewalKernel, beta: float, h: float, N: int,
                           samples: int, seed: int, workers=None, cap: int = DEFAULT_CAP) -> ModelBEstimate:
    """Mean of ``F^c_N``, the free energy pinned at every strip end.

    Uses the same disorder samples as :func:`finite_N_experiment` for a
    given seed; ``gaps`` holds ``F_N - F^c_N`` per sample.
    """
    return _run(family, kernel, beta, h, N, samples, seed, workers, cap, constrained=True)


def pinning_cost_bound(n_strips, N: int, alpha: float, slack: float = 0.5, const: float = 1.0) -> np.ndarray:
    """``B_N log(1 + C N^{2 + alpha + slack}) / N``, the per-site price of the strip pins."""
    return np.asarray(n_strips, dtype=float) * math.log1p(const * float(N) ** (2.0 + alpha + slack)) / N
