"""Renewal kernels, finite-state disorder chains and realised disorder paths."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .exceptions import ModelError

DEFAULT_SUPPORT = 100_000
_DENSE_STATIONARY_MAX = 64


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RenewalKernel:
    """Truncated inter-arrival law ``K(n)``, ``n = 1..support_cutoff``.

    ``probs[n-1] = K(n)`` and ``tail[n] = sum_{l > n} K(l)`` for
    ``n = 0..support_cutoff``. Use :func:`build_kernel` (or
    :meth:`from_probs` for hand-made laws) rather than the constructor.
    """

    alpha: float
    variant: str
    rho: float
    support_cutoff: int
    probs: np.ndarray = field(repr=False)
    tail: np.ndarray = field(repr=False)

    @classmethod
    def from_probs(cls, probs, alpha=float("nan"), variant="table", rho=0.0):
        p = np.asarray(probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ModelError("kernel probabilities must be a non-empty vector")
        if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
            raise ModelError("kernel probabilities must be finite and strictly positive")
        if abs(math.fsum(p) - 1.0) > 1e-14:
            raise ModelError(f"kernel is not normalised: sum = {math.fsum(p)!r}")
        tail = np.zeros(p.size + 1)
        tail[:-1] = np.cumsum(p[::-1])[::-1]
        return cls(alpha, variant, rho, int(p.size), _frozen(p), _frozen(tail))

    @property
    def padded(self) -> np.ndarray:
        """``K`` indexed from 0 (``padded[0] = 0``), as used by the DP kernels."""
        out = np.zeros(self.support_cutoff + 1)
        out[1:] = self.probs
        return out

    def K(self, n):
        """``K(n)`` with zero outside ``1..support_cutoff``."""
        n = np.asarray(n)
        inside = (n >= 1) & (n <= self.support_cutoff)
        idx = np.where(inside, n - 1, 0)
        return np.where(inside, self.probs[idx], 0.0)

    @property
    def mean(self) -> float:
        n = np.arange(1, self.support_cutoff + 1)
        return float(np.dot(n, self.probs))


def slowly_varying(variant: str, n: np.ndarray, rho: float = 0.0, table=None) -> np.ndarray:
    if variant == "constant":
        return np.ones_like(n, dtype=float)
    if variant == "log-power":
        return np.log1p(n) ** rho
    if variant == "table":
        if table is None:
            raise ModelError("slowly varying variant 'table' needs a table of values")
        tab = np.asarray(table, dtype=float)
        if tab.shape != n.shape:
            raise ModelError(f"slowly varying table has {tab.size} entries, expected {n.size}")
        return tab
    raise ModelError(f"unknown slowly varying variant {variant!r}")


def build_kernel(alpha: float, variant: str = "constant", T_K: int = DEFAULT_SUPPORT,
                 rho: float = 0.0, table=None) -> RenewalKernel:
    """Build ``K(n) ∝ L(n) n^{-(1+alpha)}`` on ``1..T_K``, normalised to one.

    Parameters
    ----------
    alpha : float
        Tail exponent, ``alpha >= 0``.
    variant : {'constant', 'log-power', 'table'}
        Slowly varying prefactor ``L``: a constant, ``log(1+n)**rho``, or
        the user values in ``table`` (one per ``n``).
    T_K : int
        Largest inter-arrival time represented.

    Examples
    --------
    >>> build_kernel(1.0, T_K=2).probs
    array([0.8, 0.2])
    """
    if not (alpha >= 0.0 and math.isfinite(alpha)):
        raise ModelError(f"alpha must be a finite number >= 0, got {alpha!r}")
    if int(T_K) != T_K or T_K < 2:
        raise ModelError(f"support cutoff T_K must be an integer >= 2, got {T_K!r}")
    T_K = int(T_K)
    n = np.arange(1, T_K + 1, dtype=float)
    L = slowly_varying(variant, n, rho, table)
    if np.any(~np.isfinite(L)) or np.any(L <= 0.0):
        raise ModelError("slowly varying function must be finite and positive on 1..T_K")
    w = L * np.exp(-(1.0 + alpha) * np.log(n))
    total = math.fsum(w)
    if not (math.isfinite(total) and total > 0.0):
        raise ModelError(f"kernel normalisation is not finite: {total!r}")
    probs = w / total
    # one correction pass so the float sum is 1 to within a couple of ulps
    probs /= math.fsum(probs)
    k = RenewalKernel.from_probs(probs, alpha=float(alpha), variant=variant, rho=float(rho))
    return k


@dataclass(frozen=True, eq=False)
class DisorderChain:
    """Irreducible Markov chain on a finite state space with scores ``f``.

    The disorder is ``omega_n = f(X_n)``. ``mu0`` is the invariant law.
    """

    labels: tuple
    f: np.ndarray
    Q: np.ndarray
    mu0: np.ndarray

    @property
    def n_states(self) -> int:
        return len(self.labels)

    @property
    def mean_score(self) -> float:
        return float(np.dot(self.mu0, self.f))

    @property
    def is_centered(self) -> bool:
        return abs(self.mean_score) <= 1e-12

    def centered(self) -> "DisorderChain":
        """Copy with ``f`` shifted to have zero mean under ``mu0``."""
        return DisorderChain(self.labels, _frozen(self.f - self.mean_score), self.Q, self.mu0)


def check_stochastic(Q, tol: float = 1e-14) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] == 0:
        raise ModelError(f"transition matrix must be square and non-empty, got shape {Q.shape}")
    if not np.all(np.isfinite(Q)) or np.any(Q < 0.0):
        raise ModelError("transition matrix entries must be finite and nonnegative")
    sums = Q.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        i = int(bad[0])
        raise ModelError(f"row {i} of the transition matrix sums to {sums[i]!r}, not 1")
    return Q


def is_irreducible(Q) -> bool:
    """Reachability closure of the transition graph is complete."""
    Q = np.asarray(Q, dtype=float)
    S = Q.shape[0]
    R = (np.asarray(Q) > 0.0) | np.eye(S, dtype=bool)
    for _ in range(max(1, math.ceil(math.log2(S)) + 1)):
        R_next = (R.astype(np.int64) @ R.astype(np.int64)) > 0
        if np.array_equal(R_next, R):
            break
        R = R_next
    return bool(R.all())


def stationary_distribution(Q, tol: float = 1e-15, maxiter: int = 1_000_000) -> np.ndarray:
    """Invariant law of an irreducible stochastic matrix.

    Dense linear solve up to 64 states; above that, power iteration on the
    lazy chain ``(I + Q)/2``, which has the same invariant law and is
    aperiodic even when ``Q`` is not.
    """
    Q = np.asarray(Q, dtype=float)
    S = Q.shape[0]
    if S <= _DENSE_STATIONARY_MAX:
        M = Q.T - np.eye(S)
        M[-1, :] = 1.0
        rhs = np.zeros(S)
        rhs[-1] = 1.0
        mu = np.linalg.solve(M, rhs)
    else:
        lazy = 0.5 * (np.eye(S) + Q)
        mu = np.full(S, 1.0 / S)
        for _ in range(maxiter):
            nxt = mu @ lazy
            if np.abs(nxt - mu).max() < tol:
                mu = nxt
                break
            mu = nxt
    mu = np.clip(mu, 0.0, None)
    return mu / mu.sum()


def build_chain(labels: Sequence, scores, Q, center: bool = False) -> DisorderChain:
    """Validate ``Q`` and attach the invariant law.

    Raises :class:`ModelError` on non-stochastic rows or a reducible
    transition graph. With ``center=True`` the scores are shifted to zero
    mean under the invariant law.
    """
    Q = check_stochastic(Q)
    labels = tuple(labels)
    f = np.asarray(scores, dtype=float)
    if len(labels) != Q.shape[0] or f.shape != (Q.shape[0],):
        raise ModelError(
            f"{len(labels)} labels and {f.size} scores for a {Q.shape[0]}-state transition matrix"
        )
    if not np.all(np.isfinite(f)):
        raise ModelError("scores must be finite")
    if not is_irreducible(Q):
        raise ModelError("transition matrix is reducible")
    mu0 = stationary_distribution(Q)
    if np.any(mu0 <= 0.0) or np.abs(mu0 @ Q - mu0).max() > 1e-12:
        raise ModelError("could not compute a positive invariant distribution")
    chain = DisorderChain(labels, _frozen(f), _frozen(Q), _frozen(mu0))
    return chain.centered() if center else chain


def two_state_chain(eps: float) -> DisorderChain:
    """The ``{-1, +1}`` chain that stays put with probability ``eps``."""
    Q = [[eps, 1.0 - eps], [1.0 - eps, eps]]
    return build_chain((-1, 1), (-1.0, 1.0), Q)


def build_moving_average_chain(weights, alphabet, probs=None, center: bool = False) -> DisorderChain:
    """Markov chain of windows ``(e_{n-q}, ..., e_n)`` of an i.i.d. sequence.

    The score of a window ``(x_0, ..., x_q)`` is
    ``a_0 x_q + a_1 x_{q-1} + ... + a_q x_0``, so that ``f(X_n)`` is the
    order-``q`` moving average with coefficients ``weights``. States are
    listed in lexicographic order of ``alphabet``.
    """
    a = np.asarray(weights, dtype=float)
    alphabet = list(alphabet)
    if a.ndim != 1 or a.size == 0:
        raise ModelError("moving average needs at least one weight")
    if len(alphabet) == 0:
        raise ModelError("innovation alphabet is empty")
    if probs is None:
        probs = np.full(len(alphabet), 1.0 / len(alphabet))
    p = np.asarray(probs, dtype=float)
    if p.shape != (len(alphabet),) or np.any(p < 0.0) or abs(p.sum() - 1.0) > 1e-14:
        raise ModelError("innovation probabilities must be a distribution over the alphabet")
    q = a.size - 1
    states = list(itertools.product(range(len(alphabet)), repeat=q + 1))
    index = {s: i for i, s in enumerate(states)}
    S = len(states)
    Q = np.zeros((S, S))
    for i, s in enumerate(states):
        for k in range(len(alphabet)):
            Q[i, index[s[1:] + (k,)]] += p[k]
    values = np.asarray(alphabet, dtype=float)
    # window (x_0..x_q): a_0 pairs with the newest entry x_q
    f = np.array([np.dot(a, values[list(s)][::-1]) for s in states])
    labels = [tuple(alphabet[k] for k in s) for s in states]
    return build_chain(labels, f, Q, center=center)


@dataclass(frozen=True, eq=False)
class DisorderPath:
    """One realisation ``omega_1..omega_N`` and its strip decomposition.

    ``strip_ends = (L_0 = 0, L_1, ..., L_{B_N})`` are the last sites of the
    complete constant runs; the final run is never complete because
    ``omega_{N+1}`` is not observed.
    """

    omega: np.ndarray
    strip_ends: np.ndarray
    strip_lengths: np.ndarray
    states: np.ndarray | None = None

    @property
    def N(self) -> int:
        return int(self.omega.size)

    @property
    def n_strips(self) -> int:
        return int(self.strip_lengths.size)

    @classmethod
    def from_omega(cls, omega, states=None) -> "DisorderPath":
        omega = _frozen(omega)
        ends, lengths, _ = strip_decompose(omega)
        st = None if states is None else _frozen(states, dtype=np.int64)
        return cls(omega, _frozen(ends, np.int64), _frozen(lengths, np.int64), st)

    def strip_values(self) -> np.ndarray:
        """Value of omega on each strip, including the final incomplete one."""
        starts = np.asarray(self.strip_ends)  # strip k starts at L_{k-1} + 1
        return self.omega[starts]


def strip_decompose(omega):
    """Endpoints ``L_k``, lengths ``l_k`` and count ``B_N`` of constant runs.

    ``L_{k+1} = inf{n > L_k : omega_n != omega_{L_k + 1}} - 1``. Only runs
    whose end is witnessed inside the sample count as complete.

    >>> strip_decompose([1, 1, -1])
    (array([0, 2]), array([2]), 1)
    """
    w = np.asarray(omega)
    if w.ndim != 1 or w.size == 0:
        raise ModelError("omega must be a non-empty vector")
    change = np.flatnonzero(w[1:] != w[:-1]) + 1  # 1-based sites n with omega_n != omega_{n+1}
    ends = np.concatenate(([0], change)).astype(np.int64)
    return ends, np.diff(ends), int(change.size)


def _cumulative_rows(P):
    P = np.atleast_2d(np.asarray(P, dtype=float))
    cum = np.cumsum(P, axis=1)
    for r in range(P.shape[0]):
        last = int(np.flatnonzero(P[r] > 0.0)[-1])
        cum[r, last:] = 1.0
    return np.minimum(cum, 1.0)


def sample_states(Q, mu, n_steps: int, rng: np.random.Generator) -> np.ndarray:
    """``X_0 ~ mu`` then ``n_steps`` transitions of ``Q``; returns ``X_0..X_n``."""
    u0 = rng.random()
    x0 = int(np.searchsorted(_cumulative_rows(mu)[0], u0, side="right"))
    uniforms = rng.random(n_steps)
    return _kernels.sample_states(_cumulative_rows(Q), np.int64(x0), uniforms)


def sample_path(chain: DisorderChain, N: int, seed=None, rng: np.random.Generator | None = None) -> DisorderPath:
    """Draw ``X_0 ~ mu0``, ``X_{n+1} ~ Q(X_n, .)`` and return ``omega_n = f(X_n)``.

    ``seed`` may be anything accepted by :func:`numpy.random.default_rng`,
    e.g. ``[seed, sample_index]`` for independent per-sample streams.
    """
    if int(N) != N or N < 1:
        raise ModelError(f"path length must be a positive integer, got {N!r}")
    if rng is None:
        rng = np.random.default_rng(seed)
    states = sample_states(chain.Q, chain.mu0, int(N), rng)
    return DisorderPath.from_omega(chain.f[states[1:]], states=states)
