"""Hot numeric loops, in a numba flavour and a pure-numpy flavour.

The active implementation is chosen once at import time. Set the
environment variable ``MARKOVPIN_DISABLE_NUMBA=1`` to force the numpy path
(numba is also skipped silently when it is not installed). Both flavours
take and return the same arrays so they can be compared directly; see
``benchmarks/bench_kernels.py``.

Renewal convolutions are carried in the linear domain with a running
log-shift: whenever the newest value leaves ``[_LO, _HI]`` every stored
value is divided by it and the logarithm is added to the shift. Partition
functions grow like ``exp(F n)``, so this keeps them representable without
paying for an ``exp`` in the inner loop.
"""

import math
import os
from types import SimpleNamespace

import numpy as np

_HI = 1e100
_LO = 1e-100


# ---------------------------------------------------------------------------
# numpy flavour
# ---------------------------------------------------------------------------


def _renewal_logz_np(kern, rewards):
    """Scalar renewal recursion ``Z(n) = e^{r_n} sum_m Z(m) K(n-m)``.

    Parameters
    ----------
    kern : ndarray, shape (T+1,)
        ``kern[t] = K(t)``; ``kern[0]`` is ignored.
    rewards : ndarray, shape (N,)
        ``rewards[n-1]`` is the reward collected when site ``n`` is a
        contact.

    Returns
    -------
    ndarray, shape (N+1,)
        ``log Z(n)`` for ``n = 0..N`` with ``log Z(0) = 0``.
    """
    n_sites = rewards.shape[0]
    T = kern.shape[0] - 1
    krev = kern[::-1].copy()
    z = np.empty(n_sites + 1)
    logz = np.empty(n_sites + 1)
    z[0] = 1.0
    logz[0] = 0.0
    shift = 0.0
    boost = np.exp(rewards)
    for n in range(1, n_sites + 1):
        lo = max(0, n - T)
        v = float(np.dot(z[lo:n], krev[T - n + lo:T])) * boost[n - 1]
        if v > _HI or 0.0 < v < _LO:
            s = math.log(v)
            z[:n] *= math.exp(-s)
            shift += s
            v = 1.0
        z[n] = v
        logz[n] = shift + math.log(v) if v > 0.0 else -np.inf
    return logz


def _matrix_renewal_logz_np(W, tilt, v0):
    """Vector renewal recursion ``V(n) = tilt * sum_m V(m) @ W[n-m]``.

    ``W`` has shape (N+1, S, S) with ``W[0]`` ignored; returns
    ``log sum_y V(n, y)`` for ``n = 0..N``.
    """
    n_sites = W.shape[0] - 1
    S = W.shape[1]
    v = np.zeros((n_sites + 1, S))
    out = np.empty(n_sites + 1)
    v[0] = v0
    out[0] = math.log(v0.sum())
    shift = 0.0
    for n in range(1, n_sites + 1):
        row = np.einsum("mx,mxy->y", v[:n], W[n:0:-1]) * tilt
        total = row.sum()
        if total > _HI or 0.0 < total < _LO:
            s = math.log(total)
            v[:n] *= math.exp(-s)
            row *= math.exp(-s)
            shift += s
            total = row.sum()
        v[n] = row
        out[n] = shift + math.log(total) if total > 0.0 else -np.inf
    return out


def _sample_states_np(cum, x0, uniforms):
    """Markov chain path from cumulative rows ``cum`` and uniforms."""
    states = np.empty(uniforms.shape[0] + 1, dtype=np.int64)
    states[0] = x0
    rows = [list(r) for r in cum]
    x = int(x0)
    for i, u in enumerate(uniforms.tolist()):
        row = rows[x]
        j = 0
        while row[j] <= u:
            j += 1
        x = j
        states[i + 1] = x
    return states


def _power_iterate_np(A, x0, tol, maxiter):
    """Power iteration on a positive matrix.

    Returns ``(lam, x, residual, iterations)``; ``x`` is normalised to
    max entry 1 and ``iterations == maxiter`` signals non-convergence.
    """
    x = x0 / x0.max()
    lam_old = 0.0
    for it in range(1, maxiter + 1):
        y = A @ x
        lam = float(x @ y) / float(x @ x)
        res = float(np.abs(y - lam * x).max())
        scale = max(1.0, lam)
        if abs(lam - lam_old) < tol * scale and res <= tol * scale:
            return lam, x, res, it
        lam_old = lam
        x = y / y.max()
    return lam_old, x, res, maxiter


numpy_kernels = SimpleNamespace(
    name="numpy",
    renewal_logz=_renewal_logz_np,
    matrix_renewal_logz=_matrix_renewal_logz_np,
    sample_states=_sample_states_np,
    power_iterate=_power_iterate_np,
)


# ---------------------------------------------------------------------------
# numba flavour
# ---------------------------------------------------------------------------


def _build_numba_kernels():
    from numba import njit

    # reassociation lets the dot product vectorise
    @njit(cache=True, nogil=True, fastmath={"reassoc", "contract"})
    def renewal_logz(kern, rewards):
        n_sites = rewards.shape[0]
        T = kern.shape[0] - 1
        rk = kern[::-1].copy()  # rk[T - t] = K(t), read forwards below
        z = np.empty(n_sites + 1)
        logz = np.empty(n_sites + 1)
        z[0] = 1.0
        logz[0] = 0.0
        shift = 0.0
        for n in range(1, n_sites + 1):
            lo = max(0, n - T)
            off = T - n
            acc = 0.0
            for m in range(lo, n):
                acc += z[m] * rk[off + m]
            v = acc * math.exp(rewards[n - 1])
            if v > _HI or (v > 0.0 and v < _LO):
                s = math.log(v)
                f = math.exp(-s)
                for m in range(n):
                    z[m] *= f
                shift += s
                v = 1.0
            z[n] = v
            if v > 0.0:
                logz[n] = shift + math.log(v)
            else:
                logz[n] = -np.inf
        return logz

    @njit(cache=True, nogil=True)
    def matrix_renewal_logz(W, tilt, v0):
        n_sites = W.shape[0] - 1
        S = W.shape[1]
        v = np.zeros((n_sites + 1, S))
        out = np.empty(n_sites + 1)
        acc = np.empty(S)
        for y in range(S):
            v[0, y] = v0[y]
        out[0] = math.log(v0.sum())
        shift = 0.0
        for n in range(1, n_sites + 1):
            acc[:] = 0.0
            for m in range(n):
                Wt = W[n - m]
                for x in range(S):
                    vx = v[m, x]
                    if vx == 0.0:
                        continue
                    for y in range(S):
                        acc[y] += vx * Wt[x, y]
            total = 0.0
            for y in range(S):
                acc[y] *= tilt[y]
                total += acc[y]
            if total > _HI or (total > 0.0 and total < _LO):
                s = math.log(total)
                f = math.exp(-s)
                for m in range(n):
                    for y in range(S):
                        v[m, y] *= f
                for y in range(S):
                    acc[y] *= f
                shift += s
                total = 0.0
                for y in range(S):
                    total += acc[y]
            for y in range(S):
                v[n, y] = acc[y]
            if total > 0.0:
                out[n] = shift + math.log(total)
            else:
                out[n] = -np.inf
        return out

    @njit(cache=True, nogil=True)
    def sample_states(cum, x0, uniforms):
        states = np.empty(uniforms.shape[0] + 1, dtype=np.int64)
        states[0] = x0
        x = x0
        for i in range(uniforms.shape[0]):
            u = uniforms[i]
            j = 0
            while cum[x, j] <= u:
                j += 1
            x = j
            states[i + 1] = x
        return states

    @njit(cache=True, nogil=True)
    def power_iterate(A, x0, tol, maxiter):
        S = A.shape[0]
        x = x0 / x0.max()
        y = np.empty(S)
        lam_old = 0.0
        lam = 0.0
        res = np.inf
        for it in range(1, maxiter + 1):
            num = 0.0
            den = 0.0
            for i in range(S):
                s = 0.0
                for j in range(S):
                    s += A[i, j] * x[j]
                y[i] = s
                num += x[i] * s
                den += x[i] * x[i]
            lam = num / den
            res = 0.0
            for i in range(S):
                r = abs(y[i] - lam * x[i])
                if r > res:
                    res = r
            scale = max(1.0, lam)
            if abs(lam - lam_old) < tol * scale and res <= tol * scale:
                return lam, x.copy(), res, it
            lam_old = lam
            ymax = y.max()
            for i in range(S):
                x[i] = y[i] / ymax
        return lam_old, x.copy(), res, maxiter

    return SimpleNamespace(
        name="numba",
        renewal_logz=renewal_logz,
        matrix_renewal_logz=matrix_renewal_logz,
        sample_states=sample_states,
        power_iterate=power_iterate,
    )


def _numba_wanted():
    flag = os.environ.get("MARKOVPIN_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


try:
    numba_kernels = _build_numba_kernels()
except ImportError:  # pragma: no cover - numba is optional
    numba_kernels = None

active = numba_kernels if (numba_kernels is not None and _numba_wanted()) else numpy_kernels
BACKEND = active.name

renewal_logz = active.renewal_logz
matrix_renewal_logz = active.matrix_renewal_logz
sample_states = active.sample_states
power_iterate = active.power_iterate
