"""Self-check suite behind ``markovpin validate``.

Engine results are compared with the brute-force oracles and with the
closed forms for the two-state chain and the order-one moving average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle
from .model import DisorderChain, RenewalKernel, build_kernel, build_moving_average_chain, two_state_chain
from .quenched import annealed_logZ, quenched_logZ
from .spectral import critical_curve, renewal_mass, solve_free_energy, tilted_kernel


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def check_kernel(kernel: RenewalKernel) -> Check:
    total = math.fsum(kernel.probs)
    diffs = np.abs(kernel.tail[:-1] - kernel.tail[1:] - kernel.probs)
    ok = (abs(total - 1.0) <= 1e-14 and bool(np.all(kernel.probs > 0))
          and abs(kernel.tail[0] - 1.0) <= 1e-14 and kernel.tail[-1] == 0.0
          and bool(np.all(np.diff(kernel.tail) <= 0)) and float(diffs.max()) <= 1e-15)
    return Check("kernel", ok, f"sum-1={total - 1.0:.2e}, tail(0)-1={kernel.tail[0] - 1.0:.2e}")


def check_oracle_quenched(kernel, instances, N_max, rng, tol=1e-10) -> Check:
    worst = 0.0
    for _ in range(instances):
        N = int(rng.integers(1, N_max + 1))
        omega = rng.choice([-1.0, 0.5, 1.0], size=N)
        beta, h = rng.uniform(0, 2), rng.uniform(-2, 2)
        z = oracle.enum_quenched_Z(kernel, omega, beta, h)
        worst = max(worst, _rel(math.exp(quenched_logZ(kernel, omega, beta, h).logZ), z))
    return Check("oracle quenched DP", worst <= tol, f"max rel err {worst:.2e} over {instances} instances")


def check_oracle_annealed(kernel, chain, instances, N_max, rng, tol=1e-10) -> Check:
    worst = 0.0
    for _ in range(instances):
        N = int(rng.integers(1, N_max + 1))
        beta, h = rng.uniform(0, 2), rng.uniform(-2, 2)
        z = oracle.enum_annealed_Z(kernel, chain, beta, h, N)
        worst = max(worst, _rel(math.exp(annealed_logZ(kernel, chain, beta, h, N)), z))
    return Check("oracle annealed DP", worst <= tol, f"max rel err {worst:.2e} over {instances} instances")


def check_fubini(kernel, chain, instances, N_max, rng, tol=1e-12) -> Check:
    worst = 0.0
    for _ in range(instances):
        N = int(rng.integers(1, N_max + 1))
        beta, h = rng.uniform(0, 2), rng.uniform(-2, 2)
        a = oracle.enum_disorder_average(kernel, chain, beta, h, N, "Z")
        b = oracle.enum_annealed_Z(kernel, chain, beta, h, N)
        worst = max(worst, _rel(a, b))
    return Check("Fubini identity", worst <= tol, f"max rel err {worst:.2e} over {instances} instances")


def check_two_state_closed_form(kernel, tol=1e-9) -> Check:
    worst = 0.0
    for eps in (0.0, 0.3, 0.5, 0.8):
        betas = np.array([0.0, 0.5, 1.5, 3.0])
        hc = critical_curve(kernel, two_state_chain(eps), betas)
        ref = [oracle.two_state_critical_point(kernel, eps, b) for b in betas]
        worst = max(worst, float(np.max(np.abs(hc - ref))))
    return Check("two-state critical curve", worst <= tol, f"max abs err {worst:.2e}")


def check_moving_average(kernel, rng, tol=1e-9) -> Check:
    worst = 0.0
    for _ in range(5):
        a0, a1 = rng.uniform(-2, 2, size=2)
        chain = build_moving_average_chain([a0, a1], [-1, 1])
        for beta in (0.3, 1.0, 2.0):
            lam = math.exp(-critical_curve(kernel, chain, [beta])[0])
            worst = max(worst, _rel(lam, oracle.moving_average_lambda(kernel, a0, a1, beta)))
    return Check("moving-average eigenvalue", worst <= tol, f"max rel err {worst:.2e}")


def check_sandwich(kernel, chain, beta, dh, Ns) -> Check:
    hc = critical_curve(kernel, chain, [beta])[0]
    sol = solve_free_energy(kernel, chain, beta, hc + dh)
    c, C = sol.perron_at_root.ratio_bounds
    pk = tilted_kernel(sol, t_max=max(Ns))
    ratios = []
    for N in Ns:
        ratios.append(math.exp(annealed_logZ(kernel, chain, beta, hc + dh, N) - sol.F_a * N) / renewal_mass(pk, N))
    ok = all(c * (1 - 1e-10) <= r <= C * (1 + 1e-10) for r in ratios)
    shown = ", ".join(f"N={N}: {r:.12g}" for N, r in zip(Ns, ratios))
    return Check("annealed sandwich", ok, f"c={c:.12g}, C={C:.12g}; {shown}")


def check_jensen(kernel, chain, N=8, beta=1.0, h=0.0) -> Check:
    quenched = oracle.enum_disorder_average(kernel, chain, beta, h, N, "logZ/N")
    annealed = math.log(oracle.enum_annealed_Z(kernel, chain, beta, h, N)) / N
    gap = annealed - quenched
    return Check("exact Jensen gap", gap > 0.0, f"E F_N={quenched:.15g}, F^a_N={annealed:.15g}, gap={gap:.3e}")


def run_all(kernel: RenewalKernel | None = None, chain: DisorderChain | None = None, instances: int = 50,
            N_max: int = 10, sandwich_N=(500, 1000, 2000), seed: int = 0) -> list[Check]:
    """Run every check; small enumeration instances use ``kernel`` (default α=0.5, T_K=10^5)."""
    kernel = build_kernel(0.5) if kernel is None else kernel
    if chain is None or chain.n_states > oracle.DEFAULT_BUDGET.max_states:
        chain = two_state_chain(0.3)
    rng = np.random.default_rng(seed)
    checks = [
        check_kernel(kernel),
        check_oracle_quenched(kernel, instances, N_max, rng),
        check_oracle_annealed(kernel, chain, instances, min(N_max, 8), rng),
        check_fubini(kernel, chain, max(1, instances // 5), 6, rng),
        check_two_state_closed_form(kernel),
        check_moving_average(kernel, rng),
        check_sandwich(kernel, two_state_chain(0.3), 1.0, 0.3, list(sandwich_N)),
        check_jensen(kernel, two_state_chain(0.3)),
    ]
    return checks
