import math

import numpy as np
import pytest

from markovpin import (ConvergenceError, ModelError, TailBoundError, annealed_logZ, build_A, build_chain, build_kernel,
                       build_M, critical_curve, homogeneous_free_energy, log_lambda, perron, renewal_mass,
                       solve_free_energy, tilted_kernel, two_state_chain)
from markovpin import oracle
from markovpin.spectral import chain_powers


def _direct_A(kernel, chain, beta, h, b):
    Q = np.asarray(chain.Q)
    S = Q.shape[0]
    total = np.zeros((S, S))
    P = np.eye(S)
    for t in range(1, kernel.support_cutoff + 1):
        P = P @ Q
        total += kernel.probs[t - 1] * math.exp(-b * t) * P
    return total * np.exp(beta * np.asarray(chain.f) + h)[None, :]


@pytest.mark.parametrize("eps", [0.0, 0.3, 0.5, 1.0])
def test_build_A_matches_direct_sum(eps):
    k = build_kernel(0.5, T_K=3000)
    ch = two_state_chain(eps) if eps < 1.0 else build_chain([0, 1, 2], [-1.0, 0.0, 2.0],
                                                            [[0.1, 0.6, 0.3], [0.5, 0.2, 0.3], [0.3, 0.3, 0.4]])
    for b in (0.0, 0.01):
        got = build_A(k, ch, 0.7, 0.2, b).A
        np.testing.assert_allclose(got, _direct_A(k, ch, 0.7, 0.2, b), rtol=1e-12)


def test_periodic_chain_closure_exact():
    # period-3 rotation: the closure reproduces Q^t exactly
    Q = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]
    ch = build_chain([0, 1, 2], [1.0, -1.0, 0.0], Q)
    k = build_kernel(0.5, T_K=5000)
    powers = chain_powers(ch, k, 16)
    assert powers.period == 3 and powers.rho == 0.0
    np.testing.assert_allclose(build_A(k, ch, 1.0, 0.0, split=16).A, _direct_A(k, ch, 1.0, 0.0, 0.0), rtol=1e-12)


def test_small_split_raises_tail_bound():
    k = build_kernel(0.5, T_K=10_000)
    ch = two_state_chain(0.01)  # slowly mixing aperiodic part: |1 - 2 eps| close to 1
    ch2 = build_chain([0, 1], [-1.0, 1.0], [[0.99, 0.01], [0.01, 0.99]])
    with pytest.raises(TailBoundError):
        build_A(k, ch2, 1.0, 0.0, split=4)
    build_A(k, ch, 1.0, 0.0)  # adaptive split is fine


def test_build_M_and_A_consistent():
    k = build_kernel(0.5, T_K=40)
    ch = two_state_chain(0.3)
    total = sum(build_M(k, ch, 1.0, 0.1, t) for t in range(1, 41))
    np.testing.assert_allclose(total, build_A(k, ch, 1.0, 0.1).A, rtol=1e-13)
    with pytest.raises(ValueError):
        build_M(k, ch, 1.0, 0.1, 41)


def test_perron_on_known_matrix():
    A = np.array([[2.0, 1.0], [1.0, 2.0]])
    pd = perron(A)
    assert pd.lam == pytest.approx(3.0, abs=1e-12)
    np.testing.assert_allclose(pd.xi, [1.0, 1.0], atol=1e-12)
    assert pd.ratio_bounds == pytest.approx((1.0, 1.0), abs=1e-12)
    with pytest.raises(ModelError):
        perron(np.array([[1.0, 0.0], [0.0, 1.0]]))


def test_perron_nonconvergence_reported():
    A = np.array([[1.0, 1e-12], [1e-12, 1.0 - 1e-12]])
    with pytest.raises(ConvergenceError):
        perron(A, maxiter=5)


def test_beta_zero_reduces_to_homogeneous(kernel, chain03):
    # at beta = 0 the annealed model is the homogeneous one
    for h in (-0.3, 0.0, 0.4, 1.2):
        sol = solve_free_energy(kernel, chain03, 0.0, h)
        assert sol.F_a == pytest.approx(homogeneous_free_energy(kernel, h).F, abs=1e-13)
    assert critical_curve(kernel, chain03, [0.0])[0] == pytest.approx(0.0, abs=1e-14)


def test_regime_tags(kernel, chain03):
    hc = critical_curve(kernel, chain03, [1.0])[0]
    assert solve_free_energy(kernel, chain03, 1.0, hc - 0.1).regime == "delocalized"
    assert solve_free_energy(kernel, chain03, 1.0, hc + 0.1).regime == "localized"
    sol = solve_free_energy(kernel, chain03, 1.0, hc + 0.1)
    assert sol.h_c_a == pytest.approx(hc, abs=1e-15)
    assert log_lambda(kernel, chain03, 1.0, hc) == pytest.approx(0.0, abs=1e-14)


def test_free_energy_matches_scalar_oracle(kernel):
    for eps, beta, dh in [(0.3, 1.0, 0.2), (0.7, 0.5, 1.0), (0.0, 2.0, 0.05)]:
        hc = oracle.two_state_critical_point(kernel, eps, beta)
        sol = solve_free_energy(kernel, two_state_chain(eps), beta, hc + dh)
        assert sol.F_a == pytest.approx(oracle.two_state_free_energy(kernel, eps, beta, hc + dh), abs=1e-12)


def test_free_energy_monotone_in_h(kernel, chain03):
    hs = np.linspace(-0.5, 1.5, 9)
    F = [solve_free_energy(kernel, chain03, 1.0, h).F_a for h in hs]
    assert np.all(np.diff(F) >= 0.0)


def test_annealed_free_energy_is_limit_of_annealed_logZ(kernel, chain03):
    hc = critical_curve(kernel, chain03, [1.0])[0]
    sol = solve_free_energy(kernel, chain03, 1.0, hc + 0.5)
    est = annealed_logZ(kernel, chain03, 1.0, hc + 0.5, 4000) / 4000
    assert est == pytest.approx(sol.F_a, abs=2e-3)


def test_tilted_kernel_is_stochastic(kernel, chain03):
    hc = critical_curve(kernel, chain03, [1.0])[0]
    pk = tilted_kernel(solve_free_energy(kernel, chain03, 1.0, hc + 0.3))
    np.testing.assert_allclose(pk.row_sums, 1.0, atol=1e-12)
    delocalized = tilted_kernel(solve_free_energy(kernel, chain03, 1.0, hc - 0.3))
    np.testing.assert_allclose(delocalized.row_sums, math.exp(-0.3), rtol=1e-10)


def test_renewal_mass_scalar_case():
    # one state at the critical point: the tilted kernel is K itself
    k = build_kernel(0.5, T_K=5)
    ch = build_chain([0], [0.0], [[1.0]])
    pk = tilted_kernel(solve_free_energy(k, ch, 0.0, 0.0))
    for N in (1, 3, 8):
        assert renewal_mass(pk, N) == pytest.approx(oracle.enum_quenched_Z(k, [0.0] * N, 0.0, 0.0), rel=1e-14)
