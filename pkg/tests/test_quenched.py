import math

import numpy as np
import pytest

from markovpin import (CapExceededError, DisorderPath, annealed_logZ, build_chain, critical_curve, log_partitions,
                       mc_quenched_free_energy, pinned_logZ, quenched_logZ, sample_path, solve_free_energy,
                       strip_constrained_logZ, two_state_chain)
from markovpin.quenched import summarize


def test_variants_tagged(small_kernel):
    p = DisorderPath.from_omega([1.0, 1.0, -1.0, -1.0, 1.0])
    assert quenched_logZ(small_kernel, p, 1.0, 0.0).variant == "pinned-endpoint"
    res = strip_constrained_logZ(small_kernel, p, 1.0, 0.0)
    assert res.variant == "strip-constrained"
    ref = pinned_logZ(small_kernel, p, 1.0, 0.0, [2, 4, 5]).logZ
    assert res.logZ == pytest.approx(ref, rel=1e-15)


def test_constrained_below_free(kernel):
    p = sample_path(two_state_chain(0.05), 2000, seed=3)
    free = quenched_logZ(kernel, p, 1.0, 0.0).logZ
    con = strip_constrained_logZ(kernel, p, 1.0, 0.0).logZ
    assert con < free


def test_pin_validation(small_kernel):
    w = np.ones(5)
    for pins in ([2, 4], [0, 5], [3, 3, 5], []):
        with pytest.raises(ValueError):
            pinned_logZ(small_kernel, w, 1.0, 0.0, pins)


def test_cap(small_kernel):
    with pytest.raises(CapExceededError):
        quenched_logZ(small_kernel, np.ones(11), 1.0, 0.0, cap=10)
    with pytest.raises(CapExceededError):
        annealed_logZ(small_kernel, two_state_chain(0.3), 1.0, 0.0, 11, cap=10)


def test_prefixes_consistent(kernel):
    w = np.random.default_rng(1).normal(size=300)
    lz = log_partitions(kernel, w, 0.7, 0.1)
    assert lz[123] == pytest.approx(quenched_logZ(kernel, w[:123], 0.7, 0.1).logZ, rel=1e-14)


def test_beta_zero_is_deterministic(kernel, chain03):
    est = mc_quenched_free_energy(kernel, chain03, 0.0, 0.3, 500, 5, seed=1)
    assert est.stderr == 0.0
    assert np.all(est.values == est.values[0])


def test_mc_independent_of_workers(kernel, chain03):
    a = mc_quenched_free_energy(kernel, chain03, 1.0, 0.0, 400, 6, seed=9, workers=1)
    b = mc_quenched_free_energy(kernel, chain03, 1.0, 0.0, 400, 6, seed=9, workers=3)
    np.testing.assert_array_equal(a.values, b.values)
    assert (a.mean, a.stderr) == (b.mean, b.stderr)


def test_quenched_below_annealed(kernel, chain03):
    hc = critical_curve(kernel, chain03, [1.0])[0]
    sol = solve_free_energy(kernel, chain03, 1.0, hc + 0.4)
    mean, err = mc_quenched_free_energy(kernel, chain03, 1.0, hc + 0.4, 2000, 16, seed=2)
    assert mean <= sol.F_a + 3 * err


def test_annealed_logZ_positive_free_energy_growth(kernel):
    ch = build_chain([0, 1], [-1.0, 1.0], [[0.5, 0.5], [0.5, 0.5]])
    # i.i.d. symmetric disorder: E exp(beta omega) = cosh(beta), so annealed = homogeneous at h + log cosh
    a = annealed_logZ(kernel, ch, 1.0, 0.2, 300)
    b = quenched_logZ(kernel, np.zeros(300), 1.0, 0.2 + math.log(math.cosh(1.0))).logZ
    assert a == pytest.approx(b, rel=1e-12)


def test_summarize():
    mean, err = summarize([1.0, 2.0, 3.0])
    assert mean == 2.0
    assert err == pytest.approx(1.0 / math.sqrt(3.0))
    assert summarize([4.0]) == (4.0, 0.0)
