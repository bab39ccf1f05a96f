import numpy as np
import pytest

from markovpin import (ModelError, constrained_experiment, exact_homog_partition, finite_N_experiment,
                       homogeneous_free_energy, limit_free_energy, phase_diagram, pinning_cost_bound, scaled_family,
                       scaled_matrix, thresholds, two_state_family)


@pytest.fixture(scope="module")
def three_scores():
    Q = [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]]
    return scaled_family(["lo", "mid", "hi"], [-1.0, 0.5, 2.0], Q, 0.4)


def test_gamma_range():
    for g in (0.0, 1.0, -0.2):
        with pytest.raises(ModelError):
            two_state_family(g)


def test_scaled_matrix():
    fam = two_state_family(0.5)
    Q = scaled_matrix(fam, 100)
    np.testing.assert_allclose(Q, [[0.9, 0.1], [0.1, 0.9]])
    with pytest.raises(ValueError):
        scaled_matrix(fam, 1)


def test_limit_free_energy_two_state(kernel):
    fam = two_state_family(0.4)
    lim = limit_free_energy(fam, kernel, 1.0, 0.0)
    assert lim.F_limit == pytest.approx(0.5 * homogeneous_free_energy(kernel, 1.0).F, rel=1e-15)
    assert lim.branch == 1
    assert limit_free_energy(fam, kernel, 1.0, -2.0).F_limit == 0.0


def test_thresholds_and_branches(kernel, three_scores):
    beta = 2.0
    th = thresholds(three_scores, beta)
    np.testing.assert_allclose(th, [-4.0, -1.0, 2.0])
    hs = np.arange(-60, 61) / 10.0
    pd = phase_diagram(three_scores, kernel, beta, hs)
    np.testing.assert_array_equal(pd.boundaries, th)
    assert pd.branch[0] == 0 and pd.branch[-1] == 3
    assert list(pd.rows())[0][2] == 0


def test_phase_diagram_needs_sorted_grid(kernel, three_scores):
    with pytest.raises(ValueError):
        phase_diagram(three_scores, kernel, 1.0, [0.0, -1.0])


def test_finite_N_beta_zero_is_homogeneous(kernel):
    fam = two_state_family(0.4)
    est = finite_N_experiment(fam, kernel, 0.0, 0.5, 1000, 4, seed=0)
    assert est.stderr == 0.0
    assert est.mean == pytest.approx(exact_homog_partition(kernel, 0.5, 1000) / 1000, rel=1e-14)


def test_strip_statistics(kernel):
    fam = two_state_family(0.5)
    est = finite_N_experiment(fam, kernel, 1.0, 0.0, 2500, 40, seed=3)
    assert est.mean_strips == pytest.approx(2500 ** 0.5, rel=0.1)
    assert est.mean_strip_length == pytest.approx(2500 / (est.mean_strips + 1))


def test_constrained_experiment_shares_samples(kernel):
    fam = two_state_family(0.4)
    free = finite_N_experiment(fam, kernel, 1.0, 0.0, 800, 5, seed=11)
    con = constrained_experiment(fam, kernel, 1.0, 0.0, 800, 5, seed=11)
    np.testing.assert_array_equal(free.strips, con.strips)
    np.testing.assert_allclose(con.values + con.gaps, free.values, rtol=1e-14)
    assert np.all(con.gaps >= 0.0)
    bound = pinning_cost_bound(con.strips, 800, 0.5)
    assert np.all(con.gaps <= bound)
