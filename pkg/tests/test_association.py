import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfcopula.association import (
    GRID_STIELTJES,
    GridResolutionError,
    MethodMismatchError,
    blomqvist_beta,
    cell_masses,
    gaussian_measure,
    gaussian_report,
    gini_gamma,
    kendall_tau,
    measures_from_grid,
    measures_from_pseudo_obs,
    policy_effect,
    spearman_rho,
)
from cfcopula.copula import (
    CopulaGrid,
    ObservationSample,
    counterfactual_copula,
    counterfactual_weights,
    empirical_copula,
    pseudo_observations,
    unit_weights,
)


def _grid_from(values):
    m = values.shape[0] - 1
    return CopulaGrid(m=m, values=values, two_increasing=True, margins_uniform=True)


def _independence(m):
    nodes = np.arange(m + 1) / m
    return _grid_from(np.outer(nodes, nodes))


def _comonotone(m):
    nodes = np.arange(m + 1) / m
    return _grid_from(np.minimum.outer(nodes, nodes))


def _countermonotone(m):
    nodes = np.arange(m + 1) / m
    return _grid_from(np.maximum(nodes[:, None] + nodes[None, :] - 1.0, 0.0))


# --- exact identities on reference grids ---------------------------------------

@pytest.mark.parametrize("m", [4, 10, 100])
def test_independence_grid_measures_are_exact_zeros(m):
    grid = _independence(m)
    assert spearman_rho(grid) == pytest.approx(0.0, abs=1e-13)
    assert kendall_tau(grid) == pytest.approx(0.0, abs=1e-13)
    assert gini_gamma(grid) == pytest.approx(0.0, abs=1e-13)
    if m % 2 == 0:
        assert blomqvist_beta(grid) == pytest.approx(0.0, abs=1e-13)


@pytest.mark.parametrize("m", [4, 10, 100])
def test_comonotone_grid_identities(m):
    """Node-sampled min(u, v): the grid forms carry explicit m-corrections."""
    grid = _comonotone(m)
    assert spearman_rho(grid) == pytest.approx(1.0 - 1.0 / m**2, abs=1e-12)
    assert kendall_tau(grid) == pytest.approx(1.0 - 1.0 / m, abs=1e-12)
    assert gini_gamma(grid) == pytest.approx(1.0, abs=1e-12)
    if m % 2 == 0:
        assert blomqvist_beta(grid) == pytest.approx(1.0, abs=1e-13)


@pytest.mark.parametrize("m", [4, 10, 100])
def test_countermonotone_grid_identities(m):
    # mirror images of the comonotone identities by C -> v - C(1-u, v)
    grid = _countermonotone(m)
    assert spearman_rho(grid) == pytest.approx(-1.0 + 1.0 / m**2, abs=1e-12)
    assert kendall_tau(grid) == pytest.approx(-1.0 + 1.0 / m, abs=1e-12)
    assert gini_gamma(grid) == pytest.approx(-1.0, abs=1e-12)
    if m % 2 == 0:
        assert blomqvist_beta(grid) == pytest.approx(-1.0, abs=1e-13)


def test_cell_masses_sum_to_grid_corner():
    grid = empirical_copula(_rand_sample(57, 3), m=10)
    masses = cell_masses(grid).masses
    assert masses.sum() == pytest.approx(grid.values[10, 10], abs=1e-12)


def test_blomqvist_requires_even_grid():
    with pytest.raises(GridResolutionError):
        blomqvist_beta(_independence(5))


# --- Gaussian closed forms ------------------------------------------------------

def test_gaussian_closed_forms_at_zero_and_one():
    for which in ("rho", "tau", "gamma", "beta"):
        assert gaussian_measure(0.0, which) == pytest.approx(0.0, abs=1e-15)
        assert gaussian_measure(1.0, which) == pytest.approx(1.0, abs=1e-12)
        assert gaussian_measure(-1.0, which) == pytest.approx(-1.0, abs=1e-12)


def test_gaussian_closed_form_frozen_values():
    """arcsin forms at the two study correlations, frozen to 12 digits."""
    r_act = np.sqrt(65.0) / 13.0
    r_cf = np.sqrt(2.0) / 10.0
    assert gaussian_measure(r_act, "tau") == pytest.approx(0.4258757566828431, abs=1e-12)
    assert gaussian_measure(r_act, "rho") == pytest.approx(0.6021487911989701, abs=1e-12)
    assert gaussian_measure(r_act, "gamma") == pytest.approx(0.4795188875051269, abs=1e-12)
    assert gaussian_measure(r_act, "beta") == gaussian_measure(r_act, "tau")
    assert gaussian_measure(r_cf, "tau") == pytest.approx(0.0903344706017331, abs=1e-10)
    rep = gaussian_report(r_act)
    assert rep.tau == gaussian_measure(r_act, "tau")
    assert rep.method


@given(st.floats(min_value=-0.999, max_value=0.999))
@settings(max_examples=60, deadline=None)
def test_gaussian_measures_are_odd_and_monotone(r):
    for which in ("rho", "tau", "gamma", "beta"):
        assert gaussian_measure(-r, which) == pytest.approx(-gaussian_measure(r, which), abs=1e-12)
        if r >= 0:
            assert gaussian_measure(min(r + 1e-3, 0.9995), which) >= gaussian_measure(r, which)


# --- estimator-level behavior ---------------------------------------------------

def _rand_sample(n, seed, dependence=1.0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 2))
    z = rng.normal(size=n)
    y1 = z + rng.normal(size=n)
    y2 = dependence * z + rng.normal(size=n)
    return ObservationSample(y1=y1, y2=y2, x=x, xstar=x)


def test_measures_from_grid_tags_method():
    report = measures_from_grid(empirical_copula(_rand_sample(40, 0), m=10))
    assert report.method == GRID_STIELTJES
    assert set(report.as_dict()) == {"rho", "tau", "gamma", "beta"}


def test_policy_effect_subtracts_by_measure():
    a = measures_from_grid(empirical_copula(_rand_sample(60, 1), m=10))
    c = measures_from_grid(empirical_copula(_rand_sample(60, 2), m=10))
    eff = policy_effect(c, a)
    assert eff.tau == pytest.approx(c.tau - a.tau)
    assert eff.rho == pytest.approx(c.rho - a.rho)


def test_policy_effect_rejects_mixed_methods():
    sample = _rand_sample(80, 3)
    grid_rep = measures_from_grid(empirical_copula(sample, m=10))
    pobs_rep = measures_from_pseudo_obs(pseudo_observations(sample))
    with pytest.raises(MethodMismatchError):
        policy_effect(grid_rep, pobs_rep)


def test_grid_and_pseudo_obs_paths_agree_on_unweighted_data():
    sample = _rand_sample(400, 4)
    grid_rep = measures_from_grid(empirical_copula(sample, m=100))
    pobs_rep = measures_from_pseudo_obs(pseudo_observations(sample))
    for key, val in grid_rep.as_dict().items():
        assert val == pytest.approx(pobs_rep.as_dict()[key], abs=0.02), key


def test_rank_invariance_of_measures_is_exact():
    sample = _rand_sample(150, 5)
    base = measures_from_grid(empirical_copula(sample, m=30))
    warped = ObservationSample(
        y1=np.expm1(sample.y1), y2=sample.y2**3, x=sample.x, xstar=sample.xstar
    )
    other = measures_from_grid(empirical_copula(warped, m=30))
    assert base.as_dict() == other.as_dict()


def test_comonotone_sample_hits_grid_identities():
    y = np.random.default_rng(6).normal(size=80)
    sample = ObservationSample(y1=y, y2=2.0 * y + 1.0, x=np.zeros(80), xstar=np.zeros(80))
    report = measures_from_grid(empirical_copula(sample, m=20))
    assert report.tau == pytest.approx(1.0 - 1.0 / 20, abs=1e-12)
    assert report.rho == pytest.approx(1.0 - 1.0 / 20**2, abs=1e-12)
    assert report.gamma == pytest.approx(1.0, abs=1e-12)
    assert report.beta == pytest.approx(1.0, abs=1e-12)


def test_weighted_measures_shrink_under_downweighting_dependence():
    """Weights that favor a low-dependence region lower every measure."""
    rng = np.random.default_rng(7)
    n = 500
    x = rng.normal(size=n)
    z = rng.normal(size=n)
    strength = 1.0 / (1.0 + np.exp(-2.0 * x))  # dependence rises with x
    y1 = z * strength + rng.normal(size=n) * (1 - strength * 0.5)
    y2 = z * strength + rng.normal(size=n) * (1 - strength * 0.5)
    sample = ObservationSample(y1=y1, y2=y2, x=x, xstar=x - 0.8)
    w = counterfactual_weights(sample.x, sample.xstar, h=1.2)
    actual = measures_from_grid(empirical_copula(sample, m=50))
    cf = measures_from_grid(counterfactual_copula(sample, w, m=50))
    eff = policy_effect(cf, actual)
    assert eff.tau < 0 and eff.rho < 0 and eff.gamma < 0


@given(st.integers(min_value=10, max_value=80), st.integers(min_value=0, max_value=10**6))
@settings(max_examples=30, deadline=None)
def test_measures_bounded_on_random_samples(n, seed):
    report = measures_from_grid(empirical_copula(_rand_sample(n, seed), m=10))
    for key, val in report.as_dict().items():
        assert -1.0 - 1e-9 <= val <= 1.0 + 1e-9, key
