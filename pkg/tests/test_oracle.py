import numpy as np
import pytest

from srb_response import (
    DiracObservable,
    PerturbationFamily,
    StableSegment,
    TorusPoint,
    TrigPolyScalar,
    WindowFunction,
    birkhoff_pair,
    fd_response,
    pair_with_density,
    ulam_density,
    ulam_pairing_estimate,
)
from srb_response.oracle import _OrbitStepper, richardson_weights


@pytest.fixture(scope="module")
def theta_eps(stable_obs):
    return stable_obs.mollified(2e-2)


def test_stepper_matches_perturbed_apply(family_sin):
    rng = np.random.default_rng(20)
    pts = rng.uniform(size=(64, 2))
    for t in (0.0, 0.01, -0.02):
        stepper = _OrbitStepper(family_sin, np.full(64, t))
        a = stepper.step(pts.copy())
        b = family_sin.perturbed_apply_points(t, pts)
        assert np.max(np.abs(a - b)) < 1e-12
        assert np.all((a >= 0.0) & (a < 1.0))


def test_birkhoff_reproducible(family_sin, theta_eps):
    kwargs = dict(n_iterates=10_000, n_seeds=4, rng_seed=99)
    a = birkhoff_pair(family_sin, 0.01, theta_eps, **kwargs)
    b = birkhoff_pair(family_sin, 0.01, theta_eps, **kwargs)
    assert a.mean == b.mean and a.std_error == b.std_error
    assert a.per_seed_means == b.per_seed_means
    c = birkhoff_pair(family_sin, 0.01, theta_eps, n_iterates=10_000, n_seeds=4, rng_seed=100)
    assert c.mean != a.mean


def test_birkhoff_matches_lebesgue_at_zero(family_sin, stable_obs, theta_eps):
    """At t = 0 the invariant measure is Lebesgue; compare with grid quadrature."""
    est = birkhoff_pair(family_sin, 0.0, theta_eps, n_iterates=100_000, n_seeds=8, rng_seed=42)
    exact = theta_eps.grid_integral(1024)
    assert abs(est.mean - exact) <= 3.0 * est.std_error
    assert est.std_error < 0.05 * est.mean


def test_birkhoff_zero_window(family_sin, stable_obs):
    theta0 = DiracObservable(stable_obs.curve, WindowFunction(smooth_factor=TrigPolyScalar.zero()))
    est = birkhoff_pair(family_sin, 0.0, theta0.mollified(2e-2), n_iterates=10_000, n_seeds=4, rng_seed=3)
    assert est.mean == 0.0 and est.std_error == 0.0


def test_birkhoff_constant_field_t_independent(x_const, theta_eps):
    """A constant displacement keeps Lebesgue invariant for every t."""
    fam = PerturbationFamily.from_field(x_const)
    a = birkhoff_pair(fam, 0.0, theta_eps, n_iterates=100_000, n_seeds=8, rng_seed=5)
    b = birkhoff_pair(fam, 0.3, theta_eps, n_iterates=100_000, n_seeds=8, rng_seed=6)
    assert abs(a.mean - b.mean) <= 3.0 * np.hypot(a.std_error, b.std_error)


def test_birkhoff_validations(family_sin, theta_eps):
    with pytest.raises(ValueError):
        birkhoff_pair(family_sin, 0.0, theta_eps, n_iterates=100)
    with pytest.raises(ValueError):
        birkhoff_pair(family_sin, 0.0, theta_eps, n_iterates=10_000, n_seeds=1)
    with pytest.raises(ValueError):
        birkhoff_pair(family_sin, 1.0, theta_eps, n_iterates=10_000)


def test_std_error_scales_with_seed_count(family_sin, theta_eps):
    """Quadrupling the seeds should roughly halve the seed-mean standard error."""
    a = birkhoff_pair(family_sin, 0.0, theta_eps, n_iterates=10_000, n_seeds=64, rng_seed=123)
    b = birkhoff_pair(family_sin, 0.0, theta_eps, n_iterates=10_000, n_seeds=256, rng_seed=123)
    ratio = b.std_error / a.std_error
    assert 0.4 <= ratio <= 0.6


def test_richardson_weights_exact_for_quadratic_bias():
    eps = (2e-2, 1e-2, 5e-3)
    w = richardson_weights(eps)
    assert np.sum(w) == pytest.approx(1.0, abs=1e-12)
    value = 0.7
    data = [value + 3.1 * e**2 - 11.0 * e**4 for e in eps]
    assert float(w @ data) == pytest.approx(value, abs=1e-12)
    w2 = richardson_weights((1e-2, 5e-3))
    data2 = [value + 3.1 * e**2 for e in (1e-2, 5e-3)]
    assert float(w2 @ data2) == pytest.approx(value, abs=1e-12)


def test_fd_response_zero_for_constant_field(x_const, stable_obs):
    fam = PerturbationFamily.from_field(x_const)
    fd = fd_response(fam, stable_obs, t_step=0.35, eps_schedule=(2e-2, 1e-2),
                     n_iterates=100_000, n_seeds=8, rng_seed=7)
    assert abs(fd.estimate) <= 3.0 * fd.stat_error
    assert len(fd.per_eps_estimates) == 2


def test_fd_response_zero_for_divergence_free_field(x_divfree, stable_obs):
    fam = PerturbationFamily.from_field(x_divfree)
    fd = fd_response(fam, stable_obs, t_step=0.03, eps_schedule=(2e-2, 1e-2),
                     n_iterates=100_000, n_seeds=8, rng_seed=8)
    assert abs(fd.estimate) <= 3.0 * fd.stat_error


def test_fd_response_validations(family_sin, stable_obs):
    with pytest.raises(ValueError):
        fd_response(family_sin, stable_obs, eps_schedule=(1e-2,))
    with pytest.raises(ValueError):
        fd_response(family_sin, stable_obs, eps_schedule=(1e-2, 2e-2))
    with pytest.raises(ValueError):
        fd_response(family_sin, stable_obs, t_step=family_sin.validity_radius)
    with pytest.raises(ValueError):
        fd_response(family_sin, stable_obs, n_iterates=100)


def test_ulam_uniform_at_zero(family_sin):
    dens = ulam_density(family_sin, 0.0, grid_n=128, samples_per_cell=32, rng_seed=7)
    assert dens.residual < 1e-10
    assert np.all(dens.density >= 0.0)
    assert float(dens.density.mean()) == pytest.approx(1.0, abs=1e-12)
    dev = dens.density - 1.0
    noise = 3.0 / np.sqrt(dens.samples_per_cell)
    assert np.abs(dev).max() <= noise
    assert np.sqrt((dev**2).mean()) <= noise / 3.0


def test_ulam_uniform_for_constant_field(x_const):
    fam = PerturbationFamily.from_field(x_const)
    dens = ulam_density(fam, 0.2, grid_n=64, samples_per_cell=32, rng_seed=9)
    assert np.abs(dens.density - 1.0).max() <= 3.0 / np.sqrt(32)


def test_ulam_validations(family_sin):
    with pytest.raises(ValueError):
        ulam_density(family_sin, 0.0, grid_n=32)
    with pytest.raises(ValueError):
        ulam_density(family_sin, 0.0, grid_n=2048)


def test_ulam_pairing_matches_quadrature(family_sin, theta_eps):
    dens = ulam_density(family_sin, 0.0, grid_n=128, samples_per_cell=32, rng_seed=21)
    val = pair_with_density(theta_eps, dens)
    exact = theta_eps.grid_integral(1024)
    assert val == pytest.approx(exact, abs=5e-3)


def test_estimator_consistency_five_configurations(all_observables, family_sin):
    """Birkhoff and Ulam pairings agree within 3x combined error bars."""
    cases = [
        ("stable", 0.0), ("stable", 0.01),
        ("circle", 0.0), ("circle", 0.01),
        ("sloped", 0.0),
    ]
    for kind, t in cases:
        te = all_observables[kind].mollified(2e-2)
        bk = birkhoff_pair(family_sin, t, te, n_iterates=100_000, n_seeds=6, rng_seed=31)
        um, ue, _ = ulam_pairing_estimate(
            family_sin, t, te, grid_n=128, samples_per_cell=32, rng_seed=33, replicates=3
        )
        gap = abs(bk.mean - um)
        assert gap <= 3.0 * np.hypot(bk.std_error, ue), (kind, t, gap, bk.std_error, ue)


def test_thread_override_reproducible(family_sin, theta_eps, monkeypatch):
    serial = ulam_pairing_estimate(family_sin, 0.0, theta_eps, grid_n=64,
                                   samples_per_cell=16, rng_seed=41, replicates=2)
    monkeypatch.setenv("SRB_RESPONSE_THREADS", "2")
    threaded = ulam_pairing_estimate(family_sin, 0.0, theta_eps, grid_n=64,
                                     samples_per_cell=16, rng_seed=41, replicates=2)
    assert serial == threaded
