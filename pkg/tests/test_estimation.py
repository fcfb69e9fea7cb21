import math

import numpy as np
import pytest

from estimation.fitting import (DegenerateFitError, FitError, FitModel, damped_least_squares,
                                fit_gaussian, fit_standing_wave, fit_tau_decaying,
                                fit_tau_saturating, shot_noise_sigma)
from estimation.inversion import (BracketError, default_durations, extract_coupling,
                                  invert_g_from_tau, invert_rabi_from_tau,
                                  tau_from_lambda_sequence)
from ion_cavity.model import MHZ
from ion_cavity.sequences import lambda_spec, simulate_lambda_sequence
from sweep.manager import SweepManager
from sweep.registry import SampleCache

US = 1e-6
T = np.linspace(0.0, 10 * US, 41)

TRUE = {
    "saturating_exponential": {"A": 0.98, "tau": 2 * US},
    "decaying_exponential": {"A": 0.95, "tau": 3 * US, "c": 0.02},
    "gaussian_1d": {"A": 2e6, "u0": 0.5 * US, "w": 6.6 * US, "c": 1e4},
    "standing_wave": {"A": 1e6, "period": 707e-9, "phase": 0.3, "contrast": 0.4},
}

GRIDS = {
    "saturating_exponential": T,
    "decaying_exponential": T,
    "gaussian_1d": np.linspace(-15 * US, 15 * US, 31),
    "standing_wave": np.linspace(0.0, 5 * US, 201),
}

AUTO_FITS = {
    "saturating_exponential": fit_tau_saturating,
    "decaying_exponential": lambda x, y: fit_tau_decaying(x, y, fit_offset=True),
    "gaussian_1d": fit_gaussian,
    "standing_wave": fit_standing_wave,
}


def _clean(kind):
    return FitModel(kind, TRUE[kind]).evaluate(GRIDS[kind], TRUE[kind])


@pytest.fixture
def manager():
    return SweepManager({"sweep": {"workers": 2}})


@pytest.mark.parametrize("kind", sorted(TRUE))
def test_exact_start_is_kept(kind):
    fit = damped_least_squares(FitModel(kind, TRUE[kind]), GRIDS[kind], _clean(kind))
    assert fit.converged
    for name, value in TRUE[kind].items():
        assert fit[name] == pytest.approx(value, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("kind", sorted(TRUE))
def test_automatic_start_recovers_noiseless_curve(kind):
    fit = AUTO_FITS[kind](GRIDS[kind], _clean(kind))
    assert fit.usable
    for name, value in TRUE[kind].items():
        assert fit[name] == pytest.approx(value, rel=1e-6, abs=1e-9)


def test_saturating_fit_with_noise_within_two_sigma():
    inside = 0
    clean = 1.0 - np.exp(-T / (2 * US))
    sigma = 0.15 * np.maximum(clean, 0.05)
    for seed in range(20):
        rng = np.random.default_rng(seed)
        fit = fit_tau_saturating(T, clean + sigma * rng.standard_normal(T.size), sigma)
        assert fit.usable
        inside += abs(fit["tau"] - 2 * US) <= 2 * fit.uncertainties["tau"]
    assert inside >= 16


def test_gaussian_fit_with_noise_within_two_sigma():
    x = GRIDS["gaussian_1d"]
    clean = 2e6 * np.exp(-2 * x ** 2 / (6.6 * US) ** 2)
    sigma = 0.15 * np.maximum(clean, 2e3)
    inside = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        fit = fit_gaussian(x, clean + sigma * rng.standard_normal(x.size), sigma)
        inside += abs(fit["w"] - 6.6 * US) <= 2 * fit.uncertainties["w"]
    assert inside >= 16


def test_decay_offset_fixed_by_default():
    y = 0.9 * np.exp(-T / (3 * US))
    fit = fit_tau_decaying(T, y)
    assert fit["c"] == 0.0
    assert fit.uncertainties["c"] == 0.0
    assert fit["tau"] == pytest.approx(3 * US, rel=1e-8)


def test_fit_with_noisy_lambda_decay(measured, rng):
    durations = default_durations()
    p_s = simulate_lambda_sequence(measured, lambda_spec(durations)).observables["P_S"]
    reference = fit_tau_decaying(durations, p_s)["tau"]
    sigma = np.full(p_s.shape, 0.05)
    noisy = p_s + sigma * rng.standard_normal(p_s.size)
    fit = fit_tau_decaying(durations, noisy, sigma)
    assert fit.usable
    assert fit["tau"] == pytest.approx(reference, rel=0.15)
    assert fit.uncertainties["tau"] < 0.15 * reference


def test_constant_data_is_degenerate():
    x = GRIDS["gaussian_1d"]
    with pytest.raises(DegenerateFitError) as err:
        fit_gaussian(x, np.full(x.size, 3.0))
    assert set(err.value.parameters) & {"u0", "w"}


def test_too_few_points():
    with pytest.raises(FitError):
        fit_tau_decaying(T[:2], np.array([1.0, 0.5]))


def test_non_positive_sigma_rejected():
    y = 1.0 - np.exp(-T / (2 * US))
    with pytest.raises(FitError):
        fit_tau_saturating(T, y, np.zeros_like(y))


def test_mismatched_shapes_rejected():
    with pytest.raises(FitError):
        damped_least_squares(FitModel("saturating_exponential", {"A": 1.0, "tau": US}), T,
                             np.ones(T.size - 1))


def test_unknown_model_and_missing_start():
    with pytest.raises(FitError):
        FitModel("lorentzian", {})
    with pytest.raises(FitError):
        FitModel("saturating_exponential", {"A": 1.0})


def test_iteration_budget_reports_non_convergence(rng):
    y = 1.0 - np.exp(-T / (2 * US)) + 0.05 * rng.standard_normal(T.size)
    fit = fit_tau_saturating(T, y, max_iterations=1)
    assert not fit.converged
    assert not fit.usable


def test_shot_noise_floor():
    np.testing.assert_allclose(shot_noise_sigma([0.0, 1.0], 100), 0.01)
    assert shot_noise_sigma(0.5, 100) == pytest.approx(0.05)
    with pytest.raises(FitError):
        shot_noise_sigma(0.5, 0)


def test_tau_samples_are_cached(measured, cache):
    first = tau_from_lambda_sequence(measured, cache=cache)
    second = tau_from_lambda_sequence(measured, cache=cache)
    assert first == second
    assert (cache.hits, cache.misses) == (1, 1)
    assert len(cache) == 1


def test_tau_samples_keyed_by_fit_options(measured, cache):
    plain = tau_from_lambda_sequence(measured, cache=cache)
    offset = tau_from_lambda_sequence(measured, fitting={"fit_offset": True}, cache=cache)
    fresh = tau_from_lambda_sequence(measured, fitting={"fit_offset": True}, cache=SampleCache())
    assert offset == fresh
    assert offset != plain
    assert (cache.hits, cache.misses) == (0, 2)


def test_tau_falls_with_rabi_frequency(measured, cache):
    taus = [tau_from_lambda_sequence(measured.replace(g=0.0, omega_297=w * MHZ), cache=cache)
            for w in (0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(taus, taus[1:]))


def test_tau_falls_with_coupling(measured, cache):
    taus = [tau_from_lambda_sequence(measured.replace(g=g * MHZ), cache=cache)
            for g in (0.0, 1.0, 2.0, 4.0, 8.0)]
    assert all(a > b for a, b in zip(taus, taus[1:]))


def test_rabi_inversion_round_trip(measured, cache, manager):
    target = 1.13 * MHZ
    tau_off = tau_from_lambda_sequence(measured.replace(g=0.0, omega_297=target), cache=cache)
    omega = invert_rabi_from_tau(tau_off, measured, cache=cache, manager=manager)
    assert omega == pytest.approx(target, rel=1e-3)


def test_coupling_inversion_round_trip(measured, cache, manager):
    tau_on = tau_from_lambda_sequence(measured, cache=cache)
    g = invert_g_from_tau(tau_on, measured.omega_297, measured, cache=cache, manager=manager)
    assert g == pytest.approx(measured.g, rel=1e-3)


def test_cavity_free_decay_gives_zero_coupling(measured, cache, manager):
    tau_free = tau_from_lambda_sequence(measured.replace(g=0.0), cache=cache)
    assert invert_g_from_tau(tau_free, measured.omega_297, measured, cache=cache,
                             manager=manager) == 0.0


def test_decay_slower_than_cavity_free_is_rejected(measured, cache, manager):
    with pytest.raises(BracketError) as err:
        invert_g_from_tau(60 * US, measured.omega_297, measured, cache=cache, manager=manager)
    assert "cannot slow" in str(err.value)


@pytest.mark.parametrize("tau_off", [1e-6, 1.0])
def test_rabi_out_of_range(measured, cache, manager, tau_off):
    with pytest.raises(BracketError) as err:
        invert_rabi_from_tau(tau_off, measured, cache=cache, manager=manager)
    low, high = err.value.achievable_range
    assert low < high
    assert not low <= tau_off <= high


def test_rabi_bad_inputs(measured, cache):
    with pytest.raises(BracketError):
        invert_rabi_from_tau(-1.0, measured, cache=cache)
    with pytest.raises(BracketError):
        invert_rabi_from_tau(30 * US, measured, bracket=(2 * MHZ, 1 * MHZ), cache=cache)


def test_coupling_beyond_bracket(measured, cache, manager):
    with pytest.raises(BracketError):
        invert_g_from_tau(1 * US, measured.omega_297, measured, bracket=(0.0, 5 * MHZ), cache=cache,
                          manager=manager)


@pytest.mark.slow
def test_measured_decay_times_give_strong_coupling(measured, cache, manager):
    result = extract_coupling(34 * US, 17.2 * US, measured, tau_off_err=1 * US, tau_on_err=0.5 * US,
                              cache=cache, manager=manager)
    assert result.omega_297 / MHZ == pytest.approx(1.13, rel=0.10)
    assert result.g / MHZ == pytest.approx(3.4, rel=0.10)
    assert 1.5 <= result.g_over_gamma <= 2.1
    low, high = result.g_range
    assert low < result.g < high
    assert 0.1 <= (high - low) / 2 / MHZ <= 0.4
    assert result.omega_range[0] < result.omega_297 < result.omega_range[1]


@pytest.mark.slow
def test_random_round_trips(measured, cache, manager):
    rng = np.random.default_rng(5)
    for _ in range(5):
        omega = rng.uniform(0.6, 2.0) * MHZ
        g = rng.uniform(1.0, 6.0) * MHZ
        tau_off = tau_from_lambda_sequence(measured.replace(g=0.0, omega_297=omega), cache=cache)
        tau_on = tau_from_lambda_sequence(measured.replace(g=g, omega_297=omega), cache=cache)
        result = extract_coupling(tau_off, tau_on, measured, cache=cache, manager=manager)
        assert result.omega_297 == pytest.approx(omega, rel=2e-3)
        assert result.g == pytest.approx(g, rel=5e-3)
        assert result.g_range is None
        assert math.isclose(result.g_over_gamma, result.g / measured.gamma_total)
