import math

import numpy as np
import pytest

from estimation.fitting import fit_tau_decaying, fit_tau_saturating
from ion_cavity.calibration import calibrate_repump_drive, repump_durations, repump_tau
from ion_cavity.model import (DEFAULT_BETA, MHZ, ModelParameterError, SystemParams, build_generator,
                              build_system, measured_params)
from ion_cavity.rates import (analytic_rates, decay_rate_from_spectrum,
                              simulated_purcell_rate)
from ion_cavity.sequences import (PulseSequenceSpec, lambda_spec, repump_spec,
                                  simulate_lambda_sequence, simulate_repump_sequence)
from lindblad.liouvillian import hermiticity_error

DURATIONS = np.linspace(0.0, 100e-6, 41)
KHZ = 2 * math.pi * 1e3


def _fitted_tau(p, durations=DURATIONS):
    traj = simulate_lambda_sequence(p, lambda_spec(durations))
    return fit_tau_decaying(traj.times, traj.observables["P_S"])["tau"]


def test_measured_parameter_set():
    p = measured_params()
    assert p.omega_297 == pytest.approx(2 * math.pi * 1.13e6)
    assert p.g == pytest.approx(2 * math.pi * 3.4e6)
    assert p.kappa == pytest.approx(2 * math.pi * 320e6)
    assert p.gamma_total == pytest.approx(2 * math.pi * 2e6)
    assert p.beta == DEFAULT_BETA


@pytest.mark.parametrize("changes", [
    {"beta": 1.5},
    {"beta": 0.0},
    {"kappa": -1.0},
    {"g": float("nan")},
    {"n_max": 0},
])
def test_invalid_parameters_rejected(measured, changes):
    with pytest.raises(ModelParameterError):
        measured.replace(**changes)


def test_n_max_zero_allowed_without_cavity(measured):
    p = measured.replace(g=0.0, n_max=0)
    H, collapses = build_system(p)
    assert H.shape == (3, 3)


def test_hamiltonian_is_hermitian(measured):
    H, collapses = build_system(measured, include_repump=True)
    assert H.shape == (6, 6)
    assert hermiticity_error(H) < 1e-15
    assert len(collapses) == 3


def test_branching_sets_dissipator_weights(measured):
    _, (to_s, to_d, cavity) = build_system(measured)
    rate_s = np.sum(np.abs(to_s) ** 2)
    rate_d = np.sum(np.abs(to_d) ** 2)
    # two photon-number sectors carry each atomic jump
    assert rate_s / 2 == pytest.approx(2 * measured.beta * measured.gamma_total)
    assert rate_d / 2 == pytest.approx(2 * (1 - measured.beta) * measured.gamma_total)
    assert np.sum(np.abs(cavity) ** 2) / 3 == pytest.approx(2 * measured.kappa)


def test_sequence_spec_validation():
    with pytest.raises(ModelParameterError):
        PulseSequenceSpec("lambda_drive", (1e-6, 0.5e-6))
    with pytest.raises(ModelParameterError):
        PulseSequenceSpec("lambda_drive", ())
    with pytest.raises(ModelParameterError):
        PulseSequenceSpec("sideband", (1e-6,))


def test_wrong_sequence_kind_rejected(measured):
    with pytest.raises(ModelParameterError):
        simulate_lambda_sequence(measured, repump_spec([0.0, 1e-6]))


def test_lambda_sequence_conserves_population(measured):
    traj = simulate_lambda_sequence(measured, lambda_spec(DURATIONS))
    np.testing.assert_allclose(traj.population_sum(), 1.0, atol=1e-8)
    assert traj.diagnostics["trace_error"] <= 1e-8
    assert traj.diagnostics["min_eigenvalue"] >= -1e-8
    p_s = traj.observables["P_S"]
    assert p_s[0] == pytest.approx(1.0)
    assert np.all(np.diff(p_s) <= 1e-6)


def test_zero_coupling_leaves_cavity_empty(measured):
    traj = simulate_lambda_sequence(measured.replace(g=0.0), lambda_spec(DURATIONS[:5]))
    np.testing.assert_allclose(traj.photon_number, 0.0, atol=1e-14)


def test_grid_without_zero_is_supported(measured):
    traj = simulate_lambda_sequence(measured, lambda_spec([10e-6, 20e-6]))
    assert traj.times.tolist() == [10e-6, 20e-6]
    assert traj.observables["P_S"][0] < 1.0


def test_photon_cutoff_converged(measured):
    one = simulate_lambda_sequence(measured, lambda_spec(DURATIONS))
    two = simulate_lambda_sequence(measured.replace(n_max=2), lambda_spec(DURATIONS))
    for level in ("S", "E", "D"):
        np.testing.assert_allclose(one.populations[level], two.populations[level], atol=1e-4)


def test_rk_and_expm_agree_on_short_sequence(measured):
    durations = np.linspace(0.0, 0.4e-6, 5)
    exact = simulate_lambda_sequence(measured, lambda_spec(durations), method="expm")
    stepped = simulate_lambda_sequence(measured, lambda_spec(durations), method="rk")
    np.testing.assert_allclose(stepped.populations["S"], exact.populations["S"], atol=1e-7)


def test_off_resonant_decay_time(measured):
    assert 29e-6 <= _fitted_tau(measured.replace(g=0.0)) <= 39e-6


def test_resonant_decay_time(measured):
    assert 14.6e-6 <= _fitted_tau(measured) <= 19.8e-6


def test_spectral_rate_matches_fitted_decay(measured):
    tau = _fitted_tau(measured)
    assert 1.0 / decay_rate_from_spectrum(measured) == pytest.approx(tau, rel=0.05)


def test_analytic_rates(measured):
    rates = analytic_rates(measured)
    assert rates.purcell_pop_rate / KHZ == pytest.approx(72.25, rel=1e-3)
    assert rates.purcell_pop_rate_detuned == pytest.approx(rates.purcell_pop_rate)
    assert 29e-6 <= rates.tau_off_estimate <= 35e-6
    assert rates.tau_on_estimate < rates.tau_off_estimate
    assert rates.warnings == []


def test_analytic_decay_times_track_master_equation(measured):
    rates = analytic_rates(measured)
    assert rates.tau_on_estimate == pytest.approx(_fitted_tau(measured), rel=0.25)
    assert rates.tau_off_estimate == pytest.approx(_fitted_tau(measured.replace(g=0.0)), rel=0.25)


def test_analytic_rates_flag_regime_violations(measured):
    rates = analytic_rates(measured.replace(kappa=5 * MHZ, omega_297=3 * MHZ))
    assert len(rates.warnings) == 2


def test_undriven_system_never_decays(measured):
    rates = analytic_rates(measured.replace(omega_297=0.0))
    assert math.isinf(rates.tau_off_estimate)
    assert math.isinf(rates.tau_on_estimate)


def test_half_fsr_detuning_suppresses_purcell_channel(measured):
    half_fsr = 2 * math.pi * 325.85e9
    rates = analytic_rates(measured.replace(delta_cavity=half_fsr))
    assert rates.purcell_pop_rate_detuned < 1e-5 * rates.purcell_pop_rate


def test_simulated_purcell_rate_matches_bad_cavity_formula(measured):
    simulated = simulated_purcell_rate(measured)
    assert simulated == pytest.approx(2 * measured.g ** 2 / measured.kappa, rel=0.10)


def test_purcell_rate_scales_with_g_squared(measured):
    base = simulated_purcell_rate(measured)
    doubled = simulated_purcell_rate(measured.replace(g=2 * measured.g))
    assert doubled / base == pytest.approx(4.0, rel=0.05)


def test_repump_sequence_empties_d(measured):
    p = measured.replace(omega_935=2 * math.pi * 1.14e6)
    traj = simulate_repump_sequence(p, repump_spec(repump_durations(500e-9)))
    repumped = traj.observables["repumped"]
    assert repumped[0] == pytest.approx(0.0, abs=1e-12)
    assert repumped[-1] > 0.99
    assert traj.populations["D"][-1] < 0.01


def test_repump_intensity_factor_slows_repumping(measured):
    p = measured.replace(omega_935=2 * math.pi * 1.14e6)
    durations = repump_durations(500e-9)
    full = repump_tau(p, durations)
    half = repump_tau(p, durations, intensity_factor=0.5)
    assert half / full == pytest.approx(2.0, rel=0.1)


def test_repump_intensity_factor_range_checked(measured):
    with pytest.raises(ModelParameterError):
        simulate_repump_sequence(measured, repump_spec([0.0, 1e-6]), intensity_factor=1.5)


def test_repump_calibration_hits_target(measured):
    omega = calibrate_repump_drive(measured, target_tau=500e-9)
    tau = repump_tau(measured.replace(omega_935=omega), repump_durations(500e-9))
    assert tau == pytest.approx(500e-9, rel=1e-4)
    # weak-drive estimate sqrt(2 gamma / (beta tau))
    assert omega / MHZ == pytest.approx(1.14, rel=0.3)


def test_repump_fit_is_saturating(measured):
    p = measured.replace(omega_935=2 * math.pi * 1.14e6)
    traj = simulate_repump_sequence(p, repump_spec(repump_durations(500e-9)))
    fit = fit_tau_saturating(traj.times, traj.observables["repumped"])
    assert fit["A"] == pytest.approx(1.0, abs=0.05)


def test_generator_dimension(measured):
    assert build_generator(measured).matrix.shape == (36, 36)
    bare = SystemParams(omega_297=0.0, g=0.0, kappa=0.0, gamma_total=1.0, n_max=0)
    assert bare.hilbert().dim == 3
