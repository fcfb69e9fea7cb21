import logging
import math

import numpy as np

from cli.config import cavity_geometry, system_params
from estimation.fitting import (DegenerateFitError, fit_tau_decaying, fit_tau_saturating,
                                shot_noise_sigma)
from ion_cavity.calibration import calibrate_repump_drive, repump_durations
from ion_cavity.model import MHZ
from ion_cavity.rates import analytic_rates, decay_rate_from_spectrum, simulated_purcell_rate
from ion_cavity.sequences import (lambda_spec, repump_spec, simulate_lambda_sequence,
                                  simulate_repump_sequence)
from optics.cavity import coupling_regime, free_spectral_range

log = logging.getLogger(__name__)

_US = 1e-6
_KHZ = 2.0 * math.pi * 1e3
FLAT_TOLERANCE = 1e-9


def _khz(rate):
    return rate / _KHZ


def _us(tau):
    return tau / _US


def _saturating_curve(times, fit):
    return fit["A"] * (1.0 - np.exp(-np.asarray(times) / fit["tau"]))


def _simulate(run, p):
    return simulate_lambda_sequence(p, lambda_spec(run.durations()), method=run.method(),
                                    integrator=run.integrator_options())


def _lambda_tau(times, p_s, fit_options):
    """Fitted decay time of P_S; inf when S does not decay (no drive, flat curve)."""
    if np.ptp(p_s) < FLAT_TOLERANCE:
        return math.inf
    try:
        return fit_tau_decaying(times, p_s, **fit_options)["tau"]
    except DegenerateFitError as e:
        log.warning(f"Lambda decay fit degenerate, reporting tau = inf: {e}")
        return math.inf


def cmd_simulate_lambda(run):
    p = system_params(run.config)
    traj = _simulate(run, p)
    table = run.table([("t", "us"), "P_S", "P_E", "P_D", "photon_number"])
    table.add_columns(t=traj.times / _US, P_S=traj.populations["S"], P_E=traj.populations["E"],
                      P_D=traj.populations["D"], photon_number=traj.photon_number)
    tau = _lambda_tau(traj.times, traj.observables["P_S"], run.fit_options())
    log.info(f"Lambda decay: tau = {_us(tau):.4g} us, diagnostics {traj.diagnostics}")
    return table, {"tau_us": _us(tau), **traj.diagnostics}


def _measured_curve(run, p, stream):
    """P_S(T) and its fit; with shot_repetitions > 0 the points are binomially sampled."""
    traj = _simulate(run, p)
    p_s = traj.observables["P_S"]
    repetitions = run.config["shot_repetitions"]
    if repetitions > 0:
        counts = run.rng(stream).binomial(repetitions, np.clip(p_s, 0.0, 1.0))
        measured = counts / repetitions
        sigma = shot_noise_sigma(measured, repetitions)
        fit = fit_tau_decaying(traj.times, measured, sigma, **run.fit_options())
    else:
        measured, sigma = p_s, np.zeros_like(p_s)
        fit = fit_tau_decaying(traj.times, measured, **run.fit_options())
    return traj.times, measured, sigma, fit, traj.diagnostics


def cmd_reproduce_fig3(run):
    """Resonant and off-resonant S-population decay with their fitted time constants."""
    p = system_params(run.config)
    resonant, off_resonant = run.manager.map(
        lambda item: _measured_curve(run, *item), [(p, 1), (p.replace(g=0.0), 2)])
    times, on, on_sigma, on_fit, _ = resonant
    _, off, off_sigma, off_fit, _ = off_resonant

    table = run.table([("t", "us"), "P_S_on", "P_S_on_sigma", "P_S_off", "P_S_off_sigma",
                       ("tau_on", "us"), ("tau_on_err", "us"), ("tau_off", "us"),
                       ("tau_off_err", "us")])
    n = times.size
    table.add_columns(
        t=times / _US, P_S_on=on, P_S_on_sigma=on_sigma, P_S_off=off, P_S_off_sigma=off_sigma,
        tau_on=np.full(n, _us(on_fit["tau"])),
        tau_on_err=np.full(n, _us(on_fit.uncertainties["tau"])),
        tau_off=np.full(n, _us(off_fit["tau"])),
        tau_off_err=np.full(n, _us(off_fit.uncertainties["tau"])),
    )
    log.info(f"tau_off = {_us(off_fit['tau']):.4g} us, tau_on = {_us(on_fit['tau']):.4g} us")
    return table, {"tau_on_us": _us(on_fit["tau"]), "tau_off_us": _us(off_fit["tau"]),
                   "converged": on_fit.converged and off_fit.converged}


def cmd_repump(run):
    """Repump curve out of D at full intracavity intensity, calibrating omega_935 if unset."""
    cfg = run.config
    p = system_params(cfg)
    target = cfg.si("repump_tau_ns")
    omega = cfg.si("omega_935_mhz") or calibrate_repump_drive(p, target, method=run.method())
    durations = repump_durations(target)
    traj = simulate_repump_sequence(p.replace(omega_935=omega), repump_spec(durations),
                                    method=run.method(), integrator=run.integrator_options())
    repumped = traj.observables["repumped"]
    fit = fit_tau_saturating(traj.times, repumped, **run.fit_options())

    table = run.table([("t", "us"), "repumped", "P_D", "fit", ("omega_935", "MHz"),
                       ("tau_D", "us")])
    n = durations.size
    table.add_columns(t=traj.times / _US, repumped=repumped, P_D=traj.populations["D"],
                      fit=_saturating_curve(traj.times, fit),
                      omega_935=np.full(n, omega / MHZ), tau_D=np.full(n, _us(fit["tau"])))
    log.info(f"Repump: omega_935 = 2pi x {omega / MHZ:.4g} MHz, tau_D = {_us(fit['tau']):.4g} us")
    return table, {"omega_935_mhz": omega / MHZ, "tau_d_us": _us(fit["tau"])}


def cmd_rates(run):
    """Closed-form bad-cavity rates next to their master-equation counterparts."""
    cfg = run.config
    p = system_params(cfg)
    rates = analytic_rates(p)
    spectrum_rate = decay_rate_from_spectrum(p)
    simulated = simulated_purcell_rate(p)
    regime = coupling_regime(p.g, p.kappa, p.gamma_total) if p.g > 0 else {
        "cooperativity": 0.0, "g_over_gamma": 0.0}

    if p.delta_cavity:
        fsr = free_spectral_range(cavity_geometry(cfg))
        log.info(f"Cavity detuned by {p.delta_cavity / (2 * math.pi * fsr):.3g} FSR")

    table = run.table(["p_e_weak", ("purcell_rate", "kHz"), ("purcell_rate_detuned", "kHz"),
                       ("purcell_rate_simulated", "kHz"), ("tau_off_analytic", "us"),
                       ("tau_on_analytic", "us"), ("tau_spectrum", "us"), "cooperativity",
                       "g_over_gamma", "warnings"])
    table.add_row(
        rates.p_e_weak,
        _khz(rates.purcell_pop_rate),
        _khz(rates.purcell_pop_rate_detuned),
        _khz(simulated),
        _us(rates.tau_off_estimate),
        _us(rates.tau_on_estimate),
        _us(1.0 / spectrum_rate),
        regime["cooperativity"],
        regime["g_over_gamma"],
        len(rates.warnings),
    )
    return table, {"purcell_rate_khz": _khz(rates.purcell_pop_rate),
                   "purcell_rate_simulated_khz": _khz(simulated),
                   "warnings": rates.warnings}
