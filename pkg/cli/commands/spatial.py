import logging

import numpy as np

from cli.config import ConfigError, displacement_coupling, localization_model, mode_function
from estimation.fitting import fit_gaussian, fit_standing_wave
from ion_cavity.model import MHZ
from spatial.mode import central_cuts, simulate_scan, transverse_grid
from spatial.standing_wave import (QUOTED_LOCALIZATION, LocalizationModel, WavevectorChoice,
                                   contrast_in_definition, eta_from_period, ion_mass,
                                   localization_from_contrast, localization_report,
                                   max_visible_coupling, observed_period, simulate_standing_wave,
                                   thermal_localization)

log = logging.getLogger(__name__)

_UM, _NM, _PER_US = 1e-6, 1e-9, 1e6


def cmd_scan_mode(run):
    """Transverse repump-rate map at the mode centre with Gaussian fits of the central cuts."""
    cfg = run.config
    points = cfg["scan_points"]
    if points % 2 == 0:
        raise ConfigError(f"scan_points={points} must be odd so the scan has a centre row")
    grid = transverse_grid(cfg.si("scan_half_width_um"), points)
    samples = simulate_scan(grid, mode_function(cfg), cfg.si("peak_rate_per_us"),
                            noise_seed=run.seed, noise_relative=cfg["noise_relative"])

    table = run.table([("y", "um"), ("z", "um"), ("rate", "1/us"), ("sigma", "1/us")])
    table.add_columns(y=samples.positions[:, 1] / _UM, z=samples.positions[:, 2] / _UM,
                      rate=samples.rates / _PER_US, sigma=samples.sigma / _PER_US)

    scalars = {}
    sigma_ok = cfg["noise_relative"] > 0
    for axis, (u, rates, sigma) in zip("yz", central_cuts(samples, points)):
        fit = fit_gaussian(u, rates, sigma if sigma_ok else None, **run.fit_options())
        scalars[f"w_{axis}_um"] = fit["w"] / _UM
        scalars[f"w_{axis}_err_um"] = fit.uncertainties["w"] / _UM
        log.info(f"w_{axis} = {fit['w'] / _UM:.3g} +- {fit.uncertainties['w'] / _UM:.2g} um")
    return table, scalars


def cmd_standing_wave(run):
    """Repump rate along the cavity axis, smeared to the configured contrast, and its fit."""
    cfg = run.config
    lam = cfg.si("wavelength_nm")
    coupling = displacement_coupling(cfg)
    noise = cfg["noise_relative"]
    # the configured contrast is taken as the visibility seen in the ion frame
    sim_model = LocalizationModel(cfg["contrast_definition"], WavevectorChoice.OPTICAL_K)
    sigma = localization_from_contrast(cfg["contrast"], sim_model, lam)
    model = LocalizationModel(cfg["contrast_definition"], WavevectorChoice.OPTICAL_K, sigma=sigma)

    span = cfg.si("standing_wave_span_um")
    positions = np.linspace(-span / 2.0, span / 2.0, cfg["standing_wave_points"])
    peak = cfg.si("peak_rate_per_us")
    rates, rate_sigma = simulate_standing_wave(positions, peak, model, lam, coupling,
                                               noise_relative=noise, noise_seed=run.seed)
    clean, _ = simulate_standing_wave(positions, peak, model, lam, coupling)
    fit = fit_standing_wave(positions, rates, rate_sigma if noise > 0 else None,
                            **run.fit_options())
    eta_fit, sigma_eta = eta_from_period(fit["period"], lam, fit.uncertainties["period"])

    table = run.table([("stage_position", "um"), ("rate", "1/us"), ("sigma", "1/us"),
                       ("model_rate", "1/us")])
    table.add_columns(stage_position=positions / _UM, rate=rates / _PER_US,
                      sigma=rate_sigma / _PER_US, model_rate=clean / _PER_US)
    expected = observed_period(lam, coupling)
    contrast = contrast_in_definition(abs(fit["contrast"]), cfg["contrast_definition"])
    log.info(f"Standing wave: period {fit['period'] / _NM:.1f} nm (expected {expected / _NM:.1f}), "
             f"contrast {contrast:.3g}, eta = {eta_fit.eta:.3f} +- {sigma_eta:.3f}")
    return table, {"period_nm": fit["period"] / _NM, "contrast": contrast,
                   "eta": eta_fit.eta, "sigma_eta": sigma_eta, "sigma_nm": sigma / _NM}


def cmd_localization(run):
    """Localization implied by the measured contrast under every convention, plus the thermal limit."""
    cfg = run.config
    lam = cfg.si("wavelength_nm")
    period = observed_period(lam, displacement_coupling(cfg))
    g_peak = cfg.si("g_peak_mhz")

    table = run.table(["contrast_definition", "wavevector_choice", ("sigma", "nm"),
                       ("deviation", "nm"), ("g_max_visible", "MHz")])
    for row in localization_report(cfg["contrast"], lam, period):
        model = LocalizationModel(row["contrast_definition"], row["wavevector_choice"],
                                  sigma=row["sigma"], period=period)
        table.add_row(row["contrast_definition"], row["wavevector_choice"], row["sigma"] / _NM,
                      row["deviation"] / _NM, max_visible_coupling(g_peak, model, lam) / MHZ)

    sigma_t = thermal_localization(cfg.si("temperature_mk"), ion_mass(cfg["ion_mass_u"]),
                                   cfg.si("trap_freq_mhz"))
    thermal = localization_model(cfg, sigma=sigma_t, period=period)
    table.add_row("thermal", thermal.wavevector_choice.value, sigma_t / _NM,
                  (sigma_t - QUOTED_LOCALIZATION) / _NM,
                  max_visible_coupling(g_peak, thermal, lam) / MHZ)
    log.info(f"Thermal localization at {cfg['temperature_mk']:g} mK: {sigma_t / _NM:.1f} nm")
    return table, {"period_nm": period / _NM, "thermal_sigma_nm": sigma_t / _NM}
