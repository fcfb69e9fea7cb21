"""Thermally smeared standing wave along the cavity axis.

A Gaussian position spread sigma reduces the visibility of cos^2(k z) by the
Debye-Waller factor exp(-2 k^2 sigma^2).
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.constants import atomic_mass, k as k_B

from spatial.mode import SpatialModelError

log = logging.getLogger(__name__)

# Localization quoted alongside the 40 % contrast measurement.
QUOTED_LOCALIZATION = 140e-9


class ContrastDefinition(str, Enum):
    PEAK_TO_PEAK_OVER_SUM = "peak_to_peak_over_sum"
    PEAK_TO_PEAK_OVER_MAX = "peak_to_peak_over_max"


class WavevectorChoice(str, Enum):
    OPTICAL_K = "optical_k"
    OBSERVED_PERIOD_K = "observed_period_k"


@dataclass(frozen=True)
class LocalizationModel:
    contrast_definition: ContrastDefinition = ContrastDefinition.PEAK_TO_PEAK_OVER_SUM
    wavevector_choice: WavevectorChoice = WavevectorChoice.OPTICAL_K
    sigma: float = 0.0
    # Standing-wave period in stage coordinates, needed for OBSERVED_PERIOD_K.
    period: float = None

    def __post_init__(self):
        object.__setattr__(self, "contrast_definition", ContrastDefinition(self.contrast_definition))
        object.__setattr__(self, "wavevector_choice", WavevectorChoice(self.wavevector_choice))
        if self.sigma < 0:
            raise SpatialModelError(f"sigma must be >= 0, got {self.sigma}")
        if self.wavevector_choice is WavevectorChoice.OBSERVED_PERIOD_K and not (
                self.period and self.period > 0):
            raise SpatialModelError("observed_period_k needs a positive period")

    def wavevector(self, wavelength):
        if self.wavevector_choice is WavevectorChoice.OBSERVED_PERIOD_K:
            # cos^2(k z) repeats every pi / k
            return math.pi / self.period
        return 2.0 * math.pi / wavelength


@dataclass(frozen=True)
class DisplacementCoupling:
    """Fraction of a cavity-assembly displacement followed by the ion's equilibrium position."""

    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta < 1.0:
            raise SpatialModelError(f"eta must lie in [0, 1), got {self.eta}")


def debye_waller(sigma, k):
    return math.exp(-2.0 * k ** 2 * sigma ** 2)


def thermal_average_coupling(zbar, model: LocalizationModel, k):
    """<cos^2(k z)> for z ~ N(zbar, sigma^2)."""
    zbar = np.asarray(zbar, dtype=float)
    value = 0.5 * (1.0 + debye_waller(model.sigma, k) * np.cos(2.0 * k * zbar))
    return float(value) if value.ndim == 0 else value


def _visibility_from_factor(x, definition):
    if definition is ContrastDefinition.PEAK_TO_PEAK_OVER_MAX:
        return 2.0 * x / (1.0 + x)
    return x


def _factor_from_visibility(v, definition):
    if definition is ContrastDefinition.PEAK_TO_PEAK_OVER_MAX:
        return v / (2.0 - v)
    return v


def contrast_in_definition(sum_visibility, definition):
    """Peak-to-peak/sum visibility expressed in the given contrast definition."""
    return _visibility_from_factor(sum_visibility, ContrastDefinition(definition))


def standing_wave_contrast(sigma, model: LocalizationModel, wavelength):
    k = model.wavevector(wavelength)
    return _visibility_from_factor(debye_waller(sigma, k), model.contrast_definition)


def localization_from_contrast(contrast, model: LocalizationModel, wavelength):
    """Invert the Debye-Waller relation: sigma = sqrt(ln(1/x) / (2 k^2))."""
    if not 0.0 < contrast < 1.0:
        raise SpatialModelError(f"contrast must lie strictly between 0 and 1, got {contrast}")
    k = model.wavevector(wavelength)
    x = _factor_from_visibility(contrast, model.contrast_definition)
    return math.sqrt(math.log(1.0 / x) / (2.0 * k ** 2))


def observed_period(wavelength, coupling: DisplacementCoupling):
    """Standing-wave period in stage coordinates when the ion co-moves by a fraction eta."""
    return (wavelength / 2.0) / (1.0 - coupling.eta)


def eta_from_period(period, wavelength, sigma_period=0.0):
    if not period >= wavelength / 2.0:
        raise SpatialModelError(
            f"period {period:.4g} m is shorter than half the wavelength {wavelength / 2:.4g} m")
    eta = 1.0 - wavelength / (2.0 * period)
    sigma_eta = wavelength / (2.0 * period ** 2) * sigma_period
    return DisplacementCoupling(eta), sigma_eta


def thermal_localization(temperature, mass, omega_trap):
    """RMS thermal spread sqrt(k_B T / (m w^2)) of a harmonically bound ion."""
    for name, value in (("temperature", temperature), ("mass", mass), ("omega_trap", omega_trap)):
        if not value > 0:
            raise SpatialModelError(f"{name} must be > 0, got {value}")
    return math.sqrt(k_B * temperature / (mass * omega_trap ** 2))


def ion_mass(mass_u):
    return mass_u * atomic_mass


def max_visible_coupling(g_peak, model: LocalizationModel, wavelength):
    """g_peak * sqrt(<cos^2> at an antinode) = g_peak * sqrt((1 + V) / 2)."""
    if not g_peak > 0:
        raise SpatialModelError(f"peak coupling must be > 0, got {g_peak}")
    visibility = debye_waller(model.sigma, model.wavevector(wavelength))
    return g_peak * math.sqrt((1.0 + visibility) / 2.0)


def simulate_standing_wave(stage_positions, peak_rate, model: LocalizationModel, wavelength,
                           coupling: DisplacementCoupling, noise_relative=0.0, noise_seed=None):
    """Repump rate versus cavity-stage displacement along the axis."""
    u = np.asarray(stage_positions, dtype=float)
    k = 2.0 * math.pi / wavelength
    clean = peak_rate * thermal_average_coupling((1.0 - coupling.eta) * u, model, k)
    rng = np.random.default_rng(noise_seed)
    noisy = clean * (1.0 + noise_relative * rng.standard_normal(clean.shape))
    return noisy, noise_relative * np.maximum(clean, 1e-3 * peak_rate)


def localization_report(contrast, wavelength, period):
    """sigma under every contrast/wavevector convention, with the offset from 140 nm."""
    rows = []
    for definition in ContrastDefinition:
        for choice in WavevectorChoice:
            model = LocalizationModel(definition, choice, period=period)
            sigma = localization_from_contrast(contrast, model, wavelength)
            rows.append({
                "contrast_definition": definition.value,
                "wavevector_choice": choice.value,
                "sigma": sigma,
                "deviation": sigma - QUOTED_LOCALIZATION,
            })
            log.info(f"{definition.value}/{choice.value}: sigma = {sigma * 1e9:.1f} nm "
                     f"({(sigma - QUOTED_LOCALIZATION) * 1e9:+.1f} nm vs 140 nm)")
    return rows
