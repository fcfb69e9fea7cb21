"""Fabry-Perot geometry and ion-cavity coupling in closed form.

All angular rates are rad/s; kappa is the field (HWHM) decay rate.
"""
import logging
import math
from dataclasses import dataclass

from scipy.constants import c, epsilon_0, hbar

log = logging.getLogger(__name__)


class OpticsError(ValueError):
    pass


class UnstableCavityError(OpticsError):
    pass


@dataclass(frozen=True)
class CavityGeometry:
    length: float
    wavelength: float
    roc_1: float = math.inf
    roc_2: float = math.inf
    finesse: float = 1000.0

    def __post_init__(self):
        for name in ("length", "wavelength", "finesse"):
            if not getattr(self, name) > 0:
                raise OpticsError(f"{name} must be > 0, got {getattr(self, name)}")
        if not (self.roc_1 > 0 and self.roc_2 > 0):
            raise OpticsError("mirror radii of curvature must be > 0")
        product = self.g1 * self.g2
        if not 0.0 <= product <= 1.0:
            raise UnstableCavityError(
                f"unstable resonator: g1*g2 = {product:.4g} outside [0, 1]")

    @property
    def g1(self):
        return 1.0 - self.length / self.roc_1

    @property
    def g2(self):
        return 1.0 - self.length / self.roc_2

    @property
    def symmetric(self):
        return self.roc_1 == self.roc_2


@dataclass(frozen=True)
class DipoleMoment:
    d: float

    def __post_init__(self):
        if not self.d > 0:
            raise OpticsError(f"dipole moment must be > 0, got {self.d}")


def _positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise OpticsError(f"{name} must be > 0, got {value}")


def free_spectral_range(geo: CavityGeometry):
    """Longitudinal mode spacing c/2L in Hz."""
    return c / (2.0 * geo.length)


def kappa_from_finesse(geo: CavityGeometry):
    return 2.0 * math.pi * free_spectral_range(geo) / (2.0 * geo.finesse)


def finesse_from_kappa(geo: CavityGeometry, kappa):
    _positive(kappa=kappa)
    return 2.0 * math.pi * free_spectral_range(geo) / (2.0 * kappa)


def waist_from_geometry(geo: CavityGeometry):
    """1/e^2 intensity radius of the fundamental mode at the cavity waist."""
    lam, L = geo.wavelength, geo.length
    if geo.symmetric:
        R = geo.roc_1
        if math.isinf(R) or not 0.0 < L < 2.0 * R:
            raise UnstableCavityError(
                f"symmetric cavity with L={L:.4g} m and R={R:.4g} m has no bound mode")
        return math.sqrt(lam / (2.0 * math.pi) * math.sqrt(L * (2.0 * R - L)))

    g1, g2 = geo.g1, geo.g2
    product = g1 * g2
    denom = g1 + g2 - 2.0 * product
    if not 0.0 < product < 1.0 or denom == 0.0:
        raise UnstableCavityError(f"marginally stable resonator: g1*g2 = {product:.4g}")
    w0_sq = lam * L / math.pi * math.sqrt(product * (1.0 - product) / denom ** 2)
    return math.sqrt(w0_sq)


def symmetric_roc_from_waist(w0, length, wavelength):
    """Mirror radius giving waist w0 in a symmetric cavity (the back-solve behind R ~ 350 um)."""
    _positive(w0=w0, length=length, wavelength=wavelength)
    root = (2.0 * math.pi * w0 ** 2 / wavelength) ** 2 / length
    return 0.5 * (root + length)


def rayleigh_range(w0, wavelength):
    _positive(w0=w0, wavelength=wavelength)
    return math.pi * w0 ** 2 / wavelength


def mode_volume(w, length):
    _positive(w=w, length=length)
    return math.pi * w ** 2 * length / 4.0


def coupling_from_dipole(dipole: DipoleMoment, geo: CavityGeometry, w):
    """Peak single-photon coupling g = d sqrt(4c / (hbar eps0 lambda w^2 L))."""
    _positive(w=w)
    return dipole.d * math.sqrt(4.0 * c / (hbar * epsilon_0 * geo.wavelength * w ** 2 * geo.length))


def dipole_from_coupling(g, geo: CavityGeometry, w) -> DipoleMoment:
    _positive(g=g, w=w)
    return DipoleMoment(g / math.sqrt(4.0 * c / (hbar * epsilon_0 * geo.wavelength * w ** 2
                                                 * geo.length)))


def coupling_from_mode_volume(dipole: DipoleMoment, wavelength, volume):
    _positive(wavelength=wavelength, volume=volume)
    omega = 2.0 * math.pi * c / wavelength
    return dipole.d * math.sqrt(omega / (2.0 * hbar * epsilon_0 * volume))


def cooperativity(g, kappa, gamma):
    _positive(g=g, kappa=kappa, gamma=gamma)
    return g ** 2 / (kappa * gamma)


def coupling_regime(g, kappa, gamma):
    return {
        "g_over_gamma": g / gamma,
        "g_over_kappa": g / kappa,
        "cooperativity": cooperativity(g, kappa, gamma),
        "strong": g > max(kappa, gamma),
        "exceeds_dipole_decay": g > gamma,
    }


def solid_angle_fraction(w, wavelength):
    """theta^2 / 4 for the far-field divergence half-angle theta = lambda / (pi w)."""
    if wavelength < 0 or not w > wavelength:
        raise OpticsError(f"waist {w:.4g} m must exceed the wavelength {wavelength:.4g} m")
    theta = wavelength / (math.pi * w)
    return theta ** 2 / 4.0
