import logging

from cli.config import cavity_geometry, dipole, system_params
from ion_cavity.model import MHZ
from optics.cavity import (coupling_from_dipole, cooperativity, free_spectral_range,
                           kappa_from_finesse, mode_volume, rayleigh_range, solid_angle_fraction,
                           symmetric_roc_from_waist, waist_from_geometry)

log = logging.getLogger(__name__)

_UM = 1e-6


def cmd_geometry(run):
    cfg = run.config
    geo = cavity_geometry(cfg)
    p = system_params(cfg)
    w = cfg.si("waist_um")
    g_peak = cfg.si("g_peak_mhz")

    fsr = free_spectral_range(geo)
    kappa_f = kappa_from_finesse(geo)
    w_geo = waist_from_geometry(geo)
    volume = mode_volume(w, geo.length)
    g_dip = coupling_from_dipole(dipole(cfg), geo, w)
    c_peak = cooperativity(g_peak, p.kappa, p.gamma_total)
    c_fit = cooperativity(p.g, p.kappa, p.gamma_total) if p.g > 0 else 0.0
    omega = solid_angle_fraction(w, geo.wavelength)

    table = run.table([("fsr", "GHz"), ("kappa_finesse", "MHz"), ("kappa", "MHz"), "finesse",
                       ("waist_geometry", "um"), ("waist", "um"), ("rayleigh_range", "um"),
                       ("mode_volume", "um^3"), ("g_dipole", "MHz"), ("g_peak", "MHz"),
                       "cooperativity", "cooperativity_fit", "solid_angle",
                       ("roc_for_waist", "um")])
    table.add_row(
        fsr / 1e9,
        kappa_f / MHZ,
        p.kappa / MHZ,
        geo.finesse,
        w_geo / _UM,
        w / _UM,
        rayleigh_range(w, geo.wavelength) / _UM,
        volume / _UM ** 3,
        g_dip / MHZ,
        g_peak / MHZ,
        c_peak,
        c_fit,
        omega,
        symmetric_roc_from_waist(w, geo.length, geo.wavelength) / _UM,
    )
    log.info(f"FSR {fsr / 1e9:.4g} GHz, kappa 2pi x {kappa_f / MHZ:.4g} MHz, "
             f"C = {c_peak:.3g}, solid angle {omega:.3g}")
    return table, {"fsr_ghz": fsr / 1e9, "kappa_finesse_mhz": kappa_f / MHZ,
                   "cooperativity": c_peak, "solid_angle": omega}
