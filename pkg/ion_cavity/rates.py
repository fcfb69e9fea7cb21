"""Closed-form bad-cavity, weak-drive rates used to cross-check the master equation."""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ion_cavity.model import SystemParams, build_generator
from lindblad.operators import build_operators
from lindblad.spectrum import slow_mode

log = logging.getLogger(__name__)

# kappa must exceed g and gamma by this factor for adiabatic elimination to hold.
BAD_CAVITY_RATIO = 10.0


@dataclass
class AnalyticRates:
    p_e_weak: float
    purcell_pop_rate: float
    purcell_pop_rate_detuned: float
    tau_off_estimate: float
    tau_on_estimate: float
    warnings: list = field(default_factory=list)


def _inverse(rate):
    return math.inf if rate <= 0 else 1.0 / rate


def analytic_rates(p: SystemParams) -> AnalyticRates:
    warnings = []
    if p.kappa < BAD_CAVITY_RATIO * max(p.g, p.gamma_total):
        warnings.append(f"not in the bad-cavity regime: kappa < {BAD_CAVITY_RATIO:g} * max(g, gamma)")
    if p.omega_297 > p.gamma_total:
        warnings.append("drive above the weak-drive regime: omega_297 > gamma_total")
    for w in warnings:
        log.warning(w)

    p_e = (p.omega_297 ** 2 / 4.0) / (p.delta_laser ** 2 + p.gamma_total ** 2
                                      + p.omega_297 ** 2 / 2.0)
    purcell = 2.0 * p.g ** 2 / p.kappa
    purcell_detuned = 2.0 * p.g ** 2 * p.kappa / (p.kappa ** 2 + p.delta_cavity ** 2)
    leak = 2.0 * (1.0 - p.beta) * p.gamma_total
    return AnalyticRates(
        p_e_weak=p_e,
        purcell_pop_rate=purcell,
        purcell_pop_rate_detuned=purcell_detuned,
        tau_off_estimate=_inverse(p_e * leak),
        tau_on_estimate=_inverse(p_e * (leak + purcell_detuned)),
        warnings=warnings,
    )


def _s_projector(p):
    return build_operators(p.hilbert()).projectors["S"]


def decay_rate_from_spectrum(p: SystemParams):
    """Slowest Liouvillian rate seen by the S population of the Lambda drive."""
    return slow_mode(build_generator(p), _s_projector(p)).rate


def _excited_fraction(p, mode):
    ops = build_operators(p.hilbert())
    s = np.trace(ops.projectors["S"] @ mode)
    e = np.trace(ops.projectors["E"] @ mode)
    return float((e / (s + e)).real)


def simulated_purcell_rate(p: SystemParams):
    """Cavity-induced population rate out of E, read off the full master equation.

    The slow eigenmode gives the transfer rate and the quasi-steady E fraction of the
    S-E manifold; their ratio is the total rate out of E into D, with and without the cavity.
    """
    proj = _s_projector(p)
    on = slow_mode(build_generator(p), proj)
    off_params = p.replace(g=0.0)
    off = slow_mode(build_generator(off_params), proj)
    on_rate = on.rate / _excited_fraction(p, on.mode)
    off_rate = off.rate / _excited_fraction(off_params, off.mode)
    return on_rate - off_rate
