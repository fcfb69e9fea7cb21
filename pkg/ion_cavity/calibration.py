import logging
import math

import numpy as np
from scipy.optimize import brentq

from estimation.fitting import FitError, fit_tau_saturating
from ion_cavity.model import MHZ, ModelParameterError, SystemParams
from ion_cavity.sequences import repump_spec, simulate_repump_sequence

log = logging.getLogger(__name__)

# Repump time constant at the mode maximum.
DEFAULT_TARGET_TAU = 500e-9
GRID_SPAN = 12.0
GRID_POINTS = 61
MAX_BRACKET_EXPANSIONS = 8


def repump_durations(target_tau=DEFAULT_TARGET_TAU):
    return np.linspace(0.0, GRID_SPAN * target_tau, GRID_POINTS)


def repump_tau(p: SystemParams, durations, intensity_factor=1.0, method="expm"):
    """tau_D from a saturating fit to the simulated repump curve."""
    traj = simulate_repump_sequence(p, repump_spec(durations), intensity_factor, method=method)
    fit = fit_tau_saturating(traj.times, traj.observables["repumped"])
    if not fit.usable:
        raise FitError(f"repump fit did not converge: {fit.message}")
    return fit["tau"]


def calibrate_repump_drive(p: SystemParams, target_tau=DEFAULT_TARGET_TAU, method="expm"):
    """omega_935 giving repump time constant target_tau at full intracavity intensity.

    The search starts from the weak-drive estimate omega^2 = 2 gamma / (beta tau).
    """
    if not target_tau > 0:
        raise ModelParameterError(f"target repump time must be > 0, got {target_tau}")
    durations = repump_durations(target_tau)
    guess = math.sqrt(2.0 * p.gamma_total / (p.beta * target_tau))

    def excess(omega):
        return repump_tau(p.replace(omega_935=omega), durations, method=method) - target_tau

    lo, hi = 0.5 * guess, 2.0 * guess
    f_lo, f_hi = excess(lo), excess(hi)
    for _ in range(MAX_BRACKET_EXPANSIONS):
        if f_lo > 0 > f_hi:
            break
        if f_lo <= 0:
            lo *= 0.5
            f_lo = excess(lo)
        if f_hi >= 0:
            hi *= 2.0
            f_hi = excess(hi)
    else:
        if not f_lo > 0 > f_hi:
            raise ModelParameterError(
                f"no 935-nm drive between 2pi x {lo / MHZ:.3g} and {hi / MHZ:.3g} MHz "
                f"reaches tau_D = {target_tau * 1e9:.4g} ns")

    omega = brentq(excess, lo, hi, rtol=1e-6)
    log.info(f"Repump calibrated: omega_935 = 2pi x {omega / MHZ:.4g} MHz for "
             f"tau_D = {target_tau * 1e9:.4g} ns (weak-drive estimate {guess / MHZ:.4g} MHz)")
    return omega
