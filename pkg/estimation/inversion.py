"""Recover the 297-nm Rabi frequency and the ion-cavity coupling from measured
Lambda-decay time constants by root finding over the full master equation.

tau(omega) falls monotonically below saturation and tau(g) falls monotonically
with g, so a sign change of tau_simulated - tau_measured across the bracket
isolates a single root.
"""
import dataclasses
import itertools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from estimation.fitting import FitError, fit_tau_decaying
from ion_cavity.model import MHZ, SystemParams
from ion_cavity.sequences import lambda_spec, simulate_lambda_sequence
from sweep.manager import SweepManager
from sweep.registry import SampleCache

log = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-4
DEFAULT_OMEGA_BRACKET = (0.05 * MHZ, 20.0 * MHZ)
DEFAULT_G_BRACKET = (0.0, 30.0 * MHZ)
DEFAULT_T_MAX = 100e-6
DEFAULT_N_TIMES = 41


class BracketError(ValueError):
    def __init__(self, message, achievable_range):
        super().__init__(message)
        self.achievable_range = tuple(achievable_range)


def default_durations(t_max=DEFAULT_T_MAX, n_times=DEFAULT_N_TIMES):
    return np.linspace(0.0, t_max, int(n_times))


def tau_from_lambda_sequence(p: SystemParams, durations=None, method="expm", integrator=None,
                             fitting=None, cache: SampleCache = None):
    """Fitted tau of the simulated S population, memoised per parameter set, grid and options."""
    grid = default_durations() if durations is None else np.asarray(durations, dtype=float)
    cache = SampleCache.get() if cache is None else cache
    key = ("lambda_tau", dataclasses.astuple(p), tuple(grid.tolist()), method,
           tuple(sorted((integrator or {}).items())), tuple(sorted((fitting or {}).items())))

    def compute():
        traj = simulate_lambda_sequence(p, lambda_spec(grid), method=method, integrator=integrator)
        fit = fit_tau_decaying(traj.times, traj.observables["P_S"], **(fitting or {}))
        if not fit.usable:
            raise FitError(f"decay fit did not converge at omega={p.omega_297 / MHZ:.4g} MHz, "
                           f"g={p.g / MHZ:.4g} MHz: {fit.message}")
        log.debug(f"tau({p.omega_297 / MHZ:.5g}, {p.g / MHZ:.5g} MHz) = "
                  f"{fit['tau'] * 1e6:.5g} us")
        return fit["tau"]

    return cache.get_or_compute(key, compute)


class _Sampler:
    """Shared state of one inversion: the base parameters and how a sample is evaluated."""

    def __init__(self, base, durations, method, integrator, fitting, cache, manager):
        self.base = base
        self.durations = default_durations() if durations is None else durations
        self.method = method
        self.integrator = integrator
        self.fitting = fitting
        self.cache = SampleCache.get() if cache is None else cache
        self.manager = manager or SweepManager()

    def tau(self, **changes):
        return tau_from_lambda_sequence(self.base.replace(**changes), self.durations, self.method,
                                        self.integrator, self.fitting, self.cache)


def invert_rabi_from_tau(tau_off, fixed: SystemParams, durations=None, bracket=None,
                         rtol=DEFAULT_RTOL, method="expm", integrator=None, fitting=None,
                         cache=None, manager=None):
    """omega_297 whose off-resonant (g = 0) Lambda decay reproduces tau_off."""
    if not tau_off > 0:
        raise BracketError(f"tau_off must be > 0, got {tau_off}", (0.0, np.inf))
    lo, hi = bracket or DEFAULT_OMEGA_BRACKET
    if not 0 < lo < hi:
        raise BracketError(f"invalid Rabi frequency bracket ({lo}, {hi})", (0.0, np.inf))
    sampler = _Sampler(fixed.replace(g=0.0), durations, method, integrator, fitting, cache, manager)

    def tau_at(omega):
        return sampler.tau(omega_297=omega)

    tau_lo, tau_hi = sampler.manager.map(tau_at, [lo, hi])
    if not tau_hi <= tau_off <= tau_lo:
        raise BracketError(
            f"tau_off = {tau_off * 1e6:.4g} us is outside the achievable range "
            f"[{tau_hi * 1e6:.4g}, {tau_lo * 1e6:.4g}] us for omega_297/2pi in "
            f"[{lo / MHZ:.4g}, {hi / MHZ:.4g}] MHz", (tau_hi, tau_lo))

    omega = brentq(lambda w: tau_at(w) - tau_off, lo, hi, rtol=rtol)
    log.info(f"tau_off = {tau_off * 1e6:.4g} us -> omega_297 = 2pi x {omega / MHZ:.5g} MHz")
    return omega


def invert_g_from_tau(tau_on, omega_297, fixed: SystemParams, durations=None, bracket=None,
                      rtol=DEFAULT_RTOL, method="expm", integrator=None, fitting=None,
                      cache=None, manager=None):
    """Coupling g whose resonant Lambda decay at the given drive reproduces tau_on."""
    if not tau_on > 0:
        raise BracketError(f"tau_on must be > 0, got {tau_on}", (0.0, np.inf))
    lo, hi = bracket or DEFAULT_G_BRACKET
    if not 0 <= lo < hi:
        raise BracketError(f"invalid coupling bracket ({lo}, {hi})", (0.0, np.inf))
    base = fixed.replace(omega_297=omega_297, n_max=max(fixed.n_max, 1))
    sampler = _Sampler(base, durations, method, integrator, fitting, cache, manager)

    def tau_at(g):
        return sampler.tau(g=g)

    tau_free, tau_lo, tau_hi = sampler.manager.map(tau_at, [0.0, lo, hi])
    if abs(tau_on - tau_free) <= rtol * tau_free:
        log.info(f"tau_on = {tau_on * 1e6:.4g} us matches the cavity-free decay; g = 0")
        return 0.0
    if tau_on > tau_free:
        raise BracketError(
            f"tau_on = {tau_on * 1e6:.4g} us exceeds the cavity-free tau = {tau_free * 1e6:.4g} us; "
            f"the cavity cannot slow the transfer", (tau_hi, tau_free))
    if not tau_hi <= tau_on <= tau_lo:
        raise BracketError(
            f"tau_on = {tau_on * 1e6:.4g} us is outside the achievable range "
            f"[{tau_hi * 1e6:.4g}, {tau_lo * 1e6:.4g}] us for g/2pi in "
            f"[{lo / MHZ:.4g}, {hi / MHZ:.4g}] MHz", (tau_hi, tau_lo))

    g = brentq(lambda x: tau_at(x) - tau_on, lo, hi, rtol=rtol)
    log.info(f"tau_on = {tau_on * 1e6:.4g} us -> g = 2pi x {g / MHZ:.5g} MHz")
    return g


@dataclass
class ExtractionResult:
    omega_297: float
    g: float
    gamma_total: float
    omega_range: tuple = None
    g_range: tuple = None

    @property
    def g_over_gamma(self):
        return self.g / self.gamma_total


def extract_coupling(tau_off, tau_on, fixed: SystemParams, tau_off_err=0.0, tau_on_err=0.0,
                     omega_bracket=None, g_bracket=None, **options):
    """Off-resonant decay fixes omega_297, the resonant decay then fixes g.

    With uncertainties given, the pipeline is repeated at every combination of the
    tau endpoints and the spread of the results is reported as a range.
    """
    manager = options.get("manager") or SweepManager()
    options = dict(options, manager=manager)
    omega = invert_rabi_from_tau(tau_off, fixed, bracket=omega_bracket, **options)
    g = invert_g_from_tau(tau_on, omega, fixed, bracket=g_bracket, **options)
    result = ExtractionResult(omega_297=omega, g=g, gamma_total=fixed.gamma_total)
    if not (tau_off_err > 0 or tau_on_err > 0):
        return result

    off_points = sorted({tau_off - tau_off_err, tau_off + tau_off_err})
    on_points = sorted({tau_on - tau_on_err, tau_on + tau_on_err})
    omegas = manager.map(
        lambda t: invert_rabi_from_tau(t, fixed, bracket=omega_bracket, **options), off_points)
    combos = list(itertools.product(omegas, on_points))
    gs = manager.map(
        lambda c: invert_g_from_tau(c[1], c[0], fixed, bracket=g_bracket, **options), combos)
    result.omega_range = (min(omegas), max(omegas))
    result.g_range = (min(gs), max(gs))
    log.info(f"g/2pi = {g / MHZ:.4g} MHz, range [{result.g_range[0] / MHZ:.4g}, "
             f"{result.g_range[1] / MHZ:.4g}] MHz, g/gamma = {result.g_over_gamma:.3g}")
    return result
