import logging

import numpy as np

from cli.config import ConfigError, system_params
from cli.table import TableError, read_table
from estimation.fitting import fit_tau_decaying, fit_tau_saturating
from estimation.inversion import extract_coupling
from ion_cavity.model import MHZ

log = logging.getLogger(__name__)

_US = 1e-6


def _load_curve(path):
    """First column T in us, second the measured population, optional third its sigma."""
    if not path:
        raise ConfigError("fit-tau needs a data table (--data PATH)")
    try:
        columns = list(read_table(path).values())
    except OSError as e:
        raise ConfigError(f"cannot read data: {e.strerror}", source=path) from None
    except TableError as e:
        raise ConfigError(str(e)) from None
    if len(columns) < 2:
        raise ConfigError("data table needs at least a time and a value column", source=path)
    sigma = columns[2] if len(columns) > 2 else None
    if sigma is not None and not np.all(sigma > 0):
        sigma = None
    return columns[0] * _US, columns[1], sigma


def cmd_fit_tau(run):
    t, y, sigma = _load_curve(run.data)
    kind = run.config["fit_kind"]
    if kind == "saturating":
        fit = fit_tau_saturating(t, y, sigma, **run.fit_options())
    else:
        fit = fit_tau_decaying(t, y, sigma, **run.fit_options())

    table = run.table(["kind", "A", "A_err", ("tau", "us"), ("tau_err", "us"), "c", "c_err",
                       "chi2", "converged", "iterations"])
    table.add_row(
        fit.kind,
        fit["A"],
        fit.uncertainties["A"],
        fit["tau"] / _US,
        fit.uncertainties["tau"] / _US,
        fit.parameters.get("c", 0.0),
        fit.uncertainties.get("c", 0.0),
        fit.chi2,
        fit.converged,
        fit.iterations,
    )
    log.info(f"{fit.kind}: tau = {fit['tau'] / _US:.4g} +- {fit.uncertainties['tau'] / _US:.2g} us")
    return table, {"tau_us": fit["tau"] / _US, "tau_err_us": fit.uncertainties["tau"] / _US,
                   "converged": fit.converged}


def cmd_invert_g(run):
    """Rabi frequency from tau_off, then g from tau_on, with the tau endpoints propagated."""
    cfg = run.config
    p = system_params(cfg)
    opts = run.inversion_options()
    shared = dict(durations=run.durations(), rtol=opts["rtol"], method=run.method(),
                  integrator=run.integrator_options(), fitting=run.fit_options(),
                  cache=run.cache, manager=run.manager)
    result = extract_coupling(
        cfg.si("tau_off_us"), cfg.si("tau_on_us"), p,
        tau_off_err=cfg.si("tau_off_err_us"), tau_on_err=cfg.si("tau_on_err_us"),
        omega_bracket=opts["omega_bracket"], g_bracket=opts["g_bracket"], **shared)
    omega_range = result.omega_range or (result.omega_297, result.omega_297)
    g_range = result.g_range or (result.g, result.g)

    table = run.table([("tau_off", "us"), ("tau_on", "us"), ("omega_297", "MHz"),
                       ("omega_297_low", "MHz"), ("omega_297_high", "MHz"), ("g", "MHz"),
                       ("g_low", "MHz"), ("g_high", "MHz"), ("gamma", "MHz"), "g_over_gamma"])
    table.add_row(
        cfg["tau_off_us"],
        cfg["tau_on_us"],
        result.omega_297 / MHZ,
        omega_range[0] / MHZ,
        omega_range[1] / MHZ,
        result.g / MHZ,
        g_range[0] / MHZ,
        g_range[1] / MHZ,
        p.gamma_total / MHZ,
        result.g_over_gamma,
    )
    return table, {"omega_297_mhz": result.omega_297 / MHZ, "g_mhz": result.g / MHZ,
                   "g_over_gamma": result.g_over_gamma}
