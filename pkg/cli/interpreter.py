import logging

import numpy as np

from cli.commands import dynamics, estimation, geometry, spatial
from cli.config import ConfigError, RunConfig, serialize_config
from cli.table import ResultTable
from ion_cavity.model import MHZ
from sweep.manager import SweepManager
from sweep.registry import SampleCache

log = logging.getLogger(__name__)


class Run:
    """Holds the state of one command invocation."""

    def __init__(self, config: RunConfig, settings=None, out=None, data=None, run_logger=None):
        self.config = config
        self.settings = settings or {}
        self.out = out
        self.data = data
        self.run_logger = run_logger
        self.manager = SweepManager(self.settings)
        cache_on = self.settings.get("sweep", {}).get("cache", True)
        self.cache = SampleCache.get() if cache_on else SampleCache()

    @property
    def seed(self):
        return self.config["noise_seed"]

    def rng(self, stream=0):
        """Independent seeded generator per noise stream of a command."""
        if self.seed is None:
            return np.random.default_rng()
        return np.random.default_rng([self.seed, stream])

    def method(self):
        return self.settings.get("integrator", {}).get("method", "expm")

    def integrator_options(self):
        cfg = self.settings.get("integrator", {})
        return {
            "rtol": float(cfg.get("rtol", 1e-8)),
            "atol": float(cfg.get("atol", 1e-10)),
            "max_steps": int(cfg.get("max_steps", 2_000_000)),
            "max_step_factor": float(cfg.get("max_step_factor", 0.1)),
        }

    def fit_options(self):
        cfg = self.settings.get("fitting", {})
        return {
            "max_iterations": int(cfg.get("max_iterations", 200)),
            "ftol": float(cfg.get("ftol", 1e-10)),
            "xtol": float(cfg.get("xtol", 1e-12)),
        }

    def inversion_options(self):
        cfg = self.settings.get("inversion", {})
        omega_lo, omega_hi = cfg.get("omega_bracket_mhz", [0.05, 20.0])
        g_lo, g_hi = cfg.get("g_bracket_mhz", [0.0, 30.0])
        return {
            "rtol": float(cfg.get("rtol", 1e-4)),
            "omega_bracket": (omega_lo * MHZ, omega_hi * MHZ),
            "g_bracket": (g_lo * MHZ, g_hi * MHZ),
        }

    def durations(self):
        return np.linspace(0.0, self.config.si("t_max_us"), self.config["n_times"])

    def table(self, columns):
        out_cfg = self.settings.get("output", {})
        return ResultTable(columns, delimiter=out_cfg.get("delimiter", "\t"),
                           significant_digits=out_cfg.get("significant_digits", 9))


# ---------------------------------------------------------------------------
# Command dispatch table
# ---------------------------------------------------------------------------

COMMANDS = {
    "geometry":        geometry.cmd_geometry,
    "rates":           dynamics.cmd_rates,
    "simulate-lambda": dynamics.cmd_simulate_lambda,
    "reproduce-fig3":  dynamics.cmd_reproduce_fig3,
    "repump":          dynamics.cmd_repump,
    "fit-tau":         estimation.cmd_fit_tau,
    "invert-g":        estimation.cmd_invert_g,
    "scan-mode":       spatial.cmd_scan_mode,
    "standing-wave":   spatial.cmd_standing_wave,
    "localization":    spatial.cmd_localization,
}

# Column schemas, shown by --help.
SCHEMAS = {
    "geometry": "fsr[GHz] kappa_finesse[MHz] kappa[MHz] finesse waist_geometry[um] waist[um] "
                "rayleigh_range[um] mode_volume[um^3] g_dipole[MHz] g_peak[MHz] cooperativity "
                "cooperativity_fit solid_angle roc_for_waist[um]",
    "rates": "p_e_weak purcell_rate[kHz] purcell_rate_detuned[kHz] purcell_rate_simulated[kHz] "
             "tau_off_analytic[us] tau_on_analytic[us] tau_spectrum[us] cooperativity "
             "g_over_gamma warnings",
    "simulate-lambda": "t[us] P_S P_E P_D photon_number",
    "reproduce-fig3": "t[us] P_S_on P_S_on_sigma P_S_off P_S_off_sigma tau_on[us] "
                      "tau_on_err[us] tau_off[us] tau_off_err[us]",
    "repump": "t[us] repumped P_D fit omega_935[MHz] tau_D[us]",
    "fit-tau": "kind A A_err tau[us] tau_err[us] c c_err chi2 converged iterations",
    "invert-g": "tau_off[us] tau_on[us] omega_297[MHz] omega_297_low[MHz] omega_297_high[MHz] "
                "g[MHz] g_low[MHz] g_high[MHz] gamma[MHz] g_over_gamma",
    "scan-mode": "y[um] z[um] rate[1/us] sigma[1/us]",
    "standing-wave": "stage_position[um] rate[1/us] sigma[1/us] model_rate[1/us]",
    "localization": "contrast_definition wavevector_choice sigma[nm] deviation[nm] "
                    "g_max_visible[MHz]",
}


def run_command(name, run: Run) -> ResultTable:
    handler = COMMANDS.get(name)
    if handler is None:
        raise ConfigError(f"unknown command '{name}', expected one of {', '.join(COMMANDS)}")
    log.info(f"Running {name}")
    if run.run_logger:
        run.run_logger.start_run(name, serialize_config(run.config), run.seed)
    table, scalars = handler(run)
    if run.out:
        table.write(run.out)
        log.info(f"{name}: wrote {len(table.rows)} row(s) to {run.out}")
    if run.run_logger:
        run.run_logger.log_result(len(table.rows), table.names, scalars)
    return table
