"""Yb+ Lambda system (S, E=D[3/2]1/2, D) coupled to one cavity mode.

Rates follow the amplitude convention: kappa and gamma_total are field/dipole
decay rates, so populations decay at 2*kappa and 2*gamma_total.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from lindblad.liouvillian import build_liouvillian
from lindblad.operators import HilbertConfig, build_operators

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6

# Probability that E decays back to S; the remainder feeds D.
DEFAULT_BETA = 0.982


class ModelParameterError(ValueError):
    pass


@dataclass(frozen=True)
class SystemParams:
    omega_297: float
    g: float
    kappa: float
    gamma_total: float
    beta: float = DEFAULT_BETA
    delta_laser: float = 0.0
    delta_cavity: float = 0.0
    n_max: int = 1
    omega_935: float = 0.0

    def __post_init__(self):
        for name in ("omega_297", "g", "kappa", "gamma_total", "omega_935"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ModelParameterError(f"{name} must be a finite rate >= 0, got {value}")
        if not 0.0 < self.beta < 1.0:
            raise ModelParameterError(f"beta must lie strictly between 0 and 1, got {self.beta}")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ModelParameterError(f"n_max must be an integer >= 0, got {self.n_max}")
        if self.g > 0 and self.n_max < 1:
            raise ModelParameterError("n_max must be >= 1 when the cavity coupling g > 0")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def hilbert(self):
        return HilbertConfig(n_max=self.n_max)


def measured_params(**overrides):
    """Parameter set of the cavity-stimulated Lambda-transition measurement."""
    values = dict(
        omega_297=1.13 * MHZ,
        g=3.4 * MHZ,
        kappa=320.0 * MHZ,
        gamma_total=2.0 * MHZ,
        beta=DEFAULT_BETA,
        n_max=1,
    )
    values.update(overrides)
    return SystemParams(**values)


def build_system(p: SystemParams, cfg: HilbertConfig = None, include_repump=False):
    """Hamiltonian (rad/s, hbar = 1) and collapse operators of the ion-cavity model."""
    cfg = cfg or p.hilbert()
    if cfg.n_max != p.n_max:
        raise ModelParameterError(
            f"Hilbert cutoff n_max={cfg.n_max} does not match parameters n_max={p.n_max}")
    ops = build_operators(cfg)
    es, se = ops.transition("E", "S"), ops.transition("S", "E")
    ed_atomic = ops.atomic_transition("E", "D")

    H = (p.delta_laser * ops.projectors["E"]
         + p.delta_cavity * ops.number
         + 0.5 * p.omega_297 * (es + se))
    coupling = ops.compose(ed_atomic, None) @ ops.a
    H = H + p.g * (coupling + coupling.conj().T)
    if include_repump:
        ed = ops.transition("E", "D")
        H = H + 0.5 * p.omega_935 * (ed + ed.conj().T)

    collapses = [
        np.sqrt(2.0 * p.beta * p.gamma_total) * ops.transition("S", "E"),
        np.sqrt(2.0 * (1.0 - p.beta) * p.gamma_total) * ops.transition("D", "E"),
        np.sqrt(2.0 * p.kappa) * ops.a,
    ]
    return H, collapses


def build_generator(p: SystemParams, include_repump=False):
    H, collapses = build_system(p, include_repump=include_repump)
    return build_liouvillian(H, collapses)
