import logging
from dataclasses import dataclass

import numpy as np

from ion_cavity.model import ModelParameterError, SystemParams, build_generator
from lindblad.integrate import evolve
from lindblad.liouvillian import DensityState
from lindblad.operators import build_operators

log = logging.getLogger(__name__)

SEQUENCE_KINDS = ("lambda_drive", "cavity_repump")
MONOTONE_TOL = 1e-6


@dataclass(frozen=True)
class PulseSequenceSpec:
    kind: str
    durations: tuple
    # Initialization is treated as ideal; the duration is kept for reporting.
    init_duration: float = 5e-6
    observable: str = "S"

    def __post_init__(self):
        if self.kind not in SEQUENCE_KINDS:
            raise ModelParameterError(f"unknown sequence kind '{self.kind}'")
        grid = np.asarray(self.durations, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or np.any(grid < 0):
            raise ModelParameterError("drive durations must be a non-empty list of values >= 0")
        if np.any(np.diff(grid) <= 0):
            raise ModelParameterError("drive durations must be strictly increasing")
        if self.init_duration < 0:
            raise ModelParameterError("initialization duration must be >= 0")

    def grid(self):
        return np.asarray(self.durations, dtype=float)


def lambda_spec(durations, init_duration=5e-6):
    return PulseSequenceSpec("lambda_drive", tuple(float(t) for t in durations),
                             init_duration, "S")


def repump_spec(durations, init_duration=0.0):
    return PulseSequenceSpec("cavity_repump", tuple(float(t) for t in durations),
                             init_duration, "repumped")


def _run(p, L, initial_label, grid, method, integrator):
    ops = build_operators(p.hilbert())
    rho0 = DensityState(ops.basis_state(initial_label, 0), p.hilbert())
    times = grid
    prepend = grid[0] > 0
    if prepend:
        times = np.concatenate(([0.0], grid))
    traj = evolve(rho0, L, times, method=method, **(integrator or {}))
    if prepend:
        traj.times = traj.times[1:]
        traj.populations = {k: v[1:] for k, v in traj.populations.items()}
        traj.photon_number = traj.photon_number[1:]
        if traj.states is not None:
            traj.states = traj.states[1:]
    return traj


def simulate_lambda_sequence(p: SystemParams, spec: PulseSequenceSpec, method="expm",
                             integrator=None):
    """S population after driving the 297-nm leg for each duration, starting in |S, 0>."""
    if spec.kind != "lambda_drive":
        raise ModelParameterError(f"expected a lambda_drive sequence, got '{spec.kind}'")
    L = build_generator(p)
    traj = _run(p, L, "S", spec.grid(), method, integrator)
    p_s = traj.populations["S"]
    traj.observables["P_S"] = p_s
    rise = float(np.max(np.diff(p_s))) if p_s.size > 1 else 0.0
    if rise > MONOTONE_TOL:
        log.warning(f"P_S is not monotone: rises by {rise:.3g} between samples")
    return traj


def simulate_repump_sequence(p: SystemParams, spec: PulseSequenceSpec, intensity_factor=1.0,
                             method="expm", integrator=None):
    """Population pumped out of D by intracavity 935-nm light, starting in |D, 0>.

    The 297-nm laser is off; the local 935-nm Rabi coupling is omega_935 * sqrt(intensity_factor).
    """
    if spec.kind != "cavity_repump":
        raise ModelParameterError(f"expected a cavity_repump sequence, got '{spec.kind}'")
    if not 0.0 <= intensity_factor <= 1.0:
        raise ModelParameterError(f"intensity factor must lie in [0, 1], got {intensity_factor}")
    local = p.replace(omega_297=0.0, omega_935=p.omega_935 * np.sqrt(intensity_factor))
    L = build_generator(local, include_repump=True)
    traj = _run(local, L, "D", spec.grid(), method, integrator)
    traj.observables["repumped"] = 1.0 - traj.populations["D"]
    return traj
