import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import DOP853

from lindblad.errors import IntegrationError, LindbladError
from lindblad.liouvillian import DensityState, check_state, unvectorize, vectorize
from lindblad.operators import build_operators

log = logging.getLogger(__name__)

METHODS = ("rk", "expm")

# Hygiene thresholds reported (not enforced) on every trajectory.
TRACE_TOL = 1e-8
HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = -1e-8


@dataclass
class Trajectory:
    times: np.ndarray
    populations: dict
    photon_number: np.ndarray = None
    states: list = None
    observables: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def population_sum(self):
        return sum(self.populations.values())


def _validate_times(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise LindbladError("time grid must be a non-empty 1-d sequence")
    if np.any(np.diff(times) <= 0):
        raise LindbladError("time grid must be strictly increasing")
    return times


def _rk_states(L, y0, times, rtol, atol, max_steps, max_step_factor):
    max_step = max_step_factor / max(L.rate_scale(), 1e-300)
    out = [y0]
    if times.size == 1:
        return out
    solver = DOP853(lambda t, y: L.matrix @ y, times[0], y0, times[-1],
                    rtol=rtol, atol=atol, max_step=max_step)
    idx, steps = 1, 0
    while idx < times.size:
        if steps >= max_steps:
            raise IntegrationError(
                f"step budget of {max_steps} exhausted at rtol={rtol:g}", solver.t)
        message = solver.step()
        steps += 1
        if solver.status == "failed":
            raise IntegrationError(f"integrator failed: {message}", solver.t)
        dense = solver.dense_output()
        while idx < times.size and times[idx] <= solver.t:
            out.append(dense(times[idx]))
            idx += 1
    log.debug(f"rk: {steps} steps to t={times[-1]:.4g} s (max_step={max_step:.3g} s)")
    return out


def _expm_states(L, y0, times):
    out = [y0]
    cache = {}
    y = y0
    for dt in np.diff(times):
        key = float(f"{dt:.12e}")
        if key not in cache:
            cache[key] = scipy.linalg.expm(L.matrix * dt)
        y = cache[key] @ y
        out.append(y)
    log.debug(f"expm: {len(cache)} distinct propagator(s) for {times.size} times")
    return out


def evolve(rho0, L, times, method="rk", rtol=1e-8, atol=1e-10, max_steps=2_000_000,
           max_step_factor=0.1, keep_states=False) -> Trajectory:
    """Propagate rho0 (the state at times[0]) under the generator L.

    ``rk`` is an adaptive 8(5,3) embedded Runge-Kutta stepper whose step is capped at
    max_step_factor / ||L||; ``expm`` multiplies by exp(L dt) between requested times.
    """
    if method not in METHODS:
        raise LindbladError(f"unknown integration method '{method}', expected one of {METHODS}")
    times = _validate_times(times)
    state = rho0 if isinstance(rho0, DensityState) else DensityState(np.asarray(rho0))
    if L.dim != state.dim:
        raise LindbladError(f"state dimension {state.dim} does not match generator {L.dim}")

    y0 = state.vector()
    if method == "rk":
        vectors = _rk_states(L, y0, times, rtol, atol, max_steps, max_step_factor)
    else:
        vectors = _expm_states(L, y0, times)

    basis = state.basis
    ops = build_operators(basis) if basis is not None else None
    matrices = [unvectorize(v, state.dim) for v in vectors]

    worst = {"trace_error": 0.0, "hermiticity_error": 0.0, "min_eigenvalue": 0.0}
    for rho in matrices:
        d = check_state(rho)
        worst["trace_error"] = max(worst["trace_error"], d["trace_error"])
        worst["hermiticity_error"] = max(worst["hermiticity_error"], d["hermiticity_error"])
        worst["min_eigenvalue"] = min(worst["min_eigenvalue"], d["min_eigenvalue"])
    if (worst["trace_error"] > TRACE_TOL or worst["hermiticity_error"] > HERMITIAN_TOL
            or worst["min_eigenvalue"] < POSITIVITY_TOL):
        log.warning(f"State hygiene outside tolerance: {worst}")

    populations = {}
    photon_number = None
    if ops is not None:
        for label, proj in ops.projectors.items():
            populations[label] = np.array([np.trace(proj @ rho).real for rho in matrices])
        photon_number = np.array([np.trace(ops.number @ rho).real for rho in matrices])
    else:
        diag = np.array([np.diag(rho).real for rho in matrices])
        populations = {str(i): diag[:, i] for i in range(state.dim)}

    return Trajectory(
        times=times,
        populations=populations,
        photon_number=photon_number,
        states=[DensityState(rho, basis) for rho in matrices] if keep_states else None,
        diagnostics=worst,
    )


def propagate_dense(rho0, L, t):
    """Reference propagation by a single dense matrix exponential."""
    state = rho0 if isinstance(rho0, DensityState) else DensityState(np.asarray(rho0))
    return unvectorize(scipy.linalg.expm(L.matrix * t) @ vectorize(state.matrix), state.dim)
