import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from lindblad.errors import DegenerateSpectrumError, LindbladError
from lindblad.liouvillian import unvectorize, vectorize

log = logging.getLogger(__name__)

# Eigenvalues closer than this (relative) are one numerically repeated eigenvalue.
_SAME_EIGENVALUE_RTOL = 1e-9
# |lambda| below this fraction of ||L|| counts as stationary.
_STATIONARY_RTOL = 1e-9


@dataclass(frozen=True)
class SlowMode:
    rate: float
    eigenvalue: complex
    mode: np.ndarray
    overlap: float


def _overlap(observable, right_vec):
    obs = vectorize(observable)
    norm = np.linalg.norm(obs) * np.linalg.norm(right_vec)
    if norm == 0.0:
        return 0.0
    # tr(O R) = vec(O^T) . vec(R)
    return float(abs(vectorize(np.asarray(observable).T) @ right_vec) / norm)


def _distinct(values):
    """Collapse numerically repeated eigenvalues and complex-conjugate partners."""
    kept = []
    for v in values:
        scale = max(abs(v), 1e-300)
        if any(abs(v - k) <= _SAME_EIGENVALUE_RTOL * scale
               or abs(v - np.conj(k)) <= _SAME_EIGENVALUE_RTOL * scale for k in kept):
            continue
        kept.append(v)
    return kept


def slow_mode(L, observable, overlap_threshold=1e-6, degeneracy_rtol=1e-6) -> SlowMode:
    eigvals, right = scipy.linalg.eig(L.matrix)
    scale = max(L.rate_scale(), 1e-300)
    rates = -eigvals.real

    stationary = np.abs(eigvals) <= _STATIONARY_RTOL * scale
    if not np.any(stationary):
        raise LindbladError("generator has no stationary eigenvalue")

    candidates = []
    for idx in np.flatnonzero(~stationary):
        ov = _overlap(observable, right[:, idx])
        if ov > overlap_threshold:
            candidates.append((rates[idx], idx, ov))
    if not candidates:
        raise LindbladError("observable has no overlap with any decaying eigenmode")

    candidates.sort(key=lambda c: c[0])
    slowest = candidates[0][0]
    close = [c for c in candidates if c[0] - slowest <= degeneracy_rtol * abs(slowest)]
    distinct = _distinct([eigvals[c[1]] for c in close])
    if len(distinct) > 1:
        raise DegenerateSpectrumError(
            "slow eigenvalues within the degeneracy tolerance", distinct)

    rate, idx, ov = max(close, key=lambda c: c[2])
    log.debug(f"Slowest mode: lambda={eigvals[idx]:.6g}, overlap={ov:.3g}, "
              f"{int(np.sum(stationary))} stationary eigenvalue(s)")
    return SlowMode(rate=float(rate), eigenvalue=complex(eigvals[idx]),
                    mode=unvectorize(right[:, idx], L.dim), overlap=ov)


def slowest_decay_rate(L, observable, overlap_threshold=1e-6, degeneracy_rtol=1e-6):
    return slow_mode(L, observable, overlap_threshold, degeneracy_rtol).rate
