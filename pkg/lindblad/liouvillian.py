"""Lindblad generators on column-stacked density matrices.

With column stacking vec(A X B) = (B^T (x) A) vec(X), so

    -i[H, rho]          ->  -i (I (x) H - H^T (x) I)
    C rho C^dag         ->  conj(C) (x) C
    {C^dag C, rho} / 2  ->  (I (x) C^dag C + (C^dag C)^T (x) I) / 2
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from lindblad.errors import DimensionMismatchError, LindbladError, NonHermitianError

log = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-12


def vectorize(rho):
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvectorize(vec, dim):
    return np.asarray(vec, dtype=complex).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class DensityState:
    matrix: np.ndarray
    basis: object = None

    @property
    def dim(self):
        return self.matrix.shape[0]

    def vector(self):
        return vectorize(self.matrix)


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray

    @property
    def dim(self):
        """Hilbert-space dimension d (the superoperator is d^2 x d^2)."""
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, rho):
        return unvectorize(self.matrix @ vectorize(rho), self.dim)

    def rate_scale(self):
        """Spectral norm, an upper bound on every rate in the generator."""
        return float(np.linalg.norm(self.matrix, 2))


def _check_square(op, dim, name):
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionMismatchError(f"{name} is not square: shape {op.shape}")
    if dim is not None and op.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has dimension {op.shape[0]}, expected {dim}")
    return op.astype(complex)


def hermiticity_error(op):
    scale = max(1.0, float(np.max(np.abs(op))))
    return float(np.max(np.abs(op - op.conj().T))) / scale


def build_liouvillian(H, collapses=(), hermitian_rtol=HERMITIAN_RTOL) -> Liouvillian:
    H = _check_square(H, None, "Hamiltonian")
    dim = H.shape[0]
    err = hermiticity_error(H)
    if err > hermitian_rtol:
        raise NonHermitianError(f"Hamiltonian is not Hermitian (relative error {err:.3g})")

    eye = np.eye(dim, dtype=complex)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for k, C in enumerate(collapses):
        C = _check_square(C, dim, f"collapse operator {k}")
        CdC = C.conj().T @ C
        L += np.kron(C.conj(), C) - 0.5 * np.kron(eye, CdC) - 0.5 * np.kron(CdC.T, eye)
    log.debug(f"Built Liouvillian: d={dim}, {len(collapses)} collapse operator(s)")
    return Liouvillian(L)


def expectation(state, op):
    rho = state.matrix if isinstance(state, DensityState) else np.asarray(state)
    return complex(np.trace(op @ rho))


def check_state(rho):
    """Trace, Hermiticity and positivity diagnostics for a density matrix."""
    rho = rho.matrix if isinstance(rho, DensityState) else np.asarray(rho)
    herm = 0.5 * (rho + rho.conj().T)
    return {
        "trace_error": float(abs(np.trace(rho) - 1.0)),
        "hermiticity_error": float(np.max(np.abs(rho - rho.conj().T))),
        "min_eigenvalue": float(np.min(np.linalg.eigvalsh(herm))),
    }


def steady_state(L: Liouvillian) -> DensityState:
    null = scipy.linalg.null_space(L.matrix, rcond=1e-10)
    if null.shape[1] == 0:
        # Fall back to the eigenvector closest to zero.
        w, v = np.linalg.eig(L.matrix)
        null = v[:, [int(np.argmin(np.abs(w)))]]
    elif null.shape[1] > 1:
        raise LindbladError(f"stationary state is not unique ({null.shape[1]} null vectors)")
    rho = unvectorize(null[:, 0], L.dim)
    rho = rho / np.trace(rho)
    return DensityState(0.5 * (rho + rho.conj().T))
