from dataclasses import dataclass, field

import numpy as np

from lindblad.errors import LindbladError

# E is the D[3/2]1/2 level shared by both legs of the Lambda system.
ATOMIC_LEVELS = ("S", "E", "D")


@dataclass(frozen=True)
class HilbertConfig:
    """Three atomic levels tensored with a Fock space truncated at n_max photons."""

    n_max: int = 1
    atomic_levels: tuple = ATOMIC_LEVELS

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise LindbladError(f"photon cutoff must be an integer >= 0, got {self.n_max}")
        if tuple(self.atomic_levels) != ATOMIC_LEVELS:
            raise LindbladError(f"atomic levels are fixed to {ATOMIC_LEVELS}")

    @property
    def photon_dim(self):
        return self.n_max + 1

    @property
    def atomic_dim(self):
        return len(self.atomic_levels)

    @property
    def dim(self):
        return self.atomic_dim * self.photon_dim


@dataclass(frozen=True)
class Operators:
    cfg: HilbertConfig
    a: np.ndarray
    number: np.ndarray
    identity: np.ndarray
    projectors: dict = field(default_factory=dict)

    def compose(self, atomic=None, photon=None):
        """Kronecker product with the atomic factor first; None means identity."""
        atomic = np.eye(self.cfg.atomic_dim) if atomic is None else atomic
        photon = np.eye(self.cfg.photon_dim) if photon is None else photon
        return np.kron(atomic, photon).astype(complex)

    def ket(self, label):
        vec = np.zeros(self.cfg.atomic_dim, dtype=complex)
        vec[self.cfg.atomic_levels.index(label)] = 1.0
        return vec

    def atomic_transition(self, i, j):
        """|i><j| on the atomic factor only."""
        return np.outer(self.ket(i), self.ket(j).conj())

    def transition(self, i, j):
        """|i><j| (x) I on the full space."""
        return self.compose(self.atomic_transition(i, j))

    def fock_projector(self, n):
        proj = np.zeros((self.cfg.photon_dim, self.cfg.photon_dim), dtype=complex)
        proj[n, n] = 1.0
        return self.compose(None, proj)

    def basis_state(self, label, n=0):
        """Density matrix |label, n><label, n|."""
        photon = np.zeros(self.cfg.photon_dim, dtype=complex)
        photon[n] = 1.0
        ket = np.kron(self.ket(label), photon)
        return np.outer(ket, ket.conj())


def destroy(photon_dim):
    return np.diag(np.sqrt(np.arange(1, photon_dim)), k=1).astype(complex)


def build_operators(cfg: HilbertConfig) -> Operators:
    a_photon = destroy(cfg.photon_dim)
    photon_eye = np.eye(cfg.photon_dim)
    projectors = {}
    for i, label in enumerate(cfg.atomic_levels):
        atomic = np.zeros((cfg.atomic_dim, cfg.atomic_dim))
        atomic[i, i] = 1.0
        projectors[label] = np.kron(atomic, photon_eye).astype(complex)
    return Operators(
        cfg=cfg,
        a=np.kron(np.eye(cfg.atomic_dim), a_photon).astype(complex),
        number=np.kron(np.eye(cfg.atomic_dim), a_photon.conj().T @ a_photon).astype(complex),
        identity=np.eye(cfg.dim, dtype=complex),
        projectors=projectors,
    )
