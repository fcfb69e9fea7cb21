import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

# Relative error of each 1/tau_D point in the mode scans.
DEFAULT_SCAN_NOISE = 0.15


class SpatialModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModeFunction:
    """Gaussian standing-wave mode; x runs along the cavity axis, y and z across it."""

    w_y: float
    w_z: float
    k: float
    y0: float = 0.0
    z0: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if not (self.w_y > 0 and self.w_z > 0):
            raise SpatialModelError("mode waists must be > 0")
        if not self.k > 0:
            raise SpatialModelError("wavevector must be > 0")

    @classmethod
    def from_wavelength(cls, w_y, w_z, wavelength, **offsets):
        return cls(w_y=w_y, w_z=w_z, k=2.0 * math.pi / wavelength, **offsets)


@dataclass
class ScanSamples:
    positions: np.ndarray
    rates: np.ndarray
    sigma: np.ndarray


def mode_intensity(r, m: ModeFunction):
    """Normalised intensity at position(s) r = (x, y, z); wavefront curvature is neglected."""
    r = np.asarray(r, dtype=float)
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    value = (np.cos(m.k * (x - m.phase)) ** 2
             * np.exp(-2.0 * (y - m.y0) ** 2 / m.w_y ** 2)
             * np.exp(-2.0 * (z - m.z0) ** 2 / m.w_z ** 2))
    return float(value) if np.ndim(value) == 0 else value


def transverse_grid(half_width, points, x=0.0):
    """(y, z) raster at fixed axial position x, rows ordered y-major."""
    axis = np.linspace(-half_width, half_width, int(points))
    yy, zz = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([np.full(yy.size, x), yy.ravel(), zz.ravel()])


def simulate_scan(grid, m: ModeFunction, peak_rate, noise_seed=None,
                  noise_relative=DEFAULT_SCAN_NOISE) -> ScanSamples:
    """Repump rate 1/tau_D = peak_rate * M(r) with multiplicative Gaussian noise."""
    if not peak_rate > 0:
        raise SpatialModelError(f"peak rate must be > 0, got {peak_rate}")
    if noise_relative < 0:
        raise SpatialModelError("relative noise must be >= 0")
    positions = np.asarray(grid, dtype=float).reshape(-1, 3)
    clean = peak_rate * mode_intensity(positions, m)
    rng = np.random.default_rng(noise_seed)
    noisy = clean * (1.0 + noise_relative * rng.standard_normal(clean.shape))
    sigma = noise_relative * np.maximum(clean, 1e-3 * peak_rate)
    log.debug(f"Simulated scan of {positions.shape[0]} points, noise {noise_relative:.0%}")
    return ScanSamples(positions=positions, rates=noisy, sigma=sigma)


def central_cuts(samples: ScanSamples, points):
    """Row and column through the centre of a transverse_grid scan (odd point count)."""
    points = int(points)
    if points % 2 == 0:
        raise SpatialModelError("central cuts need an odd number of points per axis")
    mid = points // 2
    idx = np.arange(points * points).reshape(points, points)
    along_y, along_z = idx[:, mid], idx[mid, :]
    return (
        (samples.positions[along_y, 1], samples.rates[along_y], samples.sigma[along_y]),
        (samples.positions[along_z, 2], samples.rates[along_z], samples.sigma[along_z]),
    )
