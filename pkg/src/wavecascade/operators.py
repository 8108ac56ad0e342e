"""Discrete transport and damping operators in wavenumber space.

transport:  c * div_k( k/|k| * u )
damping:    ( c (H + 1/2) / |k| + 4 pi^2 nu |k|^2 ) * u

The k-derivative is the pseudo-spectral one,
``d/dk_j g = DFT[ -2 pi i x~_j DFT^-1[g] ]`` with the Nyquist-zeroed position
array ``x~_j``.  The equation is linear, so no dealiasing is applied.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .field import SpectralField, fft_forward, fft_inverse, project_low_modes
from .grid import WavenumberGrid


@dataclass(frozen=True)
class OperatorParams:
    c: float = 1.0
    H: float = 1.0 / 3.0
    nu: float = 0.0
    kappa: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"cascade speed c must be positive, got {self.c}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.nu < 0:
            raise ValueError(f"viscosity must be nonnegative, got {self.nu}")


@lru_cache(maxsize=32)
def _unit_vectors(grid: WavenumberGrid) -> tuple:
    # k_j/|k| on the Nyquist plane k_j = N/2 is its own index reflection, so it
    # is zeroed there (as x~_j is) to keep the multiplier odd and the operator
    # Hermitian-preserving.
    out = []
    for j in range(grid.d):
        u = grid.unit_vector(j)
        idx = [slice(None)] * grid.d
        idx[j] = grid.N // 2
        u[tuple(idx)] = 0.0
        u.setflags(write=False)
        out.append(u)
    return tuple(out)


@lru_cache(maxsize=32)
def damping_multiplier(grid: WavenumberGrid, p: OperatorParams) -> np.ndarray:
    """``c(H+1/2)/|k| + 4 pi^2 nu |k|^2``, defined as 0 at the origin."""
    k = grid.k_mod
    out = np.zeros(grid.shape)
    nz = k > 0
    out[nz] = p.c * (p.H + 0.5) / k[nz] + 4 * np.pi**2 * p.nu * k[nz] ** 2
    out.setflags(write=False)
    return out


def spectral_derivative(uh: SpectralField, axis: int) -> SpectralField:
    g = uh.grid
    if not 0 <= axis < g.d:
        raise ValueError(f"axis {axis} invalid for d={g.d}")
    phys = fft_inverse(uh.data, g.d)
    return uh.with_data(fft_forward(-2j * np.pi * g.x_tilde[axis] * phys, g.d))


def transport_array(data: np.ndarray, grid: WavenumberGrid, p: OperatorParams) -> np.ndarray:
    # The d derivatives share one forward transform: sum_j DFT[x_j IDFT[.]] = DFT[sum_j ...].
    units = _unit_vectors(grid)
    acc = None
    for j in range(grid.d):
        term = grid.x_tilde[j] * fft_inverse(units[j] * data, grid.d)
        acc = term if acc is None else acc + term
    out = fft_forward((-2j * np.pi * p.c) * acc, grid.d)
    out[..., grid.low_mode_mask(p.kappa)] = 0.0
    return out


def damping_array(data: np.ndarray, grid: WavenumberGrid, p: OperatorParams) -> np.ndarray:
    return damping_multiplier(grid, p) * data


def apply_transport(uh: SpectralField, p: OperatorParams) -> SpectralField:
    return uh.with_data(transport_array(uh.data, uh.grid, p))


def apply_transport_per_axis(uh: SpectralField, p: OperatorParams) -> SpectralField:
    """Reference form: one full spectral derivative per axis, summed."""
    units = _unit_vectors(uh.grid)
    out = SpectralField.zeros(uh.grid, uh.batch_shape)
    for j in range(uh.grid.d):
        out = out + spectral_derivative(uh.with_data(units[j] * uh.data), j)
    return project_low_modes(out * p.c, p.kappa)


def apply_damping(uh: SpectralField, p: OperatorParams) -> SpectralField:
    return uh.with_data(damping_array(uh.data, uh.grid, p))


def rhs_array(data: np.ndarray, grid: WavenumberGrid, p: OperatorParams) -> np.ndarray:
    """``transport(u) + damping(u)``."""
    return transport_array(data, grid, p) + damping_array(data, grid, p)
