"""Spectral field container, DFT convention and snapshot I/O.

DFT convention (part of the external contract): the forward transform is the
unnormalized sum ``sum_x u[x] exp(-2 pi i k.x / N)``, the inverse carries the
``1/N**d`` factor.  Physical Fourier coefficients, when needed for comparison
with continuum formulas, are ``dx**d * forward(u)``.

Arrays may carry leading batch axes (ensembles); the transforms and all
operations act on the trailing ``d`` axes.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from .grid import WavenumberGrid, negate_index


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: WavenumberGrid
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape[-self.grid.d:] != self.grid.shape:
            raise ValueError(
                f"field shape {self.data.shape} does not end with grid shape {self.grid.shape}")

    @classmethod
    def zeros(cls, grid: WavenumberGrid, batch: tuple = ()) -> "SpectralField":
        return cls(grid, np.zeros(tuple(batch) + grid.shape, dtype=complex))

    @property
    def batch_shape(self) -> tuple:
        return self.data.shape[:-self.grid.d]

    def with_data(self, data: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, data)

    def __add__(self, other):
        return self.with_data(self.data + _data(other))

    def __sub__(self, other):
        return self.with_data(self.data - _data(other))

    def __mul__(self, scalar):
        return self.with_data(self.data * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_data(-self.data)


def _data(x):
    return x.data if isinstance(x, SpectralField) else x


def _axes(d: int) -> tuple:
    return tuple(range(-d, 0))


def fft_forward(u: np.ndarray, d: int) -> np.ndarray:
    return sfft.fftn(u, axes=_axes(d))


def fft_inverse(uh: np.ndarray, d: int) -> np.ndarray:
    return sfft.ifftn(uh, axes=_axes(d))


def dft_forward(u: np.ndarray, grid: WavenumberGrid) -> SpectralField:
    u = np.asarray(u)
    if u.shape[-grid.d:] != grid.shape:
        raise ValueError(f"array shape {u.shape} does not match grid {grid.shape}")
    return SpectralField(grid, fft_forward(u, grid.d))


def dft_inverse(uh: SpectralField, real: bool = True) -> np.ndarray:
    """Inverse DFT; by default returns the real part (the field is Hermitian)."""
    u = fft_inverse(uh.data, uh.grid.d)
    return u.real if real else u


def hermitian_defect(uh: SpectralField) -> float:
    """Max-norm of ``uh[k] - conj(uh[-k])``."""
    if uh.data.size == 0:
        return 0.0
    return float(np.max(np.abs(uh.data - np.conj(negate_index(uh.data, uh.grid.d)))))


def enforce_hermitian(uh: SpectralField) -> SpectralField:
    """Average a field with its conjugate reflection: ``(u[k] + conj(u[-k]))/2``."""
    partner = np.conj(negate_index(uh.data, uh.grid.d))
    return uh.with_data(0.5 * (uh.data + partner))


def project_low_modes(uh: SpectralField, kappa: float) -> SpectralField:
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    out = uh.data.copy()
    out[..., uh.grid.low_mode_mask(kappa)] = 0.0
    return uh.with_data(out)


def low_mode_residual(uh: SpectralField, kappa: float) -> float:
    vals = uh.data[..., uh.grid.low_mode_mask(kappa)]
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def l2_norm(uh: SpectralField) -> np.ndarray | float:
    """``sum_k |u[k]|**2 * dk`` (a single dk factor whatever the dimension).

    Returns one value per batch member for batched fields.
    """
    s = np.sum(np.abs(uh.data) ** 2, axis=_axes(uh.grid.d)) * uh.grid.dk
    return float(s) if np.ndim(s) == 0 else s


# --------------------------------------------------------------------------
# snapshot format
# --------------------------------------------------------------------------

SNAPSHOT_MAGIC = b"WCSF"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIdd")


def write_snapshot(path, uh: SpectralField, t: float, single: bool = False) -> Path:
    """Write a binary snapshot.

    Layout (little endian): magic ``WCSF``, u32 version, u32 d, u32 N,
    u32 bytes-per-value (8 = complex64, 16 = complex128), u32 number of
    fields, f64 L_tot, f64 t, then the raw values in C order.
    """
    path = Path(path)
    dtype = np.dtype("<c8") if single else np.dtype("<c16")
    data = np.ascontiguousarray(uh.data, dtype=dtype)
    n_fields = int(np.prod(uh.batch_shape, dtype=np.int64))
    g = uh.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, g.d, g.N,
                              dtype.itemsize, n_fields, float(g.L_tot), float(t)))
        fh.write(data.tobytes())
    return path


def read_snapshot(path) -> tuple:
    """Read a snapshot; returns ``(SpectralField, t)``."""
    from .grid import build_grid

    raw = Path(path).read_bytes()
    magic, version, d, N, itemsize, n_fields, L_tot, t = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a field snapshot")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    dtype = {8: np.dtype("<c8"), 16: np.dtype("<c16")}[itemsize]
    grid = build_grid(d, N, L_tot)
    data = np.frombuffer(raw, dtype=dtype, offset=_HEADER.size)
    shape = grid.shape if n_fields == 1 else (n_fields,) + grid.shape
    return SpectralField(grid, data.reshape(shape).astype(complex)), t


def write_shell_amplitudes(path, uh: SpectralField) -> Path:
    """CSV of the shell-averaged ``|u[k]|`` (columns: shell, r, mean_abs, count)."""
    g = uh.grid
    amp = np.abs(uh.data).reshape(-1, *g.shape).mean(axis=0)
    counts = g.shell_counts()
    sums = np.bincount(g.shell_id.ravel(), weights=amp.ravel(), minlength=counts.size)
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["shell", "r", "mean_abs", "count"])
        for s, (tot, n) in enumerate(zip(sums, counts)):
            if n:
                w.writerow([s, repr(s * g.dk), repr(float(tot / n)), int(n)])
    return path
