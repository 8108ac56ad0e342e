"""Band-limited, white-in-time Gaussian forcing.

Each step draws ``N**d`` standard normals on the physical grid, scales them
by ``dx**(d/2)``, transforms, and keeps the annulus ``k_lo <= |k| L_tot <= k_hi``.
The normals come from a Philox stream keyed by the seed, with the step number
in the high word of the counter, so a draw depends only on (seed, step).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import SpectralField, fft_forward
from .grid import WavenumberGrid
from .oracle.densities import IndicatorDensity, PiecewiseConstantDensity, unit_ball_volume

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class ForcingSpec:
    grid: WavenumberGrid
    k_lo: float = 3.0
    k_hi: float = 5.0
    seed: int = 0
    kappa: float | None = None

    def __post_init__(self):
        g = self.grid
        kappa = g.dk if self.kappa is None else self.kappa
        lo, hi = self.k_lo * g.dk, self.k_hi * g.dk
        if not (kappa < lo <= hi <= g.k_max * np.sqrt(g.d)):
            raise ValueError(
                f"forcing annulus [{lo}, {hi}] must satisfy kappa={kappa} < k_lo <= k_hi <= k_max")
        object.__setattr__(self, "_mask", self.annulus_mask())

    def annulus_mask(self) -> np.ndarray:
        r = self.grid.k_mod / self.grid.dk
        tol = 1e-9
        return (r >= self.k_lo - tol) & (r <= self.k_hi + tol)

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    @property
    def n_forced(self) -> int:
        return int(self._mask.sum())

    def generator(self, step: int, offset: int = 0) -> np.random.Generator:
        seed = self.seed + offset
        bits = np.random.Philox(key=[seed & _SEED_MASK, (seed >> 64) & _SEED_MASK],
                                counter=[0, 0, 0, step & _SEED_MASK])
        return np.random.Generator(bits)


def white_noise(spec: ForcingSpec, step: int, members: int | None = None) -> np.ndarray:
    """Standard normals on the physical grid.

    Ensemble member m uses seed ``spec.seed + m``, so it is the single
    trajectory that seed would produce.
    """
    if members is None:
        return spec.generator(step).standard_normal(spec.grid.shape)
    out = np.empty((members,) + spec.grid.shape)
    for m in range(members):
        spec.generator(step, m).standard_normal(out=out[m])
    return out


def sample_forcing(spec: ForcingSpec, step: int, members: int | None = None) -> SpectralField:
    g = spec.grid
    noise = white_noise(spec, step, members) * g.dx ** (g.d / 2)
    fh = fft_forward(noise, g.d)
    fh[..., ~spec.mask] = 0.0
    return SpectralField(g, fh)


def effective_psi(spec: ForcingSpec, mode: str = "lattice") -> PiecewiseConstantDensity:
    """Continuum radial density psi realized by the discrete forcing.

    Every forced mode receives variance ``A = L_tot**d`` per unit time.

    ``mode="lattice"`` spreads the forced modes of shell s over the radial
    cell ``[s - 1/2, s + 1/2] dk``, weighting by the fraction of lattice
    points of that cell that are forced; in d=1 this is ``A`` on
    ``[k_lo - dk/2, k_hi + dk/2]``.  ``mode="nominal"`` is the bare indicator
    ``A * chi[k_lo, k_hi]``.
    """
    g = spec.grid
    A = g.L_tot ** g.d
    if mode == "nominal":
        return IndicatorDensity(spec.k_lo * g.dk, spec.k_hi * g.dk, A)
    if mode != "lattice":
        raise ValueError(f"unknown calibration mode {mode!r}")
    shells = g.shell_id[spec.mask]
    s_min, s_max = int(shells.min()), int(shells.max())
    counts = np.bincount(shells, minlength=s_max + 1)[s_min:s_max + 1].astype(float)
    s = np.arange(s_min, s_max + 1, dtype=float)
    expected = unit_ball_volume(g.d) * ((s + 0.5) ** g.d - np.maximum(s - 0.5, 0.0) ** g.d)
    edges = (np.arange(s_min, s_max + 2) - 0.5) * g.dk
    return PiecewiseConstantDensity(edges, A * counts / expected)
