"""Wavenumber and position grids on the periodic box.

Wave vectors follow the DFT ordering ``[0, 1, ..., N/2, -N/2+1, ..., -1] * dk``
along every axis, with ``dk = 1/L_tot`` and ``dx = L_tot/N``.  Shells are
indexed by ``round(|k|/dk)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def dft_order(N: int) -> np.ndarray:
    """Signed integer indices in DFT order, Nyquist kept positive."""
    idx = np.arange(N)
    return np.where(idx <= N // 2, idx, idx - N)


def nyquist_zeroed_positions(N: int, dx: float) -> np.ndarray:
    """Position array used by the spectral k-derivative.

    ``[0, 1, ..., N/2-1, 0, -N/2+1, ..., -1] * dx``: the Nyquist entry is
    zeroed so that the multiplier is odd under index negation.
    """
    x = dft_order(N).astype(float)
    x[N // 2] = 0.0
    return x * dx


def negate_index(a: np.ndarray, d: int) -> np.ndarray:
    """Return ``a[-k]`` (index negation modulo N) over the last ``d`` axes."""
    axes = tuple(range(-d, 0))
    return np.roll(np.flip(a, axis=axes), 1, axis=axes)


@dataclass(frozen=True, eq=False)
class WavenumberGrid:
    d: int
    N: int
    L_tot: float = 1.0
    k_axes: tuple = field(init=False, repr=False)
    x_tilde: tuple = field(init=False, repr=False)
    k_vec: np.ndarray = field(init=False, repr=False)
    k_mod: np.ndarray = field(init=False, repr=False)
    shell_id: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if not isinstance(self.N, (int, np.integer)) or self.N < 4 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 4, got {self.N}")
        if not self.L_tot > 0:
            raise ValueError(f"L_tot must be positive, got {self.L_tot}")

        k1 = dft_order(self.N) * self.dk
        xt = nyquist_zeroed_positions(self.N, self.dx)
        shape = (self.N,) * self.d
        k_axes, x_axes = [], []
        for j in range(self.d):
            bshape = [1] * self.d
            bshape[j] = self.N
            k_axes.append(k1.reshape(bshape))
            x_axes.append(xt.reshape(bshape))
        k_vec = np.stack([np.broadcast_to(k, shape) for k in k_axes])
        k_mod = np.sqrt(np.sum(k_vec**2, axis=0))
        shell = np.rint(k_mod / self.dk).astype(np.int64)

        for name, val in [("k_axes", tuple(k_axes)), ("x_tilde", tuple(x_axes)),
                          ("k_vec", k_vec), ("k_mod", k_mod), ("shell_id", shell)]:
            if isinstance(val, np.ndarray):
                val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def dk(self) -> float:
        return 1.0 / self.L_tot

    @property
    def dx(self) -> float:
        return self.L_tot / self.N

    @property
    def k_max(self) -> float:
        return (self.N // 2) * self.dk

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    @property
    def n_shells(self) -> int:
        return int(self.shell_id.max()) + 1

    def positions(self) -> np.ndarray:
        """Physical collocation points ``j * dx``, j = 0..N-1, per axis."""
        return np.arange(self.N) * self.dx

    def unit_vector(self, j: int) -> np.ndarray:
        """Component ``k_j/|k|`` with the origin value set to 0."""
        out = np.zeros(self.shape)
        nz = self.k_mod > 0
        out[nz] = self.k_vec[j][nz] / self.k_mod[nz]
        return out

    def shell_counts(self) -> np.ndarray:
        return np.bincount(self.shell_id.ravel(), minlength=self.n_shells)

    def low_mode_mask(self, kappa: float) -> np.ndarray:
        """True where ``|k| <= kappa`` (with a relative tolerance on the edge)."""
        return self.k_mod <= kappa * (1 + 1e-12)


def build_grid(d: int, N: int, L_tot: float = 1.0) -> WavenumberGrid:
    return WavenumberGrid(d=d, N=N, L_tot=L_tot)


def shell_members(grid: WavenumberGrid, s: int) -> tuple:
    """Indices (as returned by ``np.nonzero``) of grid points in shell ``s``."""
    if not 0 <= s <= grid.n_shells:
        raise ValueError(f"shell index {s} out of range")
    return np.nonzero(grid.shell_id == s)
