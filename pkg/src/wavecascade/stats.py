"""Spectral and physical-space estimators with mergeable accumulation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .field import SpectralField, dft_inverse, fft_forward, fft_inverse, l2_norm
from .grid import WavenumberGrid, dft_order


def periodogram(uh: SpectralField) -> np.ndarray:
    return np.abs(uh.data) ** 2


def shell_average(values: np.ndarray, grid: WavenumberGrid) -> np.ndarray:
    """Mean over the members of every shell; empty shells are NaN.

    ``values`` may carry leading batch axes.
    """
    counts = grid.shell_counts()
    flat = np.asarray(values).reshape(-1, grid.shell_id.size)
    sums = np.stack([np.bincount(grid.shell_id.ravel(), weights=row, minlength=counts.size)
                     for row in flat])
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / counts, np.nan)
    return means.reshape(np.shape(values)[:-grid.d] + (counts.size,))


def _shift(u: np.ndarray, lag: float, axis: int, d: int) -> np.ndarray:
    """``u(x + lag*dx)`` along ``axis`` (periodic)."""
    if float(lag).is_integer():
        return np.roll(u, -int(lag), axis=axis)
    # Fractional lags: exact shift of the trigonometric interpolant.
    N = u.shape[axis]
    kshape = [1] * u.ndim
    kshape[axis] = N
    kj = dft_order(N).reshape(kshape)
    phase = np.exp(2j * np.pi * kj * lag / N)
    return fft_inverse(fft_forward(u, d) * phase, d).real


def structure_function(u: np.ndarray, lags, d: int | None = None) -> np.ndarray:
    """Second-order structure function averaged over x and over the d axes.

    ``lags`` are in units of dx (``ell = m dx``).  ``u`` may carry leading
    batch axes when ``d`` is given; the result is then batched too.
    """
    u = np.asarray(u, dtype=float)
    d = u.ndim if d is None else d
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    axes = tuple(range(-d, 0))
    out = np.empty(u.shape[:u.ndim - d] + lags.shape)
    for i, m in enumerate(lags):
        acc = 0.0
        for ax in axes:
            acc = acc + np.mean((_shift(u, m, ax, d) - u) ** 2, axis=axes)
        out[..., i] = acc / d
    return out


@dataclass
class PowerLawFit:
    exponent: float
    intercept: float
    residual: float
    n_points: int
    window: tuple


def fit_power_law(r, values, window=None, min_points: int = 5) -> PowerLawFit:
    """Least-squares line through ``(log r, log value)`` restricted to ``window``."""
    r = np.asarray(r, dtype=float)
    v = np.asarray(values, dtype=float)
    sel = np.isfinite(v) & np.isfinite(r)
    if window is not None:
        lo, hi = window
        sel &= (r >= lo * (1 - 1e-12)) & (r <= hi * (1 + 1e-12))
    r, v = r[sel], v[sel]
    if r.size < min_points:
        raise ValueError(f"fit window {window} holds {r.size} points, need {min_points}")
    if np.any(v <= 0) or np.any(r <= 0):
        raise ValueError("power-law fit needs positive abscissae and values")
    x, y = np.log(r), np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + intercept))))
    return PowerLawFit(float(slope), float(intercept), resid, int(r.size),
                       (float(r.min()), float(r.max())))


def lag1_autocorrelation(series) -> float:
    x = np.asarray(series, dtype=float)
    if x.size < 3:
        return float("nan")
    x = x - x.mean()
    denom = np.dot(x, x)
    return float(np.dot(x[:-1], x[1:]) / denom) if denom > 0 else float("nan")


@dataclass
class StatsAccumulator:
    """Running sums for the time-averaged estimators.

    Per sample it adds the shell-averaged periodogram, the structure function
    at ``lags`` (units of dx) and one point of the l2-norm series.  Sums make
    ``merge`` exact and order independent up to rounding.
    """

    grid: WavenumberGrid
    lags: np.ndarray | None = None
    count: int = 0
    shell_sum: np.ndarray = field(default=None, repr=False)
    shell_sumsq: np.ndarray = field(default=None, repr=False)
    s2_sum: np.ndarray = field(default=None, repr=False)
    s2_sumsq: np.ndarray = field(default=None, repr=False)
    l2_series: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.lags is None:
            self.lags = np.arange(1, self.grid.N // 2 + 1, dtype=float)
        self.lags = np.asarray(self.lags, dtype=float)
        n_shells = self.grid.n_shells
        if self.shell_sum is None:
            self.shell_sum = np.zeros(n_shells)
            self.shell_sumsq = np.zeros(n_shells)
            self.s2_sum = np.zeros(self.lags.size)
            self.s2_sumsq = np.zeros(self.lags.size)

    def sink(self, state):
        accumulate_sample(self, state.uh, state.t)

    @property
    def ell(self) -> np.ndarray:
        return self.lags * self.grid.dx

    @property
    def shell_r(self) -> np.ndarray:
        return np.arange(self.grid.n_shells) * self.grid.dk

    def _mean(self, s):
        return s / self.count if self.count else np.full_like(s, np.nan)

    def _stderr(self, s, sq):
        if self.count < 2:
            return np.full_like(s, np.nan)
        mean = s / self.count
        var = np.maximum(sq / self.count - mean**2, 0.0) * self.count / (self.count - 1)
        return np.sqrt(var / self.count)

    def spectrum(self) -> np.ndarray:
        return self._mean(self.shell_sum)

    def spectrum_stderr(self) -> np.ndarray:
        return self._stderr(self.shell_sum, self.shell_sumsq)

    def s2(self) -> np.ndarray:
        return self._mean(self.s2_sum)

    def s2_stderr(self) -> np.ndarray:
        return self._stderr(self.s2_sum, self.s2_sumsq)

    def l2_times(self) -> np.ndarray:
        return np.array([t for t, _ in self.l2_series])

    def l2_values(self) -> np.ndarray:
        return np.array([v for _, v in self.l2_series])

    def l2_mean(self) -> float:
        return float(np.mean(self.l2_values())) if self.l2_series else float("nan")


def accumulate_sample(acc: StatsAccumulator, uh: SpectralField, t: float) -> StatsAccumulator:
    """Add one snapshot (or every member of a batched snapshot) to ``acc``."""
    g = acc.grid
    data = uh.data.reshape((-1,) + g.shape)
    spec = shell_average(np.abs(data) ** 2, g)
    spec = np.nan_to_num(spec, nan=0.0)
    phys = fft_inverse(data, g.d).real
    s2 = structure_function(phys, acc.lags, d=g.d)
    l2 = np.atleast_1d(l2_norm(SpectralField(g, data)))
    acc.shell_sum += spec.sum(axis=0)
    acc.shell_sumsq += (spec**2).sum(axis=0)
    acc.s2_sum += s2.sum(axis=0)
    acc.s2_sumsq += (s2**2).sum(axis=0)
    acc.l2_series.extend((float(t), float(v)) for v in l2)
    acc.count += data.shape[0]
    return acc


def merge(a: StatsAccumulator, b: StatsAccumulator) -> StatsAccumulator:
    if a.grid.shape != b.grid.shape or a.grid.L_tot != b.grid.L_tot:
        raise ValueError("cannot merge accumulators built on different grids")
    if not np.array_equal(a.lags, b.lags):
        raise ValueError("cannot merge accumulators with different lag sets")
    return StatsAccumulator(
        grid=a.grid, lags=a.lags.copy(), count=a.count + b.count,
        shell_sum=a.shell_sum + b.shell_sum, shell_sumsq=a.shell_sumsq + b.shell_sumsq,
        s2_sum=a.s2_sum + b.s2_sum, s2_sumsq=a.s2_sumsq + b.s2_sumsq,
        l2_series=sorted(a.l2_series + b.l2_series))


def physical_field(uh: SpectralField) -> np.ndarray:
    return dft_inverse(uh)
