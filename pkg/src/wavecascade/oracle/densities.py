"""Radial spectral densities of the forcing (psi(|k|) = C_f^(k))."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma, pi
from typing import Callable

import numpy as np


def unit_ball_volume(d: int) -> float:
    return pi ** (d / 2) / gamma(d / 2 + 1)


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d (2 for d=1)."""
    return d * unit_ball_volume(d)


class RadialDensity:
    """Nonnegative radial function with known support ``[lo, hi]`` (hi may be inf)."""

    lo: float = 0.0
    hi: float = np.inf

    def __call__(self, s):
        raise NotImplementedError

    def breakpoints(self) -> list:
        return [b for b in (self.lo, self.hi) if np.isfinite(b)]


@dataclass
class PiecewiseConstantDensity(RadialDensity):
    """``values[i]`` on ``[edges[i], edges[i+1])``, zero elsewhere."""

    edges: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.edges.ndim != 1 or self.edges.size != self.values.size + 1:
            raise ValueError("need len(edges) == len(values) + 1")
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("density values must be nonnegative")
        self.lo = float(self.edges[0])
        self.hi = float(self.edges[-1])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        i = np.searchsorted(self.edges, s, side="right") - 1
        inside = (i >= 0) & (i < self.values.size)
        out = np.where(inside, self.values[np.clip(i, 0, self.values.size - 1)], 0.0)
        return out if out.ndim else float(out)

    def breakpoints(self) -> list:
        return list(self.edges)

    def power_moment_tail(self, r, p: float):
        """``int_r^inf s**p psi(s) ds`` in closed form (p > -1)."""
        r = np.asarray(r, dtype=float)
        a = np.maximum(r[..., None], self.edges[:-1])
        b = np.maximum(r[..., None], self.edges[1:])
        seg = (b ** (p + 1) - a ** (p + 1)) / (p + 1)
        out = np.sum(seg * self.values, axis=-1)
        return out if out.ndim else float(out)


class IndicatorDensity(PiecewiseConstantDensity):
    def __init__(self, lo: float, hi: float, amplitude: float = 1.0):
        super().__init__(np.array([lo, hi]), np.array([amplitude]))

    @property
    def amplitude(self) -> float:
        return float(self.values[0])


@dataclass
class CallableDensity(RadialDensity):
    func: Callable
    lo: float = 0.0
    hi: float = np.inf
    extra_breaks: list = field(default_factory=list)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.where((s >= self.lo) & (s <= self.hi), self.func(s), 0.0)
        return out if out.ndim else float(out)

    def breakpoints(self) -> list:
        return sorted(set(super().breakpoints()) | set(self.extra_breaks))
