"""Closed-form spectral predictions: Psi, C(d,H), the window factor F and
the finite-time spectrum ``|k|^-(2H+d) exp(-8 pi^2 nu |k|^3 / 3c) F_nu(t, |k|)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .densities import PiecewiseConstantDensity, RadialDensity


class IntegrabilityError(ValueError):
    """A weighted integral of the forcing density does not converge."""


@dataclass(frozen=True)
class AnalyticParams:
    d: int
    H: float
    c: float
    kappa: float
    psi: RadialDensity
    nu: float = 0.0

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("d must be 1, 2 or 3")
        if not self.c > 0 or not self.kappa > 0:
            raise ValueError("c and kappa must be positive")
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")

    @property
    def exponent(self) -> float:
        """Spectral decay exponent ``2H + d``."""
        return 2 * self.H + self.d

    @property
    def viscous_rate(self) -> float:
        """``8 pi^2 nu / (3 c)``."""
        return 8 * np.pi**2 * self.nu / (3 * self.c)

    @property
    def support_top(self) -> float:
        return self.psi.hi

    def inviscid(self) -> "AnalyticParams":
        return replace(self, nu=0.0)


def _weighted_tail(p: AnalyticParams, r: float, viscous: bool) -> float:
    q = p.exponent
    a = p.viscous_rate if viscous else 0.0
    if a == 0.0 and isinstance(p.psi, PiecewiseConstantDensity):
        return float(p.psi.power_moment_tail(r, q))
    lo = max(r, p.psi.lo)
    hi = p.psi.hi
    if lo >= hi:
        return 0.0
    if not np.isfinite(hi) and a > 0:
        raise IntegrabilityError(
            "s^(2H+d) exp(8 pi^2 nu s^3 / 3c) psi(s) must be integrable; "
            "an unbounded psi support cannot be checked")

    def integrand(s):
        # Combine the exponential weights in log space to delay overflow.
        w = q * np.log(s) + a * s**3
        return np.exp(w) * p.psi(s)

    pts = [b for b in p.psi.breakpoints() if lo < b < hi]
    total, err = 0.0, 0.0
    edges = [lo, *pts, hi]
    for x0, x1 in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(integrand, x0, x1, epsabs=1e-13, epsrel=1e-12, limit=400)
        total += val
        err += e
    if not np.isfinite(total) or err > 1e-6 * max(abs(total), 1.0):
        raise IntegrabilityError(
            f"weighted tail integral of psi from r={r} did not converge (value {total}, "
            f"error {err}); check integrability of s^(2H+d) psi(s)")
    return total


def big_psi(p: AnalyticParams, r):
    """``(1/c) int_r^inf s^(2H+d) psi(s) ds``, vectorized over ``r >= 0``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be nonnegative")
    out = np.vectorize(lambda x: _weighted_tail(p, x, viscous=False))(r) / p.c
    return out if out.ndim else float(out)


def big_psi_nu(p: AnalyticParams, r):
    """Viscous variant with weight ``exp(8 pi^2 nu s^3 / 3c)``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be nonnegative")
    out = np.vectorize(lambda x: _weighted_tail(p, x, viscous=True))(r) / p.c
    return out if out.ndim else float(out)


def c_constant(p: AnalyticParams) -> float:
    """``C(d, H) = Psi(0)``."""
    return float(big_psi(p, 0.0))


def _window(psi_fn, p: AnalyticParams, t: float, r):
    if t < 0:
        raise ValueError("t must be nonnegative")
    r = np.asarray(r, dtype=float)
    seam = p.c * t + p.kappa
    at_kappa = psi_fn(p, p.kappa)
    inner = at_kappa - psi_fn(p, r)
    outer = psi_fn(p, np.maximum(r - p.c * t, 0.0)) - psi_fn(p, r)
    out = np.where(r < seam, inner, outer)
    return out if out.ndim else float(out)


def F_window(p: AnalyticParams, t: float, r):
    """Window factor F(t, r): ``Psi(kappa) - Psi(r)`` below the seam
    ``r = ct + kappa`` and ``Psi(r - ct) - Psi(r)`` above it."""
    return _window(big_psi, p, t, r)


def F_window_nu(p: AnalyticParams, t: float, r):
    return _window(big_psi_nu, p, t, r)


def theoretical_spectrum(p: AnalyticParams, t: float, r):
    """Predicted ``E|u(t,k)|^2`` density at ``|k| = r > kappa``.

    ``t = np.inf`` gives the stationary limit ``r^-(2H+d) e^{-a r^3} (C_nu - Psi_nu(r))``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= p.kappa):
        raise ValueError("theoretical_spectrum is defined for r > kappa")
    if np.isinf(t):
        F = big_psi_nu(p, p.kappa) - big_psi_nu(p, r)
    else:
        F = F_window_nu(p, t, r)
    out = r ** (-p.exponent) * np.exp(-p.viscous_rate * r**3) * F
    return out if out.ndim else float(out)
