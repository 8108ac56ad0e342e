"""Exact solution operators of the deterministic transport problem.

The semigroup moves a profile outward in |k| along rays::

    (e^{-tA} u0)^(k) = chi_{|k| > ct+kappa} ((|k|-ct)/|k|)^(H+d-1/2) u0^((|k|-ct) k/|k|)

With viscosity the same characteristics carry the extra factor
``exp(-(4 pi^2 nu / 3c) (|k|^3 - (|k|-ct)^3))``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .spectrum import AnalyticParams


class QuadratureError(RuntimeError):
    pass


def _split(k, d):
    """Return (|k|, direction) for k of shape (..., d), or (...) when d == 1."""
    k = np.asarray(k, dtype=float)
    if d == 1 and (k.ndim == 0 or k.shape[-1] != 1):
        mod = np.abs(k)
        return mod, np.sign(k)
    mod = np.sqrt(np.sum(k**2, axis=-1))
    with np.errstate(invalid="ignore", divide="ignore"):
        direction = np.where(mod[..., None] > 0, k / mod[..., None], 0.0)
    return mod, direction


def semigroup_apply(p: AnalyticParams, u0: Callable, t: float) -> Callable:
    """Return ``k -> (e^{-tA} u0)^(k)``.

    ``u0`` takes wave vectors (shape ``(..., d)``, or plain arrays of k when
    d = 1) and must vanish on ``|k| <= kappa``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    alpha = p.H + p.d - 0.5
    visc = 4 * np.pi**2 * p.nu / (3 * p.c)

    def evolved(k):
        if t == 0:
            return u0(k)
        mod, direction = _split(k, p.d)
        src = mod - p.c * t
        live = mod > p.c * t + p.kappa
        safe_mod = np.where(live, mod, 1.0)
        safe_src = np.where(live, src, 1.0)
        if p.d == 1 and np.ndim(direction) == np.ndim(mod):
            k_src = safe_src * direction
        else:
            k_src = safe_src[..., None] * direction
        factor = (safe_src / safe_mod) ** alpha
        if visc:
            factor = factor * np.exp(-visc * (safe_mod**3 - safe_src**3))
        return np.where(live, factor * u0(k_src), 0.0)

    return evolved


def duhamel_reference(p: AnalyticParams, forcing: Callable, t: float, panels: int = 16,
                      order: int = 12, tol: float = 1e-11) -> Callable:
    """Mild solution ``int_0^t e^{-(t-s)A} f(s) ds`` by composite Gauss-Legendre.

    ``forcing(s, k)`` must be smooth in s.  The returned callable evaluates
    the solution at wave vectors k and checks the quadrature against a run
    with twice the panels, raising ``QuadratureError`` when they disagree by
    more than ``tol`` (absolute, relative to the max magnitude).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    nodes, weights = leggauss(order)

    def integrate(k, n_panels):
        if t == 0:
            return np.zeros(np.shape(_split(k, p.d)[0]), dtype=complex)
        edges = np.linspace(0.0, t, n_panels + 1)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            for x, w in zip(nodes, weights):
                s = a + half * (x + 1)
                prop = semigroup_apply(p, lambda q, s=s: forcing(s, q), t - s)
                total = total + half * w * prop(k)
        return np.asarray(total, dtype=complex)

    def solution(k):
        coarse = integrate(k, panels)
        fine = integrate(k, 2 * panels)
        scale = max(float(np.max(np.abs(fine), initial=0.0)), 1.0)
        if np.max(np.abs(fine - coarse), initial=0.0) > tol * scale:
            raise QuadratureError(
                f"Duhamel quadrature not converged: panel-doubling change "
                f"{np.max(np.abs(fine - coarse)):.3e} > {tol:.1e}")
        return fine

    return solution
