"""Spatial correlations of the transported field by radial Fourier quadrature.

For a radial spectral density g(|k|) the Fourier integral over R^d reduces to

    int g(|k|) e^{2 pi i k.x} dk = |S^{d-1}| int g(r) r^{d-1} j_d(2 pi r |x|) dr

with j_1 = cos, j_2 = J0 and j_3(z) = sin(z)/z.  Oscillatory pieces use QUADPACK's
cosine/sine weights; the J0 tail beyond z = 200 switches to the Hankel
asymptotic expansion so it can use the same weights.
"""

from __future__ import annotations

import warnings
from typing import Callable

import numpy as np
from scipy import integrate, special

from .densities import sphere_area
from .spectrum import AnalyticParams, big_psi, big_psi_nu, c_constant

_EPSABS = 1e-13
_EPSREL = 1e-11
_Z_ASYMPT = 200.0


class CorrelationQuadratureError(RuntimeError):
    pass


def _quad(f, a, b, **kw):
    kw.setdefault("limit", 500)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=_EPSABS, epsrel=_EPSREL, **kw)
        except integrate.IntegrationWarning as exc:
            raise CorrelationQuadratureError(f"quadrature on [{a}, {b}] failed: {exc}") from exc
    return val


def angular_kernel(d: int, z):
    """``j_d(z)``: the sphere average of ``e^{i z cos(theta)}``."""
    z = np.asarray(z, dtype=float)
    if d == 1:
        return np.cos(z)
    if d == 2:
        return special.j0(z)
    if d == 3:
        return np.sinc(z / np.pi)
    raise ValueError("d must be 1, 2 or 3")


def one_minus_kernel(d: int, z):
    """``1 - j_d(z)`` without cancellation at small z."""
    z = np.asarray(z, dtype=float)
    if d == 1:
        return 2 * np.sin(z / 2) ** 2
    z2 = z * z
    if d == 2:
        series = z2 / 4 * (1 - z2 / 16 * (1 - z2 / 36 * (1 - z2 / 64)))
        direct = 1 - special.j0(z)
    else:
        series = z2 / 6 * (1 - z2 / 20 * (1 - z2 / 42 * (1 - z2 / 72)))
        direct = 1 - np.sinc(z / np.pi)
    return np.where(np.abs(z) < 0.1, series, direct)


def _pieces(a, b, breaks, max_len=None):
    pts = sorted({a, b, *[x for x in breaks if a < x < b]})
    out = []
    for x0, x1 in zip(pts[:-1], pts[1:]):
        n = 1 if max_len is None else max(1, int(np.ceil((x1 - x0) / max_len)))
        edges = np.linspace(x0, x1, n + 1)
        out.extend(zip(edges[:-1], edges[1:]))
    return out


def _kernel_integral(h: Callable, a: float, b: float, d: int, w: float, breaks=()) -> float:
    """``int_a^b h(r) j_d(w r) dr`` on a bounded interval."""
    if b <= a:
        return 0.0
    if w == 0:
        return sum(_quad(h, x0, x1) for x0, x1 in _pieces(a, b, breaks))
    period = 2 * np.pi / w
    if d == 1:
        return sum(_quad(h, x0, x1, weight="cos", wvar=w)
                   for x0, x1 in _pieces(a, b, breaks, 200 * period))
    if d == 3:
        # QAWO samples r = 0 when lo = 0; h carries r^2 there, so h(r)/r -> 0
        return sum(_quad(lambda r: h(max(r, 1e-300)) / max(r, 1e-300), x0, x1, weight="sin", wvar=w)
                   for x0, x1 in _pieces(a, b, breaks, 200 * period)) / w
    return sum(_quad(lambda r: h(r) * special.j0(w * r), x0, x1)
               for x0, x1 in _pieces(a, b, breaks, 4 * period))


def _hankel_pq(z):
    iz2 = 1.0 / (z * z)
    P = 1 - 9 / 128 * iz2 + 3675 / 32768 * iz2 * iz2
    Q = -1 / (8 * z) + 75 / 1024 / (z**3)
    return P, Q


def _power_tail(amp: float, p: float, a: float, d: int, w: float) -> float:
    """``amp * int_a^inf r^p j_d(w r) dr`` for a pure power law (``p < 0``)."""
    if amp == 0:
        return 0.0
    if w == 0:
        if p >= -1:
            raise CorrelationQuadratureError("power tail r^p with p >= -1 is not integrable")
        return amp * a ** (p + 1) / (-(p + 1))
    # substitute z = w r
    z0 = w * a
    scale = amp * w ** (-p - 1)
    # QAWF misbehaves when the first cycles hold a steep power; keep it for z > 200.
    z1 = max(z0, _Z_ASYMPT)
    head = _kernel_integral(lambda z: z**p, z0, z1, d, 1.0)
    if d == 1:
        return scale * (head + _quad(lambda z: z**p, z1, np.inf, weight="cos", wvar=1.0))
    if d == 3:
        return scale * (head + _quad(lambda z: z ** (p - 1), z1, np.inf, weight="sin", wvar=1.0))
    # J0(z) = sqrt(2/(pi z)) (P cos(z - pi/4) - Q sin(z - pi/4))
    #       = sqrt(1/(pi z)) ((P + Q) cos z + (P - Q) sin z)
    def cos_part(z):
        P, Q = _hankel_pq(z)
        return z**p * np.sqrt(1 / (np.pi * z)) * (P + Q)

    def sin_part(z):
        P, Q = _hankel_pq(z)
        return z**p * np.sqrt(1 / (np.pi * z)) * (P - Q)

    tail = (_quad(cos_part, z1, np.inf, weight="cos", wvar=1.0)
            + _quad(sin_part, z1, np.inf, weight="sin", wvar=1.0))
    return scale * (head + tail)


def radial_fourier(profile: Callable, d: int, x: float, lo: float, hi: float, breaks=(),
                   tail_amplitude: float = 0.0, tail_exponent: float | None = None) -> float:
    """``int_{lo < |k|} g(|k|) e^{2 pi i k.x} dk`` in dimension d.

    ``profile`` is g on ``[lo, hi]``; beyond ``hi`` g is taken to be
    ``tail_amplitude * r**(-tail_exponent)`` (zero by default).
    """
    x = abs(float(x))
    w = 2 * np.pi * x
    area = sphere_area(d)
    body = _kernel_integral(lambda r: profile(r) * r ** (d - 1), lo, hi, d, w, breaks)
    tail = 0.0
    if tail_amplitude:
        tail = _power_tail(tail_amplitude, d - 1 - tail_exponent, hi, d, w)
    return area * (body + tail)


def _require_H_positive(p: AnalyticParams):
    if not 0 < p.H < 1:
        raise ValueError(
            f"pointwise limiting covariance needs H in (0, 1), got H={p.H}; "
            "use tested_limiting_covariance for H <= 0")


def _limit_profile(p: AnalyticParams):
    C = c_constant(p)
    q = p.exponent
    return lambda r: r ** (-q) * (C - big_psi(p, r)), C


def _breaks(p: AnalyticParams, shift: float = 0.0):
    return [b + shift for b in p.psi.breakpoints() if np.isfinite(b)]


def limiting_correlation(p: AnalyticParams, x: float) -> float:
    """``t -> infinity`` covariance ``E u(x1) u(x2)`` at separation ``x`` (inviscid)."""
    _require_H_positive(p)
    p = p.inviscid()
    g, C = _limit_profile(p)
    top = max(p.support_top, p.kappa)
    return radial_fourier(g, p.d, x, p.kappa, top, _breaks(p), C, p.exponent)


def _viscous_cutoff(p: AnalyticParams, tol: float = 1e-16) -> float:
    """Radius beyond which ``e^{-a r^3}`` is below ``tol``."""
    return (np.log(1 / tol) / p.viscous_rate) ** (1 / 3)


def finite_time_correlation(p: AnalyticParams, t: float, x: float) -> float:
    """Covariance at time t and separation x from ``|k|^-(2H+d) e^{-a|k|^3} F_nu(t,|k|)``."""
    if not np.isfinite(t) or t < 0:
        raise ValueError("t must be finite and nonnegative")
    q, ct = p.exponent, p.c * t
    top = ct + max(p.support_top, p.kappa)
    seam = ct + p.kappa
    w = 2 * np.pi * abs(x)
    long_range = w * (top - p.kappa) / (2 * np.pi) > 2000
    if p.nu > 0:
        a = p.viscous_rate
        psi_k = big_psi_nu(p, p.kappa)

        def g(r):
            r = np.asarray(r, dtype=float)
            tail = np.where(r < seam, psi_k, big_psi_nu(p, np.maximum(r - ct, 0.0)))
            return float(r ** (-q) * np.exp(-a * r**3) * (tail - big_psi_nu(p, r)))

        end = min(top, _viscous_cutoff(p))
        return radial_fourier(g, p.d, x, p.kappa, end, [seam, *_breaks(p), *_breaks(p, ct)])
    if long_range and 0 < p.H < 1 and seam >= p.support_top:
        # Subtract what the window has not filled yet from the limiting covariance:
        # above the seam the difference of the two integrands is r^-q (C - Psi(r - ct)).
        C = c_constant(p)
        missing = radial_fourier(lambda r: r ** (-q) * (C - big_psi(p, r - ct)), p.d, x,
                                 seam, top, _breaks(p, ct), C, q)
        return limiting_correlation(p, x) - missing
    psi_k = big_psi(p, p.kappa)

    def g(r):
        tail = psi_k if r < seam else big_psi(p, max(r - ct, 0.0))
        return r ** (-q) * (tail - big_psi(p, r))

    return radial_fourier(g, p.d, x, p.kappa, top, [seam, *_breaks(p), *_breaks(p, ct)])


def increment_variance(p: AnalyticParams, ell: float) -> float:
    """``E|u(x + ell) - u(x)|^2`` of the inviscid limiting field (``H in (0,1)``).

    Computed as ``2 |S^{d-1}| int r^{d-1} g(r) (1 - j_d(2 pi r ell)) dr``; the
    power-law tail is rescaled to ``z = 2 pi ell r`` and its non-oscillating
    part integrated in closed form.
    """
    _require_H_positive(p)
    p = p.inviscid()
    ell = abs(float(ell))
    if ell == 0:
        return 0.0
    g, C = _limit_profile(p)
    d, w = p.d, 2 * np.pi * ell
    top = max(p.support_top, p.kappa)
    body = 0.0
    for x0, x1 in _pieces(p.kappa, top, _breaks(p), 4 * 2 * np.pi / w):
        body += _quad(lambda r: g(r) * r ** (d - 1) * one_minus_kernel(d, w * r), x0, x1)
    # tail: C int_top^inf r^(-2H-1) (1 - j(w r)) dr = C w^(2H) int_{w top}^inf z^(-2H-1) (1 - j) dz
    s = -2 * p.H - 1
    z0 = w * top
    z1 = max(z0, _Z_ASYMPT)
    head = sum(_quad(lambda z: z**s * one_minus_kernel(d, z), x0, x1)
               for x0, x1 in _pieces(z0, z1, (), 4 * 2 * np.pi))
    far = z1 ** (s + 1) / (-(s + 1)) - _power_tail(1.0, s, z1, d, 1.0)
    tail = C * w ** (2 * p.H) * (head + far)
    return 2 * sphere_area(d) * (body + tail)


def holder_constants(p: AnalyticParams) -> tuple[float, float]:
    """``(C_K, C_J)`` of the increment bound ``C_K/(H(1-H)) ell^2H + C_J ell^2``."""
    _require_H_positive(p)
    p = p.inviscid()
    area = sphere_area(p.d)
    C = c_constant(p)
    C_K = 2 * C * area * (2 * np.pi) ** (2 * p.H)
    q = p.exponent
    top = max(p.support_top, p.kappa)
    moment = sum(_quad(lambda r: r ** (p.d + 1 - q) * big_psi(p, r), x0, x1)
                 for x0, x1 in _pieces(p.kappa, top, _breaks(p)))
    C_J = 4 * np.pi**2 * area * moment
    return C_K, C_J


def holder_bound(p: AnalyticParams, ell) -> np.ndarray:
    C_K, C_J = holder_constants(p)
    ell = np.abs(np.asarray(ell, dtype=float))
    return C_K / (p.H * (1 - p.H)) * ell ** (2 * p.H) + C_J * ell**2


def tested_limiting_covariance(p: AnalyticParams, g1_hat: Callable, g2_hat: Callable,
                               r_max: float = np.inf) -> complex:
    """``int_{|k|>kappa} |k|^-(2H+d) (C - Psi(|k|)) g1^(k) conj(g2^(k)) dk``.

    The limiting field paired with two test functions whose Fourier transforms
    are the radial profiles ``g1_hat``, ``g2_hat``.  Valid for every
    ``H >= -d/2`` for which ``C`` is finite; this is the only form offered
    when ``H <= 0``.
    """
    p = p.inviscid()
    C = c_constant(p)
    q = p.exponent
    area = sphere_area(p.d)

    def density(r):
        return r ** (p.d - 1 - q) * (C - big_psi(p, r)) * g1_hat(r) * np.conj(g2_hat(r))

    top = max(p.support_top, p.kappa)
    edges = [(x0, x1) for x0, x1 in _pieces(p.kappa, top, _breaks(p))]
    if r_max > top:
        edges.append((top, r_max))
    re = sum(_quad(lambda r: np.real(density(r)), a, b) for a, b in edges)
    im = sum(_quad(lambda r: np.imag(density(r)), a, b) for a, b in edges)
    return area * complex(re, im)
