"""One-dimensional complex reference model ``du = 2 pi i c x u dt + dW(t, x)``.

The noise is white in time with spatial covariance ``C_f = phi * phi~``, so
the explicit solution ``u(t,x) = int_0^t e^{2 pi i c x (t-s)} dW(s,x)`` is a
centred Gaussian field with

    E|u(t,x)|^2          = t C_f(0) = t ||phi||^2
    E u(t,x+z) conj u(t,x) = (e^{2 pi i c t z} - 1) / (2 pi i c z) C_f(z)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class GaussianProfile:
    """``phi(x) = exp(-x^2 / (2 s^2))``, which gives closed forms for C_f and ||phi||^2."""

    s: float = 1.0

    def __call__(self, x):
        return np.exp(-np.asarray(x, dtype=float) ** 2 / (2 * self.s**2))

    def autocorrelation(self, z):
        """``C_f(z) = int phi(y + z) phi(y) dy``."""
        z = np.asarray(z, dtype=float)
        return np.sqrt(np.pi) * self.s * np.exp(-z**2 / (4 * self.s**2))

    @property
    def norm_sq(self) -> float:
        return float(np.sqrt(np.pi) * self.s)


def variance(t: float, norm_sq: float) -> float:
    return t * norm_sq


def _kernel(t, c, z):
    """``(e^{2 pi i c t z} - 1) / (2 pi i c z)``, with value t at z = 0."""
    w = 2 * np.pi * c * np.asarray(z, dtype=float)
    # (e^{i w t} - 1)/(i w) = t e^{i w t/2} sinc(w t / 2 pi), finite at w = 0
    out = t * np.exp(0.5j * w * t) * np.sinc(w * t / (2 * np.pi))
    return out if out.ndim else complex(out)


def covariance(t: float, c: float, z, C_f: Callable):
    """``E u(t, x + z) conj(u(t, x))``."""
    return _kernel(t, c, z) * C_f(z)


def cross_correlation(g1: Callable, g2: Callable, support: float = np.inf) -> Callable:
    """``G(z) = int g1(z + y) g2(y) dy`` by quadrature."""

    def G(z):
        def one(zz):
            val, _ = integrate.quad(lambda y: g1(zz + y) * g2(y), -support, support,
                                    epsabs=1e-13, epsrel=1e-11, limit=400)
            return val

        return np.vectorize(one)(z) if np.ndim(z) else one(float(z))

    return G


def gaussian_cross_correlation(a: float, s1: float, s2: float) -> Callable:
    """Closed form of G for ``g1 = exp(-(x-a)^2/2s1^2)`` and ``g2 = exp(-x^2/2s2^2)``."""
    v = s1**2 + s2**2
    amp = np.sqrt(2 * np.pi * s1**2 * s2**2 / v)
    return lambda z: amp * np.exp(-(np.asarray(z, dtype=float) - a) ** 2 / (2 * v))


def _quad(f: Callable, a: float, b: float, **kw) -> float:
    val, _ = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-11, limit=2000, **kw)
    return val


def tested_covariance(t: float, c: float, C_f: Callable, G: Callable, z_max: float = 40.0) -> complex:
    """``E <u, g1> conj<u, g2> = int C_f(z) G(z) (e^{2 pi i c t z} - 1)/(2 pi i c z) dz``.

    Folded onto ``z > 0`` with the even and odd parts of ``C_f G``; the
    integrand is assumed negligible beyond ``z_max``.  Away from the origin
    the oscillating factors go to QUADPACK's sine/cosine weights.
    """
    if t == 0:
        return 0j
    w = 2 * np.pi * c
    wt = w * t

    def even(z):
        return C_f(z) * (G(z) + G(-z))

    def odd_over_wz(z):
        z = max(z, 1e-300)  # QAWO samples the endpoint; the ratio tends to 2 C_f G'(0) / w
        return C_f(z) * (G(z) - G(-z)) / (w * z)

    z1 = min(np.pi / wt, z_max)
    # real part: even(z) sin(wt z) / (w z)
    re = _quad(lambda z: even(z) * t * np.sinc(wt * z / np.pi), 0.0, z1)
    re += _quad(lambda z: even(z) / (w * z), z1, z_max, weight="sin", wvar=wt)
    # imaginary part: odd(z) (1 - cos(wt z)) / (w z); odd(z)/z stays bounded at 0
    im = _quad(odd_over_wz, 0.0, z_max) - _quad(odd_over_wz, 0.0, z_max, weight="cos", wvar=wt)
    return complex(re, im)


def pv_correction(C_f: Callable, G: Callable, z_max: float = np.inf) -> float:
    """``int_0^inf C_f(z) (G(z) - G(-z)) / z dz``, the principal value of
    ``int C_f(z) G(z) / z dz`` for even ``C_f``."""
    val, _ = integrate.quad(lambda z: C_f(z) * (G(z) - G(-z)) / z, 0.0, z_max,
                            epsabs=1e-13, epsrel=1e-11, limit=400)
    return val


def limiting_tested_covariance(c: float, C_f: Callable, G: Callable) -> complex:
    """``t -> infinity`` limit: ``C_f(0) G(0) / (2c) + (i / (2 pi c)) pv_correction``.

    The half-line time integral ``int_0^inf e^{i w s} ds`` equals
    ``pi delta(w) + i pv(1/w)``; with ``w = 2 pi c z`` this is
    ``delta(z)/(2c) + (i/(2 pi c)) pv(1/z)``.
    """
    return complex(float(C_f(0.0)) * float(G(0.0)) / (2 * c), pv_correction(C_f, G) / (2 * np.pi * c))


def simulate(t: float, c: float, x, C_f: Callable, n_paths: int, dt: float,
             rng: np.random.Generator) -> np.ndarray:
    """Heun Monte Carlo of the model at the points ``x``; returns ``(n_paths, len(x))``.

    The noise increments at the points are jointly Gaussian with covariance
    ``dt * C_f(x_i - x_j)``; both stages share one increment per step.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    cov = C_f(x[:, None] - x[None, :])
    chol = np.linalg.cholesky(cov + 1e-14 * np.eye(x.size) * np.max(np.abs(cov)))
    a = 2j * np.pi * c * x
    n_steps = int(round(t / dt))
    if not np.isclose(n_steps * dt, t):
        raise ValueError("t must be a multiple of dt")
    u = np.zeros((n_paths, x.size), dtype=complex)
    for _ in range(n_steps):
        dW = np.sqrt(dt) * rng.standard_normal((n_paths, x.size)) @ chol.T
        u_star = u + dt * a * u + dW
        u = u + 0.5 * dt * a * (u + u_star) + dW
    return u
