import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from wavecascade.oracle.densities import IndicatorDensity
from wavecascade.oracle.kernels import QuadratureError, duhamel_reference, semigroup_apply
from wavecascade.oracle.spectrum import AnalyticParams


def params(d=1, H=1 / 3, c=1.0, kappa=1.0, nu=0.0):
    return AnalyticParams(d=d, H=H, c=c, kappa=kappa, psi=IndicatorDensity(3, 5), nu=nu)


def bump(k0, w, amp=1.0):
    """Radial Gaussian shell; takes k of shape (n,) in d=1 or (n, d)."""

    def f(k):
        k = np.asarray(k, dtype=float)
        r = np.abs(k) if k.ndim < 2 else np.linalg.norm(k, axis=-1)
        return amp * np.exp(-((r - k0) ** 2) / (2 * w**2)) * (r > 1.0)

    return f


def test_identity_at_t0():
    u0 = bump(4.0, 0.3)
    k = np.linspace(-10, 10, 41)
    np.testing.assert_array_equal(semigroup_apply(params(), u0, 0.0)(k), u0(k))


def test_bump_moves_outward_with_amplitude_factor():
    p = params()
    u0 = bump(4.0, 0.2)
    out = semigroup_apply(p, u0, 2.0)
    assert out(6.0) == pytest.approx((4 / 6) ** (5 / 6), rel=1e-14)
    assert (4 / 6) ** (5 / 6) == pytest.approx(0.7133, abs=1e-4)
    assert out(-6.0) == pytest.approx(out(6.0))
    assert abs(out(4.0)) < 1e-20


def test_support_condition_exact():
    p = params(d=2, c=1.5)
    t = 3.0
    u0 = lambda k: np.ones(np.shape(k)[:-1])  # noqa: E731
    rng = np.random.default_rng(0)
    k = rng.uniform(-12, 12, size=(500, 2))
    vals = semigroup_apply(p, u0, t)(k)
    mod = np.linalg.norm(k, axis=1)
    assert np.all(vals[mod <= p.c * t + p.kappa] == 0)
    assert np.all(vals[mod > p.c * t + p.kappa] > 0)


@settings(max_examples=40, deadline=None)
@given(t=st.floats(0, 5), s=st.floats(0, 5), d=st.sampled_from([1, 2, 3]), H=st.floats(-1.5, 0.9),
       nu=st.sampled_from([0.0, 1e-4]), seed=st.integers(0, 1000))
def test_semigroup_composition(t, s, d, H, nu, seed):
    p = params(d=d, H=H, nu=nu)
    rng = np.random.default_rng(seed)
    u0 = bump(rng.uniform(2, 6), rng.uniform(0.5, 2), rng.normal())
    k = rng.uniform(-20, 20, size=(64, d)) if d > 1 else rng.uniform(-20, 20, 64)
    two = semigroup_apply(p, semigroup_apply(p, u0, s), t)(k)
    one = semigroup_apply(p, u0, t + s)(k)
    np.testing.assert_allclose(two, one, rtol=1e-12, atol=1e-300)


def test_vector_direction_preserved():
    p = params(d=3, H=0.2)
    u0 = lambda k: np.exp(-np.sum((k - np.array([4.0, 0.0, 0.0])) ** 2, axis=-1))  # noqa: E731
    k = np.array([[7.0, 0.0, 0.0], [-7.0, 0.0, 0.0], [0.0, 7.0, 0.0]])
    vals = semigroup_apply(p, u0, 3.0)(k)
    alpha = 0.2 + 3 - 0.5
    # sources are (4,0,0), (-4,0,0) and (0,4,0)
    np.testing.assert_allclose(vals, (4 / 7) ** alpha * np.exp([0.0, -64.0, -32.0]), rtol=1e-13)


def test_duhamel_zero_time():
    sol = duhamel_reference(params(), lambda s, k: np.ones_like(np.abs(k)), 0.0)
    assert not np.any(sol(np.linspace(-5, 5, 11)))


def test_duhamel_time_independent_closed_form():
    # H = 1/2 - d removes the amplitude factor, so the solution is
    # (1/c) int_{|k| - ct}^{|k|} f(s) ds, an erf difference for a Gaussian profile
    c, t, k0, w = 1.3, 3.0, 20.0, 2.0
    p = params(H=-0.5, c=c)

    def forcing(s, k):
        return np.exp(-((np.abs(k) - k0) ** 2) / (2 * w**2))

    k = np.linspace(-40, 40, 161)
    got = duhamel_reference(p, forcing, t)(k)
    r = np.abs(k)
    exact = w * np.sqrt(np.pi / 2) / c * (special.erf((r - k0) / (np.sqrt(2) * w))
                                          - special.erf((r - c * t - k0) / (np.sqrt(2) * w)))
    np.testing.assert_allclose(got, exact, atol=1e-11)


def test_duhamel_matches_direct_quadrature_with_amplitude():
    p = params(H=1 / 3, c=1.0)
    alpha = 1 / 3 + 1 - 0.5

    def forcing(s, k):
        return (1 + np.sin(s)) * np.exp(-((np.abs(k) - 10.0) ** 2) / 2)

    t = 2.5
    sol = duhamel_reference(p, forcing, t)
    for kk in (11.0, 12.3, -13.0):
        r = abs(kk)
        ref, _ = integrate.quad(lambda s: ((r - (t - s)) / r) ** alpha * forcing(s, r - (t - s)), 0, t,
                                epsabs=1e-14, epsrel=1e-13)
        assert sol(kk) == pytest.approx(ref, rel=1e-10)


def test_duhamel_linear_in_forcing():
    p = params(d=2)
    f1 = lambda s, k: np.exp(-s) * bump(6.0, 1.0)(k)  # noqa: E731
    f2 = lambda s, k: np.cos(s) * bump(9.0, 1.5)(k)  # noqa: E731
    k = np.random.default_rng(2).uniform(-15, 15, size=(30, 2))
    t = 1.7
    lhs = duhamel_reference(p, lambda s, q: 2 * f1(s, q) - 0.5 * f2(s, q), t)(k)
    rhs = 2 * duhamel_reference(p, f1, t)(k) - 0.5 * duhamel_reference(p, f2, t)(k)
    np.testing.assert_allclose(lhs, rhs, atol=1e-13)


def test_duhamel_reports_unconverged_quadrature():
    sol = duhamel_reference(params(), lambda s, k: np.sin(40 * s) * bump(10.0, 1.0)(k), 5.0, panels=1, order=2)
    with pytest.raises(QuadratureError):
        sol(np.array([12.0]))


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        semigroup_apply(params(), bump(4, 1), -1.0)
