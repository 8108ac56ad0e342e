import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavecascade.field import SpectralField, dft_forward, enforce_hermitian, l2_norm
from wavecascade.grid import build_grid
from wavecascade.stats import (
    StatsAccumulator,
    accumulate_sample,
    fit_power_law,
    lag1_autocorrelation,
    merge,
    periodogram,
    shell_average,
    structure_function,
)


def random_hermitian(g, seed, batch=()):
    rng = np.random.default_rng(seed)
    shape = tuple(batch) + g.shape
    return enforce_hermitian(SpectralField(g, rng.standard_normal(shape) + 1j * rng.standard_normal(shape)))


def test_periodogram_basics():
    g = build_grid(1, 8)
    assert not np.any(periodogram(SpectralField.zeros(g)))
    data = np.zeros(8, dtype=complex)
    data[2], data[-2] = 3 + 4j, 3 - 4j
    p = periodogram(SpectralField(g, data))
    assert p[2] == p[-2] == 25


def test_periodogram_parseval_with_l2():
    g = build_grid(2, 16, 3.0)
    uh = random_hermitian(g, 1)
    assert np.sum(periodogram(uh)) * g.dk == pytest.approx(l2_norm(uh), rel=1e-14)


def test_shell_average_constant():
    g = build_grid(3, 8)
    means = shell_average(np.full(g.shape, 2.5), g)
    counts = g.shell_counts()
    np.testing.assert_allclose(means[counts > 0], 2.5)


def test_shell_average_anisotropic_brute_force():
    g = build_grid(2, 16)
    values = g.k_vec[0] ** 2
    means = shell_average(values, g)
    for s in range(g.n_shells):
        sel = values[g.shell_id == s]
        if sel.size:
            assert means[s] == pytest.approx(sel.mean())
        else:
            assert np.isnan(means[s])


def test_shell_average_d1_pairs():
    g = build_grid(1, 8)
    vals = np.arange(8.0)
    means = shell_average(vals, g)
    assert means[3] == pytest.approx((vals[3] + vals[5]) / 2)
    assert means[4] == vals[4]


def test_structure_function_cosine():
    N, A, k0 = 64, 1.3, 3
    x = np.arange(N) / N
    u = A * np.cos(2 * np.pi * k0 * x)
    lags = np.arange(1, N // 2 + 1)
    s2 = structure_function(u, lags)
    ell = lags / N
    np.testing.assert_allclose(s2, A**2 * (1 - np.cos(2 * np.pi * k0 * ell)), atol=1e-13)
    brute = [np.mean([(u[(i + m) % N] - u[i]) ** 2 for i in range(N)]) for m in lags]
    np.testing.assert_allclose(s2, brute, atol=1e-13)


def test_structure_function_half_box():
    N, A = 32, 0.7
    u = A * np.cos(2 * np.pi * np.arange(N) / N)
    assert structure_function(u, [N // 2])[0] == pytest.approx(2 * A**2)


def test_structure_function_constant_and_fractional_lag():
    assert not np.any(structure_function(np.full((8, 8), 3.0), [1, 2, 0.5]))
    N, A = 64, 1.0
    u = A * np.cos(2 * np.pi * np.arange(N) / N)
    m = 0.25
    assert structure_function(u, [m])[0] == pytest.approx(A**2 * (1 - np.cos(2 * np.pi * m / N)), rel=1e-10)


def test_structure_function_axis_average():
    g = build_grid(2, 16)
    x = np.arange(16) / 16
    u = np.cos(2 * np.pi * x)[:, None] * np.ones(16)[None, :]
    # only the first axis varies, so the axis average halves the 1D value
    s2 = structure_function(u, [4])
    assert s2[0] == pytest.approx(0.5 * (1 - np.cos(2 * np.pi * 4 / 16)))


@settings(max_examples=20, deadline=None)
@given(d=st.sampled_from([1, 2]), seed=st.integers(0, 2**31))
def test_structure_function_symmetric_lags(d, seed):
    N = 16
    u = np.random.default_rng(seed).standard_normal((N,) * d)
    lags = np.arange(0, N + 1)
    s2 = structure_function(u, lags)
    assert s2[0] == 0.0
    np.testing.assert_allclose(s2, s2[::-1], rtol=1e-12, atol=1e-14)


def test_fit_exact_power_laws():
    r = np.linspace(1, 50, 40)
    fit = fit_power_law(r, 3.0 * r ** (-5 / 3))
    assert fit.exponent == pytest.approx(-5 / 3, abs=1e-12)
    assert fit.residual < 1e-12
    assert fit_power_law(r, 0.2 * r ** (2 / 3)).exponent == pytest.approx(2 / 3, abs=1e-12)


def test_fit_window_and_errors():
    r = np.arange(1.0, 30.0)
    fit = fit_power_law(r, r**-2, window=(5, 12))
    assert fit.n_points == 8 and fit.window == (5.0, 12.0)
    with pytest.raises(ValueError):
        fit_power_law(r, r**-2, window=(5, 7))
    with pytest.raises(ValueError):
        fit_power_law(r, -(r**-2))


def test_lag1_autocorrelation():
    rng = np.random.default_rng(0)
    assert abs(lag1_autocorrelation(rng.standard_normal(20000))) < 0.03
    x = np.zeros(20000)
    for i in range(1, x.size):
        x[i] = 0.8 * x[i - 1] + rng.standard_normal()
    assert lag1_autocorrelation(x) == pytest.approx(0.8, abs=0.02)
    assert np.isnan(lag1_autocorrelation([1.0, 2.0]))


def test_single_sample_average():
    g = build_grid(1, 32)
    uh = random_hermitian(g, 2)
    acc = accumulate_sample(StatsAccumulator(g), uh, 1.5)
    expected = np.nan_to_num(shell_average(periodogram(uh), g))
    np.testing.assert_allclose(acc.spectrum(), expected)
    assert acc.l2_series == [(1.5, pytest.approx(l2_norm(uh)))]


def test_synthetic_fields_recover_population_spectrum():
    g = build_grid(1, 64)
    rng = np.random.default_rng(11)
    target = np.zeros(g.n_shells)
    target[1:] = np.arange(1, g.n_shells) ** -1.5
    acc = StatsAccumulator(g, lags=np.array([1.0, 2.0]))
    n = 100
    for i in range(n):
        # real white noise filtered to the target: E|u_k|^2 = N * target
        u = dft_forward(rng.standard_normal(g.shape), g).data * np.sqrt(target[g.shell_id])
        accumulate_sample(acc, SpectralField(g, u), float(i))
    mean, se = acc.spectrum(), acc.spectrum_stderr()
    live = slice(1, g.n_shells)
    assert np.all(np.abs(mean[live] - g.N * target[live]) < 4.5 * se[live])


def test_merge_equals_sequential():
    g = build_grid(2, 8)
    fields = [random_hermitian(g, s) for s in range(6)]
    seq = StatsAccumulator(g)
    a, b = StatsAccumulator(g), StatsAccumulator(g)
    for i, f in enumerate(fields):
        accumulate_sample(seq, f, float(i))
        accumulate_sample(a if i % 2 else b, f, float(i))
    for m in (merge(a, b), merge(b, a)):
        assert m.count == seq.count
        np.testing.assert_allclose(m.spectrum(), seq.spectrum(), rtol=1e-13)
        np.testing.assert_allclose(m.s2(), seq.s2(), rtol=1e-13)
        np.testing.assert_allclose(m.spectrum_stderr(), seq.spectrum_stderr(), rtol=1e-10)
        assert m.l2_series == sorted(seq.l2_series)


def test_merge_rejects_mismatch():
    with pytest.raises(ValueError):
        merge(StatsAccumulator(build_grid(1, 8)), StatsAccumulator(build_grid(1, 16)))


def test_batched_sample_equals_members():
    g = build_grid(1, 32)
    batch = random_hermitian(g, 4, batch=(3,))
    a = accumulate_sample(StatsAccumulator(g), batch, 0.0)
    b = StatsAccumulator(g)
    for m in range(3):
        accumulate_sample(b, SpectralField(g, batch.data[m]), 0.0)
    assert a.count == b.count == 3
    np.testing.assert_allclose(a.spectrum(), b.spectrum(), rtol=1e-13)
    np.testing.assert_allclose(a.s2(), b.s2(), rtol=1e-13)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_shell_spectrum_real_nonnegative(seed):
    g = build_grid(2, 8)
    means = shell_average(periodogram(random_hermitian(g, seed)), g)
    assert np.all(np.isreal(means)) and np.all(means[np.isfinite(means)] >= 0)
