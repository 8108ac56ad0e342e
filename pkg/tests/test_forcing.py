import numpy as np
import pytest

from wavecascade.field import dft_inverse, hermitian_defect, l2_norm
from wavecascade.forcing import ForcingSpec, effective_psi, sample_forcing, white_noise
from wavecascade.grid import build_grid
from wavecascade.integrator import IntegratorState, SimulationConfig, pc_step


def spec(d=1, N=16, L=1.0, seed=0, **kw):
    return ForcingSpec(build_grid(d, N, L), seed=seed, **kw)


def test_support_is_annulus():
    s = spec(d=2, N=32)
    fh = sample_forcing(s, 0).data
    r = s.grid.k_mod / s.grid.dk
    assert fh[0, 0] == 0
    assert not np.any(fh[r > 5 + 1e-9]) and not np.any(fh[r < 3 - 1e-9])
    assert np.all(fh[s.mask] != 0)


def test_realness_and_hermitian():
    for d, N in [(1, 32), (2, 16), (3, 8)]:
        fh = sample_forcing(spec(d=d, N=N, seed=4), 11)
        assert np.max(np.abs(dft_inverse(fh, real=False).imag)) < 1e-12
        assert hermitian_defect(fh) < 1e-13


def test_mean_and_variance_per_mode():
    L = 2.0
    s = spec(d=1, N=16, L=L, seed=9)
    n = 10_000
    draws = sample_forcing(s, 0, members=n).data[:, s.mask]
    mean = draws.mean(axis=0)
    se_mean = np.sqrt(L / n)  # |f|^2 has mean L; each of re/im carries half of it
    assert np.all(np.abs(mean.real) < 4 * se_mean) and np.all(np.abs(mean.imag) < 4 * se_mean)
    power = np.abs(draws) ** 2
    se = power.std(axis=0, ddof=1) / np.sqrt(n)
    assert np.all(np.abs(power.mean(axis=0) - L) < 4 * se)


def test_isotropy_within_shells():
    s = spec(d=2, N=16, seed=2)
    n = 4000
    power = np.abs(sample_forcing(s, 0, members=n).data) ** 2
    shells = s.grid.shell_id
    for sh in (3, 4, 5):
        members = power[:, (shells == sh) & s.mask]
        means = members.mean(axis=0)
        se = members.std(axis=0, ddof=1) / np.sqrt(n)
        assert np.all(np.abs(means - means.mean()) < 4 * np.sqrt(2) * se)


def test_whiteness_in_time():
    s = spec(d=1, N=16, seed=5)
    n = 10_000
    k = int(np.flatnonzero(s.mask)[0])
    series = np.array([sample_forcing(s, step).data[k] for step in range(n + 1)])
    a, b = series[:-1], series[1:]
    corr = np.mean(a * np.conj(b))
    se = np.sqrt(np.mean(np.abs(a) ** 2 * np.abs(b) ** 2) / n)
    assert abs(corr) < 4 * se


def test_reproducible_by_seed_and_step():
    s = spec(seed=7)
    np.testing.assert_array_equal(white_noise(s, 3), white_noise(spec(seed=7), 3))
    assert not np.array_equal(white_noise(s, 3), white_noise(s, 4))


def test_member_m_is_seed_plus_m():
    batch = white_noise(spec(seed=5), 12, members=3)
    for m in range(3):
        np.testing.assert_array_equal(batch[m], white_noise(spec(seed=5 + m), 12))


def test_rejects_annulus_below_kappa():
    with pytest.raises(ValueError):
        spec(k_lo=1.0, kappa=1.0)


def test_psi_nominal_and_lattice():
    s = spec(d=1, N=64, L=2.0)
    nominal = effective_psi(s, "nominal")
    assert nominal(2.9 * s.grid.dk) == 0.0
    assert nominal(4 * s.grid.dk) == pytest.approx(2.0)
    lattice = effective_psi(s)
    dk = s.grid.dk
    assert lattice(2.6 * dk) == pytest.approx(2.0) and lattice(5.4 * dk) == pytest.approx(2.0)
    assert lattice(2.4 * dk) == 0.0 and lattice(5.6 * dk) == 0.0
    with pytest.raises(ValueError):
        effective_psi(s, "other")


def test_early_variance_growth_matches_psi():
    """Ito isometry: d E[sigma^2]/dt = sum_k psi(|k|) dk at early times."""
    cfg = SimulationConfig(d=1, N=64, nu=0.0, dt=1e-3, seed=100, n_samples=0)
    members, steps = 400, 10
    state = IntegratorState.zero(cfg, members)
    for _ in range(steps):
        state = pc_step(state, cfg)
    rate = l2_norm(state.uh) / state.t
    psi = effective_psi(cfg.forcing_spec)
    expected = float(np.sum(psi(cfg.grid.k_mod)) * cfg.grid.dk)
    se = rate.std(ddof=1) / np.sqrt(members)
    assert abs(rate.mean() - expected) < 4 * se
    assert se < 0.05 * expected
