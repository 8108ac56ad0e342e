import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavecascade.field import (
    SpectralField,
    dft_forward,
    dft_inverse,
    enforce_hermitian,
    hermitian_defect,
    l2_norm,
    project_low_modes,
    read_snapshot,
    write_snapshot,
)
from wavecascade.grid import build_grid


def random_field(g, seed=0, batch=()):
    rng = np.random.default_rng(seed)
    shape = tuple(batch) + g.shape
    return SpectralField(g, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def test_forward_constant():
    g = build_grid(1, 8)
    uh = dft_forward(np.ones(8), g)
    np.testing.assert_allclose(uh.data, [8, 0, 0, 0, 0, 0, 0, 0], atol=1e-14)


def test_forward_cosine_direct_sum():
    g = build_grid(1, 8)
    x = g.positions()
    u = np.cos(2 * np.pi * x)
    # direct summation of the 8-point DFT
    n = np.arange(8)
    direct = np.array([np.sum(u * np.exp(-2j * np.pi * k * n / 8)) for k in range(8)])
    uh = dft_forward(u, g).data
    np.testing.assert_allclose(uh, direct, atol=1e-13)
    assert uh[1] == pytest.approx(4) and uh[-1] == pytest.approx(4)


@pytest.mark.parametrize("d,N", [(1, 32), (2, 16), (3, 8)])
def test_round_trip(d, N):
    g = build_grid(d, N)
    u = np.random.default_rng(1).standard_normal(g.shape)
    np.testing.assert_allclose(dft_inverse(dft_forward(u, g)), u, rtol=1e-12, atol=1e-13)


def test_forward_shape_mismatch():
    with pytest.raises(ValueError):
        dft_forward(np.zeros(7), build_grid(1, 8))


def test_hermitian_averaging():
    g = build_grid(1, 8)
    data = np.zeros(8, dtype=complex)
    data[2] = 1.0
    out = enforce_hermitian(SpectralField(g, data)).data
    assert out[2] == 0.5 and out[-2] == 0.5
    assert np.count_nonzero(out) == 2


@pytest.mark.parametrize("d,N", [(1, 16), (2, 8), (3, 8)])
def test_hermitian_gives_real_field(d, N):
    g = build_grid(d, N)
    uh = enforce_hermitian(random_field(g, 3))
    assert np.max(np.abs(dft_inverse(uh, real=False).imag)) < 1e-12
    assert hermitian_defect(uh) < 1e-14


def test_project_low_modes_d1():
    g = build_grid(1, 8)
    uh = project_low_modes(random_field(g), g.dk).data
    zeroed = np.flatnonzero(uh == 0)
    assert sorted(g.k_axes[0][zeroed].tolist()) == [-1, 0, 1]


def test_project_kappa_zero():
    g = build_grid(1, 8)
    uh = project_low_modes(random_field(g), 0.0).data
    assert np.flatnonzero(uh == 0).tolist() == [0]


def test_project_d2_brute_force():
    g = build_grid(2, 8)
    uh = project_low_modes(random_field(g), 2.5 * g.dk).data
    ks = g.k_axes[0].ravel()
    expected = {(i, j) for i in range(8) for j in range(8) if np.hypot(ks[i], ks[j]) <= 2.5}
    assert set(zip(*np.nonzero(uh == 0))) == expected


def test_project_rejects_negative():
    with pytest.raises(ValueError):
        project_low_modes(random_field(build_grid(1, 8)), -1.0)


def test_l2_norm_values():
    g = build_grid(1, 8, 2.0)
    assert l2_norm(SpectralField.zeros(g)) == 0.0
    data = np.zeros(8, dtype=complex)
    data[3], data[-3] = 1 + 2j, 1 - 2j
    assert l2_norm(SpectralField(g, data)) == pytest.approx(2 * 5 * g.dk)


def test_l2_norm_brute_force():
    g = build_grid(2, 8)
    uh = random_field(g, 5)
    total = 0.0
    for idx in np.ndindex(*g.shape):
        total += abs(uh.data[idx]) ** 2
    assert l2_norm(uh) == pytest.approx(total * g.dk, rel=1e-13)


def test_l2_norm_batched():
    g = build_grid(1, 16)
    uh = random_field(g, 2, batch=(3,))
    vals = l2_norm(uh)
    assert vals.shape == (3,)
    assert vals[1] == pytest.approx(l2_norm(SpectralField(g, uh.data[1])))


@settings(max_examples=25, deadline=None)
@given(d=st.sampled_from([1, 2, 3]), seed=st.integers(0, 2**31), kappa=st.floats(0, 3))
def test_projections_idempotent(d, seed, kappa):
    g = build_grid(d, 8)
    uh = random_field(g, seed)
    h = enforce_hermitian(uh)
    np.testing.assert_allclose(enforce_hermitian(h).data, h.data, atol=1e-15)
    p = project_low_modes(uh, kappa)
    np.testing.assert_array_equal(project_low_modes(p, kappa).data, p.data)
    assert l2_norm(enforce_hermitian(h)) == pytest.approx(l2_norm(h), rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(d=st.sampled_from([1, 2, 3]), seed=st.integers(0, 2**31))
def test_parseval(d, seed):
    g = build_grid(d, 8, 1.7)
    u = np.random.default_rng(seed).standard_normal(g.shape)
    uh = dft_forward(u, g).data
    lhs = np.sum(u**2) * g.dx**d
    rhs = g.dx**d / g.N**d * np.sum(np.abs(uh) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("single", [False, True])
def test_snapshot_round_trip(tmp_path, single):
    g = build_grid(2, 8, 1.5)
    uh = random_field(g, 7, batch=(2,))
    path = write_snapshot(tmp_path / "f.bin", uh, 3.25, single=single)
    back, t = read_snapshot(path)
    assert t == 3.25 and back.grid.L_tot == 1.5 and back.data.shape == uh.data.shape
    np.testing.assert_allclose(back.data, uh.data, rtol=1e-6 if single else 0)
