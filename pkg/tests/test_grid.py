import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavecascade.grid import build_grid, negate_index, shell_members


def test_k_order_d1():
    g = build_grid(1, 8, 1.0)
    assert g.dk == 1.0
    np.testing.assert_array_equal(g.k_axes[0], [0, 1, 2, 3, 4, -3, -2, -1])


def test_x_tilde_nyquist_zeroed():
    g = build_grid(1, 8, 1.0)
    assert g.dx == 1 / 8
    np.testing.assert_array_equal(g.x_tilde[0] / g.dx, [0, 1, 2, 3, 0, -3, -2, -1])
    assert g.x_tilde[0][4] == 0.0


def test_modulus_d2():
    g = build_grid(2, 4)
    assert g.k_mod[2, 2] == pytest.approx(2 * np.sqrt(2), abs=1e-15)


def test_box_length_scales_dk_and_dx():
    g = build_grid(1, 16, 2.5)
    assert g.dk == pytest.approx(0.4)
    assert g.dx == pytest.approx(2.5 / 16)
    assert g.k_max == pytest.approx(8 * 0.4)


@pytest.mark.parametrize("d,N", [(0, 8), (4, 8), (1, 12), (2, 2), (1, 7)])
def test_rejects_bad_grids(d, N):
    with pytest.raises(ValueError):
        build_grid(d, N)


def test_rejects_nonpositive_length():
    with pytest.raises(ValueError):
        build_grid(1, 8, 0.0)


def test_shell_members_d1():
    g = build_grid(1, 8)
    (idx,) = shell_members(g, 3)
    assert sorted(g.k_axes[0][idx].tolist()) == [-3, 3]


def test_shell_zero_d2_is_origin():
    g = build_grid(2, 8)
    members = shell_members(g, 0)
    assert [m.tolist() for m in members] == [[0], [0]]


def test_shell_count_d2_brute_force():
    g = build_grid(2, 8)
    ks = [0, 1, 2, 3, 4, -3, -2, -1]
    expected = sum(1 for kx, ky in itertools.product(ks, ks) if round(np.hypot(kx, ky)) == 5)
    assert len(shell_members(g, 5)[0]) == expected


@settings(max_examples=20, deadline=None)
@given(d=st.sampled_from([1, 2, 3]), n=st.integers(2, 4))
def test_shells_partition_and_symmetry(d, n):
    g = build_grid(d, 2**n)
    seen = np.zeros(g.shape, dtype=int)
    for s in range(g.n_shells):
        mask = g.shell_id == s
        seen += mask
        np.testing.assert_array_equal(negate_index(mask, d), mask)
    assert np.all(seen == 1)


@settings(max_examples=10, deadline=None)
@given(n=st.integers(2, 7))
def test_x_tilde_odd(n):
    g = build_grid(1, 2**n)
    xt = g.x_tilde[0]
    np.testing.assert_array_equal(negate_index(xt, 1), -xt)
