import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from oamnet.errors import OrderCapError
from oamnet.optics.mode_algebra import (
    ModeIndices,
    apply_rotation,
    binomial_terms,
    closed_form_rotation_n2,
    derivative_terms,
    eigenphase_residual,
    indices_from_lp,
    lg_coefficients,
    lg_mode,
    lp_of_order,
    rotation_matrix,
)

SQRT_HALF = 1 / math.sqrt(2)
angles = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)


@pytest.mark.parametrize(
    "ell, p, n, m",
    [(2, 0, 2, 0), (0, 1, 1, 1), (-3, 1, 1, 4)],
)
def test_indices_from_lp(ell, p, n, m):
    indices = indices_from_lp(ell, p)
    assert (indices.n, indices.m) == (n, m)
    assert (indices.ell, indices.p) == (ell, p)


def test_negative_indices_rejected():
    with pytest.raises(ValueError):
        ModeIndices(-1, 0)
    with pytest.raises(ValueError):
        indices_from_lp(1, -1)


@pytest.mark.parametrize(
    "n, m, expected",
    [
        (2, 0, [0.5, -1j * SQRT_HALF, -0.5]),
        (0, 0, [1]),
        (1, 1, [SQRT_HALF, 0, SQRT_HALF]),
        (0, 2, [0.5, 1j * SQRT_HALF, -0.5]),
    ],
)
def test_lg_coefficients(n, m, expected):
    assert_allclose(lg_coefficients(n, m).amplitudes, expected, atol=1e-12)


@given(st.integers(0, 15), st.integers(0, 15))
def test_derivative_and_binomial_terms_agree(n, m):
    assert derivative_terms(n, m) == binomial_terms(n, m)


@given(st.integers(0, 15), st.integers(0, 15))
def test_modes_are_normalised(n, m):
    assert lg_coefficients(n, m).norm() == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("order", range(11))
def test_modes_of_one_order_are_orthonormal(order):
    basis = np.array([lg_mode(ell, p).amplitudes for ell, p in lp_of_order(order)])
    assert_allclose(basis @ basis.conj().T, np.eye(order + 1), atol=1e-10)


def test_order_cap():
    with pytest.raises(OrderCapError):
        lg_coefficients(20, 11)
    with pytest.raises(OrderCapError):
        rotation_matrix(12, 0.1, cap=10)
    assert lg_coefficients(20, 10).order == 30


@settings(deadline=None)
@given(angles)
def test_rotation_matches_closed_form(alpha):
    assert_allclose(rotation_matrix(2, alpha), closed_form_rotation_n2(alpha), atol=1e-10)


def test_rotation_examples():
    assert_allclose(rotation_matrix(3, 0.0), np.eye(4), atol=1e-12)
    assert_allclose(rotation_matrix(1, math.pi / 2), [[0, 1], [-1, 0]], atol=1e-12)


@pytest.mark.parametrize("order", range(7))
@pytest.mark.parametrize("alpha", [0.0, 0.4, 1.0, math.pi / 3, 2.9])
def test_rotation_is_unitary(order, alpha):
    matrix = rotation_matrix(order, alpha)
    assert_allclose(matrix @ matrix.conj().T, np.eye(order + 1), atol=1e-10)


@settings(deadline=None)
@given(st.integers(0, 6).flatmap(lambda order: st.sampled_from(lp_of_order(order))), angles)
def test_eigenphase_law(lp, alpha):
    ell, p = lp
    assert eigenphase_residual(ell, p, alpha) < 1e-10


def test_counter_rotating_modes_pick_up_opposite_phases():
    alpha = 0.7
    for ell in (2, -2):
        mode = lg_mode(ell, 0)
        rotated = apply_rotation(mode, alpha)
        assert rotated.allclose(mode.scaled(np.exp(-1j * ell * alpha)))


def test_rotation_is_linear_on_superpositions():
    plus, minus = lg_mode(2, 0), lg_mode(-2, 0)
    superposition = (plus + minus).scaled(SQRT_HALF)
    expected = (plus.scaled(np.exp(-1j * math.pi)) + minus.scaled(np.exp(1j * math.pi))).scaled(
        SQRT_HALF
    )
    assert apply_rotation(superposition, math.pi / 2).allclose(expected)


def test_zero_rotation_is_identity():
    mode = lg_mode(-3, 1)
    assert apply_rotation(mode, 0.0).allclose(mode)


@settings(deadline=None)
@given(st.integers(0, 6), angles, angles)
def test_rotations_compose_by_adding_angles(order, alpha, beta):
    composed = rotation_matrix(order, alpha) @ rotation_matrix(order, beta)
    assert_allclose(composed, rotation_matrix(order, alpha + beta), atol=1e-10)


@pytest.mark.parametrize("order", range(7))
def test_full_turn_is_the_identity(order):
    assert_allclose(rotation_matrix(order, 2 * math.pi), np.eye(order + 1), atol=1e-10)
