import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from svpc.errors import DimensionError, InputError
from svpc.matkit import (
    adjugate_transpose,
    det,
    minors,
    rotation_2d,
    sample_rotation,
    sample_rotations,
    schur_product,
    signed_svd,
)

entries = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def mats(d):
    return arrays(np.float64, (d, d), elements=entries)


def test_det_examples():
    assert det(np.eye(2)) == 1.0
    assert det(np.diag([2.0, -3.0])) == -6.0
    assert det(np.diag([1.0, 2.0, 3.0])) == 6.0


def test_adjugate_examples():
    assert np.array_equal(adjugate_transpose(np.eye(3)), np.eye(3))
    assert np.array_equal(adjugate_transpose(np.diag([1.0, 2.0, 3.0])), np.diag([6.0, 3.0, 2.0]))
    assert np.array_equal(adjugate_transpose(np.diag([0.0, 0.0, 1.0])), np.zeros((3, 3)))
    with pytest.raises(DimensionError):
        adjugate_transpose(np.eye(2))


@given(mats(3))
def test_adjugate_matches_inverse(F):
    J = det(F)
    if abs(J) < 1e-3:
        return
    expected = (J * np.linalg.inv(F)).T
    assert np.allclose(adjugate_transpose(F), expected, rtol=1e-9, atol=1e-9 * np.abs(expected).max())


def test_minors_examples():
    M = minors(np.diag([2.0, 5.0]))
    assert np.array_equal(M.A, np.diag([2.0, 5.0])) and M.B is None and M.c == 10.0
    M = minors(np.diag([1.0, 2.0, 3.0]))
    assert np.array_equal(M.B, np.diag([6.0, 3.0, 2.0])) and M.c == 6.0
    M = minors(np.eye(2))
    assert M.c == 1.0 and M.dim == 2


def test_as_matrix_rejects_bad_input():
    with pytest.raises(InputError):
        det(np.ones((4, 4)))
    with pytest.raises(InputError):
        det(np.array([[1.0, np.inf], [0.0, 1.0]]))


def test_signed_svd_examples():
    assert np.allclose(signed_svd(np.diag([2.0, -3.0])).nu, [3.0, -2.0])
    assert np.allclose(signed_svd(np.eye(3)).nu, [1.0, 1.0, 1.0])
    assert np.allclose(signed_svd(rotation_2d(math.pi / 2)).nu, [1.0, 1.0])


def _check_spectrum(F, nu):
    ref = np.linalg.svd(F, compute_uv=False)
    assert np.allclose(np.abs(nu), ref, atol=1e-9)
    assert np.all(np.diff(np.abs(nu)) <= 1e-12)
    assert np.all(nu[:-1] >= 0)
    J = det(F)
    assert abs(np.prod(nu) - J) <= 1e-8 * max(1.0, abs(J))


@given(mats(2))
def test_signed_svd_2d_properties(F):
    _check_spectrum(F, signed_svd(F).nu)


@settings(max_examples=200)
@given(mats(3))
def test_signed_svd_3d_properties(F):
    _check_spectrum(F, signed_svd(F).nu)


@given(mats(3), st.integers(0, 2**32 - 1))
def test_signed_svd_rotation_invariant(F, seed):
    rng = np.random.default_rng(seed)
    R1, R2 = sample_rotations(3, 2, rng)
    a = signed_svd(F).nu
    b = signed_svd(R1 @ F @ R2).nu
    assert np.allclose(a, b, atol=1e-8 * max(1.0, np.abs(a).max()))


def test_rotation_sampling():
    rng = np.random.default_rng(1)
    R = sample_rotation(2, rng)
    theta = math.atan2(R[1, 0], R[0, 0])
    assert np.allclose(R, rotation_2d(theta), atol=1e-15)
    a = sample_rotation(3, np.random.default_rng(7))
    b = sample_rotation(3, np.random.default_rng(7))
    assert np.array_equal(a, b)
    Rs = sample_rotations(3, 10_000, np.random.default_rng(3))
    assert np.allclose(np.einsum("nji,njk->nik", Rs, Rs), np.eye(3), atol=1e-12)
    assert np.allclose(np.linalg.det(Rs), 1.0, atol=1e-12)
    assert np.all(np.abs(Rs.mean(axis=0)) < 0.03)


def test_schur_product():
    assert np.array_equal(schur_product(np.eye(2), np.eye(2)), np.eye(2))
    assert np.array_equal(schur_product(np.diag([1.0, 2.0]), [[0, 1], [1, 0]]), np.zeros((2, 2)))
    assert np.array_equal(schur_product([[1, 2], [3, 4]], [[5, 6], [7, 8]]), [[5, 12], [21, 32]])
    with pytest.raises(DimensionError):
        schur_product(np.eye(2), np.eye(3))


@pytest.mark.parametrize("scale", [1.79e-95, 1e-200, 1e150])
def test_jacobi_extreme_scales(scale):
    F = np.full((3, 3), scale)
    F[0, 0] = 0.0
    got = np.abs(signed_svd(F).nu)
    ref = np.linalg.svd(F, compute_uv=False)
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-12 * ref[0])
