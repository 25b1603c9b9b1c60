"""Types, skew matrices, frame defects, and the ambient isometry exponential."""

import itertools
import math

import numpy as np
import pytest

from conftest import random_params, random_frame_state
from sinh_torus import (
    FrameState,
    IntegratorOptions,
    SystemParams,
    flow,
    frame_defect,
    identity_frame,
    isometry_exp,
    orthonormality_defect,
    skew_from_params,
)
from sinh_torus.core import SkewMatrix4, frame_matrix, random_orthonormal_frame
from sinh_torus.dynamics import xi_of


def test_skew_zero_case():
    b = skew_from_params(0, 0, 0, 0, 0, 0)
    assert np.array_equal(b.matrix, np.zeros((4, 4)))
    assert b.zero


def test_skew_single_entry():
    b = skew_from_params(1, 0, 0, 0, 0, 0)
    m = b.matrix
    assert m[0, 1] == 1.0 and m[1, 0] == -1.0
    m[0, 1] = m[1, 0] = 0.0
    assert not np.any(m)


def test_skew_antisymmetry_and_readback(rng):
    for _ in range(20):
        params = rng.uniform(-5, 5, 6)
        b = skew_from_params(*params)
        m = b.matrix
        assert np.array_equal(m + m.T, np.zeros((4, 4)))
        assert np.array_equal(b.params, params)
        assert np.array_equal(SkewMatrix4.from_matrix(m).params, params)


def test_skew_entry_layout():
    b = skew_from_params(1, 2, 3, 4, 5, 6)
    m = b.matrix
    assert (m[0, 1], m[0, 2], m[0, 3]) == (1.0, 2.0, 3.0)
    assert (m[1, 2], m[1, 3], m[2, 3]) == (4.0, 5.0, 6.0)


def test_skew_rejects_non_finite():
    with pytest.raises(ValueError):
        skew_from_params(np.nan, 0, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        skew_from_params(0, np.inf, 0, 0, 0, 0)


def test_from_matrix_rejects_non_skew():
    with pytest.raises(ValueError):
        SkewMatrix4.from_matrix(np.eye(4))


def test_frame_state_round_trip(rng):
    state = random_frame_state(rng)
    again = FrameState.from_array(state.to_array())
    assert np.array_equal(again.to_array(), state.to_array())


def test_frame_state_rejects_non_finite():
    with pytest.raises(ValueError):
        FrameState([np.nan, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], 0, 0)
    with pytest.raises(ValueError):
        identity_frame(r=np.inf)


def test_frame_defect_identity_is_exactly_zero():
    assert frame_defect(identity_frame()) == 0.0
    assert orthonormality_defect(identity_frame()) == 0.0


def test_frame_defect_zero_on_oriented_signed_permutations():
    # exact-arithmetic orthonormal frames: signed permutations with det +1
    eye = np.eye(4)
    count = 0
    for perm in itertools.permutations(range(4)):
        for signs in itertools.product((1.0, -1.0), repeat=4):
            cols = [signs[i] * eye[perm[i]] for i in range(4)]
            f = np.stack(cols, axis=1)
            if np.linalg.det(f) < 0:
                continue
            state = FrameState(cols[0], cols[1], cols[2], cols[3], 0.0, 0.0)
            assert frame_defect(state) == 0.0
            count += 1
    assert count == 192


def test_frame_defect_scaled_tangent():
    state = FrameState(
        [1, 0, 0, 0], [0, 1.1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], 0.0, 0.0
    )
    assert frame_defect(state) == pytest.approx(0.21, abs=1e-15)


def test_frame_defect_detects_flipped_orientation():
    state = FrameState(
        [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], 0.0, 0.0
    )
    assert orthonormality_defect(state) == 0.0
    assert frame_defect(state) == pytest.approx(2.0, abs=1e-12)


def test_frame_defect_small_on_random_frames(rng):
    for _ in range(50):
        state = random_frame_state(rng)
        assert frame_defect(state) < 1e-13


def test_frame_defect_after_flow(rng):
    # frames produced by the integrator stay admissible to well below 1e-8
    for _ in range(3):
        state = random_frame_state(rng)
        params = random_params(rng)
        out = flow("W", 2.0, state, params, IntegratorOptions(step=1e-3))
        assert frame_defect(out) < 1e-8
        out = flow("Z", -2.0, state, params, IntegratorOptions(step=1e-3))
        assert frame_defect(out) < 1e-8


def test_isometry_exp_identity_at_t_zero(rng):
    b = skew_from_params(*rng.uniform(-3, 3, 6))
    assert np.allclose(isometry_exp(b, 0.0), np.eye(4), atol=1e-15)


def test_isometry_exp_plane_rotation():
    b = skew_from_params(1, 0, 0, 0, 0, 0)
    m = isometry_exp(b, math.pi / 2)
    want = np.eye(4)
    want[0, 0] = want[1, 1] = 0.0
    want[0, 1] = 1.0
    want[1, 0] = -1.0
    assert np.abs(m - want).max() < 1e-14


def test_isometry_exp_group_inverse(rng):
    for _ in range(10):
        b = skew_from_params(*rng.uniform(-3, 3, 6))
        t = rng.uniform(-8, 8)
        prod = isometry_exp(b, t) @ isometry_exp(b, -t)
        assert np.abs(prod - np.eye(4)).max() < 1e-12


def test_isometry_exp_one_parameter_group(rng):
    for _ in range(10):
        b = skew_from_params(*rng.uniform(-10, 10, 6))
        t1, t2 = rng.uniform(-10, 10, 2)
        lhs = isometry_exp(b, t1) @ isometry_exp(b, t2)
        rhs = isometry_exp(b, t1 + t2)
        assert np.abs(lhs - rhs).max() < 1e-10


def test_isometry_exp_orthogonal_det_plus_one(rng):
    for _ in range(10):
        b = skew_from_params(*rng.uniform(-4, 4, 6))
        m = isometry_exp(b, rng.uniform(-10, 10))
        assert np.abs(m.T @ m - np.eye(4)).max() < 1e-12
        assert abs(np.linalg.det(m) - 1.0) < 1e-12


def test_conjugation_matches_pairings(rng):
    # <B' e_i, e_j> at the identity frame equals <B f_i, f_j> at the frame
    for _ in range(10):
        b = skew_from_params(*rng.uniform(-2, 2, 6))
        state = random_frame_state(rng)
        b_in_frame = b.conjugated(frame_matrix(state))
        ref = xi_of(state, b)
        got = xi_of(identity_frame(state.r, state.s), b_in_frame)
        assert np.abs(got - ref).max() < 1e-13


def test_random_orthonormal_frame_is_special_orthogonal(rng):
    for _ in range(25):
        q = random_orthonormal_frame(rng)
        assert np.abs(q.T @ q - np.eye(4)).max() < 1e-13
        assert np.linalg.det(q) == pytest.approx(1.0, abs=1e-12)


def test_tolerances_positive():
    from sinh_torus import Tolerances

    with pytest.raises(ValueError):
        Tolerances(frame_tol=0.0)
    tol = Tolerances()
    assert tol.frame_tol == 1e-8
    assert tol.integral_tol == 1e-8
    assert tol.residual_tol == 1e-3


def test_system_params_rejects_non_finite():
    with pytest.raises(ValueError):
        SystemParams(skew_from_params(0, 0, 0, 0, 0, 0), float("nan"))
