"""Shared fixtures and seed builders for the test suite."""

import numpy as np
import pytest

from sinh_torus import FrameState, SystemParams, skew_from_params
from sinh_torus.core import random_orthonormal_frame


def random_frame_state(rng, r_scale=0.25, s_scale=0.25) -> FrameState:
    """Random admissible seed: Haar frame plus small (r, s)."""
    q = random_orthonormal_frame(rng)
    return FrameState(
        q[:, 0],
        q[:, 1],
        q[:, 2],
        q[:, 3],
        rng.uniform(-r_scale, r_scale),
        rng.uniform(-s_scale, s_scale),
    )


def random_params(rng, b_scale=2.0, theta_scale=np.pi) -> SystemParams:
    """Random system data with entries |b_i| <= b_scale, |theta| <= theta_scale."""
    return SystemParams(
        skew_from_params(*rng.uniform(-b_scale, b_scale, 6)),
        rng.uniform(-theta_scale, theta_scale),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
