"""Flows, two-parameter evaluation, grids, commutator and drift diagnostics."""

import numpy as np
import pytest

from conftest import random_frame_state, random_params
from sinh_torus import (
    IntegratorOptions,
    SystemParams,
    commutator_defect,
    evaluate,
    first_integrals,
    flow,
    identity_frame,
    invariant_drift_report,
    make_grid,
    r_bound,
    skew_from_params,
)
from sinh_torus.integrate import IntegrationDivergedError

ZERO_B = skew_from_params(0, 0, 0, 0, 0, 0)
CLIFFORD = SystemParams(ZERO_B, 0.0)


def test_flow_zero_time_is_identity(rng):
    state = random_frame_state(rng)
    params = random_params(rng)
    out = flow("Z", 0.0, state, params)
    assert np.array_equal(out.to_array(), state.to_array())


def test_flow_rejects_unknown_field(rng):
    with pytest.raises(ValueError):
        flow("Q", 0.1, identity_frame(), CLIFFORD)


def test_flow_enforces_max_arc():
    with pytest.raises(ValueError):
        flow("Z", 3.0, identity_frame(), CLIFFORD, IntegratorOptions(max_arc=2.0))


def test_flow_reversibility(rng):
    for _ in range(3):
        state = random_frame_state(rng)
        params = random_params(rng)
        t = rng.uniform(0.5, 2.0)
        back = flow("Z", -t, flow("Z", t, state, params), params)
        assert np.abs(back.to_array() - state.to_array()).max() < 1e-9


def test_clifford_r_s_fixed_point():
    for v in (0.3, 1.0, -2.0):
        out = flow("W", v, identity_frame(), CLIFFORD)
        assert abs(out.r) < 1e-14
        assert abs(out.s) < 1e-14


def test_flow_divergence_detected():
    # absurd step on a steep seed overflows; bounded solutions make this
    # reachable only through misuse
    with pytest.raises(IntegrationDivergedError):
        flow(
            "W",
            50.0,
            identity_frame(6.0, 0.0),
            CLIFFORD,
            IntegratorOptions(step=10.0),
        )


def test_evaluate_origin_returns_seed(rng):
    state = random_frame_state(rng)
    out = evaluate(0.0, 0.0, state, random_params(rng))
    assert np.array_equal(out.to_array(), state.to_array())


def test_evaluate_rejects_degenerate_seed():
    bad = identity_frame()
    bad = bad.__class__(bad.p, 1.1 * bad.v1, bad.v2, bad.nu, 0.0, 0.0)
    with pytest.raises(ValueError):
        evaluate(0.1, 0.1, bad, CLIFFORD)


def test_evaluate_order_swap_agreement(rng):
    for _ in range(3):
        state = random_frame_state(rng)
        params = random_params(rng)
        u, v = rng.uniform(-1, 1, 2)
        a = evaluate(u, v, state, params)
        b = flow("W", v, flow("Z", u, state, params), params)
        assert np.abs(a.to_array() - b.to_array()).max() < 1e-7


def test_commutator_zero_arc_is_exactly_zero(rng):
    state = random_frame_state(rng)
    params = random_params(rng)
    assert commutator_defect(0.0, 0.7, state, params) == 0.0
    assert commutator_defect(0.7, 0.0, state, params) == 0.0


def test_commutator_small_on_random_seeds(rng):
    for _ in range(3):
        state = random_frame_state(rng)
        params = random_params(rng)
        u, v = rng.uniform(-1, 1, 2)
        assert commutator_defect(u, v, state, params) < 1e-7


def test_commutator_order_four_signature(rng):
    state = random_frame_state(rng)
    params = random_params(rng)
    d2 = commutator_defect(0.7, -0.9, state, params, IntegratorOptions(step=2e-3))
    d1 = commutator_defect(0.7, -0.9, state, params, IntegratorOptions(step=1e-3))
    assert d2 / d1 > 12.0


def test_make_grid_corner_node_is_seed(rng):
    state = random_frame_state(rng)
    params = random_params(rng)
    grid = make_grid((0.0, 0.2, 0.0, 0.2), (2, 2), state, params)
    assert np.array_equal(grid.data[0, 0], state.to_array())
    assert grid.nu == grid.nv == 2


def test_make_grid_validates_inputs(rng):
    state = random_frame_state(rng)
    params = random_params(rng)
    with pytest.raises(ValueError):
        make_grid((0, 1, 0, 1), (1, 5), state, params)
    with pytest.raises(ValueError):
        make_grid((1, 0, 0, 1), (5, 5), state, params)


def test_make_grid_deterministic(rng):
    state = random_frame_state(rng)
    params = random_params(rng)
    g1 = make_grid((-0.3, 0.3, -0.3, 0.3), (5, 5), state, params)
    g2 = make_grid((-0.3, 0.3, -0.3, 0.3), (5, 5), state, params)
    assert np.array_equal(g1.data, g2.data)


def test_make_grid_matches_evaluate(rng):
    # node values agree with the two-parameter composition up to the
    # partial-step split difference, far below integrator error
    state = random_frame_state(rng)
    params = random_params(rng)
    grid = make_grid((-0.2, 0.2, -0.2, 0.2), (3, 3), state, params)
    for i, j in ((0, 0), (2, 1), (1, 2)):
        u, v = grid.uv_at(i, j)
        want = evaluate(u, v, state, params).to_array()
        assert np.abs(grid.data[i, j] - want).max() < 1e-10


def test_grid_refinement_is_order_four(rng):
    state = identity_frame(0.1, 0.0)
    params = CLIFFORD
    errs = []
    for h in (4e-2, 2e-2, 1e-2):
        a = flow("W", 1.0, state, params, IntegratorOptions(step=h))
        b = flow("W", 1.0, state, params, IntegratorOptions(step=h / 2))
        errs.append(np.abs(a.to_array() - b.to_array()).max())
    for ratio in (errs[0] / errs[1], errs[1] / errs[2]):
        assert 14.0 <= ratio <= 18.0


def test_make_grid_step_refinement(rng):
    # halving the integrator step moves every node by O(h^4)
    state = random_frame_state(rng)
    params = random_params(rng)
    window, res = (-0.5, 0.5, -0.5, 0.5), (3, 3)
    grids = {
        h: make_grid(window, res, state, params, IntegratorOptions(step=h))
        for h in (2e-2, 1e-2, 5e-3)
    }
    d1 = np.abs(grids[2e-2].data - grids[1e-2].data).max()
    d2 = np.abs(grids[1e-2].data - grids[5e-3].data).max()
    assert 12.0 < d1 / d2 < 20.0


def test_frame_defect_growth_is_order_four(rng):
    from sinh_torus import frame_defect

    state = random_frame_state(rng)
    params = random_params(rng)
    defects = {
        h: frame_defect(flow("W", 2.0, state, params, IntegratorOptions(step=h)))
        for h in (4e-3, 2e-3, 1e-3)
    }
    assert defects[1e-3] < 1e-10
    assert 8.0 < defects[4e-3] / defects[2e-3] < 32.0


def test_clifford_grid_drift_is_tiny():
    grid = make_grid((-1, 1, -1, 1), (9, 9), identity_frame(), CLIFFORD)
    rep = invariant_drift_report(grid)
    assert rep.m_drift < 1e-12
    assert rep.e_drift < 1e-12
    assert rep.a_drift < 1e-12
    assert rep.frame_drift < 1e-12
    assert rep.e0 == 2.0


def test_generic_grid_drift(rng):
    state = random_frame_state(rng)
    params = random_params(rng)
    grid = make_grid((-2, 2, -2, 2), (9, 9), state, params)
    rep = invariant_drift_report(grid)
    assert rep.m_drift < 1e-8
    assert rep.e_drift < 1e-8
    assert rep.a_drift < 1e-8
    assert rep.frame_drift < 1e-8


def test_grid_r_values_respect_bound(rng):
    state = random_frame_state(rng)
    params = random_params(rng)
    grid = make_grid((-2, 2, -2, 2), (9, 9), state, params)
    fi = first_integrals(state, params)
    assert np.abs(grid.r_values).max() <= r_bound(fi.M, fi.A, state.r)


def test_grid_accessors_shapes(rng):
    state = random_frame_state(rng)
    grid = make_grid((-0.2, 0.2, -0.2, 0.2), (4, 3), state, random_params(rng))
    assert grid.points.shape == (4, 3, 4)
    assert grid.normals.shape == (4, 3, 4)
    assert grid.r_values.shape == (4, 3)
    assert grid.xi_values.shape == (4, 3, 6)
    assert grid.state_at(1, 2).to_array() == pytest.approx(grid.data[1, 2])


def test_options_validation():
    with pytest.raises(ValueError):
        IntegratorOptions(step=0.0)
    with pytest.raises(ValueError):
        IntegratorOptions(max_arc=-1.0)
