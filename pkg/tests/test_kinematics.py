import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import leafout as lf
from leafout.kinematics import (LockedConfiguration, StepRequest, angle_bounds,
                                null_space, pseudo_inverse, project_step,
                                trace_path)
from leafout.rotations import rot_x, rot_z
from oracles import chain_closure_norm, fd_constraint_matrix, matrix_exp_rotation


def test_flat_chain_is_identity(geom5):
    F = lf.chain_product(geom5, np.zeros(10))
    assert np.max(np.abs(F - np.eye(3))) < 1e-14


def test_uniform_closed_form_closes(geom5):
    # cross-validation between the closed-form motion and the chain
    for psi_deg in (-50, -30, -5, 10, 40):
        st_ = lf.uniform_state(geom5, np.radians(psi_deg))
        F = lf.chain_product(geom5, st_.rho_o)
        assert np.max(np.abs(F - np.eye(3))) < 1e-10


def test_perturbed_state_does_not_close(geom5, uniform_minus30):
    rho = uniform_minus30.rho_o.copy()
    rho[3] += 1e-3
    assert lf.residual(geom5, rho).max_abs() > 1e-5


def test_residual_of_identity_is_zero(geom5):
    r = lf.residual(geom5, np.zeros(10))
    assert r.max_abs() < 1e-14


@pytest.mark.parametrize("axis,component", [
    ((0.0, 0.0, 1.0), "r_a"),
    ((1.0, 0.0, 0.0), "r_b"),
    ((0.0, 1.0, 0.0), "r_c"),
])
def test_residual_extraction_linearization(axis, component):
    # small rotations map onto single residual components
    theta = 1e-4
    F = matrix_exp_rotation(np.array(axis), theta)
    from leafout.kinematics import _extract_residual
    r = _extract_residual(F)
    assert np.isclose(getattr(r, component), theta, rtol=1e-7)
    others = {"r_a", "r_b", "r_c"} - {component}
    for o in others:
        assert abs(getattr(r, o)) < 1e-11


def test_constraint_matrix_matches_finite_differences(geom5, uniform_minus30):
    C = lf.constraint_matrix(geom5, uniform_minus30.rho_o)
    Cfd = fd_constraint_matrix(geom5.alpha, uniform_minus30.rho_o)
    assert np.max(np.abs(C - Cfd)) < 1e-5


def test_constraint_rank_three_when_folded(geom5, uniform_minus30):
    C = lf.constraint_matrix(geom5, uniform_minus30.rho_o)
    s = np.linalg.svd(C, compute_uv=False)
    assert np.sum(s > 1e-10) == 3
    # the twist residual row couples the chain away from flat; only the
    # first and last creases are structurally silent (they set the chain's
    # in-plane reference axis)
    assert np.all(np.abs(C[0, 1:-1]) > 1e-6)
    assert np.linalg.norm(C[0]) > 0.1


def test_constraint_degenerates_at_exact_flat(geom5):
    # the flat state is a branch point: in-plane crease axes produce no
    # twist residual, so the constraint drops to rank two there
    C = lf.constraint_matrix(geom5, np.zeros(10))
    s = np.linalg.svd(C, compute_uv=False)
    assert np.sum(s > 1e-10) == 2
    assert np.max(np.abs(C[0])) < 1e-14


def test_uniform_tangent_in_null_space(geom5):
    # h large enough that root-solve tolerance does not dominate the FD
    h = 1e-4
    psi = np.radians(-30)
    tang = (lf.uniform_state(geom5, psi + h).rho_o
            - lf.uniform_state(geom5, psi - h).rho_o) / (2 * h)
    C = lf.constraint_matrix(geom5, lf.uniform_state(geom5, psi).rho_o)
    assert np.max(np.abs(C @ tang)) < 1e-8


def test_column_conjugation_between_adjacent_units(geom5, uniform_minus30):
    # shifting one unit conjugates the residual derivative by the
    # two-crease chain block (the folded analogue of the 2 alpha turn)
    rho = uniform_minus30.rho_o
    C = lf.constraint_matrix(geom5, rho)
    V = np.vstack([C[1], C[2], C[0]])      # residual components as x, y, z
    A = rot_x(rho[0]) @ rot_z(geom5.alpha) @ rot_x(rho[1]) @ rot_z(geom5.alpha)
    assert np.max(np.abs(V[:, 2:] - A @ V[:, :-2])) < 1e-12
    # at flat, the block is exactly the 2 alpha turn about the vertical
    assert np.allclose(
        rot_x(0) @ rot_z(geom5.alpha) @ rot_x(0) @ rot_z(geom5.alpha),
        rot_z(2 * geom5.alpha))


def test_projector_idempotent(geom5, uniform_minus30):
    C = lf.constraint_matrix(geom5, uniform_minus30.rho_o)
    Z = null_space(C)
    P = Z @ Z.T
    assert np.max(np.abs(P @ P - P)) < 1e-12


def test_null_basis_projection_equals_pseudo_inverse_form(geom5, uniform_minus30):
    # the null-basis projector and I - C+ C agree on arbitrary increments
    rho = uniform_minus30.rho_o
    C = lf.constraint_matrix(geom5, rho)
    Z = null_space(C)
    P_direct = np.eye(10) - pseudo_inverse(C) @ C
    rng = np.random.default_rng(7)
    for _ in range(5):
        d = rng.uniform(-0.05, 0.05, 10)
        assert np.max(np.abs(Z @ (Z.T @ d) - P_direct @ d)) < 1e-12


def test_pseudo_inverse_moore_penrose(geom5, uniform_minus30):
    C = lf.constraint_matrix(geom5, uniform_minus30.rho_o)
    Cp = pseudo_inverse(C)
    assert np.max(np.abs(C @ Cp @ C - C)) < 1e-10
    assert np.max(np.abs(Cp @ C @ Cp - Cp)) < 1e-10
    assert np.max(np.abs((C @ Cp).T - C @ Cp)) < 1e-10
    assert np.max(np.abs((Cp @ C).T - Cp @ C)) < 1e-10


def test_zero_request_is_fixed_point(geom5, uniform_minus30):
    req = StepRequest(np.zeros(10))
    out = project_step(geom5, uniform_minus30, req)
    assert np.max(np.abs(out.state.rho_o - uniform_minus30.rho_o)) < 1e-12


def test_uniform_drive_stays_uniform(geom5):
    # start from the slightly folded uniform state, drive every main equally
    start = lf.near_flat_start(geom5)
    assert np.isclose(np.degrees(start.rho_o[0]), 7.1)
    d0 = np.zeros(10)
    ctrl = (0, 2, 4, 6, 8)
    d0[list(ctrl)] = np.radians(0.5)
    out = project_step(geom5, start, StepRequest(d0, ctrl))
    rho = out.state.rho_o
    assert np.ptp(rho[0::2]) < 1e-12
    assert np.ptp(rho[1::2]) < 1e-12
    assert np.isclose(np.degrees(rho[0]), 7.6)


def test_pinch_drive_breaks_symmetry(geom5):
    start = lf.near_flat_start(geom5)
    d0 = np.zeros(10)
    ctrl = (0, 2)
    d0[list(ctrl)] = np.radians(0.5)
    state = start
    for _ in range(10):
        state = project_step(geom5, state, StepRequest(d0, ctrl)).state
    assert np.isclose(state.rho_o[0], state.rho_o[2], atol=1e-12)
    assert state.rho_o[0] - state.rho_o[6] > np.radians(1.0)


def test_locked_configuration_detected(geom5, uniform_minus30):
    # a pure row-space request with every angle prescribed is infeasible
    C = lf.constraint_matrix(geom5, uniform_minus30.rho_o)
    d0 = C.T @ np.array([1.0, 2.0, 3.0]) * 1e-3
    req = StepRequest(d0, tuple(range(10)))
    with pytest.raises(LockedConfiguration):
        project_step(geom5, uniform_minus30, req)


def test_controlled_increments_exact(geom5):
    start = lf.near_flat_start(geom5)
    d0 = np.zeros(10)
    d0[0] = np.radians(1.25)
    out = project_step(geom5, start, StepRequest(d0, (0,)))
    assert abs(out.state.rho_o[0] - start.rho_o[0] - np.radians(1.25)) < 1e-14


def test_trace_zero_driver(geom5, uniform_minus30):
    def driver(k, s):
        return StepRequest(np.zeros(10))
    path = trace_path(geom5, uniform_minus30, driver, 5)
    assert len(path) == 6
    for s in path.states:
        assert np.max(np.abs(s.rho_o - uniform_minus30.rho_o)) < 1e-10


def test_trace_requires_closed_start(geom5):
    bad = lf.FoldState.from_angles(geom5, np.zeros(10), check=False)
    bad.rho_o[0] = 0.3
    with pytest.raises(lf.NotClosedError):
        trace_path(geom5, bad, lambda k, s: StepRequest(np.zeros(10)), 2)


def test_trace_terminates_at_controlled_box(geom5):
    start = lf.near_flat_start(geom5)
    ctrl = (0, 2, 4, 6, 8)

    def driver(k, s):
        d0 = np.zeros(10)
        d0[list(ctrl)] = np.radians(5.0)
        return StepRequest(d0, ctrl, step_scale=np.radians(5.0))

    path = trace_path(geom5, start, driver, 100)
    assert path.termination == "controlled-at-boundary"
    assert np.isclose(path.states[-1].rho_o[0], np.pi, atol=1e-9)


def test_trace_boundary_stop_vs_freeze(geom5):
    start = lf.near_flat_start(geom5)
    ctrl = (0, 2)

    def driver(k, s):
        d0 = np.zeros(10)
        d0[list(ctrl)] = np.radians(0.5)
        return StepRequest(d0, ctrl)

    stopped = trace_path(geom5, start, driver, 400, on_boundary="stop")
    assert stopped.termination == "boundary"
    frozen = trace_path(geom5, start, driver, 400, on_boundary="freeze")
    assert len(frozen) > len(stopped)
    assert frozen.termination == "controlled-at-boundary"
    # the pinned angles sit exactly on their box face afterwards
    last_frozen = frozen.frozen_history[-1]
    assert last_frozen
    lo, hi = angle_bounds(geom5)
    for idx in last_frozen:
        v = frozen.states[-1].rho_o[idx]
        assert np.isclose(v, lo[idx]) or np.isclose(v, hi[idx])


def test_emitted_states_closed_and_boxed(geom5):
    start = lf.near_flat_start(geom5)
    ctrl = (0, 2)

    def driver(k, s):
        d0 = np.zeros(10)
        d0[list(ctrl)] = np.radians(0.5)
        return StepRequest(d0, ctrl)

    path = trace_path(geom5, start, driver, 80, on_boundary="freeze")
    lo, hi = angle_bounds(geom5)
    for s in path.states:
        assert chain_closure_norm(geom5.alpha, s.rho_o) < 1e-10
        assert np.all(s.rho_o >= lo - 1e-9) and np.all(s.rho_o <= hi + 1e-9)


def test_reversibility(geom5, uniform_minus30):
    ctrl = (0, 2, 4, 6, 8)

    def make_driver(sign):
        def driver(k, s):
            d0 = np.zeros(10)
            d0[list(ctrl)] = sign * np.radians(0.5)
            return StepRequest(d0, ctrl)
        return driver

    fwd = trace_path(geom5, uniform_minus30, make_driver(+1), 20)
    back = trace_path(geom5, fwd.states[-1], make_driver(-1), 20)
    assert np.max(np.abs(back.states[-1].rho_o - uniform_minus30.rho_o)) < 1e-6


def test_step_scale_substepping_equivalence(geom5):
    # a large request split internally lands near the single-shot result
    start = lf.near_flat_start(geom5)
    d0 = np.zeros(10)
    ctrl = (0, 2, 4, 6, 8)
    d0[list(ctrl)] = np.radians(4.0)
    coarse = project_step(geom5, start, StepRequest(d0, ctrl, np.radians(8.0)))
    fine = project_step(geom5, start, StepRequest(d0, ctrl, np.radians(0.5)))
    assert np.isclose(coarse.state.rho_o[0], fine.state.rho_o[0], atol=1e-14)
    assert np.max(np.abs(coarse.state.rho_o - fine.state.rho_o)) < 1e-4


@settings(max_examples=20, deadline=None)
@given(arrays(float, 10, elements=st.floats(min_value=-0.01, max_value=0.01)))
def test_projection_keeps_states_closed(geom5, d0):
    state = lf.uniform_state(geom5, np.radians(-35.0))
    out = project_step(geom5, state, StepRequest(d0))
    assert lf.residual(geom5, out.state.rho_o).max_abs() < 1e-10


def test_fold_state_validation(geom5):
    with pytest.raises(lf.NotClosedError):
        lf.FoldState.from_angles(geom5, np.tile([0.3, -0.3], 5))
    bad = np.zeros(10)
    bad[1] = 0.5      # boundary crease must stay mountain
    with pytest.raises(ValueError):
        lf.FoldState.from_angles(geom5, bad)
    with pytest.raises(ValueError):
        lf.FoldState.from_angles(geom5, np.zeros(8))
