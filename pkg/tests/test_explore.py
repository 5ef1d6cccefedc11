import numpy as np
import pytest

import leafout as lf
from oracles import chain_closure_norm


@pytest.fixture(scope="module")
def traced(geom5, springs_grasp):
    programs = {
        "uniform": lf.GraspProgram((1, 2, 3, 4, 5)),
        "p12": lf.GraspProgram((1, 2)),
        "p13": lf.GraspProgram((1, 3)),
        "p123": lf.GraspProgram((1, 2, 3)),
    }
    return {k: lf.run_program(geom5, p, springs=springs_grasp)
            for k, p in programs.items()}


def test_start_state_matches_rounded_nominal_pair(geom5):
    start = lf.near_flat_start(geom5)
    assert np.isclose(np.degrees(start.rho_o[0]), 7.1, atol=1e-12)
    assert np.isclose(np.degrees(start.rho_o[1]), -3.6, atol=0.05)
    assert chain_closure_norm(geom5.alpha, start.rho_o) < 1e-10


def test_uniform_program_stays_on_axis(traced):
    tr = traced["uniform"].trace
    assert np.max(np.abs(tr.x)) < 1e-8
    assert np.max(np.abs(tr.y)) < 1e-8


def test_pinch_program_shape(traced):
    # two controlled neighbours close together like a pinch: equal
    # controlled angles, mirror symmetry about their bisector
    path = traced["p12"].path
    rho = path.angles()
    assert np.max(np.abs(rho[:, 0] - rho[:, 2])) < 1e-12  # rhoM1 == rhoM2, controlled
    assert np.max(np.abs(rho[:, 4] - rho[:, 8])) < 1e-6   # rhoM3 == rhoM5, mirror pair
    mid = len(path) // 2
    assert rho[mid, 0] - rho[mid, 6] > np.radians(2.0)    # others lag
    # mirror symmetry pins the second trace coordinate
    assert np.max(np.abs(traced["p12"].trace.y)) < 1e-8


def test_alligator_program_shape(traced):
    path = traced["p123"].path
    rho = path.angles()
    # symmetric about unit 2: units 1 and 3 move together, 4 and 5 together
    assert np.max(np.abs(rho[:, 0] - rho[:, 4])) < 1e-12
    assert np.max(np.abs(rho[:, 6] - rho[:, 8])) < 1e-6
    mid = len(path) // 2
    assert rho[mid, 0] > rho[mid, 6]


def test_distinct_pair_programs(traced):
    t12, t13 = traced["p12"].trace, traced["p13"].trace
    d = max(abs(t12.x[-1] - t13.x[-1]), abs(t12.y[-1] - t13.y[-1]))
    assert d > np.radians(5.0)


def test_interior_energy_minima(traced):
    for name in ("uniform", "p12", "p13", "p123"):
        E = traced[name].trace.energy
        k = int(np.argmin(E))
        assert 0 < k < len(E) - 1, f"{name} minimum not interior"


def test_rest_at_start_minimizes_at_start(geom5):
    start = lf.near_flat_start(geom5)
    springs = lf.SpringModel.uniform(geom5, 1.0, start.rho_o[0], start.rho_o[1])
    res = lf.run_program(geom5, lf.GraspProgram((1, 2), max_steps=40),
                         springs=springs)
    assert int(np.argmin(res.trace.energy)) == 0


def test_controlled_increments_exact(traced, geom5):
    prog = traced["p12"].program
    rho = traced["p12"].path.angles()
    steps = np.diff(rho[:, 0])
    # every successful step advances the controlled angle by delta_rho_c
    # (the final step may be clipped onto the box face)
    assert np.allclose(steps[:-1], prog.delta_rho_c, atol=1e-12)
    assert steps[-1] <= prog.delta_rho_c + 1e-12


def test_cumulative_controlled_parameter(traced):
    # z is the running controlled angle: delta_rho_c per full step
    res = traced["p13"]
    z = res.trace.z
    d = res.program.delta_rho_c
    assert np.allclose(np.diff(z)[:-1], d, atol=1e-12)
    assert 0 < np.diff(z)[-1] <= d + 1e-12


def test_all_states_closed_and_boxed(traced, geom5):
    from leafout.kinematics import angle_bounds
    lo, hi = angle_bounds(geom5)
    for name, res in traced.items():
        for s in res.path.states[:: max(1, len(res.path) // 25)]:
            assert chain_closure_norm(geom5.alpha, s.rho_o) < 1e-10
            assert np.all(s.rho_o >= lo - 1e-9)
            assert np.all(s.rho_o <= hi + 1e-9)


def test_reflection_symmetry_between_mirror_programs(geom5):
    # the reflection fixing unit 1 maps the {1,2} drive onto {1,5}
    r12 = lf.run_program(geom5, lf.GraspProgram((1, 2), max_steps=60))
    r15 = lf.run_program(geom5, lf.GraspProgram((1, 5), max_steps=60))
    a12, a15 = r12.path.angles(), r15.path.angles()
    assert a12.shape == a15.shape
    # units permute 1->1, 2->5, 3->4, 4->3, 5->2
    perm_m = [0, 8, 6, 4, 2]
    # boundary creases permute B1->B5, B2->B4, B3->B3, B4->B2, B5->B1
    perm_b = [9, 7, 5, 3, 1]
    assert np.max(np.abs(a15[:, 0::2] - a12[:, perm_m])) < 1e-7
    assert np.max(np.abs(a15[:, 1::2] - a12[:, perm_b])) < 1e-7
    # configuration-space images swap and negate the two coordinates
    assert np.max(np.abs(r15.trace.x + r12.trace.y)) < 1e-7
    assert np.max(np.abs(r15.trace.y + r12.trace.x)) < 1e-7


def test_default_program_set_distinct(geom5):
    programs = lf.default_program_set(geom5.n_cell)
    assert len(programs) == 6
    results = lf.compare_programs(geom5, programs)
    traces = [res.trace for res in results]
    for i in range(len(traces)):
        for j in range(i + 1, len(traces)):
            n = min(len(traces[i].x), len(traces[j].x))
            d = max(np.max(np.abs(traces[i].x[:n] - traces[j].x[:n])),
                    np.max(np.abs(traces[i].y[:n] - traces[j].y[:n])))
            assert d > np.radians(5.0)


def test_program_validation(geom5):
    with pytest.raises(ValueError):
        lf.GraspProgram(())
    with pytest.raises(ValueError):
        lf.GraspProgram((1,), delta_rho_c=0.0)
    with pytest.raises(ValueError):
        lf.run_program(geom5, lf.GraspProgram((6,)))
    with pytest.raises(ValueError):
        lf.compare_programs(geom5, [lf.GraspProgram((1,))])


def test_termination_reasons_recorded(traced):
    for res in traced.values():
        assert res.path.termination in ("controlled-at-boundary", "boundary",
                                        "max-steps", "locked")
        assert len(res.path.frozen_history) == len(res.path)
