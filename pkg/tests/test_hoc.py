import numpy as np
import pytest

from stalight import hoc, mbe
from stalight.core import (
    ControlSchedule,
    DomainError,
    EnsembleConfig,
    FieldState,
    ShapeError,
    SimulationGrid,
    UnsupportedConfigurationError,
    gaussian,
)

CFG = EnsembleConfig(40.0)
GRID = SimulationGrid(128, 0.25, 10.0)
CTRL = ControlSchedule(1.0, 1.0)


def initial(grid=GRID, center=0.5):
    return FieldState.from_spinwave(gaussian(grid.xi, center, 0.15))


def leaked(gamma_motion, n_max=3):
    traj = hoc.run_hoc(CFG, GRID, CTRL, hoc.HOCDecayModel(gamma_motion), n_max, initial=initial(), stride=40)
    return traj.output_energy() / traj.bookkeeping["stored"][0]


def test_decay_model_validation():
    with pytest.raises(DomainError):
        hoc.HOCDecayModel(-1.0)
    with pytest.raises(DomainError):
        hoc.HOCDecayModel(1.0, 3)
    m = hoc.HOCDecayModel(2.0, 2)
    assert m.extra(0) == 0 and m.extra(3) == 18.0 and m.extra(-2) == 8.0
    assert hoc.HOCDecayModel(2.0, 1).extra(3) == 6.0


def test_state_orders_validated():
    z = np.zeros(16, complex)
    with pytest.raises(ShapeError):
        hoc.HOCState({0: z, 2: z}, {1: z, -1: z}, z, z)
    with pytest.raises(ShapeError):
        hoc.HOCState({-2: z, 0: z, 2: z}, {1: z}, z, z)
    s = hoc.HOCState.from_field_state(FieldState.zeros(16), 2)
    assert sorted(s.s) == [-4, -2, 0, 2, 4] and sorted(s.p) == [-3, -1, 1, 3]


def test_requires_degenerate_controls():
    with pytest.raises(UnsupportedConfigurationError, match="secular"):
        hoc.HOCModel(CFG, ControlSchedule(1.0, 1.0, 1.0, -1.0), hoc.HOCDecayModel(), 2, 64, 0.1)
    with pytest.raises(DomainError):
        hoc.HOCModel(CFG, CTRL, hoc.HOCDecayModel(), 0, 64, 0.1)


def test_uncoupled_ladder_is_secular():
    ctrl = ControlSchedule(1.0, 0.6, 0.4, 0.4)
    drive = mbe.BoundaryDrive.gaussian_pulse(2.0, 2.0)
    a = hoc.run_hoc(CFG, GRID, ctrl, hoc.HOCDecayModel(), 1, drive, initial(), cross_coupling=False)
    b = mbe.run(CFG, GRID, ctrl, drive, initial())
    np.testing.assert_allclose(a.final.S, b.final.S, atol=1e-13)
    np.testing.assert_allclose(a.boundary_out, b.boundary_out, atol=1e-13)
    assert max(np.max(np.abs(a.final.s[k])) for k in (-2, 2)) == 0


def test_step_matches_run():
    drive = mbe.BoundaryDrive.gaussian_pulse(0.5, 0.5)
    decay = hoc.HOCDecayModel(0.5)
    grid = SimulationGrid(32, 0.1, 1.0)
    s = hoc.HOCState.from_field_state(initial(grid), 2)
    for k in range(grid.n_steps):
        s = hoc.step_hoc(s, CFG, CTRL, decay, grid.dt, drive, t=k * grid.dt)
    traj = hoc.run_hoc(CFG, grid, CTRL, decay, 2, drive, initial(grid))
    for k in s.s:
        np.testing.assert_allclose(traj.final.s[k], s.s[k], atol=1e-13)


def test_hot_atoms_recover_secular():
    sec = mbe.run(CFG, GRID, CTRL, initial=initial(), stride=40)
    hot = hoc.run_hoc(CFG, GRID, CTRL, hoc.HOCDecayModel(1e4), 3, initial=initial(), stride=40)
    assert hot.bookkeeping["stored"][-1] == pytest.approx(sec.bookkeeping["stored"][-1], rel=0.05)
    assert hot.output_energy() == pytest.approx(sec.output_energy(), rel=0.05)


def test_cold_atoms_leak_more():
    sec = mbe.run(CFG, GRID, CTRL, initial=initial(), stride=40)
    assert leaked(0.0) >= 2 * sec.output_energy() / sec.bookkeeping["stored"][0]


def test_truncation_check_cases():
    decay = hoc.HOCDecayModel(1e5)
    a = hoc.run_hoc(CFG, GRID, CTRL, decay, 1, initial=initial(), stride=40)
    b = hoc.run_hoc(CFG, GRID, CTRL, decay, 2, initial=initial(), stride=40)
    assert hoc.truncation_check(a, b) < 1e-4
    assert hoc.truncation_check(a, a) == 0.0
    other = hoc.run_hoc(CFG, SimulationGrid(64, 0.25, 10.0), CTRL, decay, 2, initial=initial(SimulationGrid(64)))
    with pytest.raises(ShapeError):
        hoc.truncation_check(a, other)


def test_cold_truncation_converges():
    runs = [hoc.run_hoc(CFG, GRID, CTRL, hoc.HOCDecayModel(0.0), n, initial=initial(), stride=40) for n in (1, 2, 3, 4)]
    diffs = [hoc.truncation_check(a, b) for a, b in zip(runs, runs[1:])]
    assert all(b < a for a, b in zip(diffs, diffs[1:]))
    assert diffs[-1] < 0.05


@pytest.mark.parametrize("delta", [0.0, 0.7])
def test_order_mirror_symmetry(delta):
    ctrl = ControlSchedule(1.0, 1.0, delta, delta)
    traj = hoc.run_hoc(CFG, GRID, ctrl, hoc.HOCDecayModel(0.0), 3, initial=initial(), stride=8)
    for snap in traj.snapshots:
        for k in (2, 4, 6):
            np.testing.assert_allclose(snap.s[k], snap.s[-k][::-1], atol=1e-12)
            if delta == 0:
                np.testing.assert_allclose(snap.s[k], np.conj(snap.s[-k][::-1]), atol=1e-12)


def test_leak_non_increasing_in_motion():
    leaks = [leaked(g) for g in (0.0, 0.1, 1.0, 10.0, 100.0)]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(leaks, leaks[1:]))


def test_orders_csv(tmp_path):
    traj = hoc.run_hoc(CFG, GRID, CTRL, hoc.HOCDecayModel(), 2, initial=initial(), stride=20)
    lines = hoc.write_orders_csv(traj, tmp_path).read_text().splitlines()
    assert lines[0] == "t,s-4,s-2,s+0,s+2,s+4"
    assert len(lines) == len(traj.snapshots) + 1
