import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stalight import eit, mbe
from stalight.core import (
    ControlSchedule,
    DivergedIntegrationError,
    DomainError,
    EnsembleConfig,
    FieldState,
    SimulationGrid,
    gaussian,
    integrate_total,
    relative_l2,
    spatial_moments,
)

XI = np.linspace(0, 1, 256)


def amp_moments(S):
    return spatial_moments(np.abs(S))


# -- mixing angles -------------------------------------------------------------


def test_single_control_angles():
    a = eit.mixing_angles(1.0, 0.0, 100.0)
    assert a.tan2_theta == pytest.approx(0.01)
    assert a.phi == 0.0
    assert a.velocity() == pytest.approx(0.01)


def test_balanced_angles():
    a = eit.mixing_angles(0.7, 0.7j, 30.0)
    assert a.phi == pytest.approx(math.pi / 4)
    assert abs(math.cos(2 * a.phi)) < 1e-15


def test_unequal_angles():
    a = eit.mixing_angles(1.0, 2.0, 25.0)
    assert a.tan2_theta == pytest.approx(0.2)
    assert math.tan(a.phi) ** 2 == pytest.approx(4.0)


def test_degenerate_angles():
    a = eit.mixing_angles(0.0, 0.0, 10.0)
    assert a.degenerate and a.theta == 0 and a.phi == 0


def test_angles_need_positive_depth():
    with pytest.raises(DomainError):
        eit.mixing_angles(1.0, 1.0, 0.0)


@given(st.floats(0, 50), st.floats(0, 50), st.floats(0.1, 1e3))
def test_angle_ranges(op, om, d):
    a = eit.mixing_angles(op, om, d)
    assert 0 <= a.theta < math.pi / 2
    assert 0 <= a.phi <= math.pi / 2
    assert a.diffusion(d) == pytest.approx(a.tan2_theta / d)


# -- evolve_diffusion ---------------------------------------------------------------


def test_balanced_heat_kernel_moments():
    # d = 1000 keeps the spread over t = 5 / tan^2(theta) inside the medium
    d = 1000.0
    a = eit.mixing_angles(math.sqrt(5), math.sqrt(5), d)
    t = 5 / a.tan2_theta
    S0 = gaussian(XI, 0.5, 0.05)
    S = eit.evolve_diffusion(S0, a, d, 1.0, t)
    c0, w0 = amp_moments(S0)
    c1, w1 = amp_moments(S)
    assert abs(c1 - c0) < 1e-3
    assert (w1 - w0) / (2 * a.diffusion(d) * t) == pytest.approx(1.0, abs=0.10)


def test_single_control_advection():
    d = 100.0
    a = eit.mixing_angles(1.0, 0.0, d)
    t = 30.0
    S0 = gaussian(XI, 0.2, 0.05)
    c1 = amp_moments(eit.evolve_diffusion(S0, a, d, 1.0, t))[0]
    assert (c1 - 0.2) == pytest.approx(a.velocity() * t, rel=0.05)


def test_zero_time_is_identity():
    S0 = gaussian(XI, 0.4, 0.1, phase=0.3)
    np.testing.assert_array_equal(eit.evolve_diffusion(S0, eit.mixing_angles(1, 0, 10.0), 10.0, 1.0, 0.0), S0)


def test_unstable_step_rejected():
    a = eit.mixing_angles(1.0, 0.0, 100.0)
    with pytest.raises(DivergedIntegrationError):
        eit.evolve_diffusion(gaussian(XI, 0.5, 0.1), a, 100.0, 1.0, 10.0, dt=10.0)


def test_samples_returned_in_order():
    a = eit.mixing_angles(1.0, 1.0, 100.0)
    S, rec = eit.evolve_diffusion(gaussian(XI, 0.5, 0.1), a, 100.0, 1.0, 10.0, samples=[5.0, 0.0, 10.0])
    assert [t for t, _ in rec] == [0.0, 5.0, 10.0]
    np.testing.assert_array_equal(rec[-1][1], S)


profiles = st.tuples(st.floats(0.2, 0.8), st.floats(0.03, 0.15), st.floats(-3, 3))


@settings(max_examples=20)
@given(profiles, st.floats(0.1, 3), st.floats(0, 3), st.floats(10, 500))
def test_norm_non_increasing(profile, op, om, d):
    a = eit.mixing_angles(op, om, d)
    S0 = gaussian(XI, *profile)
    t_end = 0.2 / max(abs(a.velocity()), 1e-3)
    _, rec = eit.evolve_diffusion(S0, a, d, 1.0, t_end, samples=np.linspace(0, t_end, 6))
    norms = [float(np.real(integrate_total(np.abs(S) ** 2))) for _, S in rec]
    assert all(b <= a_ + 1e-12 for a_, b in zip(norms, norms[1:]))


@settings(max_examples=20)
@given(st.floats(0.2, 2), st.floats(0.2, 2), st.floats(0.05, 0.1))
def test_swapping_controls_mirrors_drift(op, om, width):
    d = 100.0
    a, b = eit.mixing_angles(op, om, d), eit.mixing_angles(om, op, d)
    assert b.phi == pytest.approx(math.pi / 2 - a.phi)
    assert b.velocity() == pytest.approx(-a.velocity(), abs=1e-15)
    S0 = gaussian(XI, 0.5, width)
    t = 0.1 / max(abs(a.velocity()), 1e-3)
    Sa = eit.evolve_diffusion(S0, a, d, 1.0, t)
    Sb = eit.evolve_diffusion(S0, b, d, 1.0, t)
    np.testing.assert_allclose(Sb, Sa[::-1], atol=1e-6)


def test_diffusion_coefficient_formula():
    for op, om, d in ((1, 0, 100), (2, 2, 400), (0.5, 1.5, 20)):
        a = eit.mixing_angles(op, om, d)
        assert a.diffusion(d) == pytest.approx((op**2 + om**2) / d / d)


# -- dark polariton and mass --------------------------------------------------------


def test_polariton_limits():
    rng = np.random.default_rng(3)
    z = lambda: rng.normal(size=32) + 1j * rng.normal(size=32)  # noqa: E731
    s = FieldState(z(), z(), z(), z(), z())
    np.testing.assert_allclose(eit.dark_polariton(s, eit.MixingAngles(0.0, 0.3)), -s.S)
    s0 = FieldState(np.zeros(32), np.zeros(32), s.P_plus, s.P_minus, s.S)
    a = eit.MixingAngles(0.4, 0.2)
    np.testing.assert_allclose(eit.dark_polariton(s0, a), -s.S * math.cos(0.4))


def test_polariton_matches_full_model():
    d = 100.0
    a = eit.mixing_angles(1.0, 1.0, d)
    traj = mbe.run(
        EnsembleConfig(d),
        SimulationGrid(256, 0.5, 50.0),
        ControlSchedule(1.0, 1.0),
        initial=FieldState.from_spinwave(gaussian(XI, 0.5, 0.08)),
        stride=1000,
    )
    f = traj.final
    total = np.abs(f.S) ** 2 + np.abs(f.E_plus) ** 2 + np.abs(f.E_minus) ** 2
    assert relative_l2(np.abs(eit.dark_polariton(f, a)) ** 2, total) < 0.05


def test_effective_mass_examples():
    assert eit.effective_mass(1.0, 1.0, 1.0, 0.0) == pytest.approx(2j)
    assert eit.effective_mass(100.0, 1.0, 1.0, 1.0) == pytest.approx(1e4 * (1 + 1j))
    assert abs(eit.effective_mass(100.0, 1.0, 1.0, 1e12)) < 1e-6
    with pytest.raises(DomainError):
        eit.effective_mass(1.0, 1.0, 0.0, 0.0)


def test_diagnostics_and_csv(tmp_path):
    a = eit.mixing_angles(1.0, 0.0, 100.0)
    S0 = gaussian(XI, 0.3, 0.05)
    diag = eit.diagnostics(FieldState.from_spinwave(S0), a, 100.0)
    assert 0 <= diag.centroid <= 1 and diag.width_sq >= 0
    assert diag.centroid == pytest.approx(0.3, abs=1e-6)
    _, rec = eit.evolve_diffusion(S0, a, 100.0, 1.0, 10.0, samples=[0.0, 10.0])
    path = eit.write_moments_csv(rec, tmp_path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,centroid,width_sq,norm" and len(lines) == 3
