import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stalight import raman
from stalight.core import DivergedIntegrationError, DomainError, gaussian, integrate_total, relative_l2

XI = np.linspace(0, 1, 256)
D, DELTA = 100.0, 50.0
P = raman.RamanParams(1.0, DELTA)
KAPPA = 0.04


def antisymmetric(xi=XI):
    return gaussian(xi, 0.3, 0.07) - gaussian(xi, 0.7, 0.07)


def symmetric(xi=XI):
    return gaussian(xi, 0.3, 0.07) + gaussian(xi, 0.7, 0.07)


# -- parameters ---------------------------------------------------------------------


def test_detuning_limits():
    with pytest.raises(DomainError):
        raman.RamanParams(1.0, 0.0)
    with pytest.raises(DomainError):
        raman.RamanParams(1.0, -9.0)
    with pytest.warns(RuntimeWarning):
        raman.RamanParams(1.0, 20.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        raman.RamanParams(1.0, -30.0)
    with pytest.raises(DomainError):
        raman.RamanParams(float("inf"), 50.0)


def test_decay_rate_value():
    assert P.decay_rate(D) == pytest.approx(KAPPA)


# -- probe fields ----------------------------------------------------------------------


def test_probe_fields_of_constant():
    s0 = 0.7 - 0.2j
    Ep, Em = raman.probe_fields_from_spinwave(np.full(256, s0), D, P)
    g = 1j * math.sqrt(D) / DELTA * s0
    np.testing.assert_allclose(Ep, g * XI, atol=1e-14)
    np.testing.assert_allclose(Em, g * (1 - XI), atol=1e-14)


def test_zero_mean_has_no_edge_fields():
    S = np.sin(2 * np.pi * XI) + 0.3j * np.cos(4 * np.pi * XI)
    S = S - integrate_total(S)
    Ep, Em = raman.probe_fields_from_spinwave(S, D, P)
    assert abs(Ep[-1]) < 1e-14 and abs(Em[0]) < 1e-14


def test_opposite_lobes_confine_light():
    Ep, Em = raman.probe_fields_from_spinwave(antisymmetric(), D, P)
    inside = (XI > 0.4) & (XI < 0.6)
    outside = (XI < 0.05) | (XI > 0.95)
    peak = np.max(np.abs(Ep))
    assert np.min(np.abs(Ep[inside])) > 0.5 * peak
    assert np.max(np.abs(Ep[outside])) < 1e-3 * peak
    assert np.max(np.abs(Em[outside])) < 1e-3 * peak


# -- decomposition ----------------------------------------------------------------------


def test_decompose_examples():
    dec = raman.decompose(np.sin(2 * np.pi * XI))
    assert abs(dec.uniform) < 1e-15
    dec = raman.decompose(np.full(256, 2.5 + 1j))
    assert dec.uniform == pytest.approx(2.5 + 1j)
    np.testing.assert_allclose(dec.stationary, 0, atol=1e-15)
    dec = raman.decompose(XI)
    assert dec.uniform == pytest.approx(0.5)
    np.testing.assert_allclose(dec.stationary, XI - 0.5, atol=1e-15)


@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False), min_size=16, max_size=64))
def test_decompose_reconstructs(values):
    S = np.array(values)
    dec = raman.decompose(S)
    np.testing.assert_allclose(dec.stationary + dec.uniform, S, atol=1e-12)
    assert abs(integrate_total(dec.stationary)) < 1e-12 * (1 + np.max(np.abs(S)))


# -- closed form ------------------------------------------------------------------------------


def test_analytic_uniform():
    S = raman.evolve_raman_analytic(np.ones(256), D, 1.0, P, 25.0)
    np.testing.assert_allclose(S, math.exp(-KAPPA * 25.0))


def test_analytic_stationary_is_static():
    S0 = antisymmetric()
    S0 = S0 - integrate_total(S0)
    np.testing.assert_allclose(raman.evolve_raman_analytic(S0, D, 1.0, P, 300.0), S0)


def test_analytic_without_control():
    S0 = symmetric()
    p = raman.RamanParams(0.0, DELTA, gamma=0.1)
    np.testing.assert_allclose(raman.evolve_raman_analytic(S0, D, 1.0, p, 3.0), S0 * math.exp(-0.3))


def test_analytic_rejects_mismatch():
    with pytest.raises(DomainError):
        raman.evolve_raman_analytic(np.ones(256), D, 1.0, raman.RamanParams(1.0, DELTA, mismatch=1.0), 1.0)


# -- numerical integration ---------------------------------------------------------------------


def test_numeric_matches_analytic():
    t = 50.0
    num = raman.evolve_raman_numeric(np.ones(256), D, 1.0, P, t, dt=0.01 / KAPPA)
    ana = raman.evolve_raman_analytic(np.ones(256), D, 1.0, P, t)
    assert relative_l2(num, ana) < 1e-3


def test_symmetric_lobes_relax_to_zero_mean():
    times = np.linspace(0, 150, 31)
    _, rec = raman.evolve_raman_numeric(symmetric(), D, 1.0, P, 150.0, samples=times)
    means = [abs(raman.decompose(S).uniform) for _, S in rec]
    flux = [raman.edge_flux(S, D, 1.0, P) for _, S in rec]
    assert means[-1] < 0.01 * means[0]
    assert flux[0] > 0 and flux[-1] < 1e-3 * flux[0]
    assert all(b <= a for a, b in zip(flux, flux[1:]))


def test_antisymmetric_lobes_static():
    S = raman.evolve_raman_numeric(antisymmetric(), D, 1.0, P, 100.0)
    assert relative_l2(S, antisymmetric()) < 1e-3


def test_step_limit():
    with pytest.raises(DivergedIntegrationError):
        raman.evolve_raman_numeric(np.ones(256), D, 1.0, P, 10.0, dt=2.0)
    assert raman.max_dt(D, 1.0, P) == pytest.approx(0.05 / KAPPA)


@settings(max_examples=10)
@given(st.floats(0, 0.02), st.floats(0.5, 1.5))
def test_uniform_rate_includes_dephasing(gamma, omega):
    p = raman.RamanParams(omega, DELTA, gamma=gamma)
    rate = p.decay_rate(D) + gamma
    t_end = math.log(100) / rate  # two decades
    times = np.linspace(0, t_end, 21)
    _, rec = raman.evolve_raman_numeric(symmetric(), D, 1.0, p, t_end, samples=times)
    fitted = raman.fit_decay_rate(times, [raman.decompose(S).uniform for _, S in rec])
    assert fitted == pytest.approx(rate, rel=0.02)


modes = st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False), min_size=1, max_size=5)


@settings(max_examples=15)
@given(modes)
def test_zero_mean_subspace_invariant(coeffs):
    S0 = sum(c * np.sin((k + 1) * np.pi * XI) for k, c in enumerate(coeffs))
    S0 = S0 - integrate_total(S0)
    if np.max(np.abs(S0)) < 1e-6:
        return
    S = raman.evolve_raman_numeric(S0, D, 1.0, P, 100.0)
    assert relative_l2(S, S0) < 1e-3


@settings(max_examples=15)
@given(st.floats(0, 2 * math.pi))
def test_global_phase(alpha):
    S0 = symmetric() + 0.3 * antisymmetric()
    ph = np.exp(1j * alpha)
    a = raman.evolve_raman_numeric(S0, D, 1.0, P, 20.0)
    b = raman.evolve_raman_numeric(ph * S0, D, 1.0, P, 20.0)
    np.testing.assert_allclose(b, ph * a, atol=1e-13)
    for fa, fb in zip(raman.probe_fields_from_spinwave(a, D, P), raman.probe_fields_from_spinwave(b, D, P)):
        np.testing.assert_allclose(fb, ph * fa, atol=1e-13)


def test_mismatch_breaks_stationarity():
    S0 = antisymmetric()
    matched = raman.evolve_raman_numeric(S0, D, 1.0, P, 50.0)
    p = raman.RamanParams(1.0, DELTA, mismatch=2 * math.pi)
    mismatched = raman.evolve_raman_numeric(S0, D, 1.0, p, 50.0)
    norm = lambda S: float(np.real(integrate_total(np.abs(S) ** 2)))  # noqa: E731
    assert norm(mismatched) < norm(matched) - 1e-3


def test_fit_and_components(tmp_path):
    t = np.linspace(0, 10, 11)
    assert raman.fit_decay_rate(t, 3 * np.exp(-0.2 * t)) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        raman.fit_decay_rate([0, 1], [1.0, 0.0])
    _, rec = raman.evolve_raman_numeric(symmetric(), D, 1.0, P, 20.0, samples=[0, 10, 20])
    text = raman.write_components_csv(rec, tmp_path).read_text().splitlines()
    assert text[0] == "t,uniform_abs,stationary_norm,fitted_rate" and len(text) == 4
