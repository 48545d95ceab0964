"""Reduced Raman stationary-light model.

With far-detuned probes (``Delta+ = Delta``, ``Delta- = -Delta``) the excited
coherences follow the spinwave adiabatically. In the frame co-rotating with the
probe dispersion phase both probes are integrals of the spinwave,

    E+(xi) = i sqrt(d) (O/Delta) int_0^xi S,   E-(xi) = -i sqrt(d) (O/Delta) int_1^xi S,

and ``dS/dt = i sqrt(d) GAMMA (O*/Delta) (E+ + E-) - gamma S``. Only the spatial
mean of ``S`` couples to the probes, so a zero-mean spinwave is stationary and
the mean decays at ``d GAMMA |O|^2 / Delta^2``.

The light shifts of the two probe transitions cancel for equal drives with
opposite detunings, so no light-shift term is carried. Incoherent scattering
from the controls is assumed to be included in ``gamma``.

An optional wavevector mismatch multiplies the backward control by
``exp(i mismatch xi)``; the backward probe then integrates ``exp(i mismatch xi) S``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    GAMMA,
    DivergedIntegrationError,
    DomainError,
    ShapeError,
    integrate_total,
    integrate_xi,
    l2_norm,
)
from .output import write_csv

MIN_DETUNING = 10.0 * GAMMA
ADIABATIC_DETUNING = 25.0 * GAMMA


@dataclass(frozen=True)
class RamanParams:
    omega: complex
    delta: float
    gamma: float = 0.0
    mismatch: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.omega) or not np.isfinite(self.delta):
            raise DomainError("omega and delta must be finite")
        if abs(self.delta) < MIN_DETUNING:
            raise DomainError(f"|delta| must be at least {MIN_DETUNING:g} GAMMA for adiabatic elimination")
        if abs(self.delta) < ADIABATIC_DETUNING:
            warnings.warn(
                f"|delta| = {abs(self.delta):g} GAMMA is below {ADIABATIC_DETUNING:g}; adiabatic elimination is marginal",
                RuntimeWarning,
                stacklevel=3,
            )
        if self.gamma < 0:
            raise DomainError("gamma must be >= 0")

    def decay_rate(self, d: float, gamma_e: float = GAMMA) -> float:
        """Decay rate of the spatially uniform component (without ``gamma``)."""
        return d * gamma_e * abs(self.omega) ** 2 / self.delta**2


@dataclass(frozen=True)
class SpinwaveDecomposition:
    stationary: np.ndarray
    uniform: complex


def _check(S):
    S = np.asarray(S, dtype=complex)
    if S.ndim != 1 or S.size < 2:
        raise ShapeError("spinwave must be a 1-D array with at least 2 nodes")
    return S


def rotating_frame(state, d: float, params: RamanParams):
    """``(S, E+, E-)`` of a full-model state mapped into the frame used here.

    The probes pick up the dispersion phase ``exp(i k xi)``, ``k = d GAMMA / Delta``,
    which is removed from all three envelopes. The backward probe also changes
    sign: with ``Delta- = -Delta`` the full model drives ``S`` with ``E+ - E-``
    while this module writes ``E+ + E-``.
    """
    xi = np.linspace(0.0, 1.0, state.S.size)
    back = np.exp(-1j * d * GAMMA / params.delta * xi)
    return back * state.S, back * state.E_plus, -back * state.E_minus


def lab_spinwave(S, d: float, params: RamanParams) -> np.ndarray:
    """Inverse of the spinwave part of :func:`rotating_frame`."""
    S = _check(S)
    xi = np.linspace(0.0, 1.0, S.size)
    return np.exp(1j * d * GAMMA / params.delta * xi) * S


def decompose(S) -> SpinwaveDecomposition:
    S = _check(S)
    uniform = complex(integrate_total(S))
    return SpinwaveDecomposition(stationary=S - uniform, uniform=uniform)


def probe_fields_from_spinwave(S, d: float, params: RamanParams):
    """Forward and backward probe envelopes (rotating spatial frame)."""
    S = _check(S)
    if params.delta == 0:
        raise DomainError("delta = 0 invalidates the adiabatic elimination")
    g = 1j * math.sqrt(d) * params.omega / params.delta
    E_plus = g * integrate_xi(S, True)
    if params.mismatch:
        xi = np.linspace(0.0, 1.0, S.size)
        E_minus = -g * integrate_xi(np.exp(1j * params.mismatch * xi) * S, False)
    else:
        E_minus = -g * integrate_xi(S, False)
    return E_plus, E_minus


def evolve_raman_analytic(S0, d: float, gamma_e: float, params: RamanParams, t: float) -> np.ndarray:
    """Closed-form evolution: the zero-mean part is frozen, the mean decays exponentially."""
    if t < 0:
        raise DomainError("t must be >= 0")
    if params.mismatch:
        raise DomainError("the closed form holds only for a phase-matched configuration")
    dec = decompose(S0)
    rate = params.decay_rate(d, gamma_e)
    return (dec.stationary + dec.uniform * math.exp(-rate * t)) * math.exp(-params.gamma * t)


def _rhs(S, d, gamma_e, params, phase):
    E_plus, E_minus = probe_fields_from_spinwave(S, d, params)
    if phase is not None:
        E_minus = np.conj(phase) * E_minus
    coupling = 1j * math.sqrt(d) * gamma_e * np.conj(params.omega) / params.delta
    return coupling * (E_plus + E_minus) - params.gamma * S


def max_dt(d: float, gamma_e: float, params: RamanParams) -> float:
    rate = params.decay_rate(d, gamma_e)
    return 0.05 / rate if rate > 0 else math.inf


def evolve_raman_numeric(
    S0,
    d: float,
    gamma_e: float,
    params: RamanParams,
    t: float,
    dt: float | None = None,
    samples=None,
):
    """Explicit-midpoint integration of the reduced equations.

    The probes are recomputed from the spinwave at every stage. ``dt`` defaults
    to (and may not exceed) ``0.05 Delta^2 / (d GAMMA |O|^2)``. With ``samples``
    returns ``(S(t), [(time, S), ...])``.
    """
    S = _check(S0).copy()
    if t < 0:
        raise DomainError("t must be >= 0")
    limit = max_dt(d, gamma_e, params)
    if params.gamma > 0:
        limit = min(limit, 0.05 / params.gamma)
    if dt is None:
        dt = limit
    elif dt > limit:
        raise DivergedIntegrationError(0.0, f"dt={dt:.3g} exceeds {limit:.3g}")
    phase = None
    if params.mismatch:
        phase = np.exp(1j * params.mismatch * np.linspace(0.0, 1.0, S.size))
    samples = None if samples is None else sorted(float(s) for s in samples)
    recorded = []
    now = 0.0
    for target in (samples or []) + [t]:
        span = target - now
        if span > 0:
            n = max(1, math.ceil(span / dt - 1e-12)) if math.isfinite(dt) else 1
            tau = span / n
            for _ in range(n):
                half = S + 0.5 * tau * _rhs(S, d, gamma_e, params, phase)
                S = S + tau * _rhs(half, d, gamma_e, params, phase)
            if not np.all(np.isfinite(S)):
                raise DivergedIntegrationError(target)
            now = target
        if samples is not None and len(recorded) < len(samples):
            recorded.append((target, S.copy()))
    if samples is not None:
        return S, recorded
    return S


def edge_flux(S, d: float, gamma_e: float, params: RamanParams) -> float:
    """Photon flux leaving both edges, ``GAMMA (|E+(1)|^2 + |E-(0)|^2)``."""
    E_plus, E_minus = probe_fields_from_spinwave(S, d, params)
    return gamma_e * float(abs(E_plus[-1]) ** 2 + abs(E_minus[0]) ** 2)


def fit_decay_rate(times, values) -> float:
    """Least-squares slope of ``-log|values|`` against time.

    Points below ``1e-12`` of the first value are ignored so round-off in a
    fully decayed tail does not bias the fit.
    """
    times = np.asarray(times, dtype=float)
    mags = np.abs(np.asarray(values))
    keep = mags > 1e-12 * mags[0]
    if np.count_nonzero(keep) < 2:
        raise ValueError("need at least two resolvable samples to fit a rate")
    slope, _ = np.polyfit(times[keep], np.log(mags[keep]), 1)
    return float(-slope)


def component_rows(samples):
    """``(t, |uniform|, ||stationary||, fitted rate)`` for each ``(t, S)`` sample."""
    times = [t for t, _ in samples]
    decs = [decompose(S) for _, S in samples]
    uniforms = [dec.uniform for dec in decs]
    try:
        rate = fit_decay_rate(times, uniforms)
    except ValueError:
        rate = float("nan")
    return [(t, abs(dec.uniform), l2_norm(dec.stationary), rate) for t, dec in zip(times, decs)]


def write_components_csv(samples, out_dir: Path) -> Path:
    return write_csv(
        Path(out_dir) / "raman_components.csv",
        ["t", "uniform_abs", "stationary_norm", "fitted_rate"],
        component_rows(samples),
    )
