"""Reduced EIT stationary-light model.

To first order in the inverse optical depth the spinwave of an EIT medium
driven by two counterpropagating controls drifts and diffuses,

    dS/dt = -v dS/dxi + D d2S/dxi2,   v = GAMMA tan^2(theta) cos(2 phi),
                                      D = GAMMA tan^2(theta) / d,

with ``tan^2 theta = (|O+|^2 + |O-|^2) / (d GAMMA^2)`` and
``tan^2 phi = |O-|^2 / |O+|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    GAMMA,
    DivergedIntegrationError,
    DomainError,
    FieldState,
    ShapeError,
    integrate_total,
    spatial_moments,
)
from .output import write_csv


@dataclass(frozen=True)
class MixingAngles:
    theta: float
    phi: float
    degenerate: bool = False

    def __post_init__(self):
        if not (0.0 <= self.theta < 0.5 * math.pi):
            raise DomainError(f"theta must lie in [0, pi/2), got {self.theta}")
        if not (0.0 <= self.phi <= 0.5 * math.pi):
            raise DomainError(f"phi must lie in [0, pi/2], got {self.phi}")

    @property
    def tan2_theta(self) -> float:
        return math.tan(self.theta) ** 2

    def velocity(self, gamma: float = GAMMA) -> float:
        return gamma * self.tan2_theta * math.cos(2 * self.phi)

    def diffusion(self, d: float, gamma: float = GAMMA) -> float:
        return gamma * self.tan2_theta / d


@dataclass(frozen=True)
class PolaritonDiagnostics:
    psi_d: np.ndarray
    centroid: float
    width_sq: float
    effective_mass: complex


def mixing_angles(omega_plus: complex, omega_minus: complex, d: float, gamma: float = GAMMA) -> MixingAngles:
    """Mixing angles of the two controls. Zero controls give ``theta = phi = 0`` flagged degenerate."""
    if not d > 0:
        raise DomainError("optical depth must be positive")
    ip, im = abs(omega_plus) ** 2, abs(omega_minus) ** 2
    theta = math.atan(math.sqrt((ip + im) / (d * gamma**2)))
    if ip + im == 0:
        return MixingAngles(0.0, 0.0, degenerate=True)
    phi = math.atan2(math.sqrt(im), math.sqrt(ip))
    return MixingAngles(theta, phi)


def stable_dt(h: float, v: float, D: float) -> float:
    """Largest step allowed for the explicit upwind/centered scheme."""
    limits = [h / abs(v)] if v else []
    if D > 0:
        limits.append(h * h / (2 * D))
    return 0.5 * min(limits) if limits else math.inf


def _step(S, cfl, r):
    """One split step: upwind drift then centered diffusion, zero ghosts outside."""
    if cfl > 0:
        up = np.concatenate([[0.0], S[:-1]])
        S = S - cfl * (S - up)
    elif cfl < 0:
        up = np.concatenate([S[1:], [0.0]])
        S = S + cfl * (S - up)
    if r > 0:
        padded = np.concatenate([[0.0], S, [0.0]])
        S = S + r * (padded[2:] - 2 * S + padded[:-2])
    return S


def evolve_diffusion(
    S0,
    angles: MixingAngles,
    d: float,
    gamma: float,
    t: float,
    dt: float | None = None,
    samples=None,
):
    """Advance the spinwave under the drift-diffusion equation for a time ``t``.

    Spinwave leaving through either edge is lost. The upwind step adds a
    numerical diffusion ``|v| h (1 - cfl) / 2`` which is removed from the
    physical coefficient (clamped at zero) so that moments follow ``v`` and
    ``D``. If ``samples`` (increasing times in ``[0, t]``) is given, returns
    ``(S(t), [(time, S), ...])``.
    """
    S = np.asarray(S0, dtype=complex).copy()
    if S.ndim != 1 or S.size < 3:
        raise ShapeError("spinwave must be a 1-D array with at least 3 nodes")
    if t < 0:
        raise DomainError("t must be >= 0")
    h = 1.0 / (S.size - 1)
    v = angles.velocity(gamma)
    D = angles.diffusion(d, gamma)
    limit = stable_dt(h, v, D)
    if dt is None:
        dt = min(limit, t) if t > 0 else 0.0
    elif dt > limit:
        raise DivergedIntegrationError(0.0, f"dt={dt:.3g} exceeds the stability limit {limit:.3g}")
    samples = None if samples is None else sorted(float(s) for s in samples)
    recorded = []
    if t == 0 or dt == 0:
        if samples is not None:
            recorded = [(s, S.copy()) for s in samples]
            return S, recorded
        return S

    # march to each requested time (and finally to t) with steps no larger than dt
    targets = (samples or []) + [t]
    now = 0.0
    for target in targets:
        span = target - now
        if span > 0:
            n = max(1, math.ceil(span / dt - 1e-12))
            tau = span / n
            cfl = v * tau / h
            r = max(D - abs(v) * h * (1 - abs(cfl)) / 2, 0.0) * tau / (h * h)
            for _ in range(n):
                S = _step(S, cfl, r)
            if not np.all(np.isfinite(S)):
                raise DivergedIntegrationError(target)
            now = target
        if samples is not None and len(recorded) < len(samples):
            recorded.append((target, S.copy()))
    if samples is not None:
        return S, recorded
    return S


def dark_polariton(state: FieldState, angles: MixingAngles) -> np.ndarray:
    st, ct = math.sin(angles.theta), math.cos(angles.theta)
    sp, cp = math.sin(angles.phi), math.cos(angles.phi)
    return st * (state.E_plus * cp + state.E_minus * sp) - ct * state.S


def effective_mass(d: float, gamma: float, omega: complex, delta: float) -> complex:
    """Complex polariton mass ``2 (d GAMMA / Omega)^2 / (Delta - i GAMMA)`` (hbar = 1)."""
    if omega == 0:
        raise DomainError("effective mass is undefined for a vanishing control")
    return complex(2.0 * (d * gamma / abs(omega)) ** 2 / (delta - 1j * gamma))


def diagnostics(state: FieldState, angles: MixingAngles, d: float, delta: float = 0.0) -> PolaritonDiagnostics:
    psi = dark_polariton(state, angles)
    c, w = spatial_moments(np.abs(state.S) ** 2)
    omega = math.sqrt(d) * GAMMA * math.tan(angles.theta)
    mass = effective_mass(d, GAMMA, omega, delta) if omega > 0 else complex("nan")
    return PolaritonDiagnostics(psi_d=psi, centroid=c, width_sq=w, effective_mass=mass)


def moment_rows(samples):
    """``(t, centroid, width_sq, norm)`` for each ``(t, S)`` sample."""
    rows = []
    for t, S in samples:
        weight = np.abs(S) ** 2
        c, w = spatial_moments(weight)
        rows.append((t, c, w, float(np.real(integrate_total(weight)))))
    return rows


def write_moments_csv(samples, out_dir: Path) -> Path:
    return write_csv(Path(out_dir) / "eit_moments.csv", ["t", "centroid", "width_sq", "norm"], moment_rows(samples))
