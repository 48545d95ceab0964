"""Units, grids, value types and small numerical helpers shared by every model.

All quantities are dimensionless: the excited-state linewidth sets the unit of
rate (``GAMMA = 1``), time is measured in ``1/GAMMA`` and the longitudinal
coordinate ``xi`` is the density-normalised position on ``[0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

GAMMA = 1.0


class StalightError(Exception):
    """Base class for all errors raised by this package."""


class ConfigValidationError(StalightError):
    """A configuration document does not match the schema."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class ConfigRangeError(ConfigValidationError):
    """A configuration value violates a range invariant."""


class DivergedIntegrationError(StalightError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, time: float, message: str = "non-finite values"):
        self.time = time
        super().__init__(f"integration diverged at t={time:.6g}: {message}")


class DomainError(StalightError, ValueError):
    """A parameter lies outside the domain where a formula is defined."""


class UnsupportedConfigurationError(StalightError):
    """The requested physics is not handled by this solver."""


class ResolutionError(StalightError):
    """A sampled grid is too coarse to resolve the requested feature."""


class ShapeError(StalightError, ValueError):
    """Arrays that must share a grid do not."""


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleConfig:
    d: float
    gamma: float = 0.0
    gamma_motion: float = 0.0
    L_over_c_check: float = 0.0

    def __post_init__(self):
        if not (self.d > 0 and math.isfinite(self.d)):
            raise ConfigRangeError("ensemble.d", f"optical depth must be > 0, got {self.d}")
        if not self.gamma >= 0:
            raise ConfigRangeError("ensemble.gamma", f"must be >= 0, got {self.gamma}")
        if not self.gamma_motion >= 0:
            raise ConfigRangeError("ensemble.gamma_motion", f"must be >= 0, got {self.gamma_motion}")
        # L/c must be negligible against every other time scale.
        if not 0 <= self.L_over_c_check < 0.1:
            raise ConfigRangeError(
                "ensemble.L_over_c_check",
                f"short-medium limit requires 0 <= L/c < 0.1, got {self.L_over_c_check}",
            )


@dataclass(frozen=True)
class SimulationGrid:
    """Uniform grid in ``xi`` (nodes include both ends) plus time stepping."""

    n_xi: int = 256
    dt: float = 0.05
    t_final: float = 0.0

    def __post_init__(self):
        if int(self.n_xi) != self.n_xi or self.n_xi < 16:
            raise ConfigRangeError("grid.n_xi", f"must be an integer >= 16, got {self.n_xi}")
        if not self.dt > 0:
            raise ConfigRangeError("grid.dt", f"must be > 0, got {self.dt}")
        if not self.t_final >= 0:
            raise ConfigRangeError("grid.t_final", f"must be >= 0, got {self.t_final}")
        if 0 < self.t_final < self.dt:
            raise ConfigRangeError("grid.t_final", "must be >= dt")

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_xi)

    @property
    def h(self) -> float:
        return 1.0 / (self.n_xi - 1)

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_final / self.dt + 1e-9))

    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.n_xi)


Number = Union[int, float, complex]


class Waveform:
    """Piecewise-constant or piecewise-linear complex function of time.

    Breakpoints are ``(t, value)`` pairs. Before the first breakpoint the first
    value holds; after the last breakpoint the last value holds.
    """

    KINDS = ("constant", "linear")

    def __init__(self, times: Sequence[float], values: Sequence[Number], kind: str = "linear"):
        if kind not in self.KINDS:
            raise ValueError(f"unknown waveform kind {kind!r}")
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=complex)
        if t.ndim != 1 or t.size == 0 or t.shape != v.shape:
            raise ValueError("waveform needs matching 1-D times and values")
        if np.any(np.diff(t) < 0):
            raise ValueError("waveform breakpoints must be non-decreasing in time")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("waveform breakpoints must be finite")
        self.times = t
        self.values = v
        self.kind = kind

    @classmethod
    def constant(cls, value: Number) -> "Waveform":
        return cls([0.0], [value], "constant")

    @classmethod
    def coerce(cls, obj) -> "Waveform":
        if isinstance(obj, Waveform):
            return obj
        return cls.constant(obj)

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def __call__(self, t: float) -> complex:
        tt, vv = self.times, self.values
        if t <= tt[0]:
            return complex(vv[0])
        if t >= tt[-1]:
            return complex(vv[-1])
        if self.kind == "constant":
            k = int(np.searchsorted(tt, t, side="right")) - 1
            return complex(vv[k])
        return complex(np.interp(t, tt, vv.real) + 1j * np.interp(t, tt, vv.imag))

    def scaled(self, factor: Number) -> "Waveform":
        return Waveform(self.times, self.values * factor, self.kind)

    def to_list(self) -> list:
        return [[float(t), float(v.real), float(v.imag)] for t, v in zip(self.times, self.values)]

    def __eq__(self, other):
        if not isinstance(other, Waveform):
            return NotImplemented
        return (
            self.kind == other.kind
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"Waveform(kind={self.kind!r}, breakpoints={self.to_list()!r})"


@dataclass(frozen=True)
class ControlSchedule:
    """Control Rabi frequencies and detunings (all in units of GAMMA).

    ``mismatch`` is a residual longitudinal phase-mismatch rate in radians per
    unit ``xi``; it enters as ``exp(1j * mismatch * xi)`` on the backward
    control coupling.
    """

    omega_plus: Waveform = field(default_factory=lambda: Waveform.constant(0.0))
    omega_minus: Waveform = field(default_factory=lambda: Waveform.constant(0.0))
    delta_plus: float = 0.0
    delta_minus: float = 0.0
    two_photon_delta: float = 0.0
    mismatch: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "omega_plus", Waveform.coerce(self.omega_plus))
        object.__setattr__(self, "omega_minus", Waveform.coerce(self.omega_minus))
        for name in ("delta_plus", "delta_minus", "two_photon_delta", "mismatch"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigRangeError(f"controls.{name}", "must be finite")

    def at(self, t: float) -> tuple[complex, complex]:
        return self.omega_plus(t), self.omega_minus(t)

    def with_omegas(self, omega_plus, omega_minus) -> "ControlSchedule":
        return replace(self, omega_plus=Waveform.coerce(omega_plus), omega_minus=Waveform.coerce(omega_minus))


@dataclass(frozen=True)
class FieldState:
    """Complex envelopes sampled on the ``xi`` nodes at one instant."""

    E_plus: np.ndarray
    E_minus: np.ndarray
    P_plus: np.ndarray
    P_minus: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=complex) for a in self.arrays()]
        n = arrays[0].shape
        if any(a.shape != n or a.ndim != 1 for a in arrays):
            raise ShapeError("all FieldState arrays must be 1-D with a common length")
        for name, a in zip(("E_plus", "E_minus", "P_plus", "P_minus", "S"), arrays):
            object.__setattr__(self, name, a)

    def arrays(self):
        return (self.E_plus, self.E_minus, self.P_plus, self.P_minus, self.S)

    @property
    def n_xi(self) -> int:
        return self.S.shape[0]

    @classmethod
    def zeros(cls, n_xi: int) -> "FieldState":
        z = np.zeros(n_xi, complex)
        return cls(z, z.copy(), z.copy(), z.copy(), z.copy())

    @classmethod
    def from_spinwave(cls, S) -> "FieldState":
        S = np.asarray(S, dtype=complex)
        z = np.zeros_like(S)
        return cls(z, z.copy(), z.copy(), z.copy(), S.copy())

    def scaled(self, factor: Number) -> "FieldState":
        return FieldState(*(a * factor for a in self.arrays()))

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())


# ---------------------------------------------------------------------------
# Quadrature and linear algebra
# ---------------------------------------------------------------------------


def trapezoid_weights(n: int, h: float | None = None) -> np.ndarray:
    h = 1.0 / (n - 1) if h is None else h
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


def integrate_xi(f, from_left: bool = True, xi=None) -> np.ndarray:
    """Cumulative trapezoidal integral of ``f`` sampled on the ``xi`` nodes.

    ``from_left`` gives ``int_0^xi f``; otherwise ``int_1^xi f`` (which is
    minus the integral from ``xi`` to the right edge).
    """
    f = np.asarray(f)
    xi = np.linspace(0.0, 1.0, f.shape[-1]) if xi is None else np.asarray(xi, dtype=float)
    cells = 0.5 * np.diff(xi) * (f[..., 1:] + f[..., :-1])
    out = np.zeros(f.shape, dtype=np.result_type(f, float))
    if from_left:
        out[..., 1:] = np.cumsum(cells, axis=-1)
    else:
        out[..., :-1] = -np.cumsum(cells[..., ::-1], axis=-1)[..., ::-1]
    return out


def integrate_total(f, xi=None) -> complex:
    f = np.asarray(f)
    xi = np.linspace(0.0, 1.0, f.shape[-1]) if xi is None else np.asarray(xi, dtype=float)
    return np.sum(0.5 * np.diff(xi) * (f[..., 1:] + f[..., :-1]), axis=-1)


def l2_norm(f, xi=None) -> float:
    return float(np.sqrt(np.real(integrate_total(np.abs(f) ** 2, xi))))


def relative_l2(a, b, xi=None) -> float:
    """``||a - b|| / ||b||`` in the trapezoidal L2 norm."""
    ref = l2_norm(b, xi)
    return l2_norm(np.asarray(a) - np.asarray(b), xi) / ref if ref > 0 else l2_norm(a, xi)


def spatial_moments(weight, xi=None) -> tuple[float, float]:
    """Centroid and variance of a non-negative weight over ``xi``."""
    w = np.asarray(weight, dtype=float)
    xi = np.linspace(0.0, 1.0, w.shape[-1]) if xi is None else np.asarray(xi, dtype=float)
    m0 = integrate_total(w, xi)
    if m0 <= 0:
        return float("nan"), float("nan")
    c = integrate_total(w * xi, xi) / m0
    var = integrate_total(w * (xi - c) ** 2, xi) / m0
    return float(c), float(var)


def expm2x2(M: np.ndarray) -> np.ndarray:
    """Exponential of a stack of 2x2 complex matrices (closed form).

    Uses ``exp(M) = exp(tr/2) * (cosh(s) I + sinh(s)/s (M - tr/2 I))`` with
    ``s**2 = ((a - d)/2)**2 + b*c``.
    """
    M = np.asarray(M, dtype=complex)
    half_tr = 0.5 * (M[..., 0, 0] + M[..., 1, 1])
    N = M - half_tr[..., None, None] * np.eye(2)
    s = np.sqrt(N[..., 0, 0] ** 2 + N[..., 0, 1] * N[..., 1, 0])
    ch = np.cosh(s)
    with np.errstate(invalid="ignore", divide="ignore"):
        sh_over_s = np.where(np.abs(s) < 1e-8, 1.0 + s**2 / 6.0, np.sinh(s) / s)
    out = ch[..., None, None] * np.eye(2) + sh_over_s[..., None, None] * N
    return np.exp(half_tr)[..., None, None] * out


def gaussian(xi, center: float, width: float, phase: float = 0.0) -> np.ndarray:
    """``exp(-(xi - center)**2 / (2 width**2)) * exp(i phase)``."""
    xi = np.asarray(xi, dtype=float)
    return np.exp(-((xi - center) ** 2) / (2 * width**2)) * np.exp(1j * phase)
