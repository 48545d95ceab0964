"""Steady-state transmission and reflection spectra of the secular medium.

For a probe tone ``exp(-i delta t)`` the coherences are eliminated
algebraically, leaving ``d/dxi (E+, E-) = M(delta) (E+, E-)`` which is solved as
a two-point boundary-value problem with a closed-form 2x2 exponential.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import GAMMA, ControlSchedule, EnsembleConfig, ResolutionError
from .output import write_csv, write_svg_lines

REGULARIZATION = 1e-12 * GAMMA


@dataclass(frozen=True)
class SpectrumResult:
    delta_grid: np.ndarray
    t_amp: np.ndarray
    r_amp: np.ndarray
    regularized: bool = False

    @property
    def T(self) -> np.ndarray:
        return np.abs(self.t_amp) ** 2

    @property
    def R(self) -> np.ndarray:
        return np.abs(self.r_amp) ** 2

    @property
    def absorbed(self) -> np.ndarray:
        return 1.0 - self.T - self.R


def propagation_matrix(cfg: EnsembleConfig, ctrl: ControlSchedule, delta, t: float = 0.0):
    """``M(delta)`` for constant controls, shape ``(len(delta), 2, 2)``.

    The second row is expressed for ``E- exp(-i mismatch xi)`` so that the
    matrix is independent of ``xi``; this leaves both boundary values intact.
    Returns ``(M, regularized)``.
    """
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    op, om = ctrl.at(t)
    sd = np.sqrt(cfg.d)
    a_p = 1.0 / (GAMMA + 1j * (ctrl.delta_plus - delta))
    a_m = 1.0 / (GAMMA + 1j * (ctrl.delta_minus - delta))
    denom = cfg.gamma + 1j * (ctrl.two_photon_delta - delta) + abs(op) ** 2 * a_p + abs(om) ** 2 * a_m
    singular = np.abs(denom) < REGULARIZATION
    regularized = bool(np.any(singular))
    denom = np.where(singular, denom + REGULARIZATION, denom)
    # S = -sqrt(d) GAMMA (conj(op) a_p E+ + conj(om) a_m E-) / denom
    s_p = -sd * GAMMA * np.conj(op) * a_p / denom
    s_m = -sd * GAMMA * np.conj(om) * a_m / denom
    M = np.empty(delta.shape + (2, 2), complex)
    # dE+/dxi = i sqrt(d) P+,  P+ = i a_p (sqrt(d) GAMMA E+ + op S)
    M[:, 0, 0] = -sd * a_p * (sd * GAMMA + op * s_p)
    M[:, 0, 1] = -sd * a_p * op * s_m
    # dE-/dxi = -i sqrt(d) P-
    M[:, 1, 0] = sd * a_m * om * s_p
    M[:, 1, 1] = sd * a_m * (sd * GAMMA + om * s_m) - 1j * ctrl.mismatch
    return M, regularized


def _two_point(M: np.ndarray, backward: bool):
    """Transmission/reflection of the slab ``d/dxi E = M E`` on ``[0, 1]``.

    Uses the closed form of ``exp(M)`` rearranged with ``tanh``/``sech`` so
    that growing and decaying exponentials never overflow.
    """
    a, b, c, dd = M[:, 0, 0], M[:, 0, 1], M[:, 1, 0], M[:, 1, 1]
    half_tr = 0.5 * (a + dd)
    n11 = 0.5 * (a - dd)
    s = np.sqrt(n11**2 + b * c)
    s = np.where(s.real < 0, -s, s)
    q = np.exp(-2.0 * s)
    tanh = (1.0 - q) / (1.0 + q)
    sech = 2.0 * np.exp(-s) / (1.0 + q)
    small = np.abs(s) < 1e-8
    with np.errstate(invalid="ignore", divide="ignore"):
        th_over_s = np.where(small, 1.0 - s**2 / 3.0, tanh / np.where(small, 1.0, s))
    # U = exp(half_tr) cosh(s) [I + (tanh(s)/s) N],  N = [[n11, b], [c, -n11]]
    u22 = 1.0 - th_over_s * n11
    if not backward:
        # E+(0) = 1, E-(1) = 0
        r = -th_over_s * c / u22
        t = np.exp(half_tr) * sech / u22
    else:
        # E+(0) = 0, E-(1) = 1
        r = th_over_s * b / u22
        t = np.exp(-half_tr) * sech / u22
    return t, r


def steady_state_response(
    cfg: EnsembleConfig,
    ctrl: ControlSchedule,
    delta_grid,
    drive_side: str = "forward",
    t: float = 0.0,
) -> SpectrumResult:
    """Complex transmission and reflection for a unit probe tone at each ``delta``.

    ``drive_side="forward"`` injects at xi=0 (``t = E+(1)``, ``r = E-(0)``);
    ``"backward"`` injects at xi=1 (``t = E-(0)``, ``r = E+(1)``). Controls are
    evaluated at time ``t`` and held constant.
    """
    if drive_side not in ("forward", "backward"):
        raise ValueError("drive_side must be 'forward' or 'backward'")
    delta_grid = np.atleast_1d(np.asarray(delta_grid, dtype=float))
    if not np.all(np.isfinite(delta_grid)):
        raise ValueError("delta grid must be finite")
    M, reg = propagation_matrix(cfg, ctrl, delta_grid, t)
    if reg:
        warnings.warn("exact pole in the algebraic elimination; regularised by 1e-12 GAMMA", RuntimeWarning)
    t_amp, r_amp = _two_point(M, drive_side == "backward")
    if drive_side == "backward":
        # the boundary value E-(1) = 1 reads exp(-i mismatch) in the gauged variable
        phase = np.exp(-1j * ctrl.mismatch)
        t_amp, r_amp = t_amp * phase, r_amp * phase
    return SpectrumResult(delta_grid, t_amp, r_amp, reg)


def default_delta_grid(cfg: EnsembleConfig, ctrl: ControlSchedule, points: int = 2001) -> np.ndarray:
    op, om = ctrl.at(0.0)
    width = (abs(op) ** 2 + abs(om) ** 2) / (cfg.d * GAMMA)
    width = width if width > 0 else GAMMA
    return np.linspace(-10 * width, 10 * width, points)


def eit_window_width(spectrum: SpectrumResult, min_points: int = 3) -> float:
    """FWHM of the transparency peak of ``T(delta)`` at ``delta = 0``.

    Raises ``ResolutionError`` if ``T`` has no resolved peak at the origin or
    the half-maximum is not crossed inside the grid on both sides.
    """
    dg, T = spectrum.delta_grid, spectrum.T
    if dg.size < 3 or np.any(np.diff(dg) <= 0):
        raise ResolutionError("delta grid must be increasing with at least 3 points")
    i0 = int(np.argmin(np.abs(dg)))
    peak = T[i0]
    half = 0.5 * peak
    if not peak > 0:
        raise ResolutionError("no transmission at delta=0")

    def crossing(step):
        i = i0
        while 0 <= i + step < dg.size:
            if T[i + step] > peak * (1 + 1e-9):
                raise ResolutionError("T(delta=0) is not a local maximum; transparency window unresolved")
            if T[i + step] <= half:
                j = i + step
                if abs(j - i0) < min_points:
                    raise ResolutionError("transparency window narrower than the delta grid spacing")
                # linear interpolation between i and j
                frac = (T[i] - half) / (T[i] - T[j])
                return dg[i] + frac * (dg[j] - dg[i])
            i += step
        raise ResolutionError("half maximum not reached inside the delta grid")

    return float(crossing(+1) - crossing(-1))


def write_spectrum_csv(spec: SpectrumResult, out_dir: Path, svg: bool = False) -> list[Path]:
    out_dir = Path(out_dir)
    rows = zip(spec.delta_grid, spec.T, spec.R, spec.absorbed)
    paths = [write_csv(out_dir / "spectrum.csv", ["delta", "T", "R", "one_minus_T_minus_R"], rows)]
    if svg:
        paths.append(
            write_svg_lines(out_dir / "spectrum.svg", spec.delta_grid, {"T": spec.T, "R": spec.R}, "probe spectrum")
        )
    return paths
