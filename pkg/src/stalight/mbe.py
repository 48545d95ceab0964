"""Time-domain integrator for the secular counterpropagating Maxwell-Bloch system.

Per node the coherences ``(P+, P-, S)`` obey

    dP+/dt = -(GAMMA + i Delta+) P+ + i sqrt(d) GAMMA E+ + i Omega+ S
    dP-/dt = -(GAMMA + i Delta-) P- + i sqrt(d) GAMMA E- + i Omega- S
    dS/dt  = -(gamma + i delta) S + i conj(Omega+) P+ + i conj(Omega-) P-

and the probes are slaved to them: ``+dE+/dxi = i sqrt(d) P+`` with ``E+(0)``
given, ``-dE-/dxi = i sqrt(d) P-`` with ``E-(1)`` given. The common two-photon
detuning ``delta`` sits on ``S`` only, so ``delta = 0`` is the stationary-light
resonance. A residual phase mismatch multiplies ``Omega-`` by
``exp(i mismatch xi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .core import (
    GAMMA,
    ControlSchedule,
    EnsembleConfig,
    FieldState,
    ShapeError,
    SimulationGrid,
    Waveform,
)
from .medium import MidpointStepper
from .output import write_csv

__all__ = [
    "BoundaryDrive",
    "Trajectory",
    "secular_operator",
    "SecularModel",
    "step_secular",
    "run",
    "recommended_dt",
    "write_trajectory_csv",
]


@dataclass(frozen=True)
class BoundaryDrive:
    """Probe inputs: ``e_plus_in`` enters at xi=0, ``e_minus_in`` at xi=1."""

    e_plus_in: Callable[[float], complex] = field(default_factory=lambda: Waveform.constant(0.0))
    e_minus_in: Callable[[float], complex] = field(default_factory=lambda: Waveform.constant(0.0))

    def __call__(self, t: float) -> tuple[complex, complex]:
        return complex(self.e_plus_in(t)), complex(self.e_minus_in(t))

    def scaled(self, factor) -> "BoundaryDrive":
        fp, fm = self.e_plus_in, self.e_minus_in
        return BoundaryDrive(lambda t: factor * fp(t), lambda t: factor * fm(t))

    @classmethod
    def gaussian_pulse(cls, t0: float, duration: float, amplitude: complex = 1.0, backward=False):
        """Pulse with intensity FWHM ``duration`` centred at ``t0``."""
        sigma = duration / (2 * math.sqrt(2 * math.log(2)))

        def pulse(t):
            return amplitude * math.exp(-((t - t0) ** 2) / (4 * sigma**2))

        zero = Waveform.constant(0.0)
        return cls(zero, pulse) if backward else cls(pulse, zero)

    @classmethod
    def tone(cls, delta: float, amplitude: complex = 1.0, ramp: float = 0.0, backward=False):
        """Monochromatic input ``exp(-i delta t)`` switched on with a smooth ramp."""

        def signal(t):
            if t <= 0:
                return 0.0
            env = 1.0 if ramp <= 0 or t >= ramp else math.sin(0.5 * math.pi * t / ramp) ** 2
            return amplitude * env * np.exp(-1j * delta * t)

        zero = Waveform.constant(0.0)
        return cls(zero, signal) if backward else cls(signal, zero)


@dataclass(frozen=True)
class Trajectory:
    """Snapshots plus per-step boundary traces and energy bookkeeping.

    ``step_times`` has one entry per step (including t=0); ``boundary_out`` is
    ``(E+(xi=1), E-(xi=0))`` at those times and ``bookkeeping`` holds cumulative
    integrals (``input``, ``output``, ``loss_excited``, ``loss_spin``), the
    instantaneous ``stored`` excitation and the relative ``closure_residual``.
    """

    times: np.ndarray
    snapshots: list
    step_times: np.ndarray
    boundary_out: np.ndarray
    boundary_in: np.ndarray
    bookkeeping: dict
    xi: np.ndarray
    final_state: object = None

    @property
    def final(self) -> FieldState:
        """State at ``t_final`` whether or not it falls on a snapshot."""
        return self.final_state if self.final_state is not None else self.snapshots[-1]

    def spinwaves(self) -> np.ndarray:
        return np.array([s.S for s in self.snapshots])

    def output_energy(self, t_start: float = -np.inf, t_stop: float = np.inf) -> float:
        """Integrated output flux over steps whose midpoint falls in the window."""
        return _window_sum(self.bookkeeping["output_rate"], self.step_times, t_start, t_stop)

    def input_energy(self, t_start: float = -np.inf, t_stop: float = np.inf) -> float:
        return _window_sum(self.bookkeeping["input_rate"], self.step_times, t_start, t_stop)

    def max_closure_residual(self) -> float:
        return float(np.max(np.abs(self.bookkeeping["closure_residual"])))


def _window_sum(rate, step_times, t_start, t_stop) -> float:
    if len(step_times) < 2:
        return 0.0
    dt = np.diff(step_times)
    tm = step_times[:-1] + 0.5 * dt
    mask = (tm >= t_start) & (tm < t_stop)
    return float(np.sum(rate[1:][mask] * dt[mask]))


def secular_operator(cfg: EnsembleConfig, ctrl: ControlSchedule, xi: np.ndarray):
    """Operator builder ``(Omega+, Omega-) -> L`` with shape ``(n_xi, 3, 3)``."""
    n = len(xi)
    phase = np.exp(1j * ctrl.mismatch * xi)

    def build(op: complex, om: complex) -> np.ndarray:
        L = np.zeros((n, 3, 3), complex)
        om_x = om * phase
        L[:, 0, 0] = -(GAMMA + 1j * ctrl.delta_plus)
        L[:, 1, 1] = -(GAMMA + 1j * ctrl.delta_minus)
        L[:, 2, 2] = -(cfg.gamma + 1j * ctrl.two_photon_delta)
        L[:, 0, 2] = 1j * op
        L[:, 1, 2] = 1j * om_x
        L[:, 2, 0] = 1j * np.conj(op)
        L[:, 2, 1] = 1j * np.conj(om_x)
        return L

    return build


def recommended_dt(ctrl: ControlSchedule, t_final: float = 0.0, samples: int = 64) -> float:
    """Accuracy-oriented step: 0.1 min(1/GAMMA, 1/|Delta|, 1/|Omega|).

    The integrator is A-stable, so this is advice rather than a hard limit.
    """
    ts = np.linspace(0.0, max(t_final, 0.0), samples)
    om = max([abs(ctrl.omega_plus(t)) for t in ts] + [abs(ctrl.omega_minus(t)) for t in ts])
    scales = [1.0 / GAMMA]
    for v in (ctrl.delta_plus, ctrl.delta_minus, om):
        if v:
            scales.append(1.0 / abs(v))
    return 0.1 * min(scales)


class SecularModel:
    """Holds one factorised stepper for a fixed configuration and grid."""

    n_comp = 3

    def __init__(self, cfg: EnsembleConfig, ctrl: ControlSchedule, n_xi: int, dt: float):
        self.cfg = cfg
        self.ctrl = ctrl
        self.xi = np.linspace(0.0, 1.0, n_xi)
        self.stepper = MidpointStepper(n_xi, cfg.d, 3, 0, 1, secular_operator(cfg, ctrl, self.xi), dt)

    def pack(self, state: FieldState) -> np.ndarray:
        return np.array([state.P_plus, state.P_minus, state.S])

    def unpack(self, c: np.ndarray, e_in) -> FieldState:
        Ep, Em = self.stepper.fields(c, *e_in)
        return FieldState(Ep, Em, c[0], c[1], c[2])

    def excited_components(self):
        return [0, 1]


def step_secular(
    state: FieldState,
    cfg: EnsembleConfig,
    ctrl: ControlSchedule,
    drive: BoundaryDrive,
    dt: float,
    t: float = 0.0,
) -> FieldState:
    """Advance ``state`` from ``t`` to ``t + dt``; the fields are re-solved at the new time."""
    model = SecularModel(cfg, ctrl, state.n_xi, dt)
    c = model.pack(state)
    e_mid = 0.5 * (np.asarray(drive(t)) + np.asarray(drive(t + dt)))
    c_new, _ = model.stepper.step(c, t, ctrl.at(t + 0.5 * dt), e_mid)
    return model.unpack(c_new, drive(t + dt))


def integrate(model, grid: SimulationGrid, drive: BoundaryDrive, initial: FieldState, stride: int = 1):
    """Shared time loop for any model exposing ``stepper``, ``pack`` and ``unpack``."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if initial.n_xi != grid.n_xi:
        raise ShapeError(f"initial state has {initial.n_xi} nodes, grid has {grid.n_xi}")
    stepper = model.stepper
    ctrl = model.ctrl
    dt = grid.dt
    n_steps = grid.n_steps
    c = model.pack(initial)
    e0 = drive(0.0)
    state = model.unpack(c, e0)

    step_times = np.arange(n_steps + 1) * dt
    b_out = np.zeros((2, n_steps + 1), complex)
    b_in = np.zeros((2, n_steps + 1), complex)
    rates = {k: np.zeros(n_steps + 1) for k in ("input_rate", "output_rate", "loss_excited_rate", "loss_spin_rate")}
    stored = np.zeros(n_steps + 1)
    excited = model.excited_components()
    spin = [k for k in range(stepper.K) if k not in excited]

    b_out[:, 0] = state.E_plus[-1], state.E_minus[0]
    b_in[:, 0] = e0
    stored[0] = stepper.stored(c)
    snapshots, snap_times = [state], [0.0]
    e_prev = e0

    for k in range(n_steps):
        t = k * dt
        # inputs enter as the endpoint average, which keeps the scheme an exact
        # bilinear map of the continuous system for any drive
        e_new = drive(t + dt)
        e_mid = 0.5 * (np.asarray(e_prev) + np.asarray(e_new))
        c, flux = stepper.step(c, t, ctrl.at(t + 0.5 * dt), e_mid)
        e_prev = e_new
        state = model.unpack(c, e_new)
        b_out[:, k + 1] = state.E_plus[-1], state.E_minus[0]
        b_in[:, k + 1] = e_new
        rates["input_rate"][k + 1] = flux.flux_in
        rates["output_rate"][k + 1] = flux.flux_out
        rates["loss_excited_rate"][k + 1] = float(np.sum(flux.loss_by_comp[excited]))
        rates["loss_spin_rate"][k + 1] = float(np.sum(flux.loss_by_comp[spin]))
        stored[k + 1] = stepper.stored(c)
        if (k + 1) % stride == 0:
            snapshots.append(state)
            snap_times.append(t + dt)

    book = dict(rates)
    for name in ("input", "output", "loss_excited", "loss_spin"):
        book[name] = np.concatenate([[0.0], np.cumsum(rates[name + "_rate"][1:] * dt)])
    book["stored"] = stored
    budget = stored[0] + book["input"]
    residual = budget - stored - book["output"] - book["loss_excited"] - book["loss_spin"]
    scale = np.maximum(np.maximum.accumulate(budget), 1e-300)
    book["closure_residual"] = residual / scale
    return Trajectory(
        times=np.array(snap_times),
        snapshots=snapshots,
        step_times=step_times,
        boundary_out=b_out,
        boundary_in=b_in,
        bookkeeping=book,
        xi=model.xi,
        final_state=state,
    )


def run(
    cfg: EnsembleConfig,
    grid: SimulationGrid,
    ctrl: ControlSchedule,
    drive: BoundaryDrive | None = None,
    initial: FieldState | None = None,
    stride: int = 1,
) -> Trajectory:
    """Integrate the secular system over ``[0, grid.t_final]``.

    The probe arrays of ``initial`` are ignored: fields carry no time
    derivative and are re-solved from the coherences and the drive at t=0.
    """
    drive = drive or BoundaryDrive()
    initial = initial if initial is not None else FieldState.zeros(grid.n_xi)
    model = SecularModel(cfg, ctrl, grid.n_xi, grid.dt)
    return integrate(model, grid, drive, initial, stride)


def write_trajectory_csv(traj: Trajectory, out_dir: Path, spin_stride_xi: int = 1) -> list[Path]:
    """Write ``spinwave.csv``, ``fields_boundary.csv`` and ``bookkeeping.csv``."""
    out_dir = Path(out_dir)
    xi = traj.xi[::spin_stride_xi]

    def spin_rows():
        for t, s in zip(traj.times, traj.snapshots):
            S = s.S[::spin_stride_xi]
            for x, v in zip(xi, S):
                yield (t, x, v.real, v.imag, abs(v) ** 2)

    def boundary_rows():
        for k, t in enumerate(traj.step_times):
            ep, em = traj.boundary_out[:, k]
            yield (t, ep.real, ep.imag, abs(ep) ** 2, em.real, em.imag, abs(em) ** 2)

    book = traj.bookkeeping

    def book_rows():
        for k, t in enumerate(traj.step_times):
            loss = book["loss_excited"][k] + book["loss_spin"][k]
            yield (t, book["stored"][k], book["output"][k], loss, book["closure_residual"][k])

    return [
        write_csv(out_dir / "spinwave.csv", ["t", "xi", "re_S", "im_S", "abs2_S"], spin_rows()),
        write_csv(
            out_dir / "fields_boundary.csv",
            ["t", "re_E_plus_1", "im_E_plus_1", "abs2_E_plus_1", "re_E_minus_0", "im_E_minus_0", "abs2_E_minus_0"],
            boundary_rows(),
        ),
        write_csv(out_dir / "bookkeeping.csv", ["t", "stored", "out", "loss", "closure_residual"], book_rows()),
    ]
