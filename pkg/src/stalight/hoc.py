"""Higher-order-coherence ladder for degenerate (standing-wave) controls.

When both controls drive the same excited state at the same frequency, an
atom can absorb from one control and emit into the other, writing spinwave
gratings ``s^(2n)`` with wavevector ``2 n k_c`` and excited coherences
``p^(m)`` (odd ``m``) between them:

    dp^(m)/dt  = -(G_m + i Delta) p^(m) + i O+ s^(m-1) + i O- s^(m+1)  [+ i sqrt(d) GAMMA E+- for m = +-1]
    ds^(2n)/dt = -(g_n + i delta) s^(2n) + i O+* p^(2n+1) + i O-* p^(2n-1)

Only ``p^(+1)`` and ``p^(-1)`` radiate into the forward and backward probes.
Atomic motion washes out the fine gratings; this is modelled by an extra decay
``gamma_motion * n**exponent`` on ``s^(+-2n)`` and on ``p^(+-(2n-1))`` for
``n >= 2`` (the excited and ground gratings share the same law). The ladder is
truncated at ``|2n| <= 2 n_max``.

The detuning enters as ``GAMMA + i Delta`` to match the secular integrator.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    GAMMA,
    ControlSchedule,
    DomainError,
    EnsembleConfig,
    FieldState,
    ShapeError,
    SimulationGrid,
    UnsupportedConfigurationError,
    l2_norm,
    relative_l2,
)
from .mbe import BoundaryDrive, Trajectory, integrate
from .medium import MidpointStepper
from .output import write_csv


@dataclass(frozen=True)
class HOCDecayModel:
    gamma_motion: float = 0.0
    exponent: int = 2

    def __post_init__(self):
        if not self.gamma_motion >= 0:
            raise DomainError("gamma_motion must be >= 0")
        if self.exponent not in (1, 2):
            raise DomainError("exponent must be 1 or 2")

    def extra(self, n: int) -> float:
        return self.gamma_motion * abs(n) ** self.exponent if n else 0.0


@dataclass(frozen=True)
class HOCState:
    """Ladder amplitudes keyed by order, plus the probe envelopes."""

    s: dict
    p: dict
    e_plus: np.ndarray
    e_minus: np.ndarray

    def __post_init__(self):
        n_max = max(self.s) // 2
        if sorted(self.s) != list(range(-2 * n_max, 2 * n_max + 1, 2)):
            raise ShapeError("spinwave orders must be -2 n_max, ..., 2 n_max")
        if sorted(self.p) != odd_orders(n_max):
            raise ShapeError("excited orders must interleave the spinwave orders")

    @property
    def n_max(self) -> int:
        return max(self.s) // 2

    # FieldState-like view used by the shared integrator and trajectory tools
    @property
    def S(self) -> np.ndarray:
        return self.s[0]

    @property
    def P_plus(self) -> np.ndarray:
        return self.p[1]

    @property
    def P_minus(self) -> np.ndarray:
        return self.p[-1]

    @property
    def E_plus(self) -> np.ndarray:
        return self.e_plus

    @property
    def E_minus(self) -> np.ndarray:
        return self.e_minus

    @property
    def n_xi(self) -> int:
        return self.s[0].shape[0]

    def order_norms(self) -> dict:
        return {k: l2_norm(v) for k, v in sorted(self.s.items())}

    @classmethod
    def from_field_state(cls, state: FieldState, n_max: int) -> "HOCState":
        z = np.zeros(state.n_xi, complex)
        s = {k: z.copy() for k in range(-2 * n_max, 2 * n_max + 1, 2)}
        p = {k: z.copy() for k in odd_orders(n_max)}
        s[0] = state.S.copy()
        p[1], p[-1] = state.P_plus.copy(), state.P_minus.copy()
        return cls(s, p, state.E_plus.copy(), state.E_minus.copy())


def odd_orders(n_max: int) -> list:
    return [m for m in range(-2 * n_max + 1, 2 * n_max, 2)]


class HOCModel:
    """Ladder truncated at ``n_max`` on a fixed grid, sharing the secular stepper."""

    def __init__(
        self,
        cfg: EnsembleConfig,
        ctrl: ControlSchedule,
        decay: HOCDecayModel,
        n_max: int,
        n_xi: int,
        dt: float,
        cross_coupling: bool = True,
    ):
        if n_max < 1:
            raise DomainError("n_max must be >= 1")
        if ctrl.delta_plus != ctrl.delta_minus:
            raise UnsupportedConfigurationError(
                "the ladder needs degenerate (single-colour) controls; use the secular mbe integrator"
            )
        self.cfg, self.ctrl, self.decay, self.n_max = cfg, ctrl, decay, n_max
        self.cross_coupling = cross_coupling
        self.xi = np.linspace(0.0, 1.0, n_xi)
        self.s_orders = list(range(-2 * n_max, 2 * n_max + 1, 2))
        self.p_orders = odd_orders(n_max)
        # component layout: p orders then s orders
        self.index = {("p", m): i for i, m in enumerate(self.p_orders)}
        self.index.update({("s", k): len(self.p_orders) + i for i, k in enumerate(self.s_orders)})
        K = len(self.index)
        self.stepper = MidpointStepper(
            n_xi, cfg.d, K, self.index[("p", 1)], self.index[("p", -1)], self._builder(), dt
        )

    def _builder(self):
        cfg, ctrl, decay, n = self.cfg, self.ctrl, self.decay, len(self.xi)
        phase = np.exp(1j * ctrl.mismatch * self.xi)
        idx = self.index
        K = len(idx)

        def build(op: complex, om: complex) -> np.ndarray:
            L = np.zeros((n, K, K), complex)
            om_x = om * phase
            for m in self.p_orders:
                i = idx[("p", m)]
                order = (abs(m) + 1) // 2
                L[:, i, i] = -(GAMMA + decay.extra(order if order >= 2 else 0) + 1j * ctrl.delta_plus)
                for k, coef in ((m - 1, op), (m + 1, om_x)):
                    if ("s", k) not in idx:
                        continue
                    if not self.cross_coupling and k != 0:
                        continue
                    j = idx[("s", k)]
                    L[:, i, j] = 1j * coef
                    L[:, j, i] = 1j * np.conj(coef)
            for k in self.s_orders:
                j = idx[("s", k)]
                L[:, j, j] = -(cfg.gamma + decay.extra(k // 2) + 1j * ctrl.two_photon_delta)
            return L

        return build

    def pack(self, state) -> np.ndarray:
        if isinstance(state, FieldState):
            state = HOCState.from_field_state(state, self.n_max)
        if state.n_max != self.n_max:
            raise ShapeError(f"state has n_max={state.n_max}, model has {self.n_max}")
        c = np.zeros((len(self.index), state.n_xi), complex)
        for m in self.p_orders:
            c[self.index[("p", m)]] = state.p[m]
        for k in self.s_orders:
            c[self.index[("s", k)]] = state.s[k]
        return c

    def unpack(self, c: np.ndarray, e_in) -> HOCState:
        Ep, Em = self.stepper.fields(c, *e_in)
        s = {k: c[self.index[("s", k)]].copy() for k in self.s_orders}
        p = {m: c[self.index[("p", m)]].copy() for m in self.p_orders}
        return HOCState(s, p, Ep, Em)

    def excited_components(self):
        return [self.index[("p", m)] for m in self.p_orders]


def step_hoc(
    state: HOCState,
    cfg: EnsembleConfig,
    ctrl: ControlSchedule,
    decay: HOCDecayModel,
    dt: float,
    drive: BoundaryDrive | None = None,
    t: float = 0.0,
) -> HOCState:
    drive = drive or BoundaryDrive()
    model = HOCModel(cfg, ctrl, decay, state.n_max, state.n_xi, dt)
    c = model.pack(state)
    e_mid = 0.5 * (np.asarray(drive(t)) + np.asarray(drive(t + dt)))
    c_new, _ = model.stepper.step(c, t, ctrl.at(t + 0.5 * dt), e_mid)
    return model.unpack(c_new, drive(t + dt))


def run_hoc(
    cfg: EnsembleConfig,
    grid: SimulationGrid,
    ctrl: ControlSchedule,
    decay: HOCDecayModel,
    n_max: int = 3,
    drive: BoundaryDrive | None = None,
    initial=None,
    stride: int = 1,
    cross_coupling: bool = True,
) -> Trajectory:
    """Integrate the ladder; snapshots are ``HOCState`` objects."""
    drive = drive or BoundaryDrive()
    model = HOCModel(cfg, ctrl, decay, n_max, grid.n_xi, grid.dt, cross_coupling)
    if initial is None:
        initial = FieldState.zeros(grid.n_xi)
    if isinstance(initial, FieldState):
        initial = HOCState.from_field_state(initial, n_max)
    return integrate(model, grid, drive, initial, stride)


def truncation_check(traj_a: Trajectory, traj_b: Trajectory) -> float:
    """Relative L2 difference of the order-0 spinwaves at the final time."""
    a, b = traj_a.final.S, traj_b.final.S
    if a.shape != b.shape or len(traj_a.step_times) != len(traj_b.step_times):
        raise ShapeError("trajectories must share the spatial and temporal grids")
    if not np.allclose(traj_a.step_times, traj_b.step_times):
        raise ShapeError("trajectories must share the temporal grid")
    if l2_norm(a) == 0 and l2_norm(b) == 0:
        return 0.0
    return relative_l2(a, b)


def write_orders_csv(traj: Trajectory, out_dir: Path) -> Path:
    first = traj.snapshots[0]
    orders = sorted(first.s)
    rows = [[t] + [l2_norm(snap.s[k]) for k in orders] for t, snap in zip(traj.times, traj.snapshots)]
    return write_csv(Path(out_dir) / "hoc_orders.csv", ["t"] + [f"s{k:+d}" for k in orders], rows)
