"""Residual longitudinal phase mismatch of the two Lambda pairs.

The forward pair contributes ``k_p+ - k_c+ cos(theta+)`` to the spinwave
wavevector and the backward pair ``-k_p- + k_c- cos(theta-)``. When the two
differ the spinwaves written by each pair no longer coincide; only the
difference matters, so it is carried as a spatial phase on the backward
control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .core import ControlSchedule, DomainError


@dataclass(frozen=True)
class BeamGeometry:
    k_p_plus: float = 1.0
    k_c_plus: float = 1.0
    k_p_minus: float = 1.0
    k_c_minus: float = 1.0
    angle_c_plus: float = 0.0
    angle_c_minus: float = 0.0

    def __post_init__(self):
        for name in ("k_p_plus", "k_c_plus", "k_p_minus", "k_c_minus"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite magnitude, got {v}")
        for name in ("angle_c_plus", "angle_c_minus"):
            if not abs(getattr(self, name)) < 0.5 * math.pi:
                raise DomainError(f"|{name}| must be below pi/2")


def residual_mismatch(geom: BeamGeometry, scale: float = 1.0) -> float:
    """Mismatch per unit ``xi``; ``scale`` is the phase accumulated across the medium per unit ``k``."""
    forward = geom.k_p_plus - geom.k_c_plus * math.cos(geom.angle_c_plus)
    backward = -geom.k_p_minus + geom.k_c_minus * math.cos(geom.angle_c_minus)
    return (forward - backward) * scale


def apply_mismatch(ctrl: ControlSchedule, delta_k: float) -> ControlSchedule:
    """Schedule whose backward coupling picks up an extra ``exp(i delta_k xi)``."""
    if not math.isfinite(delta_k):
        raise DomainError("delta_k must be finite")
    if delta_k == 0:
        return ctrl
    return replace(ctrl, mismatch=ctrl.mismatch + delta_k)
