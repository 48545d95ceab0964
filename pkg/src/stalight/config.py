"""JSON configuration documents.

A document has four optional top-level sections::

    {"grid": {"n_xi": 256, "dt": 0.25, "t_final": 400},
     "ensemble": {"d": 100, "gamma": 0, "gamma_motion": 0},
     "controls": {"omega_plus": [[0, 1, 0]], "omega_minus": 0,
                  "delta_plus": 0, "delta_minus": 0, "two_photon_delta": 0, "mismatch": 0},
     "scenario": {"name": "slow-light", "parameters": {}}}

Control amplitudes are a number, a list of ``[t, re, im]`` breakpoints
(piecewise constant), or ``{"kind": "constant" | "linear", "breakpoints": [...]}``.
Only ``ensemble.d`` is required.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

from .core import (
    ConfigRangeError,
    ConfigValidationError,
    ControlSchedule,
    EnsembleConfig,
    SimulationGrid,
    Waveform,
)

_NUM = "number"
_INT = "integer"
_BOOL = "boolean"
_STR = "string"
_LIST = "number list"

_PROTOCOL = {
    "pulse_center": (_NUM, 100.0),
    "pulse_duration": (_NUM, 50.0),
    "pulse_amplitude": (_NUM, 1.0),
    "omega_write": (_NUM, 1.0),
    "write_end": (_NUM, 150.0),
    "spinwave_center": (_NUM, 0.5),
    "spinwave_width": (_NUM, 0.08),
    "omega_hold_plus": (_NUM, 1.0),
    "omega_hold_minus": (_NUM, 1.0),
    "hold": (_NUM, 50.0),
    "omega_recall": (_NUM, 1.0),
    "snapshot_stride": (_INT, 20),
    "svg": (_BOOL, False),
}

_RAMAN = {
    "omega": (_NUM, 1.0),
    "delta": (_NUM, 50.0),
    "hold": (_NUM, 100.0),
    "centers": (_LIST, [0.3, 0.7]),
    "width": (_NUM, 0.07),
    "engine": (_STR, "reduced", ("reduced", "mbe")),
    "samples": (_INT, 101),
    "svg": (_BOOL, False),
}

SCENARIO_SCHEMAS: dict = {
    "slow-light": {
        "pulse_center": (_NUM, 100.0),
        "pulse_duration": (_NUM, 50.0),
        "pulse_amplitude": (_NUM, 1.0),
        "snapshot_stride": (_INT, 20),
        "svg": (_BOOL, False),
    },
    "stored-light": {
        "pulse_center": (_NUM, 100.0),
        "pulse_duration": (_NUM, 50.0),
        "pulse_amplitude": (_NUM, 1.0),
        "omega": (_NUM, 1.0),
        "write_end": (_NUM, 150.0),
        "hold": (_NUM, 50.0),
        "snapshot_stride": (_INT, 20),
        "svg": (_BOOL, False),
    },
    "eit-sl-single-colour": dict(_PROTOCOL, n_max=(_INT, 3), exponent=(_INT, 2)),
    "eit-sl-two-colour": dict(_PROTOCOL),
    "raman-sl-antisymmetric": dict(_RAMAN),
    "raman-sl-symmetric": dict(_RAMAN),
    "hoc-degenerate": {
        "omega": (_NUM, 1.0),
        "hold": (_NUM, 10.0),
        "spinwave_center": (_NUM, 0.5),
        "spinwave_width": (_NUM, 0.15),
        "n_max": (_INT, 3),
        "exponent": (_INT, 2),
        "snapshot_stride": (_INT, 4),
    },
    "bandgap-scan": {
        "delta_min": (_NUM, -10.0),
        "delta_max": (_NUM, 10.0),
        "points": (_INT, 2001),
        "drive_side": (_STR, "forward", ("forward", "backward")),
        "svg": (_BOOL, False),
    },
    "eit-width-scan": {
        "omegas": (_LIST, [0.5, 0.7071067811865476, 1.0, 1.4142135623730951, 2.0]),
        "points": (_INT, 4001),
        "span": (_NUM, 4.0),
    },
    "mismatch-sweep": {
        "model": (_STR, "eit", ("eit", "raman")),
        "values": (_LIST, [-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0]),
        "omega": (_NUM, 1.0),
        "delta": (_NUM, 50.0),
        "hold": (_NUM, 50.0),
        "spinwave_center": (_NUM, 0.5),
        "spinwave_width": (_NUM, 0.08),
        "centers": (_LIST, [0.3, 0.7]),
        "width": (_NUM, 0.07),
    },
}

SCENARIOS = tuple(SCENARIO_SCHEMAS)


@dataclass(frozen=True)
class ScenarioDescriptor:
    name: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in SCENARIO_SCHEMAS:
            raise ConfigValidationError(
                "scenario.name", f"unknown scenario {self.name!r}; supported: {', '.join(SCENARIOS)}"
            )
        object.__setattr__(self, "parameters", _check_parameters(self.name, dict(self.parameters)))

    def get(self, key):
        """Parameter value with the scenario default filled in."""
        if key in self.parameters:
            return self.parameters[key]
        return copy.deepcopy(SCENARIO_SCHEMAS[self.name][key][1])

    def resolved(self) -> dict:
        return {k: self.get(k) for k in SCENARIO_SCHEMAS[self.name]}


@dataclass(frozen=True)
class Config:
    ensemble: EnsembleConfig
    grid: SimulationGrid
    controls: ControlSchedule
    scenario: ScenarioDescriptor

    def __iter__(self):
        return iter((self.ensemble, self.grid, self.controls, self.scenario))


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _number(v, key) -> float:
    if not _is_number(v):
        raise ConfigValidationError(key, f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigRangeError(key, "must be finite")
    return v


def _check_parameters(name: str, params: dict) -> dict:
    schema = SCENARIO_SCHEMAS[name]
    out = {}
    for key, value in params.items():
        path = f"scenario.parameters.{key}"
        if key not in schema:
            raise ConfigValidationError(path, f"not a parameter of {name!r}; expected one of {sorted(schema)}")
        kind = schema[key][0]
        if kind == _NUM:
            out[key] = _number(value, path)
        elif kind == _INT:
            if not (isinstance(value, int) and not isinstance(value, bool)):
                raise ConfigValidationError(path, f"expected an integer, got {value!r}")
            out[key] = value
        elif kind == _BOOL:
            if not isinstance(value, bool):
                raise ConfigValidationError(path, f"expected true/false, got {value!r}")
            out[key] = value
        elif kind == _STR:
            choices = schema[key][2]
            if value not in choices:
                raise ConfigValidationError(path, f"expected one of {list(choices)}, got {value!r}")
            out[key] = value
        elif kind == _LIST:
            if not isinstance(value, list):
                raise ConfigValidationError(path, f"expected a list of numbers, got {value!r}")
            out[key] = [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]
    return out


def _section(doc: dict, name: str, allowed) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigValidationError(name, "must be an object")
    for key in sec:
        if key not in allowed:
            raise ConfigValidationError(f"{name}.{key}", f"unknown key; expected one of {sorted(allowed)}")
    return sec


def _waveform(value, key) -> Waveform:
    if _is_number(value):
        return Waveform.constant(_number(value, key))
    kind = "constant"
    points = value
    if isinstance(value, dict):
        for k in value:
            if k not in ("kind", "breakpoints"):
                raise ConfigValidationError(f"{key}.{k}", "unknown key; expected 'kind' or 'breakpoints'")
        kind = value.get("kind", "constant")
        if kind not in Waveform.KINDS:
            raise ConfigValidationError(f"{key}.kind", f"expected one of {list(Waveform.KINDS)}")
        points = value.get("breakpoints")
    if not isinstance(points, list) or not points:
        raise ConfigValidationError(key, "expected a number or a non-empty list of [t, re, im] breakpoints")
    times, values = [], []
    for i, bp in enumerate(points):
        if not (isinstance(bp, list) and len(bp) == 3):
            raise ConfigValidationError(f"{key}[{i}]", "breakpoint must be [t, re, im]")
        t, re, im = (_number(v, f"{key}[{i}]") for v in bp)
        times.append(t)
        values.append(complex(re, im))
    if any(b < a for a, b in zip(times, times[1:])):
        raise ConfigRangeError(key, "breakpoint times must be non-decreasing")
    return Waveform(times, values, kind)


def parse_document(doc) -> Config:
    if not isinstance(doc, dict):
        raise ConfigValidationError("<root>", "configuration must be a JSON object")
    for key in doc:
        if key not in ("grid", "ensemble", "controls", "scenario"):
            raise ConfigValidationError(key, "unknown top-level key")

    ens = _section(doc, "ensemble", ("d", "gamma", "gamma_motion", "L_over_c_check"))
    if "d" not in ens:
        raise ConfigValidationError("ensemble.d", "required")
    ensemble = EnsembleConfig(**{k: _number(v, f"ensemble.{k}") for k, v in ens.items()})

    g = _section(doc, "grid", ("n_xi", "dt", "t_final"))
    kwargs = {}
    if "n_xi" in g:
        if not (isinstance(g["n_xi"], int) and not isinstance(g["n_xi"], bool)):
            raise ConfigValidationError("grid.n_xi", "expected an integer")
        kwargs["n_xi"] = g["n_xi"]
    for k in ("dt", "t_final"):
        if k in g:
            kwargs[k] = _number(g[k], f"grid.{k}")
    grid = SimulationGrid(**kwargs)

    c = _section(
        doc,
        "controls",
        ("omega_plus", "omega_minus", "delta_plus", "delta_minus", "two_photon_delta", "mismatch"),
    )
    ckw = {}
    for k in ("omega_plus", "omega_minus"):
        if k in c:
            ckw[k] = _waveform(c[k], f"controls.{k}")
    for k in ("delta_plus", "delta_minus", "two_photon_delta", "mismatch"):
        if k in c:
            ckw[k] = _number(c[k], f"controls.{k}")
    controls = ControlSchedule(**ckw)

    s = _section(doc, "scenario", ("name", "parameters"))
    name = s.get("name", "slow-light")
    if not isinstance(name, str):
        raise ConfigValidationError("scenario.name", "expected a string")
    params = s.get("parameters", {})
    if not isinstance(params, dict):
        raise ConfigValidationError("scenario.parameters", "must be an object")
    scenario = ScenarioDescriptor(name, params)
    return Config(ensemble, grid, controls, scenario)


def parse_config(text: str) -> Config:
    """Parse and validate a JSON document; returns ``(ensemble, grid, controls, scenario)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigValidationError("<document>", f"invalid JSON: {exc}") from None
    return parse_document(doc)


def _waveform_doc(w: Waveform):
    return {"kind": w.kind, "breakpoints": w.to_list()}


def to_document(cfg: Config) -> dict:
    e, g, c, s = cfg
    return {
        "grid": {"n_xi": g.n_xi, "dt": g.dt, "t_final": g.t_final},
        "ensemble": {"d": e.d, "gamma": e.gamma, "gamma_motion": e.gamma_motion, "L_over_c_check": e.L_over_c_check},
        "controls": {
            "omega_plus": _waveform_doc(c.omega_plus),
            "omega_minus": _waveform_doc(c.omega_minus),
            "delta_plus": c.delta_plus,
            "delta_minus": c.delta_minus,
            "two_photon_delta": c.two_photon_delta,
            "mismatch": c.mismatch,
        },
        "scenario": {"name": s.name, "parameters": dict(s.parameters)},
    }


def serialize(cfg: Config) -> str:
    return json.dumps(to_document(cfg), indent=2, sort_keys=True)


def set_path(doc: dict, path: str, value) -> dict:
    """Copy of ``doc`` with the dotted ``path`` set to ``value``."""
    doc = copy.deepcopy(doc)
    parts = path.split(".")
    if not parts or parts[0] not in ("grid", "ensemble", "controls", "scenario"):
        raise ConfigValidationError(path, "parameter path must start with grid, ensemble, controls or scenario")
    node = doc
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigValidationError(path, f"{p!r} is not an object")
        node = nxt
    node[parts[-1]] = value
    return doc
