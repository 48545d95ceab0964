"""Preset library, scenario pipelines, sweeps and manifests.

Durations are round numbers in units of ``1/GAMMA``. For orientation only:
with ``GAMMA / 2 pi ~ 6 MHz`` one microsecond is about 36 ``1/GAMMA``.
"""

from __future__ import annotations

import json
import math
import os
import subprocess
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from . import eit, hoc, mbe, raman, spectra
from .config import (
    SCENARIO_SCHEMAS,
    SCENARIOS,
    Config,
    parse_document,
    set_path,
    to_document,
)
from .core import (
    GAMMA,
    ConfigRangeError,
    ConfigValidationError,
    ControlSchedule,
    FieldState,
    ResolutionError,
    SimulationGrid,
    StalightError,
    Waveform,
    gaussian,
    integrate_total,
    spatial_moments,
)
from .output import sha256_file, write_csv, write_svg_lines

PACKAGE_VERSION = "0.1.0"


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def _doc(grid, ensemble, controls, name, parameters=None):
    return {
        "grid": grid,
        "ensemble": ensemble,
        "controls": controls,
        "scenario": {"name": name, "parameters": parameters or {}},
    }


PRESETS = {
    "slow-light": (
        "EIT slow-light transit of a Gaussian pulse (d=100, forward control only)",
        _doc({"n_xi": 256, "dt": 0.25, "t_final": 400.0}, {"d": 100.0}, {"omega_plus": 1.0}, "slow-light"),
    ),
    "stored-light": (
        "Write, store with the control off, then forward recall",
        _doc({"n_xi": 256, "dt": 0.25, "t_final": 500.0}, {"d": 100.0}, {}, "stored-light"),
    ),
    "eit-sl-single-colour": (
        "Write, stationary-light hold with standing-wave controls (ladder model, warm atoms), recall",
        _doc(
            {"n_xi": 256, "dt": 0.25, "t_final": 450.0},
            {"d": 100.0, "gamma_motion": 1000.0},
            {},
            "eit-sl-single-colour",
        ),
    ),
    "eit-sl-two-colour": (
        "Write, stationary-light hold with two-colour controls (secular model), recall",
        _doc({"n_xi": 256, "dt": 0.25, "t_final": 450.0}, {"d": 100.0}, {}, "eit-sl-two-colour"),
    ),
    "raman-sl-antisymmetric": (
        "Raman stationary light from two opposite-sign spinwave lobes (stationary)",
        _doc({"n_xi": 256, "dt": 0.25, "t_final": 100.0}, {"d": 100.0}, {}, "raman-sl-antisymmetric"),
    ),
    "raman-sl-symmetric": (
        "Raman stationary light from two same-sign spinwave lobes (mean decays)",
        _doc({"n_xi": 256, "dt": 0.25, "t_final": 100.0}, {"d": 100.0}, {}, "raman-sl-symmetric"),
    ),
    "hoc-degenerate": (
        "Stationary-light hold in cold atoms with standing-wave controls: ladder vs secular leakage",
        _doc({"n_xi": 256, "dt": 0.25, "t_final": 10.0}, {"d": 40.0, "gamma_motion": 0.0}, {}, "hoc-degenerate"),
    ),
    "bandgap-scan": (
        "Transmission/reflection spectrum with balanced resonant controls (d=200)",
        _doc(
            {"n_xi": 256, "dt": 0.25, "t_final": 0.0},
            {"d": 200.0, "gamma": 1e-4},
            {"omega_plus": 40.0, "omega_minus": 40.0},
            "bandgap-scan",
            {"delta_min": -150.0, "delta_max": 150.0, "points": 6001},
        ),
    ),
    "eit-width-scan": (
        "Width of the EIT transparency window against control strength (d=100)",
        _doc({"n_xi": 256, "dt": 0.25, "t_final": 0.0}, {"d": 100.0}, {}, "eit-width-scan"),
    ),
    "mismatch-sweep": (
        "Stationary-light leakage against residual phase mismatch",
        _doc({"n_xi": 256, "dt": 0.25, "t_final": 50.0}, {"d": 100.0}, {}, "mismatch-sweep"),
    ),
}


def preset_document(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigValidationError("scenario.name", f"unknown preset {name!r}; supported: {', '.join(SCENARIOS)}")
    return json.loads(json.dumps(PRESETS[name][1]))


def list_presets():
    return [(name, PRESETS[name][0]) for name in SCENARIOS]


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def version_string() -> str:
    """``v<version>[-g<commit>][-dirty]`` in the style of ``git describe``."""
    base = f"v{PACKAGE_VERSION}"
    here = Path(__file__).resolve().parent
    try:
        sha = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"], cwd=here, capture_output=True, text=True, timeout=5
        )
        if sha.returncode != 0:
            return base
        dirty = subprocess.run(
            ["git", "status", "--porcelain", "--", str(here)], cwd=here, capture_output=True, text=True, timeout=5
        )
        tag = f"{base}-g{sha.stdout.strip()}"
        return tag + ("-dirty" if dirty.stdout.strip() else "")
    except (OSError, subprocess.SubprocessError):
        return base


def _positive(value, key):
    if not value > 0:
        raise ConfigRangeError(f"scenario.parameters.{key}", f"must be > 0, got {value}")


def _nonneg(value, key):
    if not value >= 0:
        raise ConfigRangeError(f"scenario.parameters.{key}", f"must be >= 0, got {value}")


def _clean(metrics: dict) -> dict:
    out = {}
    for k, v in metrics.items():
        if isinstance(v, (bool, str)) or v is None:
            out[k] = v
        elif isinstance(v, (list, tuple)):
            out[k] = [None if not math.isfinite(float(x)) else float(x) for x in v]
        else:
            v = float(v)
            out[k] = v if math.isfinite(v) else None
    return out


def _write_spinwave_samples(samples, xi, out_dir) -> Path:
    rows = ((t, x, v.real, v.imag, abs(v) ** 2) for t, S in samples for x, v in zip(xi, S))
    return write_csv(Path(out_dir) / "spinwave.csv", ["t", "xi", "re_S", "im_S", "abs2_S"], rows)


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------


def _slow_light(cfg: Config, out: Path):
    e, g, c, s = cfg
    p = s.resolved()
    _positive(p["pulse_duration"], "pulse_duration")
    drive = mbe.BoundaryDrive.gaussian_pulse(p["pulse_center"], p["pulse_duration"], p["pulse_amplitude"])
    traj = mbe.run(e, g, c, drive, stride=p["snapshot_stride"])
    files = mbe.write_trajectory_csv(traj, out)
    t = traj.step_times
    w_in = np.abs(traj.boundary_in[0]) ** 2
    w_out = np.abs(traj.boundary_out[0]) ** 2
    delay = float("nan")
    if w_in.sum() > 0 and w_out.sum() > 0:
        delay = float(np.sum(t * w_out) / np.sum(w_out) - np.sum(t * w_in) / np.sum(w_in))
    e_in = traj.input_energy()
    metrics = {
        "input_energy": e_in,
        "transmitted_fraction": traj.output_energy() / e_in if e_in > 0 else float("nan"),
        "delay": delay,
        "max_closure_residual": traj.max_closure_residual(),
    }
    if p["svg"]:
        files.append(
            write_svg_lines(out / "fields_boundary.svg", t, {"in": w_in / max(w_in.max(), 1e-300),
                                                             "out": w_out / max(w_in.max(), 1e-300)}, "probe")
        )
    return files, metrics


def _stored_light(cfg: Config, out: Path):
    e, g, c, s = cfg
    p = s.resolved()
    _positive(p["pulse_duration"], "pulse_duration")
    _nonneg(p["hold"], "hold")
    _positive(p["write_end"], "write_end")
    w, t_off, hold = p["omega"], p["write_end"], p["hold"]
    if hold > 0:
        omega = Waveform([0.0, t_off, t_off + hold], [w, 0.0, w], "constant")
    else:
        omega = Waveform.constant(w)
    ctrl = ControlSchedule(omega, Waveform.constant(0.0), c.delta_plus, c.delta_minus, c.two_photon_delta, c.mismatch)
    drive = mbe.BoundaryDrive.gaussian_pulse(p["pulse_center"], p["pulse_duration"], p["pulse_amplitude"])
    traj = mbe.run(e, g, ctrl, drive, stride=p["snapshot_stride"])
    files = mbe.write_trajectory_csv(traj, out)
    e_in = traj.input_energy()
    if hold == 0:
        # the control is never switched, so there is no write phase to leak from
        t_off = -np.inf
    metrics = {
        "input_energy": e_in,
        "write_leak_fraction": traj.output_energy(-np.inf, t_off) / e_in,
        "hold_leak_fraction": traj.output_energy(t_off, t_off + hold) / e_in,
        "recalled_fraction": traj.output_energy(t_off + hold, np.inf) / e_in,
        "max_closure_residual": traj.max_closure_residual(),
    }
    if p["svg"]:
        t = traj.step_times
        files.append(write_svg_lines(out / "fields_boundary.svg", t, {"out+": np.abs(traj.boundary_out[0]) ** 2},
                                     "forward output"))
    return files, metrics


def _protocol_schedule(c: ControlSchedule, p: dict):
    t_w, hold = p["write_end"], p["hold"]
    tp, vp, vm = [], [], []
    if t_w > 0:
        tp.append(0.0)
        vp.append(p["omega_write"])
        vm.append(0.0)
    tp += [t_w, t_w + hold]
    vp += [p["omega_hold_plus"], p["omega_recall"]]
    vm += [p["omega_hold_minus"], 0.0]
    return ControlSchedule(
        Waveform(tp, vp, "constant"),
        Waveform(tp, vm, "constant"),
        c.delta_plus,
        c.delta_minus,
        c.two_photon_delta,
        c.mismatch,
    )


def _stationary_protocol(cfg: Config, out: Path, engine: str):
    e, g, c, s = cfg
    p = s.resolved()
    _nonneg(p["write_end"], "write_end")
    _nonneg(p["hold"], "hold")
    _positive(p["spinwave_width"], "spinwave_width")
    ctrl = _protocol_schedule(c, p)
    t_w, hold = p["write_end"], p["hold"]
    if g.t_final < t_w + hold:
        raise ConfigRangeError("grid.t_final", "must cover the write and hold phases")
    if t_w > 0:
        drive = mbe.BoundaryDrive.gaussian_pulse(p["pulse_center"], p["pulse_duration"], p["pulse_amplitude"])
        initial = FieldState.zeros(g.n_xi)
    else:
        drive = mbe.BoundaryDrive()
        initial = FieldState.from_spinwave(gaussian(g.xi, p["spinwave_center"], p["spinwave_width"]))
    stride = p["snapshot_stride"]
    if engine == "hoc":
        decay = hoc.HOCDecayModel(e.gamma_motion, p["exponent"])
        traj = hoc.run_hoc(e, g, ctrl, decay, p["n_max"], drive, initial, stride)
    else:
        traj = mbe.run(e, g, ctrl, drive, initial, stride)
    files = mbe.write_trajectory_csv(traj, out)
    book = traj.bookkeeping
    norm = traj.input_energy() if t_w > 0 else book["stored"][0]
    i_hold_end = min(int(round((t_w + hold) / g.dt)), len(book["stored"]) - 1)
    metrics = {
        "normalisation": norm,
        "write_leak_fraction": traj.output_energy(-np.inf, t_w) / norm,
        "hold_leak_fraction": traj.output_energy(t_w, t_w + hold) / norm,
        "stored_after_hold_fraction": book["stored"][i_hold_end] / norm,
        "recalled_fraction": traj.output_energy(t_w + hold, np.inf) / norm,
        "max_closure_residual": traj.max_closure_residual(),
    }
    if engine == "hoc":
        files.append(hoc.write_orders_csv(traj, out))
    else:
        # reduced drift-diffusion model over the hold, seeded with the spinwave at the hold start
        k0 = int(np.argmin(np.abs(traj.times - t_w)))
        S_start = traj.snapshots[k0].S
        angles = eit.mixing_angles(p["omega_hold_plus"], p["omega_hold_minus"], e.d)
        t_hold = max(t_w + hold - traj.times[k0], 0.0)
        n_samples = 21
        samples = list(np.linspace(0.0, t_hold, n_samples))
        _, rec = eit.evolve_diffusion(S_start, angles, e.d, GAMMA, t_hold, samples=samples)
        rec = [(traj.times[k0] + t, S) for t, S in rec]
        files.append(eit.write_moments_csv(rec, out))
        metrics["reduced_hold_centroid_shift"] = spatial_moments(np.abs(rec[-1][1]) ** 2)[0] - spatial_moments(
            np.abs(rec[0][1]) ** 2
        )[0]
    return files, metrics


def _raman_initial(xi, centers, width, antisymmetric):
    S = np.zeros_like(xi, dtype=complex)
    for i, x0 in enumerate(centers):
        sign = (-1) ** i if antisymmetric else 1
        S += sign * gaussian(xi, x0, width)
    return S


def _edge_leak(rec, d, params) -> float:
    """Time integral of the edge flux over ``(t, S)`` samples (Simpson's rule)."""
    times = [t for t, _ in rec]
    flux = [raman.edge_flux(S, d, GAMMA, params) for _, S in rec]
    return float(simpson(flux, x=times))


def _raman(cfg: Config, out: Path, antisymmetric: bool):
    e, g, c, s = cfg
    p = s.resolved()
    _positive(p["hold"], "hold")
    _positive(p["width"], "width")
    if p["samples"] < 2:
        raise ConfigRangeError("scenario.parameters.samples", "must be >= 2")
    if (c.delta_plus or c.delta_minus) and (c.delta_plus, c.delta_minus) != (p["delta"], -p["delta"]):
        raise ConfigValidationError(
            "controls.delta_plus",
            "Raman scenarios take delta+ = delta, delta- = -delta from scenario.parameters.delta; "
            "run a general configuration through the slow-light or two-colour pipelines instead",
        )
    xi = g.xi
    S0 = _raman_initial(xi, p["centers"], p["width"], antisymmetric)
    n0 = float(np.real(integrate_total(np.abs(S0) ** 2)))
    times = list(np.linspace(0.0, p["hold"], p["samples"]))
    if p["engine"] == "reduced":
        params = raman.RamanParams(p["omega"], p["delta"], e.gamma, c.mismatch)
        _, rec = raman.evolve_raman_numeric(S0, e.d, GAMMA, params, p["hold"], samples=times)
        leaked = _edge_leak(rec, e.d, params) / n0
        uniforms = [raman.decompose(S).uniform for _, S in rec]
        files = [_write_spinwave_samples(rec, xi, out), raman.write_components_csv(rec, out)]
        norm_final = float(np.real(integrate_total(np.abs(rec[-1][1]) ** 2)))
        # the reduced model loses norm only through the edges (plus gamma)
        closure = abs(1.0 - norm_final / n0 - leaked) if e.gamma == 0 else float("nan")
    else:
        params = raman.RamanParams(p["omega"], p["delta"], e.gamma, c.mismatch)
        ctrl = ControlSchedule(p["omega"], p["omega"], p["delta"], -p["delta"], c.two_photon_delta, c.mismatch)
        grid = SimulationGrid(g.n_xi, g.dt, p["hold"])
        stride = max(1, int(round(p["hold"] / g.dt / (p["samples"] - 1))))
        traj = mbe.run(e, grid, ctrl, initial=FieldState.from_spinwave(raman.lab_spinwave(S0, e.d, params)), stride=stride)
        # back to the frame co-rotating with the probe dispersion
        rec = [(t, raman.rotating_frame(snap, e.d, params)[0]) for t, snap in zip(traj.times, traj.snapshots)]
        leaked = traj.output_energy() / n0
        uniforms = [raman.decompose(S).uniform for _, S in rec]
        files = mbe.write_trajectory_csv(traj, out) + [raman.write_components_csv(rec, out)]
        norm_final = float(np.real(integrate_total(np.abs(traj.final.S) ** 2)))
        times = [t for t, _ in rec]
        closure = traj.max_closure_residual()
    rate = float("nan")
    if abs(uniforms[0]) > 1e-9 * math.sqrt(n0):
        try:
            rate = raman.fit_decay_rate(times, uniforms)
        except ValueError:
            pass
    metrics = {
        "leaked_fraction": leaked,
        "spinwave_norm_fraction": norm_final / n0,
        "initial_uniform_abs": abs(uniforms[0]),
        "fitted_decay_rate": rate,
        "predicted_decay_rate": raman.RamanParams(p["omega"], p["delta"]).decay_rate(e.d) + e.gamma,
        "max_closure_residual": closure,
    }
    if p.get("svg"):
        files.append(write_svg_lines(out / "spinwave.svg", xi, {"|S(0)|": np.abs(S0) / np.abs(S0).max(),
                                                                 "|S(end)|": np.abs(rec[-1][1]) / np.abs(S0).max()},
                                     "spinwave"))
    return files, metrics


def hoc_leak_study(cfg: Config):
    """Ladder (``n_max`` and ``n_max + 1``) and secular runs of one stationary-light hold."""
    e, g, c, s = cfg
    p = s.resolved()
    _positive(p["hold"], "hold")
    _positive(p["spinwave_width"], "spinwave_width")
    grid = SimulationGrid(g.n_xi, g.dt, p["hold"])
    ctrl = ControlSchedule(p["omega"], p["omega"], c.delta_plus, c.delta_plus, c.two_photon_delta, c.mismatch)
    initial = FieldState.from_spinwave(gaussian(grid.xi, p["spinwave_center"], p["spinwave_width"]))
    decay = hoc.HOCDecayModel(e.gamma_motion, p["exponent"])
    stride = p["snapshot_stride"]
    ladder = hoc.run_hoc(e, grid, ctrl, decay, p["n_max"], initial=initial, stride=stride)
    finer = hoc.run_hoc(e, grid, ctrl, decay, p["n_max"] + 1, initial=initial, stride=stride)
    secular = mbe.run(e, grid, ctrl, initial=initial, stride=stride)
    return ladder, finer, secular


def _hoc_degenerate(cfg: Config, out: Path):
    ladder, finer, secular = hoc_leak_study(cfg)
    norm = ladder.bookkeeping["stored"][0]
    leak = ladder.output_energy() / norm
    sec_leak = secular.output_energy() / norm
    files = mbe.write_trajectory_csv(ladder, out) + [hoc.write_orders_csv(ladder, out)]
    metrics = {
        "leaked_fraction": leak,
        "secular_leaked_fraction": sec_leak,
        "leak_ratio": leak / sec_leak if sec_leak > 0 else float("nan"),
        "stored_fraction": ladder.bookkeeping["stored"][-1] / norm,
        "secular_stored_fraction": secular.bookkeeping["stored"][-1] / norm,
        "truncation_difference": hoc.truncation_check(ladder, finer),
        "max_closure_residual": max(ladder.max_closure_residual(), secular.max_closure_residual()),
    }
    return files, metrics


def offresonant_peaks(spec: spectra.SpectrumResult, exclude: float = 0.0):
    """Local maxima of ``T`` at ``|delta| > exclude`` as ``(delta, T)`` pairs."""
    T, dg = spec.T, spec.delta_grid
    idx = [i for i in range(1, len(T) - 1) if T[i] > T[i - 1] and T[i] >= T[i + 1] and abs(dg[i]) > exclude]
    return [(float(dg[i]), float(T[i])) for i in idx]


def _bandgap(cfg: Config, out: Path):
    e, g, c, s = cfg
    p = s.resolved()
    if not p["delta_max"] > p["delta_min"]:
        raise ConfigRangeError("scenario.parameters.delta_max", "must exceed delta_min")
    if p["points"] < 3:
        raise ConfigRangeError("scenario.parameters.points", "must be >= 3")
    grid = np.linspace(p["delta_min"], p["delta_max"], p["points"])
    spec = spectra.steady_state_response(e, c, grid, p["drive_side"])
    files = spectra.write_spectrum_csv(spec, out, svg=p["svg"])
    zero = spectra.steady_state_response(e, c, [0.0], p["drive_side"])
    peaks = offresonant_peaks(spec, exclude=0.0)
    best = max(peaks, key=lambda x: x[1]) if peaks else (float("nan"), float("nan"))
    metrics = {
        "T0": float(zero.T[0]),
        "R0": float(zero.R[0]),
        "bandgap_depth": 1.0 - float(zero.T[0]),
        "peak_T": best[1],
        "peak_delta": best[0],
        "peak_count": len(peaks),
        "min_absorbed": float(np.min(spec.absorbed)),
    }
    return files, metrics


def _eit_width(cfg: Config, out: Path):
    e, g, c, s = cfg
    p = s.resolved()
    if not p["omegas"] or any(w <= 0 for w in p["omegas"]):
        raise ConfigRangeError("scenario.parameters.omegas", "must be a non-empty list of positive amplitudes")
    rows = []
    for w in p["omegas"]:
        c1 = ControlSchedule(w, 0.0, c.delta_plus, c.delta_minus, c.two_photon_delta, 0.0)
        est = w**2 / (GAMMA * math.sqrt(e.d))
        grid = np.linspace(-p["span"] * est, p["span"] * est, p["points"])
        spec = spectra.steady_state_response(e, c1, grid)
        try:
            fwhm = spectra.eit_window_width(spec)
        except ResolutionError:
            fwhm = float("nan")
        rows.append((w, fwhm, est, fwhm / est))
    path = write_csv(out / "eit_width.csv", ["omega", "fwhm", "estimate", "ratio"], rows)
    ws = np.array([r[0] for r in rows])
    fw = np.array([r[1] for r in rows])
    ok = np.isfinite(fw)
    slope = float(np.polyfit(np.log(ws[ok] ** 2), np.log(fw[ok]), 1)[0]) if ok.sum() >= 2 else float("nan")
    metrics = {
        "fwhm": [r[1] for r in rows],
        "ratio_to_estimate": [r[3] for r in rows],
        "loglog_slope_vs_omega_sq": slope,
    }
    return [path], metrics


def mismatch_leakage(e, g: SimulationGrid, c: ControlSchedule, p: dict, delta_k: float):
    """``(leaked, retained)`` fractions of one stationary-light hold with mismatch ``delta_k``."""
    if p["model"] == "eit":
        grid = SimulationGrid(g.n_xi, g.dt, p["hold"])
        ctrl = ControlSchedule(p["omega"], p["omega"], c.delta_plus, c.delta_minus, c.two_photon_delta, delta_k)
        S0 = gaussian(grid.xi, p["spinwave_center"], p["spinwave_width"])
        traj = mbe.run(e, grid, ctrl, initial=FieldState.from_spinwave(S0), stride=max(1, grid.n_steps))
        norm = traj.bookkeeping["stored"][0]
        return traj.output_energy() / norm, traj.bookkeeping["stored"][-1] / norm
    xi = g.xi
    S0 = _raman_initial(xi, p["centers"], p["width"], antisymmetric=True)
    params = raman.RamanParams(p["omega"], p["delta"], e.gamma, delta_k)
    n_s = 201
    times = list(np.linspace(0.0, p["hold"], n_s))
    _, rec = raman.evolve_raman_numeric(S0, e.d, GAMMA, params, p["hold"], samples=times)
    n0 = float(np.real(integrate_total(np.abs(S0) ** 2)))
    leaked = _edge_leak(rec, e.d, params) / n0
    retained = float(np.real(integrate_total(np.abs(rec[-1][1]) ** 2))) / n0
    return leaked, retained


def _mismatch(cfg: Config, out: Path):
    e, g, c, s = cfg
    p = s.resolved()
    _positive(p["hold"], "hold")
    rows = [(q, *mismatch_leakage(e, g, c, p, q)) for q in p["values"]]
    path = write_csv(out / "mismatch.csv", ["delta_k", "leaked_fraction", "retained_fraction"], rows)
    leak = {q: lk for q, lk, _ in rows}
    asym = [abs(leak[q] - leak[-q]) for q in leak if -q in leak]
    by_abs = sorted(leak.items(), key=lambda kv: abs(kv[0]))
    mono = all(b[1] >= a[1] - 1e-12 for a, b in zip(by_abs, by_abs[1:]) if abs(b[0]) > abs(a[0]))
    metrics = {
        "leaked_fraction": [r[1] for r in rows],
        "retained_fraction": [r[2] for r in rows],
        "max_even_asymmetry": max(asym) if asym else float("nan"),
        "non_decreasing_in_abs_delta_k": bool(mono),
    }
    return [path], metrics


PIPELINES = {
    "slow-light": _slow_light,
    "stored-light": _stored_light,
    "eit-sl-single-colour": lambda cfg, out: _stationary_protocol(cfg, out, "hoc"),
    "eit-sl-two-colour": lambda cfg, out: _stationary_protocol(cfg, out, "secular"),
    "raman-sl-antisymmetric": lambda cfg, out: _raman(cfg, out, True),
    "raman-sl-symmetric": lambda cfg, out: _raman(cfg, out, False),
    "hoc-degenerate": _hoc_degenerate,
    "bandgap-scan": _bandgap,
    "eit-width-scan": _eit_width,
    "mismatch-sweep": _mismatch,
}


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def _as_config(config) -> Config:
    if isinstance(config, Config):
        return config
    return parse_document(config)


def write_manifest(out: Path, cfg: Config, files, metrics: dict, extra=None) -> Path:
    out = Path(out)
    entries = []
    for f in sorted({Path(f).resolve() for f in files}):
        entries.append({"path": str(f.relative_to(out.resolve())), "sha256": sha256_file(f)})
    manifest = {
        "version": version_string(),
        "scenario": cfg.scenario.name,
        "config": to_document(cfg),
        "metrics": _clean(metrics),
        "files": entries,
    }
    if extra:
        manifest.update(extra)
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def run_scenario(config, out_dir) -> dict:
    """Run the configured scenario, write its outputs and ``manifest.json``; returns the manifest."""
    cfg = _as_config(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = cfg.scenario.name
    try:
        files, metrics = PIPELINES[name](cfg, out)
    except StalightError as exc:
        if not getattr(exc, "scenario", None):
            exc.scenario = name
            exc.args = (f"scenario {name!r}: {exc}",)
        raise
    path = write_manifest(out, cfg, files, metrics)
    return json.loads(path.read_text())


def run_scan(config, out_dir) -> dict:
    """Spectrum of the configured medium and constant controls (``bandgap-scan`` pipeline)."""
    cfg = _as_config(config)
    if cfg.scenario.name != "bandgap-scan":
        doc = to_document(cfg)
        doc["scenario"] = {"name": "bandgap-scan", "parameters": {}}
        cfg = parse_document(doc)
    return run_scenario(cfg, out_dir)


def _check_sweep_path(doc: dict, path: str):
    parts = path.split(".")
    known = {
        "grid": ("n_xi", "dt", "t_final"),
        "ensemble": ("d", "gamma", "gamma_motion", "L_over_c_check"),
        "controls": ("omega_plus", "omega_minus", "delta_plus", "delta_minus", "two_photon_delta", "mismatch"),
    }
    if len(parts) == 2 and parts[1] in known.get(parts[0], ()):
        return
    if len(parts) == 3 and parts[:2] == ["scenario", "parameters"]:
        name = doc.get("scenario", {}).get("name", "slow-light")
        if name in SCENARIO_SCHEMAS and parts[2] in SCENARIO_SCHEMAS[name]:
            return
    raise ConfigValidationError(path, "parameter path does not resolve in the scenario schema")


def _sweep_point(args):
    index, doc, out_dir = args
    try:
        manifest = run_scenario(doc, out_dir)
        return index, "ok", "", manifest["metrics"]
    except StalightError as exc:
        return index, "error", f"{type(exc).__name__}: {exc}", {}
    except (ValueError, ArithmeticError, OSError) as exc:
        return index, "error", f"{type(exc).__name__}: {exc}", {}


def worker_limit(jobs: int) -> int:
    jobs = max(1, int(jobs))
    cap = os.environ.get("STALIGHT_THREADS")
    if cap:
        try:
            jobs = min(jobs, max(1, int(cap)))
        except ValueError:
            raise ConfigValidationError("STALIGHT_THREADS", f"expected an integer, got {cap!r}") from None
    return jobs


def sweep(config_doc: dict, path: str, values, jobs: int, out_dir) -> Path:
    """Run one scenario per value of ``path``; writes ``sweep.csv`` in input order."""
    if isinstance(config_doc, Config):
        config_doc = to_document(config_doc)
    parse_document(config_doc)
    _check_sweep_path(config_doc, path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = []
    for i, v in enumerate(values):
        tasks.append((i, set_path(config_doc, path, v), str(out / f"point_{i:03d}")))
    workers = worker_limit(jobs)
    if workers == 1 or len(tasks) <= 1:
        results = [_sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, tasks))
    results.sort(key=lambda r: r[0])
    keys = sorted({k for _, _, _, m in results for k, v in m.items() if not isinstance(v, list)})
    header = ["index", "value", "status", "error"] + keys
    rows = []
    for (i, status, err, m), v in zip(results, values):
        row = [i, v, status, err]
        for k in keys:
            x = m.get(k)
            row.append("" if x is None else (str(x).lower() if isinstance(x, bool) else float(x)))
        rows.append(row)
    return write_csv(out / "sweep.csv", header, rows)
