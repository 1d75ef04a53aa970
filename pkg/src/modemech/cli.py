"""Scenario-driven command line front end.

Usage:
    modemech run --config cfg.json [--out DIR] [--threads N] [--seed S]
    modemech validate --config cfg.json

Configs are JSON with explicit SI units in the field names
(``wavelength_m``, ``photon_flux_per_s``, ...). Scenarios form a closed
set: coupling-scan, spectrum, dgcz-map, camera-ideality, mc-validate.
Each run writes CSV data plus a JSON report embedding the fully resolved
config, its hash, and the seeds, so outputs are reproducible
byte-for-byte (the timestamp lives only in the report metadata).

Exit codes: 0 success, 1 config error, 2 numerical failure
(degenerate configuration, aliasing, unconverged Monte Carlo).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .constants import HBAR
from .coupling import DegenerateCouplingError, beam_scan, couple_beam
from .fields import (
    AliasingError,
    Grid2D,
    MembraneModeShape,
    SinusoidalMode,
    TiltMode,
    far_field,
    hg_mode,
)
from .mc_oracle import (
    McRunParams,
    force_series,
    psd_estimate,
    simulate_arrivals,
    validate_backaction,
)
from .mechanics import OscillatorParams
from .receivers import (
    CameraConfig,
    NoInformationError,
    camera_forward_model,
    ideality_kappa,
    wls_estimate,
)
from .spectra import (
    IlluminationParams,
    apparent_displacement_psd,
    backaction_force_psd,
    dgcz_criterion,
    quadrature_cross_spectrum,
    resonance_omega_grid,
)

SCENARIOS = ("coupling-scan", "spectrum", "dgcz-map", "camera-ideality", "mc-validate")
THREADS_ENV = "MODEMECH_THREADS"


# --------------------------------------------------------------------------
# config validation: collect every problem, fill documented defaults


class _Validator:
    def __init__(self, raw: dict):
        self.raw = raw
        self.resolved: dict = {}
        self.errors: list[str] = []

    def _lookup(self, path: str):
        node = self.raw
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                return None, False
            node = node[part]
        return node, True

    def _store(self, path: str, value):
        node = self.resolved
        parts = path.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    def value(
        self,
        path: str,
        kind,
        required: bool = False,
        default=None,
        positive: bool = False,
        nonnegative: bool = False,
    ):
        val, found = self._lookup(path)
        if not found:
            if required:
                self.errors.append(f"{path}: missing required field")
                return None
            val = default
        if val is None:
            self._store(path, None)
            return None
        if kind is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                self.errors.append(f"{path}: expected a number, got {val!r}")
                return None
            val = float(val)
        elif kind is int:
            if isinstance(val, bool) or not isinstance(val, int):
                self.errors.append(f"{path}: expected an integer, got {val!r}")
                return None
        elif kind is str:
            if not isinstance(val, str):
                self.errors.append(f"{path}: expected a string, got {val!r}")
                return None
        elif kind is list:
            if not isinstance(val, (list, tuple)):
                self.errors.append(f"{path}: expected a list, got {val!r}")
                return None
            val = list(val)
        if positive and isinstance(val, (int, float)) and val <= 0:
            self.errors.append(f"{path}: must be positive, got {val!r}")
            return None
        if nonnegative and isinstance(val, (int, float)) and val < 0:
            self.errors.append(f"{path}: must be >= 0, got {val!r}")
            return None
        self._store(path, val)
        return val

    def choice(self, path: str, options, required: bool = False, default=None):
        val = self.value(path, str, required=required, default=default)
        if val is not None and val not in options:
            self.errors.append(f"{path}: {val!r} not in {sorted(options)}")
            return None
        return val

    def number_list(self, path: str, length=None, required: bool = False, default=None):
        val = self.value(path, list, required=required, default=default)
        if val is None:
            return None
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in val):
            self.errors.append(f"{path}: expected numbers")
            return None
        if length is not None and len(val) != length:
            self.errors.append(f"{path}: expected {length} entries, got {len(val)}")
            return None
        val = [float(v) for v in val]
        self._store(path, val)
        return val


def _validate_membrane(v: _Validator, allow_uniform: bool = False):
    kinds = {"cosine", "tilt"} | ({"uniform"} if allow_uniform else set())
    kind = v.choice("membrane.kind", kinds, required=True)
    if kind in ("cosine", "tilt"):
        v.value("membrane.nodal_spacing_m", float, required=True, positive=True)
    else:
        v.value("membrane.nodal_spacing_m", float, default=1.0, positive=True)
    if kind == "tilt":
        v.choice("membrane.axis", {"x", "y"}, default="x")


def _validate_beam(v: _Validator):
    v.value("beam.waist_m", float, required=True, positive=True)
    v.number_list("beam.center_m", length=2, default=[0.0, 0.0])


def _validate_grid(v: _Validator):
    v.value("grid.half_span_m", float, default=None, positive=True)
    v.value("grid.n", int, default=512)
    n = v.resolved.get("grid", {}).get("n")
    if isinstance(n, int) and n < 2:
        v.errors.append("grid.n: must be >= 2")


def _validate_oscillator(v: _Validator):
    v.value("oscillator.omega_m_rad_per_s", float, required=True, positive=True)
    v.value("oscillator.mass_kg", float, required=True, positive=True)
    v.value("oscillator.gamma_m_rad_per_s", float, required=True, positive=True)
    v.value("oscillator.temperature_K", float, default=0.0, nonnegative=True)


def _validate_omega_grid(v: _Validator):
    v.value("omega_grid.n_per_side", int, default=400)
    v.value("omega_grid.span_linewidths", float, default=1e4, positive=True)


def validate_config(raw_text: str):
    """Parse and validate a config, collecting all diagnostics.

    Returns (resolved_config, errors); the resolved config echoes every
    applied default and is None when errors exist.
    """
    try:
        raw = json.loads(raw_text)
    except json.JSONDecodeError as exc:
        return None, [f"config is not valid JSON: {exc}"]
    if not isinstance(raw, dict):
        return None, ["config must be a JSON object"]
    v = _Validator(raw)
    scenario = v.choice("scenario", SCENARIOS, required=True)
    v.value("output_prefix", str, default=scenario or "run")

    if scenario == "coupling-scan":
        _validate_membrane(v)
        _validate_grid(v)
        v.value("max_order", int, default=20)
        v.number_list("scan.x0_range_m", length=2, required=True)
        v.value("scan.n_x0", int, required=True)
        n_x0 = v.resolved.get("scan", {}).get("n_x0")
        if isinstance(n_x0, int) and n_x0 < 2:
            v.errors.append("scan.n_x0: must be >= 2")
        v.value("scan.y0_m", float, default=0.0)
        v.number_list("scan.w0_values_m", required=True)
        w0s = v.resolved.get("scan", {}).get("w0_values_m")
        if w0s is not None and any(w <= 0 for w in w0s):
            v.errors.append("scan.w0_values_m: waists must be positive")
    elif scenario == "spectrum":
        v.value("wavelength_m", float, required=True, positive=True)
        v.value("photon_flux_per_s", float, required=True, positive=True)
        v.value("quadrature_angle_rad", float, default=math.pi / 2)
        _validate_membrane(v, allow_uniform=True)
        _validate_beam(v)
        _validate_grid(v)
        v.value("max_order", int, default=20)
        _validate_oscillator(v)
        _validate_omega_grid(v)
    elif scenario == "dgcz-map":
        v.value("wavelength_m", float, required=True, positive=True)
        v.value("photon_flux_per_s", float, required=True, positive=True)
        v.value("beta_bar", float, required=True, positive=True)
        _validate_oscillator(v)
        _validate_omega_grid(v)
        thetas = v.number_list("theta_values_rad", required=True)
        if thetas is not None and any(not 0 < t <= math.pi for t in thetas):
            v.errors.append("theta_values_rad: angles must lie in (0, pi]")
    elif scenario == "camera-ideality":
        v.value("wavelength_m", float, required=True, positive=True)
        v.value("photon_flux_per_s", float, default=1e16, positive=True)
        _validate_membrane(v, allow_uniform=True)
        _validate_beam(v)
        _validate_grid(v)
        v.value("max_order", int, default=20)
        v.value("camera.distance_m", float, required=True, positive=True)
        v.value("camera.pixel_size_factor", int, default=1)
        f = v.resolved.get("camera", {}).get("pixel_size_factor")
        if isinstance(f, int) and f < 1:
            v.errors.append("camera.pixel_size_factor: must be >= 1")
        v.value("camera.efficiency", float, default=1.0, positive=True)
        v.value("camera.bandwidth_hz", float, default=1.0, positive=True)
        # large enough that i - i_mean does not lose precision, still k z0 << 1
        v.value("camera.test_displacement_m", float, default=1e-10, positive=True)
    elif scenario == "mc-validate":
        v.value("wavelength_m", float, required=True, positive=True)
        v.value("photon_flux_per_s", float, required=True, positive=True)
        _validate_membrane(v, allow_uniform=True)
        _validate_beam(v)
        _validate_grid(v)
        v.value("mc.dt_s", float, required=True, positive=True)
        v.value("mc.n_bins", int, required=True)
        v.value("mc.seed", int, default=12345)
        v.value("mc.segment_length", int, default=256)
        v.value("mc.n_chunks", int, default=8)
        v.value("mc.tolerance", float, default=0.05, positive=True)

    if v.errors:
        return None, v.errors
    return v.resolved, []


# --------------------------------------------------------------------------
# scenario execution


def _make_membrane(cfg: dict, grid: Grid2D) -> MembraneModeShape:
    mcfg = cfg["membrane"]
    lam = mcfg["nodal_spacing_m"]
    if mcfg["kind"] == "cosine":
        return MembraneModeShape.from_descriptor(SinusoidalMode(lam), grid)
    if mcfg["kind"] == "tilt":
        return MembraneModeShape.from_descriptor(
            TiltMode(lam, mcfg.get("axis", "x")), grid
        )
    return MembraneModeShape.from_descriptor(SinusoidalMode(lam, j=0, k=0), grid)


def _make_grid(cfg: dict, w0: float) -> Grid2D:
    half = cfg["grid"]["half_span_m"]
    if half is None:
        scale = w0
        mcfg = cfg["membrane"]
        # a uniform membrane has no length scale of its own
        if mcfg["kind"] in ("cosine", "tilt"):
            scale = max(w0, mcfg["nodal_spacing_m"])
        half = 4.0 * scale
    n = cfg["grid"]["n"]
    return Grid2D(-half, half, -half, half, n, n)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path: str, header: list[str], rows, meta: list[str]) -> None:
    # '#' metadata lines carry provenance (tool version, config hash, the
    # full resolved config); the mandatory column header follows them
    with open(path, "w", newline="") as f:
        for line in meta:
            f.write(f"# {line}\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
    if isinstance(obj, np.generic):
        return _json_safe(obj.item())
    return obj


def _run_coupling_scan(cfg: dict, out_dir: str, meta: list[str]) -> tuple[dict, list[str]]:
    w0s = cfg["scan"]["w0_values_m"]
    grid = _make_grid(cfg, max(w0s))
    phi = _make_membrane(cfg, grid)
    x0 = np.linspace(cfg["scan"]["x0_range_m"][0], cfg["scan"]["x0_range_m"][1], cfg["scan"]["n_x0"])
    max_order = cfg["max_order"]
    sets = beam_scan(x0, np.asarray(w0s), cfg["scan"]["y0_m"], phi, max_order)
    header = ["w0_m", "x0_m", "y0_m", "beta", "beta_par", "beta_perp", "parseval_residual"]
    header += [f"beta_{m}_{n}" for m in range(max_order + 1) for n in range(max_order + 1)]
    rows = []
    for cs in sets:
        rows.append(
            [cs.config["w0"], cs.config["x0"], cs.config["y0"], cs.beta, cs.beta_par,
             cs.beta_perp, cs.parseval_residual]
            + [float(b.real) for b in cs.beta_mn.ravel()]
        )
    path = os.path.join(out_dir, f"{cfg['output_prefix']}.csv")
    _write_csv(path, header, rows, meta)
    prod = [cs.beta_par * cs.beta_perp for cs in sets]
    results = {
        "n_points": len(sets),
        "max_beta_par_beta_perp": max(prod),
        "min_beta": min(cs.beta for cs in sets),
        "max_beta": max(cs.beta for cs in sets),
    }
    return results, [path]


def _run_spectrum(cfg: dict, out_dir: str, meta: list[str]) -> tuple[dict, list[str]]:
    grid = _make_grid(cfg, cfg["beam"]["waist_m"])
    phi = _make_membrane(cfg, grid)
    cs = couple_beam(cfg["beam"]["waist_m"], tuple(cfg["beam"]["center_m"]), phi, cfg["max_order"])
    ill = IlluminationParams(
        cfg["wavelength_m"], cfg["photon_flux_per_s"], cfg["quadrature_angle_rad"]
    )
    osc = _make_oscillator(cfg)
    omega = resonance_omega_grid(
        osc, cfg["omega_grid"]["n_per_side"], cfg["omega_grid"]["span_linewidths"]
    )
    spec = apparent_displacement_psd(ill, cs.beta, osc, omega)
    xy = quadrature_cross_spectrum(ill, cs.beta, osc, omega)
    total = spec.total
    header = ["omega_rad_per_s", "s_imp_m2_per_hz", "s_ba_m2_per_hz", "s_th_m2_per_hz",
              "s_imp_ba_m2_per_hz", "s_total_m2_per_hz", "re_s_xy_per_hz", "im_s_xy_per_hz"]
    rows = zip(
        omega, spec.imp.values, spec.ba.values, spec.th.values, spec.imp_ba.values,
        total.values, xy.values.real, xy.values.imag,
    )
    path = os.path.join(out_dir, f"{cfg['output_prefix']}.csv")
    _write_csv(path, header, rows, meta)
    i_peak = int(np.argmax(total.values))
    results = {
        "beta": cs.beta,
        "beta_par": cs.beta_par,
        "beta_perp": cs.beta_perp,
        "s_f_ba": backaction_force_psd(ill, cs.beta),
        "peak_omega_rad_per_s": float(omega[i_peak]),
        "peak_s_total": float(total.values[i_peak]),
    }
    return results, [path]


def _make_oscillator(cfg: dict) -> OscillatorParams:
    o = cfg["oscillator"]
    return OscillatorParams(
        o["omega_m_rad_per_s"], o["mass_kg"], o["gamma_m_rad_per_s"], o["temperature_K"]
    )


def _run_dgcz_map(cfg: dict, out_dir: str, meta: list[str]) -> tuple[dict, list[str]]:
    osc = _make_oscillator(cfg)
    omega = resonance_omega_grid(
        osc, cfg["omega_grid"]["n_per_side"], cfg["omega_grid"]["span_linewidths"]
    )
    rows = []
    summary = []
    for theta in cfg["theta_values_rad"]:
        ill = IlluminationParams(cfg["wavelength_m"], cfg["photon_flux_per_s"], theta)
        series = dgcz_criterion(ill, cfg["beta_bar"], osc, omega)
        rows.extend([theta, om, val] for om, val in zip(omega, series.values))
        i_min = int(np.argmin(series.values))
        summary.append(
            {
                "theta_rad": theta,
                "min_I": float(series.values[i_min]),
                "omega_at_min_rad_per_s": float(omega[i_min]),
                "entangled": bool(series.values[i_min] < 1.0),
            }
        )
    path = os.path.join(out_dir, f"{cfg['output_prefix']}.csv")
    _write_csv(path, ["theta_rad", "omega_rad_per_s", "I"], rows, meta)
    return {"per_theta": summary}, [path]


def _run_camera_ideality(cfg: dict, out_dir: str, meta: list[str]) -> tuple[dict, list[str]]:
    grid = _make_grid(cfg, cfg["beam"]["waist_m"])
    phi = _make_membrane(cfg, grid)
    cs = couple_beam(cfg["beam"]["waist_m"], tuple(cfg["beam"]["center_m"]), phi, cfg["max_order"])
    u_in = hg_mode(0, 0, cfg["beam"]["waist_m"], tuple(cfg["beam"]["center_m"]), grid)
    lam = cfg["wavelength_m"]
    d = cfg["camera"]["distance_m"]
    kappa = ideality_kappa(u_in, cs.u_sc, cs.beta_par, cs.beta_perp, cs.beta, lam, d)
    kappa_direct = ideality_kappa(
        u_in, cs.u_sc, cs.beta_par, cs.beta_perp, cs.beta, lam, d, form="direct"
    )
    if cs.beta_perp > 0:
        kappa_orth = ideality_kappa(
            u_in, cs.u_sc, cs.beta_par, cs.beta_perp, cs.beta, lam, d, form="orthogonal"
        )
    else:
        kappa_orth = math.inf

    ill = IlluminationParams(lam, cfg["photon_flux_per_s"])
    uf_in = far_field(u_in, lam, d)
    uf_sc = far_field(cs.u_sc, lam, d)
    cam = CameraConfig(
        distance=d,
        pixel_size=cfg["camera"]["pixel_size_factor"] * uf_in.grid.dx,
        xi=cfg["camera"]["efficiency"],
        bandwidth=cfg["camera"]["bandwidth_hz"],
    )
    model = camera_forward_model(cam, uf_in, uf_sc, ill, cs.beta)
    z0 = cfg["camera"]["test_displacement_m"]
    currents = model.mean_currents + model.deriv_currents * z0
    est = wls_estimate(cam, model.mean_currents, model.deriv_currents, currents)
    wls_ideality = (
        est.s_z_imp * backaction_force_psd(ill, cs.beta) / HBAR**2 * cam.xi
    )
    results = {
        "beta": cs.beta,
        "beta_par": cs.beta_par,
        "beta_perp": cs.beta_perp,
        "kappa": kappa,
        "kappa_direct": kappa_direct,
        "kappa_orthogonal": kappa_orth,
        "wls_ideality": wls_ideality,
        "wls_z_relative_error": (est.z_est - z0) / z0,
        "pixel_size_m": cam.pixel_size,
    }
    return results, []


def _run_mc_validate(cfg: dict, out_dir: str, meta: list[str], seed_override) -> tuple[dict, list[str]]:
    grid = _make_grid(cfg, cfg["beam"]["waist_m"])
    phi = _make_membrane(cfg, grid)
    u_in = hg_mode(0, 0, cfg["beam"]["waist_m"], tuple(cfg["beam"]["center_m"]), grid)
    ill = IlluminationParams(cfg["wavelength_m"], cfg["photon_flux_per_s"])
    seed = cfg["mc"]["seed"] if seed_override is None else seed_override
    run = McRunParams(
        dt=cfg["mc"]["dt_s"],
        n_bins=cfg["mc"]["n_bins"],
        seed=seed,
        segment_length=cfg["mc"]["segment_length"],
        n_chunks=cfg["mc"]["n_chunks"],
        tolerance=cfg["mc"]["tolerance"],
    )
    report = validate_backaction(u_in, phi, ill, run)
    # same seed reproduces the batch bit-identically; rerun for the PSD export
    batch = simulate_arrivals(u_in, ill.photon_flux, run.n_bins * run.dt, run.dt, seed)
    spectrum = psd_estimate(force_series(batch, phi, ill.k), run.segment_length)
    path = os.path.join(out_dir, f"{cfg['output_prefix']}_psd.csv")
    _write_csv(
        path,
        ["omega_rad_per_s", "s_f_n2_per_hz"],
        zip(spectrum.omega, spectrum.values),
        meta,
    )
    return report.to_dict(), [path]


def run_scenario(cfg: dict, out_dir: str, seed_override=None, threads=None) -> int:
    """Execute a validated config; returns the process exit code."""
    os.makedirs(out_dir, exist_ok=True)
    scenario = cfg["scenario"]
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    config_hash = hashlib.sha256(canon.encode()).hexdigest()[:16]
    meta = [
        f"modemech {__version__} scenario={scenario} config_hash={config_hash} "
        f"seed_override={seed_override}",
        f"config={canon}",
    ]
    try:
        if scenario == "coupling-scan":
            results, files = _run_coupling_scan(cfg, out_dir, meta)
        elif scenario == "spectrum":
            results, files = _run_spectrum(cfg, out_dir, meta)
        elif scenario == "dgcz-map":
            results, files = _run_dgcz_map(cfg, out_dir, meta)
        elif scenario == "camera-ideality":
            results, files = _run_camera_ideality(cfg, out_dir, meta)
        else:
            results, files = _run_mc_validate(cfg, out_dir, meta, seed_override)
    except (DegenerateCouplingError, AliasingError, NoInformationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2

    report = {
        "tool": "modemech",
        "version": __version__,
        "scenario": scenario,
        "config_hash": config_hash,
        "resolved_config": cfg,
        "seed_override": seed_override,
        "threads": threads,
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": [os.path.basename(f) for f in files],
        "results": _json_safe(results),
    }
    report_path = os.path.join(out_dir, f"{cfg['output_prefix']}_report.json")
    with open(report_path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {report_path}")
    for path in files:
        print(f"wrote {path}")
    if scenario == "mc-validate" and results.get("status") != "pass":
        print(f"mc-validate status: {results.get('status')}", file=sys.stderr)
        return 2
    return 0


def _apply_threads(threads) -> int | None:
    if threads is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        threads = int(env) if env else None
    if threads is None:
        return None
    try:
        import numba

        threads = max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS))
        numba.set_num_threads(threads)
    except ImportError:
        pass
    return threads


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="modemech",
        description="Multimode optomechanical coupling and quantum-noise scenarios",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a scenario config")
    p_run.add_argument("--config", required=True, help="path to a JSON scenario config")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--threads", type=int, default=None, help="numba thread count")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_val = sub.add_parser("validate", help="validate a config without running it")
    p_val.add_argument("--config", required=True)
    args = parser.parse_args(argv)

    try:
        with open(args.config) as f:
            raw_text = f.read()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1
    cfg, errors = validate_config(raw_text)
    if errors:
        for err in errors:
            print(f"config error: {err}", file=sys.stderr)
        return 1
    if args.command == "validate":
        print(json.dumps({"valid": True, "resolved_config": cfg}, indent=2, sort_keys=True))
        return 0
    threads = _apply_threads(args.threads)
    return run_scenario(cfg, args.out, seed_override=args.seed, threads=threads)


if __name__ == "__main__":
    sys.exit(main())
