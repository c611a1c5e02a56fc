"""Batch command-line front end.

Subcommands bind a JSON/flag config to the solver, analysis, sweep, and
time-domain verification modules and emit plot-ready CSV/JSON artifacts.
All CSV output uses 17-significant-digit round-trip formatting and fixed
iteration orders, so identical configs produce byte-identical files.

Exit codes: 0 success; 1 config/usage errors; 2 non-convergence (solve/eig/
impedance, or a sweep with no converged cell); 3 verification tolerance
failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import frequency_scan, hss_eigenvalues, mode_set, weakest_mode
from .cases import case_builder
from .errors import MaxIterationsExceeded, UsageError
from .oracle import compare_waveforms, growth_rate_fit, integrate, \
    kicked_response, last_period
from .solver import SolverConfig, solve_pss
from .spectral import spectrum_to_samples
from .sweep import SweepAxis, SweepSpec, extract_region, run_sweep

_SOLVER_DEFAULTS = {
    "n_harmonics": 4,
    "period": 0.02,
    "step": 5e-5,
    "tolerance": 1e-3,
    "max_iterations": 50,
    "damping": 1.0,
    "cond_limit": 1e12,
}
# The built-in models stack each complex signal with its conjugate, so the
# frequency-coupling (mirror) terms live in the cross-sector entries: probing
# input 0 (voltage) and recording output 1 (conjugate current) puts the
# 2*omega1-offset coupling in the mirror columns of the scan.  The principal
# same-frequency admittance is the (0, 0) pair; select it via the config.
_ANALYSIS_DEFAULTS = {
    "marginal_band": 0.0,
    "frequencies_hz": {"start": 5.0, "stop": 2000.0, "count": 60, "spacing": "log"},
    "output_index": 1,
    "input_index": 0,
}
_PERTURB_DEFAULTS = {"magnitude": 1e-3, "onset_periods": 10.0, "state_index": 0}
_ORACLE_DEFAULTS = {
    "horizon_periods": 25.0,
    "step": 5e-5,
    "tolerance_rms": 0.01,
    "growth_fit": False,
}
_SWEEP_DEFAULTS = {
    "case1": {
        "axis1": {"name": "alpha_pll", "unit": "Hz",
                  "values": {"start": 5.0, "stop": 60.0, "count": 23}},
        "axis2": {"name": "u_gbeta_mag", "unit": "p.u.",
                  "values": {"start": 0.0, "stop": 0.5, "count": 11}},
    },
    "case2": {
        "axis1": {"name": "alpha_c", "unit": "Hz",
                  "values": {"start": 150.0, "stop": 250.0, "count": 11}},
        "axis2": {"name": "k_sym_g", "unit": "",
                  "values": {"start": 1.0, "stop": 3.0, "count": 11}},
    },
}
_TOP_KEYS = ("case", "variant", "set", "solver", "analysis", "sweep", "oracle")


# ---------------------------------------------------------------------------
# config resolution

def _merge(section: str, defaults: dict, given: dict | None) -> dict:
    out = dict(defaults)
    for key, value in (given or {}).items():
        if key not in defaults:
            raise UsageError(f"unknown {section} config key {key!r}")
        out[key] = value
    return out


def _resolve_grid(section: str, spec, default_count: int) -> list:
    """A numeric grid given either as an explicit list or start/stop/count."""
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    if not isinstance(spec, dict):
        raise UsageError(f"{section}: expected a list or start/stop spec")
    allowed = {"start", "stop", "count", "spacing"}
    unknown = set(spec) - allowed
    if unknown:
        raise UsageError(f"unknown {section} key {sorted(unknown)[0]!r}")
    try:
        start, stop = float(spec["start"]), float(spec["stop"])
    except KeyError as exc:
        raise UsageError(f"{section}: missing key {exc.args[0]!r}") from None
    count = int(spec.get("count", default_count))
    spacing = spec.get("spacing", "linear")
    if count < 1:
        raise UsageError(f"{section}: count must be >= 1")
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise UsageError(f"{section}: log spacing needs positive bounds")
        values = np.geomspace(start, stop, count)
    elif spacing == "linear":
        values = np.linspace(start, stop, count)
    else:
        raise UsageError(f"{section}: spacing must be 'linear' or 'log'")
    return [float(v) for v in values]


def _resolve_axis(which: str, given: dict | None, default: dict) -> dict:
    axis = dict(default)
    for key, value in (given or {}).items():
        if key not in ("name", "unit", "values"):
            raise UsageError(f"unknown sweep {which} key {key!r}")
        axis[key] = value
    axis["values"] = _resolve_grid(f"sweep {which} values", axis["values"], 11)
    return axis


def resolve_config(command: str, args) -> dict:
    """Merge defaults, config file, and CLI flags into one resolved dict.

    Precedence: built-in defaults < config file < --case/--set flags.  The
    result is JSON-serializable and re-loadable via --config (round trip).
    """
    file_cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except FileNotFoundError:
            raise UsageError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(file_cfg, dict):
        raise UsageError("config file must hold a JSON object")
    for key in file_cfg:
        if key not in _TOP_KEYS:
            raise UsageError(f"unknown config key {key!r}")

    case = args.case or file_cfg.get("case") or "case1"
    variant = file_cfg.get("variant")
    if variant is None:
        variant = "open_loop" if command == "impedance" else "closed_loop"
    if variant not in ("closed_loop", "open_loop"):
        raise UsageError(f"unknown variant {variant!r}")

    overrides = {}
    for key, value in (file_cfg.get("set") or {}).items():
        try:
            overrides[key] = float(value)
        except (TypeError, ValueError):
            raise UsageError(f"set value for {key!r} is not numeric: {value!r}") from None
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--set expects key=value, got {item!r}")
        try:
            overrides[key] = float(value)
        except ValueError:
            raise UsageError(f"--set value for {key!r} is not numeric: {value!r}") from None

    solver = _merge("solver", _SOLVER_DEFAULTS, file_cfg.get("solver"))
    analysis = _merge("analysis", _ANALYSIS_DEFAULTS, file_cfg.get("analysis"))
    analysis["frequencies_hz"] = _resolve_grid(
        "analysis frequencies_hz", analysis["frequencies_hz"], 60)

    sweep_defaults = _SWEEP_DEFAULTS.get(case)
    sweep_given = file_cfg.get("sweep")
    if sweep_defaults is None and sweep_given is None:
        sweep = None
    else:
        base = sweep_defaults or {"axis1": None, "axis2": None}
        given = sweep_given or {}
        for key in given:
            if key not in ("axis1", "axis2"):
                raise UsageError(f"unknown sweep config key {key!r}")
        axis1_default = base["axis1"] or {}
        axis2_default = base["axis2"] or {}
        if given.get("axis1") is None and not axis1_default:
            raise UsageError("sweep axis1 must be configured for this case")
        if given.get("axis2") is None and not axis2_default:
            raise UsageError("sweep axis2 must be configured for this case")
        sweep = {
            "axis1": _resolve_axis("axis1", given.get("axis1"), axis1_default),
            "axis2": _resolve_axis("axis2", given.get("axis2"), axis2_default),
        }

    oracle_given = dict(file_cfg.get("oracle") or {})
    perturb_given = oracle_given.pop("perturbation", None)
    oracle = _merge("oracle", _ORACLE_DEFAULTS, oracle_given)
    oracle["perturbation"] = _merge("oracle perturbation", _PERTURB_DEFAULTS,
                                    perturb_given)

    return {
        "case": case,
        "variant": variant,
        "set": overrides,
        "solver": solver,
        "analysis": analysis,
        "sweep": sweep,
        "oracle": oracle,
    }


def _builder_for(case: str):
    if case in ("case1", "case2"):
        return case_builder(case)
    path = Path(case)
    if path.suffix == ".py":
        if not path.exists():
            raise UsageError(f"model file not found: {case}")
        import importlib.util
        module_spec = importlib.util.spec_from_file_location(path.stem, path)
        module = importlib.util.module_from_spec(module_spec)
        module_spec.loader.exec_module(module)
        if not hasattr(module, "build"):
            raise UsageError(f"model file {case} defines no build(overrides)")
        return module.build
    raise UsageError(f"unknown case {case!r} (case1, case2, or a .py model file)")


# ---------------------------------------------------------------------------
# artifact writers

def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _labels(model):
    return model.state_labels or tuple(f"x{i}" for i in range(model.n_states))


def _write_spectrum(path: Path, labels, spectrum):
    n = spectrum.n_harmonics
    rows = []
    for i, label in enumerate(labels):
        for k in range(-n, n + 1):
            c = spectrum.coeffs[k + n, i]
            rows.append((label, k, c.real, c.imag))
    _write_csv(path, ("state", "k", "re", "im"), rows)


def _write_waveforms(path: Path, times, waveforms, labels):
    header = ["t"]
    for label in labels:
        header += [f"{label}_re", f"{label}_im"]
    rows = []
    for m in range(len(times)):
        row = [times[m]]
        for i in range(waveforms.shape[1]):
            row += [waveforms[m, i].real, waveforms[m, i].imag]
        rows.append(row)
    _write_csv(path, header, rows)


def _write_json(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands

def cmd_solve(config: dict, out: Path, workers: int) -> int:
    model = _builder_for(config["case"])(config["set"])[config["variant"]]
    solver_cfg = SolverConfig(**config["solver"])
    labels = _labels(model)
    report = {"case": config["case"], "variant": config["variant"]}
    try:
        result = solve_pss(model, solver_cfg)
    except MaxIterationsExceeded as exc:
        grid = solver_cfg.grid()
        _write_spectrum(out / "pss_spectrum.csv", labels, exc.last_spectrum)
        waveforms = spectrum_to_samples(exc.last_spectrum.coeffs, grid.n_samples)
        _write_waveforms(out / "pss_waveforms.csv", grid.times, waveforms, labels)
        report.update(converged=False, iterations=len(exc.residual_history),
                      residual_history=exc.residual_history,
                      tolerance=solver_cfg.tolerance, elapsed_s=None)
        _write_json(out / "run_report.json", report)
        print(f"no convergence in {len(exc.residual_history)} iterations",
              file=sys.stderr)
        return 2
    _write_spectrum(out / "pss_spectrum.csv", labels, result.spectrum)
    _write_waveforms(out / "pss_waveforms.csv", result.times, result.waveforms, labels)
    report.update(converged=True, iterations=result.iterations,
                  residual_history=result.residual_history,
                  tolerance=solver_cfg.tolerance, elapsed_s=result.elapsed_s)
    _write_json(out / "run_report.json", report)
    return 0


def cmd_eig(config: dict, out: Path, workers: int) -> int:
    model = _builder_for(config["case"])(config["set"])[config["variant"]]
    solver_cfg = SolverConfig(**config["solver"])
    try:
        result = solve_pss(model, solver_cfg)
    except MaxIterationsExceeded as exc:
        _write_csv(out / "eigenvalues.csv", ("re", "im"), [])
        print(f"no convergence in {len(exc.residual_history)} iterations",
              file=sys.stderr)
        return 2
    eigenvalues = hss_eigenvalues(result.hss)
    modes = mode_set(result.hss, marginal_band=config["analysis"]["marginal_band"])
    _write_csv(out / "eigenvalues.csv", ("re", "im"),
               [(v.real, v.imag) for v in eigenvalues])
    weakest = modes.weakest
    print(f"weakest: {_fmt(weakest.real)} {_fmt(weakest.imag)} "
          f"verdict: {modes.classification}")
    return 0


def cmd_sweep(config: dict, out: Path, workers: int) -> int:
    if config["sweep"] is None:
        raise UsageError("sweep axes must be configured for this case")
    axis1 = SweepAxis(config["sweep"]["axis1"]["name"],
                      tuple(config["sweep"]["axis1"]["values"]),
                      config["sweep"]["axis1"].get("unit", ""))
    axis2 = SweepAxis(config["sweep"]["axis2"]["name"],
                      tuple(config["sweep"]["axis2"]["values"]),
                      config["sweep"]["axis2"].get("unit", ""))
    spec = SweepSpec(axis1=axis1, axis2=axis2, base_params=config["set"],
                     solver_config=SolverConfig(**config["solver"]),
                     variant=config["variant"])
    result = run_sweep(_builder_for(config["case"]), spec, workers=workers)
    trait_rows = []
    for i, v1 in enumerate(axis1.values):
        for j, v2 in enumerate(axis2.values):
            trait_rows.append((v1, v2, result.re_weakest[i, j],
                               result.im_weakest[i, j],
                               bool(result.converged[i, j]),
                               int(result.iterations[i, j])))
    _write_csv(out / "trait.csv",
               ("param1", "param2", "re_weakest", "im_weakest",
                "converged", "iterations"), trait_rows)
    if not np.any(result.converged):
        _write_csv(out / "region.csv", ("param1", "param2", "unstable"), [])
        _write_csv(out / "boundary.csv",
                   ("param1_a", "param2_a", "param1_b", "param2_b"), [])
        print("no sweep cell converged", file=sys.stderr)
        return 2
    region, segments = extract_region(result)
    region_rows = []
    for i, v1 in enumerate(axis1.values):
        for j, v2 in enumerate(axis2.values):
            region_rows.append((v1, v2, bool(region[i, j])))
    _write_csv(out / "region.csv", ("param1", "param2", "unstable"), region_rows)
    _write_csv(out / "boundary.csv",
               ("param1_a", "param2_a", "param1_b", "param2_b"),
               [(a[0], a[1], b[0], b[1]) for a, b in segments])
    return 0


def cmd_impedance(config: dict, out: Path, workers: int) -> int:
    model = _builder_for(config["case"])(config["set"])[config["variant"]]
    solver_cfg = SolverConfig(**config["solver"])
    try:
        result = solve_pss(model, solver_cfg)
    except MaxIterationsExceeded as exc:
        _write_csv(out / "scan.csv",
                   ("f_hz", "diag_re", "diag_im", "mirror_plus_re",
                    "mirror_plus_im", "mirror_minus_re", "mirror_minus_im",
                    "singular"), [])
        print(f"no convergence in {len(exc.residual_history)} iterations",
              file=sys.stderr)
        return 2
    scan = frequency_scan(result.hss, config["analysis"]["frequencies_hz"],
                          output_index=config["analysis"]["output_index"],
                          input_index=config["analysis"]["input_index"])
    rows = []
    for idx, f_hz in enumerate(scan.frequencies_hz):
        rows.append((f_hz,
                     scan.diag[idx].real, scan.diag[idx].imag,
                     scan.mirror_plus[idx].real, scan.mirror_plus[idx].imag,
                     scan.mirror_minus[idx].real, scan.mirror_minus[idx].imag,
                     bool(scan.singular[idx])))
    _write_csv(out / "scan.csv",
               ("f_hz", "diag_re", "diag_im", "mirror_plus_re",
                "mirror_plus_im", "mirror_minus_re", "mirror_minus_im",
                "singular"), rows)
    return 0


def cmd_verify(config: dict, out: Path, workers: int) -> int:
    model = _builder_for(config["case"])(config["set"])[config["variant"]]
    solver_cfg = SolverConfig(**config["solver"])
    oracle_cfg = config["oracle"]
    report = {"case": config["case"], "variant": config["variant"],
              "tolerance_rms": oracle_cfg["tolerance_rms"]}
    try:
        result = solve_pss(model, solver_cfg)
    except MaxIterationsExceeded as exc:
        report.update(converged=False, iterations=len(exc.residual_history))
        _write_json(out / "verify_report.json", report)
        print(f"no convergence in {len(exc.residual_history)} iterations",
              file=sys.stderr)
        return 2
    labels = _labels(model)
    period = model.period
    weakest = weakest_mode(hss_eigenvalues(result.hss), omega1=result.hss.omega1,
                           n_harmonics=result.hss.n_harmonics)
    unstable = weakest.real > 0.0
    report.update(converged=True, iterations=result.iterations,
                  weakest=[weakest.real, weakest.imag],
                  solver_verdict="Unstable" if unstable else "Stable")
    checks = []

    if not unstable:
        # integrate starting on the computed orbit: a correct periodic
        # solution is invariant, so any drift over the horizon exposes an
        # inconsistent solve (cold-start settling would instead measure the
        # system's own transient, which for weakly damped cases outlasts any
        # reasonable horizon)
        horizon = oracle_cfg["horizon_periods"] * period
        traj = integrate(model, result.waveforms[0],
                         horizon, oracle_cfg["step"])
        report["oracle_diverged"] = traj.diverged
        if traj.diverged:
            report["rms_error"] = None
            checks.append(False)
        else:
            cmp = compare_waveforms((result.times, result.waveforms),
                                    last_period(traj, period))
            report["rms_error"] = {lab: float(v) for lab, v
                                   in zip(labels, cmp["rms_error"])}
            report["max_error"] = {lab: float(v) for lab, v
                                   in zip(labels, cmp["max_error"])}
            checks.append(bool(np.all(cmp["rms_error"]
                                      <= oracle_cfg["tolerance_rms"])))
    else:
        report["rms_error"] = None
        report["note"] = ("solver classifies this point Unstable; waveform "
                          "comparison skipped (the oracle cannot settle), "
                          "growth fit used instead")

    if oracle_cfg["growth_fit"] or unstable:
        pert = oracle_cfg["perturbation"]
        onset = pert["onset_periods"] * period
        t_end = onset + oracle_cfg["horizon_periods"] * period
        traj = kicked_response(model, result.waveforms[0],
                               {"onset": onset, "magnitude": pert["magnitude"]},
                               t_end, oracle_cfg["step"],
                               state_index=int(pert["state_index"]))
        fit = growth_rate_fit(traj, int(pert["state_index"]), {"onset": onset})
        agrees = (fit.rate > 0.0) == unstable
        report["growth"] = {"rate": fit.rate, "floored": fit.floored,
                            "sign_agrees": agrees,
                            "trajectory_diverged": traj.diverged}
        if abs(weakest.real) > 0.5:
            checks.append(agrees)
    passed = bool(checks) and all(checks)
    report["pass"] = passed
    _write_json(out / "verify_report.json", report)
    if not passed:
        print("verification failed (see verify_report.json)", file=sys.stderr)
        return 3
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "eig": cmd_eig,
    "sweep": cmd_sweep,
    "impedance": cmd_impedance,
    "verify": cmd_verify,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltpkit",
        description="Periodic steady-state, stability, and impedance analysis "
                    "of periodically driven state-space models.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("solve", "solve the periodic steady state, write spectrum/waveforms"),
            ("eig", "solve PSS and report periodic-linearization eigenvalues"),
            ("sweep", "two-parameter stability sweep"),
            ("impedance", "harmonic frequency scan of the open-loop model"),
            ("verify", "cross-check the solver against time-domain integration")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--case", help="case1, case2, or a .py model file")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a case parameter (repeatable)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--workers", type=int, default=1,
                       help="sweep worker threads")
        p.add_argument("--dump-config", action="store_true",
                       help="print the fully resolved config and exit")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = resolve_config(args.command, args)
        if args.dump_config:
            print(json.dumps(config, indent=2, sort_keys=True))
            return 0
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](config, out, args.workers)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
