"""Command-line front end: batch runs, CSV/JSON artifacts, and run manifests.

Every run writes its data files plus a manifest recording the exact model
parameters, conventions, and tolerances that shaped the numbers, and an
effective argument vector from which the run can be repeated verbatim.
Identical inputs produce byte-identical CSV output.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .continuum import (
    ContinuumError,
    asymptotic_occupation,
    lorentzian_density,
    pole_estimate,
    survival_amplitude_continuum,
    ullersma_density,
    validate_continuum,
    width_from_discrete,
)
from .dynamics import OBSERVABLES, TimeGrid, evolve_series
from .eigensolve import EigensolveError, solve_normal_modes
from .langevin import DEFAULT_WRONSKIAN_TOL, langevin_table
from .model import (
    InitialState,
    ModelError,
    SpectralModel,
    load_model,
    paper_default_model,
    validate_dissipation,
)
from .recurrence import RecurrenceError, analyze, poincare_time

_KNOWN_ERRORS = (ModelError, EigensolveError, ContinuumError, RecurrenceError)


def _fmt(value) -> str:
    """17 significant digits; non-finite values become empty fields."""
    if value is None:
        return ""
    v = float(value)
    if not math.isfinite(v):
        return ""
    return format(v, ".17g")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def _write_plot_script(path: Path, csv_name: str, columns: list[str], title: str) -> None:
    plots = ", ".join(
        f"'{csv_name}' using 1:{i + 2} with lines title '{name}'"
        for i, name in enumerate(columns)
    )
    path.write_text(
        "set datafile separator ','\n"
        f"set title '{title}'\n"
        "set key autotitle columnhead\n"
        "set xlabel 't'\n"
        f"plot {plots}\n",
        encoding="utf-8",
    )


def _threads() -> int:
    raw = os.environ.get("QBM_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


# --- model construction from flags -------------------------------------------

def _add_model_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="model file (key = value lines plus a [bath] section)")
    sub.add_argument("--paper-defaults", action="store_true",
                     help="equidistant band of width 0.018 with Lorentzian couplings, D = A")
    sub.add_argument("--n", type=int, help="total oscillator count N+1 for --paper-defaults")
    sub.add_argument("--convention", choices=("prose", "formula"), default="prose",
                     help="band-width reading: spacing = width/(N-2) or width/(N-1)")
    sub.add_argument("--band-width", type=float, default=0.018)
    sub.add_argument("--d-over-a", type=float, default=1.0,
                     help="coupling peak in units of the grid spacing")
    sub.add_argument("--omega", type=float, default=None, help="subsystem frequency")
    sub.add_argument("--beta", type=float, default=None, help="inverse temperature")
    sub.add_argument("--kappa", type=float, default=None, help="initial subsystem quanta")
    sub.add_argument("--rel-tol", type=float, default=1e-13, help="root refinement tolerance")


def _resolve_model(args, parser: argparse.ArgumentParser) -> SpectralModel:
    if args.config and args.paper_defaults:
        parser.error("--config and --paper-defaults are mutually exclusive")
    if args.config:
        model = load_model(args.config)
        overrides = {}
        if args.omega is not None:
            overrides["omega_sub"] = args.omega
        if args.beta is not None:
            overrides["beta"] = args.beta
        if args.kappa is not None:
            overrides["kappa"] = args.kappa
        if overrides:
            model = SpectralModel(
                omega_sub=overrides.get("omega_sub", model.omega_sub),
                beta=overrides.get("beta", model.beta),
                kappa=overrides.get("kappa", model.kappa),
                bath_freqs=model.bath_freqs,
                couplings=model.couplings,
                mass=model.mass,
            )
        return model
    if args.paper_defaults:
        if args.n is None:
            parser.error("--paper-defaults requires --n")
        return paper_default_model(
            args.n,
            convention=args.convention,
            band_width=args.band_width,
            d_over_a=args.d_over_a,
            omega_sub=args.omega if args.omega is not None else 1.0,
            beta=args.beta if args.beta is not None else 1.0,
            kappa=args.kappa if args.kappa is not None else 1.0,
        )
    parser.error("give either --config or --paper-defaults")


def _model_argv(args) -> list[str]:
    argv = []
    if args.config:
        argv += ["--config", str(args.config)]
    if args.paper_defaults:
        argv += ["--paper-defaults", "--n", str(args.n),
                 "--convention", args.convention,
                 "--band-width", _fmt(args.band_width),
                 "--d-over-a", _fmt(args.d_over_a)]
    for name, flag in (("omega", "--omega"), ("beta", "--beta"), ("kappa", "--kappa")):
        value = getattr(args, name)
        if value is not None:
            argv += [flag, _fmt(value)]
    argv += ["--rel-tol", _fmt(args.rel_tol)]
    return argv


def _model_summary(model: SpectralModel, args) -> dict:
    return {
        "source": str(args.config) if args.config else "paper-defaults",
        "omega_sub": model.omega_sub,
        "beta": model.beta,
        "kappa": model.kappa,
        "mass": model.mass,
        "n_osc": model.n_osc,
        "band_width": model.band_width,
        "spacing": model.uniform_spacing(),
    }


def _derived_quantities(model: SpectralModel, modes, args) -> dict:
    tp = poincare_time(modes)
    derived = {
        "t_poincare": tp.t_poincare,
        "min_gap": tp.min_gap,
        "coupling_peak": float(np.abs(model.couplings).max()),
    }
    if args.paper_defaults:
        n_osc = args.n - 1
        derived["spacing_prose"] = args.band_width / (n_osc - 2)
        derived["spacing_formula"] = args.band_width / (n_osc - 1)
        derived["lorentz_half_width"] = derived[
            "spacing_prose" if args.convention == "prose" else "spacing_formula"
        ] * (n_osc - 2) / 2.0
    if model.uniform_spacing() is not None:
        derived["gamma_width"] = width_from_discrete(model)
    return derived


def _manifest(args, command: str, argv: list[str], model_summary, derived,
              tolerances: dict, outputs: list[str], extra: dict | None = None) -> dict:
    payload = {
        "command": command,
        "argv_effective": argv,
        "version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "model": model_summary,
        "derived": derived,
        "tolerances": tolerances,
        "outputs": outputs,
        "threads": _threads(),
    }
    if extra:
        payload.update(extra)
    return payload


def _out(args, suffix: str) -> Path:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / f"{args.prefix}{suffix}"


def _add_output_args(sub: argparse.ArgumentParser, default_prefix: str) -> None:
    sub.add_argument("--out-dir", default=".", help="output directory")
    sub.add_argument("--prefix", default=default_prefix, help="output file name prefix")


def _add_grid_args(sub: argparse.ArgumentParser, default_t_max: float | None) -> None:
    sub.add_argument("--t0", type=float, default=0.0)
    sub.add_argument("--t-max", type=float, default=default_t_max)
    sub.add_argument("--points", type=int, default=2001)


def _make_grid(args, fallback_t_max: float) -> TimeGrid:
    t_max = args.t_max if args.t_max is not None else fallback_t_max
    if t_max <= args.t0:
        raise ModelError(f"t_max = {t_max} must exceed t0 = {args.t0}")
    dt = (t_max - args.t0) / max(args.points - 1, 1)
    return TimeGrid(t0=args.t0, dt=dt, count=args.points)


# --- subcommands --------------------------------------------------------------

def _cmd_solve(args, parser) -> int:
    model = _resolve_model(args, parser)
    modes = solve_normal_modes(model, rel_tol=args.rel_tol)
    csv_path = _out(args, "_modes.csv")
    _write_csv(
        csv_path,
        ["nu", "alpha", "weight", "residual"],
        (
            (str(nu), modes.alphas[nu], modes.weights[nu], modes.residuals[nu])
            for nu in range(modes.n_modes)
        ),
    )
    validity = validate_dissipation(model)
    manifest_path = _out(args, "_manifest.json")
    manifest = _manifest(
        args, "solve", ["solve"] + _model_argv(args) + _output_argv(args),
        _model_summary(model, args), _derived_quantities(model, modes, args),
        {"rel_tol": args.rel_tol},
        [csv_path.name],
        extra={"dissipation": {
            "left_sum": validity.left_sum, "right_sum": validity.right_sum,
            "left_bound": validity.left_bound, "right_bound": validity.right_bound,
            "passes": list(validity.passes), "d_bound_ratio": validity.d_bound_ratio,
        }},
    )
    _write_json(manifest_path, manifest)
    print(f"wrote {csv_path} and {manifest_path}")
    return 0


def _output_argv(args) -> list[str]:
    return ["--out-dir", str(args.out_dir), "--prefix", args.prefix]


def _grid_argv(args) -> list[str]:
    argv = ["--t0", _fmt(args.t0), "--points", str(args.points)]
    if args.t_max is not None:
        argv += ["--t-max", _fmt(args.t_max)]
    return argv


def _cmd_evolve(args, parser) -> int:
    model = _resolve_model(args, parser)
    modes = solve_normal_modes(model, rel_tol=args.rel_tol)
    init = InitialState.thermal(model)
    observables = [o.strip() for o in args.obs.split(",") if o.strip()]
    unknown = [o for o in observables if o not in OBSERVABLES]
    if unknown:
        parser.error(f"unknown observables {unknown}; choose from {OBSERVABLES}")
    grid = _make_grid(args, fallback_t_max=poincare_time(modes).t_poincare / 2.0)
    series = evolve_series(modes, init, grid, observables, x0=args.x0, p0=args.p0)

    csv_path = _out(args, "_series.csv")
    ts = series.times
    cols = [series.column(name) for name in observables]
    _write_csv(
        csv_path,
        ["t"] + observables,
        ((ts[i], *(c[i] for c in cols)) for i in range(grid.count)),
    )
    plot_path = _out(args, "_series.gp")
    _write_plot_script(plot_path, csv_path.name, observables, "mean-value evolution")

    argv = (["evolve"] + _model_argv(args) + _grid_argv(args)
            + ["--obs", args.obs, "--x0", _fmt(args.x0), "--p0", _fmt(args.p0)]
            + _output_argv(args))
    manifest = _manifest(
        args, "evolve", argv, _model_summary(model, args),
        _derived_quantities(model, modes, args),
        {"rel_tol": args.rel_tol},
        [csv_path.name, plot_path.name],
    )
    _write_json(_out(args, "_manifest.json"), manifest)
    print(f"wrote {csv_path}")
    return 0


def _cmd_langevin(args, parser) -> int:
    model = _resolve_model(args, parser)
    modes = solve_normal_modes(model, rel_tol=args.rel_tol)
    grid = _make_grid(args, fallback_t_max=500.0 / model.omega_sub)
    table = langevin_table(modes, grid, wronskian_tol=args.wronskian_tol)
    csv_path = _out(args, "_langevin.csv")
    ts = table.times
    cols = [table.column(n) for n in ("a", "b", "delta", "omega_sq", "gamma")]
    _write_csv(
        csv_path,
        ["t", "a", "b", "delta", "omega_sq", "gamma", "valid"],
        (
            (ts[i], *(c[i] for c in cols), str(int(table.valid[i])))
            for i in range(grid.count)
        ),
    )
    argv = (["langevin"] + _model_argv(args) + _grid_argv(args)
            + ["--wronskian-tol", _fmt(args.wronskian_tol)] + _output_argv(args))
    manifest = _manifest(
        args, "langevin", argv, _model_summary(model, args),
        _derived_quantities(model, modes, args),
        {"rel_tol": args.rel_tol, "wronskian_tol": args.wronskian_tol},
        [csv_path.name],
        extra={"invalid_samples": int(np.count_nonzero(~table.valid))},
    )
    _write_json(_out(args, "_manifest.json"), manifest)
    print(f"wrote {csv_path}")
    return 0


def _cmd_recurrence(args, parser) -> int:
    model = _resolve_model(args, parser)
    modes = solve_normal_modes(model, rel_tol=args.rel_tol)
    init = InitialState.thermal(model)
    tp = poincare_time(modes)
    grid = _make_grid(args, fallback_t_max=3.0 * tp.t_poincare)
    series = evolve_series(modes, init, grid, ["N_omega"])
    report = analyze(modes, series, "N_omega", init=init, threshold=args.threshold)
    payload = {
        "t_poincare": report.t_poincare,
        "min_gap": report.min_gap,
        "peaks": [
            {"t": p.time, "h": p.height, "w": p.width} for p in report.peaks
        ],
        "peak_spacing": report.peak_spacing,
        "gamma_fit": report.gamma_fit,
        "residual": report.fit_residual,
        "fit_window": list(report.fit_window) if report.fit_window else None,
        "plateau": report.plateau,
    }
    json_path = _out(args, "_recurrence.json")
    _write_json(json_path, payload)
    argv = (["recurrence"] + _model_argv(args) + _grid_argv(args)
            + ["--threshold", _fmt(args.threshold)] + _output_argv(args))
    manifest = _manifest(
        args, "recurrence", argv, _model_summary(model, args),
        _derived_quantities(model, modes, args),
        {"rel_tol": args.rel_tol, "threshold": args.threshold},
        [json_path.name],
    )
    _write_json(_out(args, "_manifest.json"), manifest)
    print(f"wrote {json_path}")
    return 0


def _continuum_model(args, parser):
    lo, hi = args.band
    if args.density == "lorentzian":
        if args.peak is None or args.half_width is None:
            parser.error("lorentzian density needs --peak and --half-width")
        return lorentzian_density(args.peak, args.half_width, args.omega, lo, hi,
                                  beta=args.beta)
    if args.c1 is None:
        parser.error("ullersma density needs --c1 (and optionally --c2)")
    c2 = args.c2 if args.c2 is not None else args.omega
    return ullersma_density(args.c1, c2, lo, hi, omega_sub=args.omega, beta=args.beta)


def _cmd_continuum(args, parser) -> int:
    cm = _continuum_model(args, parser)
    est = pole_estimate(cm, quad_tol=args.quad_tol)
    validity = validate_continuum(cm, quad_tol=args.quad_tol)
    payload = {
        "delta_omega": est.delta_omega,
        "gamma": est.gamma,
        "z0": {"re": est.z0.real, "im": est.z0.imag},
        "cpc": {
            "left": validity.left_value,
            "right": validity.right_value,
            "left_bound": validity.left_bound,
            "right_bound": validity.right_bound,
            "pass": validity.all_pass,
            "diverged": list(validity.diverged),
        },
        "asymptotic_occupation_weak": asymptotic_occupation(cm, weak_coupling=True),
    }

    outputs = []
    if args.survival_t_max is not None:
        ts = np.linspace(0.0, args.survival_t_max, args.survival_points)
        s = survival_amplitude_continuum(cm, ts, quad_tol=args.quad_tol)
        csv_path = _out(args, "_survival.csv")
        _write_csv(csv_path, ["t", "p_survival"],
                   ((ts[i], abs(s[i]) ** 2) for i in range(ts.size)))
        outputs.append(csv_path.name)
        payload["survival_csv"] = csv_path.name

    json_path = _out(args, "_continuum.json")
    _write_json(json_path, payload)
    outputs.append(json_path.name)

    argv = ["continuum", "--density", args.density,
            "--band", _fmt(args.band[0]), _fmt(args.band[1]),
            "--omega", _fmt(args.omega), "--beta", _fmt(args.beta),
            "--quad-tol", _fmt(args.quad_tol)]
    for name in ("peak", "half_width", "c1", "c2"):
        value = getattr(args, name)
        if value is not None:
            argv += ["--" + name.replace("_", "-"), _fmt(value)]
    if args.survival_t_max is not None:
        argv += ["--survival-t-max", _fmt(args.survival_t_max),
                 "--survival-points", str(args.survival_points)]
    argv += _output_argv(args)
    manifest = {
        "command": "continuum",
        "argv_effective": argv,
        "version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "density": args.density,
        "band": [args.band[0], args.band[1]],
        "tolerances": {"quad_tol": args.quad_tol},
        "outputs": outputs,
        "threads": _threads(),
    }
    _write_json(_out(args, "_manifest.json"), manifest)
    print(f"wrote {json_path}")
    return 0


def _sweep_member(n_plus_1: int, args):
    model = paper_default_model(
        n_plus_1,
        convention=args.convention,
        band_width=args.band_width,
        d_over_a=args.d_over_a,
        omega_sub=args.omega if args.omega is not None else 1.0,
        beta=args.beta if args.beta is not None else 1.0,
        kappa=args.kappa if args.kappa is not None else 1.0,
    )
    modes = solve_normal_modes(model, rel_tol=args.rel_tol)
    init = InitialState.thermal(model)
    tp = poincare_time(modes)
    gamma = width_from_discrete(model)
    t_max = args.t_max if args.t_max is not None else 1.5 / gamma
    grid = TimeGrid(t0=0.0, dt=t_max / (args.points - 1), count=args.points)
    series = evolve_series(modes, init, grid, ["N_omega"])
    report = analyze(modes, series, "N_omega", init=init)
    rescaled = None
    if args.rescaled_series:
        rescaled = (grid.times / tp.t_poincare, series.column("N_omega"))
    return {
        "n_plus_1": n_plus_1,
        "t_poincare": tp.t_poincare,
        "min_gap": tp.min_gap,
        "plateau": report.plateau,
        "gamma_fit": report.gamma_fit,
        "gamma_width": gamma,
        "rescaled": rescaled,
    }


def _cmd_sweep(args, parser) -> int:
    try:
        n_values = [int(v) for v in args.n_list.split(",") if v.strip()]
    except ValueError:
        parser.error(f"cannot parse --n-list {args.n_list!r}")
    if not n_values:
        parser.error("--n-list is empty")

    rows = []
    failed = None
    with ThreadPoolExecutor(max_workers=min(_threads(), len(n_values))) as pool:
        futures = [pool.submit(_sweep_member, n, args) for n in n_values]
        for n, fut in zip(n_values, futures):
            try:
                rows.append(fut.result())
            except Exception as exc:  # abort but keep earlier rows
                failed = {"n_plus_1": n, "error": str(exc)}
                for later in futures:
                    later.cancel()
                break

    csv_path = _out(args, "_sweep.csv")
    _write_csv(
        csv_path,
        ["n_plus_1", "t_poincare", "min_gap", "plateau", "gamma_fit", "gamma_width"],
        (
            (str(r["n_plus_1"]), r["t_poincare"], r["min_gap"], r["plateau"],
             r["gamma_fit"], r["gamma_width"])
            for r in rows
        ),
    )
    outputs = [csv_path.name]
    if args.rescaled_series:
        for r in rows:
            ts_scaled, values = r["rescaled"]
            member_path = _out(args, f"_n{r['n_plus_1']}_rescaled.csv")
            _write_csv(member_path, ["t_over_tp", "N_omega"],
                       ((ts_scaled[i], values[i]) for i in range(ts_scaled.size)))
            outputs.append(member_path.name)
    plot_path = _out(args, "_sweep.gp")
    _write_plot_script(plot_path, csv_path.name, ["t_poincare"], "recurrence time sweep")
    outputs.append(plot_path.name)

    argv = (["sweep", "--n-list", args.n_list] + _model_argv_sweep(args)
            + _grid_argv_sweep(args) + _output_argv(args))
    manifest = {
        "command": "sweep",
        "argv_effective": argv,
        "version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "tolerances": {"rel_tol": args.rel_tol},
        "convention": args.convention,
        "outputs": outputs,
        "threads": _threads(),
        "status": "failed" if failed else "ok",
        "failed_member": failed,
    }
    _write_json(_out(args, "_manifest.json"), manifest)
    if failed:
        print(f"sweep aborted at N+1={failed['n_plus_1']}: {failed['error']}",
              file=sys.stderr)
        return 1
    print(f"wrote {csv_path}")
    return 0


def _model_argv_sweep(args) -> list[str]:
    argv = ["--convention", args.convention, "--band-width", _fmt(args.band_width),
            "--d-over-a", _fmt(args.d_over_a), "--rel-tol", _fmt(args.rel_tol)]
    for name, flag in (("omega", "--omega"), ("beta", "--beta"), ("kappa", "--kappa")):
        value = getattr(args, name)
        if value is not None:
            argv += [flag, _fmt(value)]
    return argv


def _grid_argv_sweep(args) -> list[str]:
    argv = ["--points", str(args.points)]
    if args.t_max is not None:
        argv += ["--t-max", _fmt(args.t_max)]
    if args.rescaled_series:
        argv += ["--rescaled-series"]
    return argv


def _cmd_validate(args, parser) -> int:
    model = _resolve_model(args, parser)
    report = validate_dissipation(model, delta=args.delta)
    print(f"left positivity condition:  sum = {report.left_sum:.6g}  "
          f"bound = {report.left_bound:.6g}  -> {'pass' if report.passes[0] else 'FAIL'}")
    print(f"right positivity condition: sum = {report.right_sum:.6g}  "
          f"bound = {report.right_bound:.6g}  -> {'pass' if report.passes[1] else 'FAIL'}")
    if report.d_bound_ratio is not None:
        note = "" if report.d_bound_ratio < 1.0 else \
            "  (conservative guide exceeded; the sum conditions above are decisive)"
        print(f"coupling ratio D/(sqrt(2) A) = {report.d_bound_ratio:.6g}{note}")
    if not report.all_pass:
        print("model violates the positivity conditions; dissipation is not guaranteed",
              file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbmlab",
        description="Exact oscillator-bath relaxation laboratory",
    )
    parser.add_argument("--version", action="version", version=f"qbmlab {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p_solve = subs.add_parser("solve", help="normal frequencies and weights")
    _add_model_args(p_solve)
    _add_output_args(p_solve, "solve")

    p_evolve = subs.add_parser("evolve", help="mean-observable time series")
    _add_model_args(p_evolve)
    _add_grid_args(p_evolve, default_t_max=None)
    p_evolve.add_argument("--obs", default="N_omega",
                          help=f"comma-separated subset of {','.join(OBSERVABLES)}")
    p_evolve.add_argument("--x0", type=float, default=1.0)
    p_evolve.add_argument("--p0", type=float, default=0.0)
    _add_output_args(p_evolve, "evolve")

    p_lan = subs.add_parser("langevin", help="rotation kernels and damping coefficients")
    _add_model_args(p_lan)
    _add_grid_args(p_lan, default_t_max=None)
    p_lan.add_argument("--wronskian-tol", type=float, default=DEFAULT_WRONSKIAN_TOL)
    _add_output_args(p_lan, "langevin")

    p_rec = subs.add_parser("recurrence", help="revival detection and decay fit")
    _add_model_args(p_rec)
    _add_grid_args(p_rec, default_t_max=None)
    p_rec.add_argument("--threshold", type=float, default=0.5)
    _add_output_args(p_rec, "recurrence")

    p_cont = subs.add_parser("continuum", help="dense-bath decay analytics")
    p_cont.add_argument("--density", choices=("lorentzian", "ullersma"),
                        default="lorentzian")
    p_cont.add_argument("--band", type=float, nargs=2, required=True,
                        metavar=("LO", "HI"))
    p_cont.add_argument("--omega", type=float, default=1.0)
    p_cont.add_argument("--beta", type=float, default=1.0)
    p_cont.add_argument("--peak", type=float, default=None)
    p_cont.add_argument("--half-width", type=float, default=None)
    p_cont.add_argument("--c1", type=float, default=None)
    p_cont.add_argument("--c2", type=float, default=None)
    p_cont.add_argument("--quad-tol", type=float, default=1e-10)
    p_cont.add_argument("--survival-t-max", type=float, default=None)
    p_cont.add_argument("--survival-points", type=int, default=401)
    _add_output_args(p_cont, "continuum")

    p_sweep = subs.add_parser("sweep", help="one run per bath size")
    p_sweep.add_argument("--n-list", required=True,
                         help="comma-separated N+1 values, e.g. 10,32,100,500")
    p_sweep.add_argument("--convention", choices=("prose", "formula"), default="prose")
    p_sweep.add_argument("--band-width", type=float, default=0.018)
    p_sweep.add_argument("--d-over-a", type=float, default=1.0)
    p_sweep.add_argument("--omega", type=float, default=None)
    p_sweep.add_argument("--beta", type=float, default=None)
    p_sweep.add_argument("--kappa", type=float, default=None)
    p_sweep.add_argument("--rel-tol", type=float, default=1e-13)
    p_sweep.add_argument("--t-max", type=float, default=None)
    p_sweep.add_argument("--points", type=int, default=1201)
    p_sweep.add_argument("--rescaled-series", action="store_true",
                         help="also write per-member series against t/t_P")
    _add_output_args(p_sweep, "sweep")

    p_val = subs.add_parser("validate", help="check the positivity conditions")
    _add_model_args(p_val)
    p_val.add_argument("--delta", type=float, default=None,
                       help="regulator frequency; defaults to the smallest grid spacing")
    _add_output_args(p_val, "validate")

    return parser


_COMMANDS = {
    "solve": _cmd_solve,
    "evolve": _cmd_evolve,
    "langevin": _cmd_langevin,
    "recurrence": _cmd_recurrence,
    "continuum": _cmd_continuum,
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, parser)
    except _KNOWN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
