"""Command-line surface.

Subcommands: run one scenario (trajectories, metrics, bound reports, plot
data, figures), sweep several preset/controller combinations, analyze a
recorded trajectory, optimize the economic cruise set-point for a route
profile, and emit the default configuration.  Numeric output is full double
precision and locale independent; repeated identical invocations produce
byte-identical delimited output.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis, config as config_mod, economics, harness, report
from .analysis import BoundReport
from .params import Controller, ControlParams, EnergyParams, RunResult, ScenarioSpec


def _load(config_path: str | None) -> tuple[ControlParams, EnergyParams, ScenarioSpec | None]:
    if config_path is None:
        return config_mod.load_config(text="")
    return config_mod.load_config(config_path)


def _resolve_scenario(args: argparse.Namespace,
                      from_config: ScenarioSpec | None) -> ScenarioSpec:
    base = None
    if args.preset:
        controller = from_config.controller if from_config else Controller.PID
        base = harness.build_preset(args.preset, controller)
    elif from_config is not None:
        base = from_config
    if base is None:
        raise config_mod.ConfigError(
            "no scenario: pass --preset or a config file with a [scenario] section")
    overrides: dict[str, object] = {}
    if args.controller is not None:
        overrides["controller"] = config_mod.parse_controller(args.controller)
    if args.n_vehicles is not None:
        overrides["n_vehicles"] = args.n_vehicles
    if args.v_init is not None:
        overrides["v_init"] = args.v_init
    if args.duration is not None:
        overrides["duration"] = args.duration
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.grade is not None:
        overrides["grade"] = args.grade
    if args.events is not None:
        overrides["events"] = config_mod.parse_events(args.events)
    return replace(base, **overrides) if overrides else base


def _commanded_step_magnitude(spec: ScenarioSpec) -> float | None:
    """Largest commanded leader speed change implied by the event list."""
    dv_max = None
    previous = spec.v_init
    for _, target in spec.events:
        if target is None:
            continue
        dv = abs(target - previous)
        dv_max = dv if dv_max is None else max(dv_max, dv)
        previous = target
    return dv_max


def _string_reports(result: RunResult) -> list[BoundReport]:
    sups = {}
    for i in range(1, result.n_vehicles):
        dv = result.speed[:, i - 1] - result.speed[:, i]
        sups[i] = float(max(abs(dv)))
    return [
        BoundReport(bound_name=f"string_stability.pair{i}",
                    lhs=sups[i], rhs=sups[i - 1] + analysis.STRING_TOL,
                    satisfied=sups[i] <= sups[i - 1] + analysis.STRING_TOL,
                    margin=sups[i - 1] + analysis.STRING_TOL - sups[i])
        for i in range(2, result.n_vehicles)
    ]


def _standard_reports(result: RunResult, control: ControlParams,
                      spec: ScenarioSpec | None,
                      dv_cmd: float | None) -> list[BoundReport]:
    reports = analysis.check_small_lag(result, control)
    pid_run = spec is None or spec.controller is Controller.PID
    if pid_run:
        reports.extend(analysis.check_soft_hierarchy(result, control))
    if dv_cmd is not None:
        reports.append(analysis.check_leader_jerk(result, dv_cmd, control))
    reports.extend(_string_reports(result))
    return reports


def _write_run_outputs(result: RunResult, control: ControlParams,
                       spec: ScenarioSpec | None, out: Path,
                       figures: bool, dv_cmd: float | None) -> list[BoundReport]:
    out.mkdir(parents=True, exist_ok=True)
    harness.write_trajectory_csv(result, out / "trajectory.csv")
    (out / "metrics.txt").write_text(harness.format_metrics_record(result), newline="\n")
    reports = _standard_reports(result, control, spec, dv_cmd)
    (out / "bounds.txt").write_text(analysis.format_bound_reports(reports), newline="\n")
    report.emit_plot_data(result, out)
    if figures:
        report.render_figures(result, out)
    return reports


def _strict_failures(reports: list[BoundReport]) -> list[str]:
    return [r.bound_name for r in reports if r.applicable and not r.satisfied]


def _cmd_run(args: argparse.Namespace) -> int:
    control, energy, cfg_scenario = _load(args.config)
    spec = _resolve_scenario(args, cfg_scenario)
    result = harness.run(spec, control, energy)
    out = Path(args.output_dir)
    reports = _write_run_outputs(result, control, spec, out,
                                 not args.no_figures, _commanded_step_magnitude(spec))
    m = result.metrics
    print(f"h_min={m.h_min!r} e_sup={m.e_sup!r} fuel_per_100km={m.fuel_per_100km!r}")
    if result.infeasibility_events:
        print(f"infeasibility events: {len(result.infeasibility_events)} "
              f"(first at t={result.infeasibility_events[0][0]!r}, "
              f"vehicle {result.infeasibility_events[0][1]})")
    print(f"outputs written to {out}")
    if args.strict:
        failures = _strict_failures(reports)
        if failures:
            print("unsatisfied bounds: " + ", ".join(failures), file=sys.stderr)
            return 1
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    control, energy, cfg_scenario = _load(args.config)
    specs: list[tuple[str, ScenarioSpec]] = []
    controllers = args.controller or ["pid"]
    if args.preset:
        for preset in args.preset:
            for ctrl in controllers:
                spec = harness.build_preset(preset, config_mod.parse_controller(ctrl))
                specs.append((f"{preset}-{ctrl}", spec))
    elif cfg_scenario is not None:
        for ctrl in controllers:
            spec = replace(cfg_scenario, controller=config_mod.parse_controller(ctrl))
            specs.append((f"scenario-{ctrl}", spec))
    else:
        raise config_mod.ConfigError(
            "no scenarios: pass --preset (repeatable) or a config with [scenario]")

    outcomes = harness.sweep([s for _, s in specs], control, energy)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["name,controller,h_min,e_sup,fuel_per_100km,infeasibility_count,error"]
    failed = 0
    for (name, spec), outcome in zip(specs, outcomes):
        if outcome.result is None:
            failed += 1
            lines.append(f"{name},{spec.controller.value},nan,nan,nan,0,{outcome.error}")
            print(f"{name}: FAILED ({outcome.error})")
            continue
        sub = out / name
        _write_run_outputs(outcome.result, control, spec, sub,
                           not args.no_figures, _commanded_step_magnitude(spec))
        m = outcome.result.metrics
        lines.append(f"{name},{spec.controller.value},{m.h_min!r},{m.e_sup!r},"
                     f"{m.fuel_per_100km!r},{len(outcome.result.infeasibility_events)},")
        print(f"{name}: h_min={m.h_min!r} e_sup={m.e_sup!r} F={m.fuel_per_100km!r}")
    (out / "summary.csv").write_text("\n".join(lines) + "\n", newline="\n")
    return 1 if failed else 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    control, energy, _ = _load(args.config)
    result = harness.read_trajectory_csv(args.input, energy)
    reports = analysis.check_small_lag(result, control)
    if not args.no_soft_hierarchy:
        reports.extend(analysis.check_soft_hierarchy(result, control))
    if args.dv_cmd is not None:
        reports.append(analysis.check_leader_jerk(result, args.dv_cmd, control))
    reports.extend(_string_reports(result))

    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = analysis.format_bound_reports(reports)

    extra: list[str] = []
    for i, jerk in enumerate(analysis.max_jerk(result)):
        extra.append(f"max_jerk.vehicle{i}={jerk!r}")
    if args.v_star is not None:
        ok = analysis.check_ovrv_convergence(result, args.v_star, args.tol_e,
                                             args.tol_v, args.window, control)
        for i, flag in enumerate(ok, start=1):
            extra.append(f"ovrv_converged.vehicle{i}={flag}")
    if args.fit:
        import numpy as np
        e = result.spacing_error[:, 1]
        peak = int(np.argmax(np.abs(e)))
        dt = float(result.times[1] - result.times[0])
        start = peak + int(round(args.fit_offset / dt))
        zeta_hat, omega_hat = analysis.fit_second_order(e[start:], dt)
        extra.append(f"fit_zeta={zeta_hat!r}")
        extra.append(f"fit_omega={omega_hat!r}")
    (out / "bounds.txt").write_text(text + "\n".join(extra) + ("\n" if extra else ""),
                                    newline="\n")
    print(f"bound reports written to {out / 'bounds.txt'}")
    if args.strict:
        failures = _strict_failures(reports)
        if failures:
            print("unsatisfied bounds: " + ", ".join(failures), file=sys.stderr)
            return 1
    return 0


def _cmd_optimize_speed(args: argparse.Namespace) -> int:
    control, energy, _ = _load(args.config)
    profile = economics.RouteProfile.from_file(args.profile)
    weights = economics.EconWeights(lambda_f=args.lambda_f, lambda_t=args.lambda_t,
                                    v_bounds=(args.v_min_econ, args.v_max_econ))
    v_init = args.v_init if args.v_init is not None else 0.5 * (args.v_min_econ + args.v_max_econ)
    v_star = economics.optimize_set_point(profile, weights, control, energy,
                                          args.n_vehicles, v_init)
    cost = economics.route_cost(v_star, profile, weights, control, energy, args.n_vehicles)
    print(f"v_star={v_star!r}")
    print(f"cost={cost!r}")
    if args.output_dir is not None:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "optimize.txt").write_text(
            f"v_star={v_star!r}\ncost={cost!r}\n"
            f"lambda_f={args.lambda_f!r}\nlambda_t={args.lambda_t!r}\n"
            f"v_min_econ={args.v_min_econ!r}\nv_max_econ={args.v_max_econ!r}\n"
            f"n_vehicles={args.n_vehicles}\nroute_length={profile.total_length!r}\n",
            newline="\n")
    return 0


def _cmd_emit_defaults(args: argparse.Namespace) -> int:
    text = config_mod.emit_defaults()
    if args.output is None:
        sys.stdout.write(text)
    else:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(text, newline="\n")
        print(f"defaults written to {args.output}")
    return 0


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=harness.PRESET_NAMES,
                   help="built-in experiment scenario")
    p.add_argument("--controller", help="pid | baseline-a | baseline-b")
    p.add_argument("--n-vehicles", type=int)
    p.add_argument("--v-init", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--grade", type=float)
    p.add_argument("--events", help="comma-separated time:speed pairs ('hold' freezes)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platoonsim",
        description="Hierarchical longitudinal platoon control simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario and write all outputs")
    p.add_argument("--config", help="config file (keys default to the catalog)")
    _add_scenario_flags(p)
    p.add_argument("--output-dir", default="out")
    p.add_argument("--strict", action="store_true",
                   help="exit nonzero when any applicable bound is unsatisfied")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run several preset/controller combinations")
    p.add_argument("--config")
    p.add_argument("--preset", action="append", choices=harness.PRESET_NAMES)
    p.add_argument("--controller", action="append")
    p.add_argument("--output-dir", default="out")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("analyze", help="post-hoc bound checks on a trajectory CSV")
    p.add_argument("--input", required=True, help="trajectory CSV from a run")
    p.add_argument("--config")
    p.add_argument("--output-dir", default="out")
    p.add_argument("--dv-cmd", type=float, help="commanded speed change for the jerk bound")
    p.add_argument("--v-star", type=float, help="target speed for the convergence check")
    p.add_argument("--tol-e", type=float, default=1e-3)
    p.add_argument("--tol-v", type=float, default=1e-3)
    p.add_argument("--window", type=float, default=60.0)
    p.add_argument("--fit", action="store_true",
                   help="fit the spacing-error second-order coefficients")
    p.add_argument("--fit-offset", type=float, default=20.0,
                   help="seconds after the error peak to start the fit")
    p.add_argument("--no-soft-hierarchy", action="store_true")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("optimize-speed", help="economic cruise set-point for a route")
    p.add_argument("--config")
    p.add_argument("--profile", required=True,
                   help="route file: 'length_m grade_rad' rows")
    p.add_argument("--lambda-f", type=float, default=1.0, help="fuel weight (cost/kg)")
    p.add_argument("--lambda-t", type=float, default=0.0, help="time weight (cost/s)")
    p.add_argument("--v-min-econ", type=float, default=10.0)
    p.add_argument("--v-max-econ", type=float, default=30.0)
    p.add_argument("--n-vehicles", type=int, default=2)
    p.add_argument("--v-init", type=float, help="warm start (defaults to the window midpoint)")
    p.add_argument("--output-dir")
    p.set_defaults(func=_cmd_optimize_speed)

    p = sub.add_parser("emit-defaults", help="write the default configuration")
    p.add_argument("--output", help="target path (stdout when omitted)")
    p.set_defaults(func=_cmd_emit_defaults)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except config_mod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
