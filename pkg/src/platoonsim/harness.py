"""Closed-loop simulation harness.

Per integration step the pipeline is: resolve the active leader set-point
event and advance the leader speed servo; compute follower nominal commands
in index order (each barrier constraint uses the predecessor's same-step
applied command); project every nominal command onto its feasible interval;
integrate the dynamics; accumulate fuel.  Series are recorded at every
sample, including the initial state, so a 300 s run at dt = 0.01 yields
30001 rows.

Identical inputs produce bit-identical results; nothing here depends on
wall-clock time, iteration order of unordered containers, or randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import dynamics, energy as energy_mod, safety
from .controllers import (
    LeaderServoState,
    baseline_a_command,
    baseline_b_command,
    leader_servo_step,
    pid_command,
    pid_integral_update,
)
from .dynamics import PlatoonState
from .params import (
    Controller,
    ControlParams,
    EnergyParams,
    RunMetrics,
    RunResult,
    ScenarioSpec,
    VehicleState,
    validate,
)

PRESET_NAMES = ("c1-n2", "c1-n8", "c2-n4")

#: Event-trigger slack absorbing float accumulation in t = k*dt.
_EVENT_EPS = 1e-9

CSV_COLUMNS = (
    "time", "vehicle", "position", "speed", "accel", "command",
    "spacing", "spacing_error", "barrier_value", "fuel_mass",
)


def build_preset(name: str, controller: Controller = Controller.PID) -> ScenarioSpec:
    """Construct one of the built-in experiment scenarios.

    c1-n2 / c1-n8: equilibrium cruise at 18 m/s, leader target raised to
    25 m/s at t = 10 s.  c2-n4: cruise at 25 m/s, emergency stop commanded at
    t = 0, hold at the realized speed at t = 10 s, target restored to 25 m/s
    at t = 20 s.
    """
    key = name.strip().lower().replace("_", "-")
    if key == "c1-n2":
        return ScenarioSpec(n_vehicles=2, v_init=18.0, duration=300.0, dt=0.01,
                            controller=controller, events=((10.0, 25.0),))
    if key == "c1-n8":
        return ScenarioSpec(n_vehicles=8, v_init=18.0, duration=300.0, dt=0.01,
                            controller=controller, events=((10.0, 25.0),))
    if key == "c2-n4":
        return ScenarioSpec(n_vehicles=4, v_init=25.0, duration=300.0, dt=0.01,
                            controller=controller,
                            events=((0.0, 0.0), (10.0, None), (20.0, 25.0)))
    raise KeyError(f"unknown preset {name!r}; known presets: {', '.join(PRESET_NAMES)}")


def initial_state(spec: ScenarioSpec, control: ControlParams) -> PlatoonState:
    """Equilibrium initial condition: leader at the origin, every follower at
    the time-gap equilibrium spacing, zero acceleration, zero integral."""
    gap = control.standstill_gap + control.time_gap * spec.v_init
    vehicles = []
    position = 0.0
    for i in range(spec.n_vehicles):
        if i > 0:
            position -= control.vehicle_length + gap
        vehicles.append(VehicleState(position=position, speed=spec.v_init,
                                     accel=0.0, pid_integral=0.0))
    return PlatoonState(time=0.0, vehicles=tuple(vehicles), leader_cmd_speed=spec.v_init)


def _nominal_command_fn(controller: Controller) -> Callable:
    if controller is Controller.PID:
        return pid_command
    if controller is Controller.BASELINE_A:
        return baseline_a_command
    return baseline_b_command


def run(spec: ScenarioSpec, control: ControlParams, energy: EnergyParams) -> RunResult:
    """Simulate one scenario and return the recorded trajectories and metrics."""
    violations = validate(control)
    if violations:
        raise ValueError("invalid control parameters: " + "; ".join(violations))

    n_steps = round(spec.duration / spec.dt)
    if n_steps < 1:
        raise ValueError("duration shorter than one step")
    n = spec.n_vehicles
    dt = spec.dt
    is_pid = spec.controller is Controller.PID
    is_baseline_a = spec.controller is Controller.BASELINE_A
    length = control.vehicle_length
    s0 = control.standstill_gap
    tau = control.time_gap
    theta = spec.grade

    n_samples = n_steps + 1
    times = np.arange(n_samples) * dt
    position = np.empty((n_samples, n))
    speed = np.empty((n_samples, n))
    accel = np.empty((n_samples, n))
    command = np.empty((n_samples, n))
    spacing_arr = np.full((n_samples, n), math.nan)
    spacing_error = np.full((n_samples, n), math.nan)
    barrier_value = np.full((n_samples, n), math.nan)
    fuel_mass = np.empty((n_samples, n))
    infeasibility: list[tuple[float, int]] = []

    state = initial_state(spec, control)
    servo = LeaderServoState(v_cmd=spec.v_init)
    v_star = spec.v_init
    pending_events = list(spec.events)
    accumulators = [energy_mod.FuelAccumulator() for _ in range(n)]
    leader_drag = energy_mod.drag_area(None, True, energy)
    commands = [0.0] * n
    new_integrals = [0.0] * n

    for k in range(n_samples):
        t = k * dt
        vehicles = state.vehicles

        while pending_events and pending_events[0][0] <= t + _EVENT_EPS:
            _, target = pending_events.pop(0)
            if target is None:
                # Hold at the realized speed: the servo state snaps to it so
                # the commanded acceleration drops to zero immediately.
                v_star = vehicles[0].speed
                servo = LeaderServoState(v_cmd=v_star)
            else:
                v_star = target

        next_servo, u0 = leader_servo_step(servo, v_star, dt, control)
        commands[0] = u0
        new_integrals[0] = vehicles[0].pid_integral

        for i in range(1, n):
            prev = vehicles[i - 1]
            veh = vehicles[i]
            s = prev.position - veh.position - length
            e = s - s0 - tau * veh.speed
            if is_pid:
                nominal = pid_command(e, veh.pid_integral, prev.speed - veh.speed, control)
            elif is_baseline_a:
                nominal = baseline_a_command(s, veh.speed, control)
            else:
                nominal = baseline_b_command(prev.speed, veh.speed, control)
            be = safety.barrier(s, veh.speed, prev.speed, veh.accel, prev.accel, control)
            if is_baseline_a:
                # No V2V: the spacing-only vehicle's filter knows gap and
                # closing rate from radar but not the predecessor's realized
                # or commanded acceleration, so it assumes a coasting one.
                be_local = safety.barrier(s, veh.speed, prev.speed, veh.accel, 0.0, control)
                a_coef, b_coef = safety.exact_affine_constraint(
                    s, veh.speed, prev.speed, veh.accel, 0.0, 0.0,
                    control, barrier_eval=be_local)
            else:
                a_coef, b_coef = safety.exact_affine_constraint(
                    s, veh.speed, prev.speed, veh.accel, prev.accel,
                    commands[i - 1], control, barrier_eval=be)
            interval = safety.feasible_interval(a_coef, b_coef, control)
            applied, clipped = safety.project(nominal, interval, control)
            if not interval.feasible:
                infeasibility.append((t, i))
            commands[i] = applied
            if is_pid:
                new_integrals[i] = pid_integral_update(veh.pid_integral, e, dt, clipped)
            else:
                new_integrals[i] = veh.pid_integral
            spacing_arr[k, i] = s
            spacing_error[k, i] = e
            barrier_value[k, i] = be.h

        for i in range(n):
            veh = vehicles[i]
            position[k, i] = veh.position
            speed[k, i] = veh.speed
            accel[k, i] = veh.accel
            command[k, i] = commands[i]
            fuel_mass[k, i] = accumulators[i].fuel_mass

        if k == n_steps:
            break

        for i in range(n):
            veh = vehicles[i]
            if i == 0:
                area = leader_drag
            else:
                gap = spacing_arr[k, i]
                # Overlapping vehicles only occur in deliberately unstable
                # baseline runs; keep the fuel ledger defined by flooring the
                # drag evaluation at bumper contact.
                area = energy_mod.drag_area(gap if gap > 0.0 else 0.0, False, energy)
            rate = energy_mod.fuel_rate(veh.speed, veh.accel, area, theta, energy)
            accumulators[i] = energy_mod.accumulate(accumulators[i], rate, veh.speed, dt)

        state = dynamics.step(state, commands, dt, control,
                              integrals=new_integrals, leader_cmd_speed=next_servo.v_cmd)
        servo = next_servo

    result = RunResult(
        times=times, position=position, speed=speed, accel=accel, command=command,
        spacing=spacing_arr, spacing_error=spacing_error, barrier_value=barrier_value,
        fuel_mass=fuel_mass, metrics=_PLACEHOLDER_METRICS,
        infeasibility_events=tuple(infeasibility),
    )
    return _with_metrics(result, energy)


_PLACEHOLDER_METRICS = RunMetrics(h_min=math.nan, h_min_time=math.nan, h_min_vehicle=-1,
                                  e_sup=math.nan, e_sup_time=math.nan, e_sup_vehicle=-1,
                                  fuel_per_100km=math.nan)


def _with_metrics(result: RunResult, energy: EnergyParams) -> RunResult:
    from dataclasses import replace
    return replace(result, metrics=metrics(result, energy))


def metrics(result: RunResult, energy: EnergyParams) -> RunMetrics:
    """Scan the full series for the summary metrics.

    Ties break toward the earliest time (then the lowest vehicle index) when
    reporting argmin/argmax locations.  Leader columns are NaN and excluded.
    """
    if result.times.size == 0:
        raise ValueError("empty run result")
    h = result.barrier_value
    flat_min = np.nanargmin(h)  # row-major: earliest time wins ties
    h_k, h_i = np.unravel_index(flat_min, h.shape)
    abs_err = np.abs(result.spacing_error)
    flat_max = np.nanargmax(abs_err)
    e_k, e_i = np.unravel_index(flat_max, abs_err.shape)

    dt = float(result.times[1] - result.times[0]) if result.times.size > 1 else 0.0
    accumulators = []
    n_samples, n = result.speed.shape
    for i in range(n):
        col = result.speed[:, i]
        distance = 0.0
        for k in range(n_samples - 1):
            distance += col[k] * dt
        accumulators.append(
            energy_mod.FuelAccumulator(fuel_mass=float(result.fuel_mass[-1, i]),
                                       distance=float(distance)))
    fuel = float(energy_mod.fuel_economy_metric(accumulators, energy))

    return RunMetrics(
        h_min=float(h[h_k, h_i]),
        h_min_time=float(result.times[h_k]),
        h_min_vehicle=int(h_i),
        e_sup=float(abs_err[e_k, e_i]),
        e_sup_time=float(result.times[e_k]),
        e_sup_vehicle=int(e_i),
        fuel_per_100km=fuel,
    )


@dataclass(frozen=True)
class SweepOutcome:
    """One sweep entry: either a result or the error that aborted the run."""

    spec: ScenarioSpec
    result: RunResult | None
    error: str | None


def sweep(specs: list[ScenarioSpec], control: ControlParams,
          energy: EnergyParams) -> list[SweepOutcome]:
    """Run scenarios independently, collecting per-run errors instead of
    aborting; output order matches input order."""
    outcomes = []
    for spec in specs:
        try:
            outcomes.append(SweepOutcome(spec=spec, result=run(spec, control, energy),
                                         error=None))
        except Exception as exc:  # noqa: BLE001 - errors are data here
            outcomes.append(SweepOutcome(spec=spec, result=None,
                                         error=f"{type(exc).__name__}: {exc}"))
    return outcomes


def write_trajectory_csv(result: RunResult, path: str | Path) -> None:
    """One row per (time, vehicle), fixed column order, full double precision."""
    n_samples, n = result.position.shape
    cols = (result.position, result.speed, result.accel, result.command,
            result.spacing, result.spacing_error, result.barrier_value,
            result.fuel_mass)
    lines = [",".join(CSV_COLUMNS)]
    times = result.times
    for k in range(n_samples):
        t_repr = repr(float(times[k]))
        for i in range(n):
            values = ",".join(repr(float(c[k, i])) for c in cols)
            lines.append(f"{t_repr},{i},{values}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def read_trajectory_csv(path: str | Path, energy: EnergyParams) -> RunResult:
    """Rebuild a RunResult from an exported trajectory (metrics recomputed;
    infeasibility events are not part of the CSV schema)."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError(f"{path}: not a trajectory CSV (bad header)")
    rows = [ln.split(",") for ln in lines[1:]]
    if not rows:
        raise ValueError(f"{path}: empty trajectory")
    n = max(int(r[1]) for r in rows) + 1
    n_samples = len(rows) // n
    if n_samples * n != len(rows):
        raise ValueError(f"{path}: ragged trajectory ({len(rows)} rows, {n} vehicles)")

    times = np.empty(n_samples)
    arrays = [np.empty((n_samples, n)) for _ in range(8)]
    for idx, r in enumerate(rows):
        k, i = divmod(idx, n)
        if int(r[1]) != i:
            raise ValueError(f"{path}: unexpected vehicle index ordering at row {idx + 2}")
        times[k] = float(r[0])
        for j in range(8):
            arrays[j][k, i] = float(r[2 + j])
    result = RunResult(times=times, position=arrays[0], speed=arrays[1],
                       accel=arrays[2], command=arrays[3], spacing=arrays[4],
                       spacing_error=arrays[5], barrier_value=arrays[6],
                       fuel_mass=arrays[7], metrics=_PLACEHOLDER_METRICS)
    return _with_metrics(result, energy)


def format_metrics_record(result: RunResult) -> str:
    """Flat key=value text record of the run metrics."""
    m = result.metrics
    lines = [
        f"h_min={m.h_min!r}",
        f"h_min_time={m.h_min_time!r}",
        f"h_min_vehicle={m.h_min_vehicle}",
        f"e_sup={m.e_sup!r}",
        f"e_sup_time={m.e_sup_time!r}",
        f"e_sup_vehicle={m.e_sup_vehicle}",
        f"fuel_per_100km={m.fuel_per_100km!r}",
        f"infeasibility_count={len(result.infeasibility_events)}",
    ]
    if result.infeasibility_events:
        t, i = result.infeasibility_events[0]
        lines.append(f"infeasibility_first_time={t!r}")
        lines.append(f"infeasibility_first_vehicle={i}")
    return "\n".join(lines) + "\n"
