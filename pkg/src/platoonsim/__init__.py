"""Deterministic simulator for hierarchical longitudinal truck-platoon control.

Three coordinated layers act on every follower: a velocity-aware headway
barrier projects commanded accelerations onto a safe interval, a lag-aware
PID regulates the constant time-gap spacing policy, and a slow economic
layer selects the leader's cruise set-point from a fuel/time trade-off.
"""

from .analysis import (
    BoundReport,
    check_leader_jerk,
    check_ovrv_convergence,
    check_small_lag,
    check_soft_hierarchy,
    check_string_stability,
    fit_second_order,
)
from .config import ConfigError, emit_config, emit_defaults, load_config
from .controllers import (
    GainSpec,
    LeaderServoState,
    baseline_a_command,
    baseline_b_command,
    gains_from_spec,
    leader_servo_step,
    pid_command,
    pid_integral_update,
)
from .dynamics import PlatoonState, actuator_tracking_error, spacing, step
from .economics import (
    EconWeights,
    RouteProfile,
    optimize_set_point,
    route_cost,
    steady_state_fuel_rate,
)
from .energy import FuelAccumulator, accumulate, drag_area, fuel_economy_metric, fuel_rate
from .harness import build_preset, initial_state, metrics, run, sweep
from .params import (
    HOLD_REALIZED,
    Controller,
    ControlParams,
    EnergyParams,
    RunMetrics,
    RunResult,
    ScenarioSpec,
    VehicleState,
    default_params,
    validate,
)
from .safety import (
    BarrierEval,
    FeasibleInterval,
    affine_constraint,
    barrier,
    discrete_one_step_check,
    exact_affine_constraint,
    feasible_interval,
    project,
)

__version__ = "0.1.0"

__all__ = [
    "BarrierEval",
    "BoundReport",
    "ConfigError",
    "ControlParams",
    "Controller",
    "EconWeights",
    "EnergyParams",
    "FeasibleInterval",
    "FuelAccumulator",
    "GainSpec",
    "HOLD_REALIZED",
    "LeaderServoState",
    "PlatoonState",
    "RouteProfile",
    "RunMetrics",
    "RunResult",
    "ScenarioSpec",
    "VehicleState",
    "accumulate",
    "actuator_tracking_error",
    "affine_constraint",
    "barrier",
    "baseline_a_command",
    "baseline_b_command",
    "build_preset",
    "check_leader_jerk",
    "check_ovrv_convergence",
    "check_small_lag",
    "check_soft_hierarchy",
    "check_string_stability",
    "default_params",
    "discrete_one_step_check",
    "drag_area",
    "emit_config",
    "emit_defaults",
    "exact_affine_constraint",
    "feasible_interval",
    "fit_second_order",
    "fuel_economy_metric",
    "fuel_rate",
    "gains_from_spec",
    "initial_state",
    "leader_servo_step",
    "load_config",
    "metrics",
    "optimize_set_point",
    "pid_command",
    "pid_integral_update",
    "project",
    "route_cost",
    "run",
    "spacing",
    "steady_state_fuel_rate",
    "step",
    "sweep",
    "validate",
]
