"""Domain types and the calibrated parameter catalog for the platoon simulator.

Every other module consumes these types.  All types are immutable value data
after construction and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class Controller(Enum):
    """Follower control law selection."""

    PID = "pid"
    BASELINE_A = "baseline_a"  # spacing-only feedback, no V2V
    BASELINE_B = "baseline_b"  # speed-matching feedback, ignores spacing


#: Sentinel target speed for a leader event meaning "hold the realized speed
#: at the event time" (resolved at runtime by the simulation harness).
HOLD_REALIZED = None


@dataclass(frozen=True, slots=True)
class VehicleState:
    """Longitudinal state of one truck.

    ``accel`` is the realized actuator output (lags the command), and
    ``pid_integral`` is the accumulated spacing error driving the I-term.
    """

    position: float  # m
    speed: float  # m/s
    accel: float  # m/s^2
    pid_integral: float = 0.0  # m*s


@dataclass(frozen=True, slots=True)
class ControlParams:
    """Spacing policy, barrier, PID/servo gains, and actuator limits."""

    time_gap: float  # desired time gap tau (s)
    standstill_gap: float  # standstill offset s0 (m)
    vehicle_length: float  # effective vehicle length L (m)
    tau_min: float  # barrier minimum time headway (s)
    b_max: float  # guaranteed braking bound (m/s^2, positive magnitude)
    cbf_k1: float  # barrier damping gain (1/s)
    cbf_k2: float  # barrier stiffness gain (1/s^2)
    kp: float  # proportional gain (1/s^2 scale)
    ki: float  # integral gain (1/s^3 scale)
    kd: float  # relative-speed gain (1/s scale)
    zeta: float  # target damping ratio
    omega_n: float  # target natural frequency (1/s)
    tau_a: float  # actuation lag time constant (s)
    t_lead: float  # leader speed-servo time constant (s)
    u_min: float  # command lower limit (m/s^2)
    u_max: float  # command upper limit (m/s^2)
    v_min: float  # speed lower limit (m/s)
    v_max: float  # speed upper limit (m/s)
    baseline_ks: float  # baseline A spacing gain (1/s^2)
    baseline_kv: float  # baseline B speed gain (1/s)


@dataclass(frozen=True, slots=True)
class EnergyParams:
    """Mass, road-load, aerodynamic, and powertrain/fuel constants."""

    mass: float  # gross vehicle mass (kg)
    g: float  # gravitational acceleration (m/s^2)
    c_r: float  # rolling-resistance coefficient
    rho_air: float  # air density (kg/m^3)
    cd0_a: float  # free-flow drag area Cd0*A (m^2)
    alpha_lead: float  # leader drag-reduction potential
    alpha_foll: float  # follower drag-reduction potential
    drag_decay: float  # drag interference decay length (m)
    p_aux: float  # auxiliary power demand (W)
    eta_eng: float  # engine efficiency
    lhv: float  # fuel lower heating value (J/kg)
    fuel_density: float  # kg/L

    def __post_init__(self) -> None:
        for name in (
            "mass", "g", "c_r", "rho_air", "cd0_a", "alpha_lead", "alpha_foll",
            "drag_decay", "p_aux", "eta_eng", "lhv", "fuel_density",
        ):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"EnergyParams.{name} must be strictly positive")
        if not 0.0 < self.alpha_lead < 1.0:
            raise ValueError("EnergyParams.alpha_lead must lie in (0, 1)")
        if not 0.0 < self.alpha_foll < 1.0:
            raise ValueError("EnergyParams.alpha_foll must lie in (0, 1)")
        if not self.eta_eng <= 1.0:
            raise ValueError("EnergyParams.eta_eng must lie in (0, 1]")


@dataclass(frozen=True, slots=True)
class ScenarioSpec:
    """One closed-loop experiment: platoon size, initial cruise state, timed
    leader set-point events, controller selection, and integration step.

    ``events`` entries are ``(time_s, target_speed)`` where the target may be
    :data:`HOLD_REALIZED` (``None``) to freeze the leader at its realized speed.
    """

    n_vehicles: int
    v_init: float  # m/s
    duration: float  # s
    dt: float  # s
    controller: Controller
    events: tuple[tuple[float, float | None], ...] = ()
    grade: float = 0.0  # road pitch (rad)

    def __post_init__(self) -> None:
        if self.n_vehicles < 2:
            raise ValueError("ScenarioSpec.n_vehicles must be >= 2")
        if not 0.001 <= self.dt <= 0.1:
            raise ValueError("ScenarioSpec.dt must lie in [0.001, 0.1]")
        if not self.duration > 0.0:
            raise ValueError("ScenarioSpec.duration must be > 0")
        times = [t for t, _ in self.events]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("ScenarioSpec.events must be sorted strictly by time")
        for t, v in self.events:
            if v is not None and not math.isfinite(v):
                raise ValueError(f"ScenarioSpec event at t={t} has non-finite target")


@dataclass(frozen=True, slots=True)
class RunMetrics:
    """Summary metrics of one run, with argmin/argmax locations."""

    h_min: float  # m, minimum headway margin over followers and time
    h_min_time: float  # s
    h_min_vehicle: int
    e_sup: float  # m, spacing-error supremum over followers and time
    e_sup_time: float  # s
    e_sup_vehicle: int
    fuel_per_100km: float  # L/100km, platoon aggregate


@dataclass(frozen=True)
class RunResult:
    """Time-indexed trajectories plus summary metrics for one run.

    All per-vehicle arrays have shape ``(n_samples, n_vehicles)``;
    leader columns of spacing, spacing_error and barrier_value are NaN
    (the leader has no predecessor).
    """

    times: np.ndarray  # (n_samples,)
    position: np.ndarray
    speed: np.ndarray
    accel: np.ndarray
    command: np.ndarray
    spacing: np.ndarray
    spacing_error: np.ndarray
    barrier_value: np.ndarray
    fuel_mass: np.ndarray  # cumulative kg
    metrics: RunMetrics
    infeasibility_events: tuple[tuple[float, int], ...] = ()

    @property
    def n_vehicles(self) -> int:
        return self.position.shape[1]


def default_params() -> tuple[ControlParams, EnergyParams]:
    """Return the calibrated parameter catalog.

    PID gains are derived from the damping/bandwidth targets through the
    analytic gain map (kp = 2*zeta*omega_n/tau, ki = omega_n^2/tau,
    kd = 1/tau) so the stored gains and the map agree bit-exactly.
    The barrier gains come from the critically damped factorization
    (s + lambda)^2 with relaxation rate lambda = 2 1/s.
    """
    zeta = 1.0
    omega_n = 0.2  # 1/s
    tau = 1.0  # s
    control = ControlParams(
        time_gap=tau,
        standstill_gap=5.0,
        vehicle_length=16.5,
        tau_min=0.6,
        b_max=5.0,
        cbf_k1=4.0,
        cbf_k2=4.0,
        kp=2.0 * zeta * omega_n / tau,
        ki=omega_n ** 2 / tau,
        kd=1.0 / tau,
        zeta=zeta,
        omega_n=omega_n,
        tau_a=0.4,
        t_lead=1.6,
        u_min=-5.0,
        u_max=1.5,
        v_min=0.0,
        v_max=30.0,
        baseline_ks=0.4,
        baseline_kv=1.1,
    )
    energy = EnergyParams(
        mass=40000.0,
        g=9.81,
        c_r=0.005,
        rho_air=1.225,
        cd0_a=0.53 * 9.7,
        alpha_lead=0.12,
        alpha_foll=0.30,
        drag_decay=12.0,
        p_aux=1800.0,
        eta_eng=0.40,
        lhv=42.7e6,
        fuel_density=0.84,
    )
    return control, energy


def validate(
    params: ControlParams,
    *,
    strict_overdamped: bool = True,
    tuning_guard: bool = True,
) -> list[str]:
    """Check ControlParams invariants; violations are data, not failures.

    Returns an empty list iff all invariants hold.  ``strict_overdamped``
    enables the overdamped-leader requirement t_lead >= 4*tau_a and
    ``tuning_guard`` the phase-margin requirement omega_n*tau_a <= 0.35.
    """
    v: list[str] = []
    if not params.time_gap > 0.0:
        v.append(f"time_gap={params.time_gap!r} must be > 0")
    if params.tau_min < 0.0:
        v.append(f"tau_min={params.tau_min!r} < 0")
    if params.tau_min > params.time_gap:
        v.append(f"tau_min={params.tau_min!r} > time_gap={params.time_gap!r}")
    if not params.b_max > 0.0:
        v.append(f"b_max={params.b_max!r} must be > 0")
    if not params.cbf_k1 > 0.0:
        v.append(f"cbf_k1={params.cbf_k1!r} must be > 0")
    if not params.cbf_k2 > 0.0:
        v.append(f"cbf_k2={params.cbf_k2!r} must be > 0")
    if not params.tau_a > 0.0:
        v.append(f"tau_a={params.tau_a!r} must be > 0")
    if strict_overdamped and params.t_lead < 4.0 * params.tau_a:
        v.append(
            f"t_lead={params.t_lead!r} < 4*tau_a={4.0 * params.tau_a!r}"
        )
    if not params.u_min < 0.0 < params.u_max:
        v.append(f"u_min={params.u_min!r}, u_max={params.u_max!r} must satisfy u_min < 0 < u_max")
    if tuning_guard and params.omega_n * params.tau_a > 0.35:
        v.append(
            f"omega_n*tau_a={params.omega_n * params.tau_a!r} > 0.35"
        )
    return v
