"""Nominal command generation: PID follower law, gain map, leader servo,
and the two ablation baselines.

The follower PID acts on the constant time-gap spacing error
e = s - s0 - tau*v with command

    u = kp*e + ki*integral(e) + kd*(v_prev - v)

Choosing kd = 1/tau cancels the relative-speed term of the error kinematics,
so with the small-lag approximation the closed-loop spacing error obeys
e'' + tau*kp*e' + tau*ki*e = 0.  Matching that to s^2 + 2*zeta*omega_n*s +
omega_n^2 yields the analytic gain map implemented here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .params import ControlParams


@dataclass(frozen=True, slots=True)
class GainSpec:
    """Second-order transient targets that parameterize the PID gains."""

    zeta: float  # damping ratio
    omega_n: float  # natural frequency (1/s)
    tau: float  # time gap (s)

    def __post_init__(self) -> None:
        if not (self.zeta > 0.0 and self.omega_n > 0.0 and self.tau > 0.0):
            raise ValueError("GainSpec fields must all be > 0")


@dataclass(frozen=True, slots=True)
class LeaderServoState:
    """Commanded-speed state of the leader's first-order speed servo."""

    v_cmd: float  # m/s


def gains_from_spec(spec: GainSpec) -> tuple[float, float, float]:
    """Map (zeta, omega_n, tau) to (kp, ki, kd).

    kp = 2*zeta*omega_n/tau, ki = omega_n^2/tau, kd = 1/tau.
    """
    kp = 2.0 * spec.zeta * spec.omega_n / spec.tau
    ki = spec.omega_n ** 2 / spec.tau
    kd = 1.0 / spec.tau
    return kp, ki, kd


def pid_command(spacing_error: float, integral: float, speed_diff: float,
                params: ControlParams) -> float:
    """Raw PID command (pre-projection) from error, integral, and v_prev - v."""
    return params.kp * spacing_error + params.ki * integral + params.kd * speed_diff


def baseline_a_command(s: float, v: float, params: ControlParams) -> float:
    """Spacing-only feedback u = ks*(s - s0 - tau*v); no V2V input."""
    return params.baseline_ks * (s - params.standstill_gap - params.time_gap * v)


def baseline_b_command(v_prev: float, v: float, params: ControlParams) -> float:
    """Speed-matching feedback u = kv*(v_prev - v); ignores spacing."""
    return params.baseline_kv * (v_prev - v)


def leader_servo_step(
    servo: LeaderServoState,
    v_star: float,
    dt: float,
    params: ControlParams,
) -> tuple[LeaderServoState, float]:
    """One servo update toward the target cruise speed ``v_star``.

    The raw command (v_star - v_cmd)/t_lead is clipped to the actuator range,
    and the commanded speed integrates the clipped command so the servo state
    and the plant agree during saturation.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    u_raw = (v_star - servo.v_cmd) / params.t_lead
    u = min(max(u_raw, params.u_min), params.u_max)
    return LeaderServoState(v_cmd=servo.v_cmd + dt * u), u


def pid_integral_update(integral: float, spacing_error: float, dt: float,
                        saturated: bool) -> float:
    """Conditional (anti-windup) Euler accumulation of the spacing error.

    While the applied command is saturated, the integral only moves if the
    update shrinks its magnitude; unwinding is always allowed.
    """
    candidate = integral + dt * spacing_error
    if saturated and abs(candidate) >= abs(integral):
        return integral
    return candidate
