"""Post-hoc numerical verification of closed-loop bounds on recorded runs.

Checks implemented: the uniform small-lag actuator bound
|a - u| <= tau_a*max|du/dt| + |r(0)|, convergence to the time-gap
equilibrium under a constant leader speed, the leader jerk bound
max|j0| <= dv_cmd/(tau_a*t_lead) for unclipped maneuvers, the forced-response
spacing-error bound |e| <= C2(zeta)/(tau*ki) * max|tau*dr/dt| for runs
starting from zero error, and the L-infinity string-stability comparison of
consecutive relative-speed envelopes.  A least-squares fit of the spacing
error's second-order coefficients recovers the damping ratio and natural
frequency realized by the closed loop.

Derivatives are taken by central finite differences with one-sided endpoints,
except the small-lag command slope which uses forward first differences (the
form under which the discrete-time bound is exact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import ControlParams, RunResult

#: Slack applied to every bound comparison.
BOUND_TOL = 1e-9

#: Slack in the string-stability envelope comparison.
STRING_TOL = 1e-6


@dataclass(frozen=True, slots=True)
class BoundReport:
    """Measured extremum vs. theoretical bound for one named inequality.

    ``applicable`` is False when the bound's hypotheses did not hold on the
    run (for example, the leader jerk bound on a clipped maneuver); the
    numbers are still reported for reference.
    """

    bound_name: str
    lhs: float
    rhs: float
    satisfied: bool
    margin: float
    applicable: bool = True


def _report(name: str, lhs: float, rhs: float, applicable: bool = True) -> BoundReport:
    return BoundReport(bound_name=name, lhs=lhs, rhs=rhs,
                       satisfied=lhs <= rhs + BOUND_TOL, margin=rhs - lhs,
                       applicable=applicable)


def _central_diff(series: np.ndarray, dt: float) -> np.ndarray:
    d = np.empty_like(series)
    d[1:-1] = (series[2:] - series[:-2]) / (2.0 * dt)
    d[0] = (series[1] - series[0]) / dt
    d[-1] = (series[-1] - series[-2]) / dt
    return d


def _dt(result: RunResult) -> float:
    if result.times.size < 2:
        raise ValueError("series too short")
    return float(result.times[1] - result.times[0])


def check_small_lag(result: RunResult, params: ControlParams) -> list[BoundReport]:
    """Uniform small-lag bound per vehicle: max|a-u| <= tau_a*max|u'| + |r(0)|."""
    if result.times.size < 3:
        raise ValueError("small-lag check needs at least 3 samples")
    dt = _dt(result)
    reports = []
    for i in range(result.n_vehicles):
        a = result.accel[:, i]
        u = result.command[:, i]
        lhs = float(np.max(np.abs(a - u)))
        u_slope = np.abs(np.diff(u)) / dt
        rhs = params.tau_a * float(np.max(u_slope)) + abs(float(a[0] - u[0]))
        reports.append(_report(f"small_lag.vehicle{i}", lhs, rhs))
    return reports


def check_ovrv_convergence(
    result: RunResult,
    v_star: float,
    tol_e: float,
    tol_v: float,
    window: float,
    params: ControlParams,
) -> list[bool]:
    """Per-follower convergence to the time-gap equilibrium (s0 + tau*v*, v*).

    True iff the spacing error and relative speed stay inside the tolerances
    throughout the final ``window`` seconds and the final spacing matches the
    equilibrium target.  The leader must hold a constant speed over the
    window.
    """
    t_end = float(result.times[-1])
    if window > t_end:
        raise ValueError("window longer than the run")
    mask = result.times >= t_end - window - 1e-9
    leader_speed = result.speed[mask, 0]
    if float(np.max(leader_speed) - np.min(leader_speed)) > max(tol_v, 1e-6):
        raise ValueError("leader speed not constant over the final window")
    target = params.standstill_gap + params.time_gap * v_star
    out = []
    for i in range(1, result.n_vehicles):
        e_ok = bool(np.all(np.abs(result.spacing_error[mask, i]) < tol_e))
        dv = result.speed[mask, i - 1] - result.speed[mask, i]
        v_ok = bool(np.all(np.abs(dv) < tol_v))
        s_ok = abs(float(result.spacing[-1, i]) - target) < tol_e
        out.append(e_ok and v_ok and s_ok)
    return out


def leader_clipped(result: RunResult, params: ControlParams) -> bool:
    """True when the leader's applied command touched an actuator limit."""
    u0 = result.command[:, 0]
    return bool(np.any(u0 <= params.u_min + 1e-12) or np.any(u0 >= params.u_max - 1e-12))


def check_leader_jerk(result: RunResult, dv_cmd: float, params: ControlParams) -> BoundReport:
    """Realized leader jerk bound max|j0| <= dv_cmd/(tau_a*t_lead).

    Applies to unclipped maneuvers only; a clipped run is reported with
    ``applicable=False``.
    """
    dt = _dt(result)
    jerk = _central_diff(result.accel[:, 0], dt)
    lhs = float(np.max(np.abs(jerk)))
    rhs = dv_cmd / (params.tau_a * params.t_lead)
    return _report("leader_jerk", lhs, rhs, applicable=not leader_clipped(result, params))


def c2_factor(zeta: float) -> float:
    """L1 norm factor of the error loop's fundamental solution."""
    if zeta >= 1.0:
        return 1.0
    if zeta <= 0.0:
        raise ValueError("damping ratio must be > 0")
    return 1.0 / (zeta * math.sqrt(1.0 - zeta * zeta))


def check_soft_hierarchy(result: RunResult, params: ControlParams) -> list[BoundReport]:
    """Forced-response spacing-error bound per follower.

    For runs starting at equilibrium (zero initial error and error rate) the
    homogeneous term vanishes and |e| <= C2(zeta)/(tau*ki) * max|tau*dr/dt|
    with r = a - u the actuator tracking error.
    """
    dt = _dt(result)
    tau = params.time_gap
    scale = c2_factor(params.zeta) / (tau * params.ki)
    reports = []
    for i in range(1, result.n_vehicles):
        r = result.accel[:, i] - result.command[:, i]
        r_dot = _central_diff(r, dt)
        rhs = scale * float(np.max(np.abs(tau * r_dot)))
        lhs = float(np.max(np.abs(result.spacing_error[:, i])))
        reports.append(_report(f"soft_hierarchy.vehicle{i}", lhs, rhs))
    return reports


def check_string_stability(result: RunResult) -> dict[int, bool]:
    """Relative-speed envelope comparison along the string.

    Maps each follower index i >= 2 to whether sup|dv_i| <= sup|dv_{i-1}|
    (within a 1e-6 slack); empty for platoons with fewer than 3 vehicles.
    """
    sups = []
    for i in range(1, result.n_vehicles):
        dv = result.speed[:, i - 1] - result.speed[:, i]
        sups.append(float(np.max(np.abs(dv))))
    return {i: sups[i - 1] <= sups[i - 2] + STRING_TOL
            for i in range(2, result.n_vehicles)}


def max_jerk(result: RunResult) -> list[float]:
    """Informational per-vehicle maximum |da/dt| (no closed-form bound)."""
    dt = _dt(result)
    return [float(np.max(np.abs(_central_diff(result.accel[:, i], dt))))
            for i in range(result.n_vehicles)]


def fit_second_order(error_series: np.ndarray, dt: float) -> tuple[float, float]:
    """Least-squares fit of e'' + 2*zeta*omega*e' + omega^2*e = 0.

    Derivatives come from central differences on interior samples; returns
    the recovered (zeta, omega).  Raises ValueError for degenerate input
    (flat series or a fit without a stable oscillator structure).
    """
    e = np.asarray(error_series, dtype=float)
    if e.size < 5:
        raise ValueError("series too short for a second-order fit")
    if float(np.max(np.abs(e))) < 1e-12:
        raise ValueError("degenerate (flat) error series")
    mid = e[1:-1]
    e_dot = (e[2:] - e[:-2]) / (2.0 * dt)
    e_ddot = (e[2:] - 2.0 * mid + e[:-2]) / (dt * dt)
    design = np.column_stack([e_dot, mid])
    coeffs, _, rank, _ = np.linalg.lstsq(design, -e_ddot, rcond=None)
    if rank < 2:
        raise ValueError("degenerate error series (rank-deficient fit)")
    a1, a0 = float(coeffs[0]), float(coeffs[1])
    if a0 <= 0.0:
        raise ValueError(f"fit has no oscillator structure (omega^2={a0!r})")
    omega = math.sqrt(a0)
    zeta = a1 / (2.0 * omega)
    return zeta, omega


def format_bound_reports(reports: list[BoundReport]) -> str:
    """Flat key=value text record, one block of keys per bound."""
    lines = []
    for rep in reports:
        prefix = rep.bound_name
        lines.append(f"{prefix}.lhs={rep.lhs!r}")
        lines.append(f"{prefix}.rhs={rep.rhs!r}")
        lines.append(f"{prefix}.satisfied={rep.satisfied}")
        lines.append(f"{prefix}.margin={rep.margin!r}")
        lines.append(f"{prefix}.applicable={rep.applicable}")
    return "\n".join(lines) + "\n" if lines else ""
