"""Velocity-aware headway barrier and acceleration projection filter.

The barrier for follower i behind predecessor states (v_prev, a_prev) is

    h = s - s0 - tau_min*v - max(0, v - v_prev)^2 / (2*b_max)

Safety is h >= 0.  Requiring the damped second-order recovery condition
ddot(h) + k1*dot(h) + k2*h >= 0 along the lagged-actuator dynamics gives a
constraint affine in the commanded acceleration, A*u >= b.  Intersecting the
resulting half-line with the mechanical limits [u_min, u_max] yields a scalar
feasible interval onto which the nominal command is clipped.

Two coefficient derivations are provided: :func:`exact_affine_constraint`
(exact differentiation; the upper-bound form the closed loop enforces) and
:func:`affine_constraint` (a tabulated closed-form variant with the opposite
command-coefficient sign, kept for diagnostics).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import ControlParams


@dataclass(frozen=True, slots=True)
class BarrierEval:
    """Barrier value, its analytic time derivative, and the closing flag."""

    h: float  # m
    h_dot: float  # m/s
    closing: bool  # True iff v > v_prev (follower closing in)


@dataclass(frozen=True, slots=True)
class FeasibleInterval:
    """Acceleration interval from the barrier condition and actuator limits."""

    lower: float  # m/s^2
    upper: float  # m/s^2
    feasible: bool  # lower <= upper


def barrier(
    s: float,
    v: float,
    v_prev: float,
    a: float,
    a_prev: float,
    params: ControlParams,
) -> BarrierEval:
    """Evaluate h and its derivative along ds/dt = v_prev - v, dv/dt = a.

    The quadratic approach-penalty term and its derivative both vanish on the
    switching surface v = v_prev, so h and h_dot are continuous there.
    """
    closing = v > v_prev
    h = s - params.standstill_gap - params.tau_min * v
    h_dot = (v_prev - v) - params.tau_min * a
    if closing:
        w = v - v_prev
        h -= w * w / (2.0 * params.b_max)
        h_dot -= w * (a - a_prev) / params.b_max
    return BarrierEval(h=h, h_dot=h_dot, closing=closing)


def affine_constraint(
    s: float,
    v: float,
    v_prev: float,
    a: float,
    a_prev: float,
    u_prev: float,
    params: ControlParams,
    barrier_eval: BarrierEval | None = None,
) -> tuple[float, float]:
    """Coefficients (A, b) of the barrier condition A*u >= b on the command.

    ``barrier_eval`` may pass in a precomputed :func:`barrier` result for the
    same arguments to avoid evaluating it twice per control cycle.
    """
    be = barrier(s, v, v_prev, a, a_prev, params) if barrier_eval is None else barrier_eval
    tau_a = params.tau_a
    chi = 1.0 if be.closing else 0.0
    a_coef = params.tau_min / tau_a + chi * v / (params.b_max * tau_a)
    b_coef = (
        (a_prev - a)
        - params.cbf_k1 * be.h_dot
        - params.cbf_k2 * be.h
        + params.tau_min * a / tau_a
    )
    if chi:
        b_coef += (v * a - v_prev * a_prev) / (tau_a * params.b_max)
        b_coef += v_prev * u_prev / (params.b_max * tau_a)
    return a_coef, b_coef


def exact_affine_constraint(
    s: float,
    v: float,
    v_prev: float,
    a: float,
    a_prev: float,
    u_prev: float,
    params: ControlParams,
    barrier_eval: BarrierEval | None = None,
) -> tuple[float, float]:
    """Coefficients (A, b) with A*u >= b from exact differentiation of h.

    Differentiating the barrier twice along ds/dt = v_prev - v, dv/dt = a,
    da/dt = (u - a)/tau_a and collecting the command terms of
    ddot(h) + k1*dot(h) + k2*h >= 0 gives a u-coefficient of

        -(tau_min/tau_a) - chi*(v - v_prev)/(b_max*tau_a)  (always <= 0)

    so the condition is an upper bound on the commanded acceleration: the
    filter restricts how hard a closing follower may accelerate and, near the
    boundary, forces braking.  This is the constraint the closed-loop filter
    enforces; :func:`affine_constraint` keeps the tabulated closed-form
    variant (whose u-coefficient carries the opposite sign and acts as a
    brake limiter) available for diagnostics.
    """
    be = barrier(s, v, v_prev, a, a_prev, params) if barrier_eval is None else barrier_eval
    tau_a = params.tau_a
    tau_min = params.tau_min
    b_max = params.b_max
    w = v - v_prev
    q = a - a_prev
    a_coef = -tau_min / tau_a
    c = -q + tau_min * a / tau_a + params.cbf_k1 * be.h_dot + params.cbf_k2 * be.h
    if be.closing:
        a_coef -= w / (b_max * tau_a)
        c += -q * q / b_max + w * q / (b_max * tau_a) + w * u_prev / (b_max * tau_a)
    return a_coef, -c


def feasible_interval(a_coef: float, b_coef: float, params: ControlParams) -> FeasibleInterval:
    """Intersect the half-line A*u >= b with the actuator limits.

    A > 0 gives a lower barrier bound b/A, A < 0 an upper bound.  A = 0 makes
    the condition independent of u: infeasible when b > 0, otherwise the full
    actuator range remains.
    """
    if a_coef > 0.0:
        cbf_lower, cbf_upper = b_coef / a_coef, math.inf
    elif a_coef < 0.0:
        cbf_lower, cbf_upper = -math.inf, b_coef / a_coef
    elif b_coef > 0.0:
        cbf_lower, cbf_upper = math.inf, -math.inf
    else:
        cbf_lower, cbf_upper = -math.inf, math.inf
    lower = max(params.u_min, cbf_lower)
    upper = min(params.u_max, cbf_upper)
    return FeasibleInterval(lower=lower, upper=upper, feasible=lower <= upper)


def project(
    nominal: float,
    interval: FeasibleInterval,
    params: ControlParams,
) -> tuple[float, bool]:
    """Clip the nominal command onto the feasible interval.

    Returns ``(applied, clipped)``.  An empty interval falls back to maximum
    braking u_min (hard-safety priority); the caller records the
    infeasibility event.
    """
    if not interval.feasible:
        return params.u_min, True
    if nominal < interval.lower:
        return interval.lower, True
    if nominal > interval.upper:
        return interval.upper, True
    return nominal, False


def discrete_one_step_check(h_now: float, h_next: float, kappa: float, dt: float) -> bool:
    """One-step decay condition h(t+dt) >= (1 - kappa*dt) * h(t).

    Diagnostic-only discrete counterpart of the continuous barrier condition;
    requires kappa*dt < 1.
    """
    if not kappa * dt < 1.0:
        raise ValueError("discrete check requires kappa*dt < 1")
    return h_next >= (1.0 - kappa * dt) * h_now
