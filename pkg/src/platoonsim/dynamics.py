"""Fixed-step integration of per-vehicle longitudinal kinematics.

Each truck is a point mass whose realized acceleration follows the commanded
acceleration through a first-order actuation lag:

    da/dt = (u - a) / tau_a,   dv/dt = a,   dp/dt = v

One explicit Euler step updates, in order, acceleration, then speed (using
the new acceleration), then position (using the new speed) - semi-implicit
along the chain, which is consistent and stable at the default dt = 0.01 s.
Speeds are clamped to [v_min, v_max] after the update; the realized
acceleration is not back-corrected by the clamp.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .params import ControlParams, VehicleState


@dataclass(frozen=True, slots=True)
class PlatoonState:
    """Joint state of the platoon at one time instant.

    Vehicle index 0 is the leader; positions decrease with index.
    ``leader_cmd_speed`` is the leader servo's commanded-speed state.
    """

    time: float
    vehicles: tuple[VehicleState, ...]
    leader_cmd_speed: float


def spacing(state: PlatoonState, i: int, vehicle_length: float) -> float:
    """Bumper-to-bumper gap behind predecessor: p[i-1] - p[i] - L."""
    if i < 1 or i >= len(state.vehicles):
        raise IndexError(f"spacing is defined for follower indices 1..n-1, got {i}")
    return state.vehicles[i - 1].position - state.vehicles[i].position - vehicle_length


def step(
    state: PlatoonState,
    commands: Sequence[float],
    dt: float,
    params: ControlParams,
    *,
    integrals: Sequence[float] | None = None,
    leader_cmd_speed: float | None = None,
) -> PlatoonState:
    """Advance every vehicle by one explicit Euler step of length ``dt``.

    ``integrals`` optionally carries updated PID integral states into the new
    vehicle states (defaults to carrying the old values over), and
    ``leader_cmd_speed`` the advanced servo state.  Raises ValueError on a
    non-finite command, naming the vehicle.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    if len(commands) != len(state.vehicles):
        raise ValueError("one command per vehicle required")
    tau_a = params.tau_a
    v_min = params.v_min
    v_max = params.v_max
    new_vehicles = []
    for i, veh in enumerate(state.vehicles):
        u = commands[i]
        if not math.isfinite(u):
            raise ValueError(f"non-finite command {u!r} for vehicle {i}")
        a = veh.accel + dt * (u - veh.accel) / tau_a
        v = veh.speed + dt * a
        if v < v_min:
            v = v_min
        elif v > v_max:
            v = v_max
        p = veh.position + dt * v
        z = veh.pid_integral if integrals is None else integrals[i]
        new_vehicles.append(VehicleState(position=p, speed=v, accel=a, pid_integral=z))
    return PlatoonState(
        time=state.time + dt,
        vehicles=tuple(new_vehicles),
        leader_cmd_speed=state.leader_cmd_speed if leader_cmd_speed is None else leader_cmd_speed,
    )


def actuator_tracking_error(state: PlatoonState, commands: Sequence[float]) -> list[float]:
    """Per-vehicle tracking error r = a - u of the lagged actuator."""
    return [veh.accel - commands[i] for i, veh in enumerate(state.vehicles)]
