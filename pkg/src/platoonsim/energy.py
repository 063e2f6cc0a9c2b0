"""Instantaneous fuel-rate evaluation and cumulative fuel accounting.

Fuel flow follows a road-load tractive-power balance

    mdot_f = max(0, v*(m*vdot + m*g*c_r + 0.5*rho*CdA(s)*v^2 + m*g*sin(theta)))
             / (eta_eng*LHV)  +  p_aux / (eta_eng*LHV)

with the tractive term clamped at zero: braking burns idle fuel only (diesel
trucks, no regeneration).  Drafting reduces the effective drag area of a
follower with gap s through an exponential saturation law

    CdA(s) = Cd0*A * (1 - alpha_foll * exp(-s / drag_decay))

while the leader always sees free-flow drag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import EnergyParams


@dataclass(frozen=True, slots=True)
class FuelAccumulator:
    """Cumulative fuel mass and distance for one vehicle; both nondecreasing."""

    fuel_mass: float = 0.0  # kg
    distance: float = 0.0  # m


def drag_area(spacing: float | None, is_leader: bool, params: EnergyParams) -> float:
    """Effective drag area (m^2) of a vehicle; followers need their gap."""
    if is_leader:
        return params.cd0_a
    if spacing is None or spacing < 0.0:
        raise ValueError(f"follower drag area needs a nonnegative gap, got {spacing!r}")
    return params.cd0_a * (1.0 - params.alpha_foll * math.exp(-spacing / params.drag_decay))


def fuel_rate(v: float, vdot: float, drag_area_m2: float, theta: float,
              params: EnergyParams) -> float:
    """Instantaneous fuel mass flow (kg/s) at speed v, acceleration vdot."""
    if v < 0.0:
        raise ValueError("fuel_rate requires v >= 0")
    m = params.mass
    road_load = (
        m * vdot
        + m * params.g * params.c_r
        + 0.5 * params.rho_air * drag_area_m2 * v * v
        + m * params.g * math.sin(theta)
    )
    tractive_power = v * road_load
    if tractive_power < 0.0:
        tractive_power = 0.0
    denom = params.eta_eng * params.lhv
    return tractive_power / denom + params.p_aux / denom


def accumulate(acc: FuelAccumulator, rate: float, v: float, dt: float) -> FuelAccumulator:
    """Rectangle-rule accumulation over one step (consistent with Euler)."""
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    return FuelAccumulator(fuel_mass=acc.fuel_mass + rate * dt,
                           distance=acc.distance + v * dt)


def fuel_economy_metric(accumulators: "list[FuelAccumulator] | tuple[FuelAccumulator, ...]",
                        params: EnergyParams) -> float:
    """Platoon fuel economy in L/100km: total volume over total vehicle-km."""
    total_fuel = 0.0
    total_distance = 0.0
    for acc in accumulators:
        total_fuel += acc.fuel_mass
        total_distance += acc.distance
    if total_distance <= 0.0:
        raise ValueError("fuel economy is undefined without distance traveled")
    return (total_fuel / params.fuel_density) / total_distance * 1e5
