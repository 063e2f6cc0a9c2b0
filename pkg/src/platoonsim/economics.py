"""Slow-timescale cruise set-point selection.

Between schedule events the platoon is assumed settled at the quasi-steady
equilibrium spacing s*(v) = s0 + tau*v with negligible accelerations, so each
vehicle contributes its stationary fuel rate.  The route cost to minimize is

    J(v) = sum_seg len * [ (lambda_f / v) * sum_i mdot_ss_i(v, theta_seg)
                           + lambda_t / v ]

a fuel/time trade-off integrated over the remaining distance.  The scalar
minimizer is found by golden-section search, cross-checked against a coarse
grid so a kinked or multi-basin cost cannot strand the search in a side
valley.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .energy import drag_area, fuel_rate
from .params import ControlParams, EnergyParams

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RouteProfile:
    """Remaining route as ordered (length_m, grade_rad) segments."""

    segments: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("RouteProfile needs at least one segment")
        for length, _ in self.segments:
            if not length > 0.0:
                raise ValueError("RouteProfile segment lengths must be > 0")

    @property
    def total_length(self) -> float:
        return sum(length for length, _ in self.segments)

    @classmethod
    def from_file(cls, path: str | Path) -> "RouteProfile":
        """Parse a plain-text table of ``segment_length_m grade_rad`` rows.

        Blank lines and '#' comments are skipped.
        """
        segments: list[tuple[float, float]] = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'length grade', got {line!r}")
            segments.append((float(parts[0]), float(parts[1])))
        return cls(segments=tuple(segments))


@dataclass(frozen=True)
class EconWeights:
    """Fuel/time cost weights and the admissible cruise-speed window."""

    lambda_f: float  # cost per kg of fuel
    lambda_t: float  # cost per second of travel
    v_bounds: tuple[float, float] = (10.0, 30.0)  # m/s

    def __post_init__(self) -> None:
        if self.lambda_f < 0.0 or self.lambda_t < 0.0:
            raise ValueError("cost weights must be nonnegative")
        if self.lambda_f == 0.0 and self.lambda_t == 0.0:
            raise ValueError("at least one cost weight must be positive")
        lo, hi = self.v_bounds
        if not 0.0 < lo < hi:
            raise ValueError("speed window must satisfy 0 < v_lo < v_hi")


def steady_state_fuel_rate(v: float, vehicle_index: int, theta: float,
                           control: ControlParams, energy: EnergyParams) -> float:
    """Stationary fuel rate (kg/s) of one vehicle cruising at v.

    Followers sit at the equilibrium gap s*(v) = s0 + tau*v, the leader at
    free-flow drag; accelerations are zero.
    """
    if v <= 0.0:
        raise ValueError("steady-state fuel rate requires v > 0")
    if vehicle_index == 0:
        area = drag_area(None, True, energy)
    else:
        area = drag_area(control.standstill_gap + control.time_gap * v, False, energy)
    return fuel_rate(v, 0.0, area, theta, energy)


def route_cost(v: float, profile: RouteProfile, weights: EconWeights,
               control: ControlParams, energy: EnergyParams,
               n_vehicles: int) -> float:
    """Fuel/time cost of cruising the profile at constant speed v."""
    if v <= 0.0:
        raise ValueError("route cost requires v > 0")
    total = 0.0
    for length, theta in profile.segments:
        platoon_rate = sum(
            steady_state_fuel_rate(v, i, theta, control, energy)
            for i in range(n_vehicles)
        )
        total += length * (weights.lambda_f * platoon_rate + weights.lambda_t) / v
    return total


def _golden_section(cost, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - (b - a) * _INV_GOLDEN
    d = a + (b - a) * _INV_GOLDEN
    fc, fd = cost(c), cost(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * _INV_GOLDEN
            fc = cost(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * _INV_GOLDEN
            fd = cost(d)
    return 0.5 * (a + b)


def optimize_set_point(profile: RouteProfile, weights: EconWeights,
                       control: ControlParams, energy: EnergyParams,
                       n_vehicles: int, v_init: float) -> float:
    """Minimize the route cost over the admissible speed window.

    Golden-section search to 1e-3 m/s absolute tolerance, guarded by a
    0.1 m/s coarse grid (both endpoints included) with a local refinement
    around the best grid point; the overall cheapest candidate wins, so the
    result is warm-start independent.
    """
    lo, hi = weights.v_bounds
    if not lo <= v_init <= hi:
        raise ValueError(f"v_init={v_init!r} outside speed window [{lo!r}, {hi!r}]")

    def cost(v: float) -> float:
        value = route_cost(v, profile, weights, control, energy, n_vehicles)
        if not math.isfinite(value):
            raise ArithmeticError(f"non-finite route cost at v={v!r}")
        return value

    candidates = [_golden_section(cost, lo, hi, 1e-3)]
    n_grid = max(2, math.ceil((hi - lo) / 0.1) + 1)
    grid = [lo + (hi - lo) * k / (n_grid - 1) for k in range(n_grid)]
    best_grid = min(grid, key=cost)
    candidates.append(best_grid)
    candidates.append(
        _golden_section(cost, max(lo, best_grid - 0.1), min(hi, best_grid + 0.1), 1e-3)
    )
    return min(candidates, key=cost)
