import math
from dataclasses import replace

import numpy as np
import pytest

from platoonsim.energy import (
    FuelAccumulator,
    accumulate,
    drag_area,
    fuel_economy_metric,
    fuel_rate,
)

# Independent hand evaluation of the road-load terms at the catalog values,
# kept as frozen numbers rather than re-derived through the module under test.
ROLLING_FORCE_N = 1962.0  # 40000 * 9.81 * 0.005
FREE_FLOW_DRAG_AREA = 5.141  # 0.53 * 9.7
DRAG_FORCE_25 = 0.5 * 1.225 * 5.141 * 625.0  # 1968.0390625 N
IDLE_RATE = 1800.0 / (0.4 * 42.7e6)  # 1.0538641686e-4 kg/s
LEADER_RATE_25 = (25.0 * (ROLLING_FORCE_N + DRAG_FORCE_25)) / (0.4 * 42.7e6) + IDLE_RATE


class TestDragArea:
    def test_leader_free_flow(self, catalog):
        _, energy = catalog
        assert drag_area(None, True, energy) == pytest.approx(FREE_FLOW_DRAG_AREA, rel=1e-12)

    def test_follower_at_decay_length(self, catalog):
        _, energy = catalog
        area = drag_area(12.0, False, energy)
        assert area == pytest.approx(5.141 * (1.0 - 0.3 * math.exp(-1.0)), rel=1e-12)
        assert area == pytest.approx(4.5737, abs=2e-4)

    def test_interference_vanishes_at_large_gap(self, catalog):
        _, energy = catalog
        assert drag_area(1e6, False, energy) == pytest.approx(FREE_FLOW_DRAG_AREA, rel=1e-9)

    def test_negative_gap_rejected(self, catalog):
        _, energy = catalog
        with pytest.raises(ValueError):
            drag_area(-0.1, False, energy)

    def test_monotone_and_bounded(self, catalog):
        _, energy = catalog
        gaps = np.linspace(0.0, 200.0, 100)
        areas = [drag_area(float(s), False, energy) for s in gaps]
        assert all(b > a for a, b in zip(areas, areas[1:]))
        lower = energy.cd0_a * (1.0 - energy.alpha_foll)
        assert all(lower <= a < energy.cd0_a for a in areas)


class TestFuelRate:
    def test_idle_term_only(self, catalog):
        _, energy = catalog
        rate = fuel_rate(0.0, 0.0, energy.cd0_a, 0.0, energy)
        assert rate == pytest.approx(IDLE_RATE, rel=1e-12)
        assert rate == pytest.approx(1.054e-4, rel=1e-3)

    def test_leader_cruise_at_25(self, catalog):
        _, energy = catalog
        rate = fuel_rate(25.0, 0.0, drag_area(None, True, energy), 0.0, energy)
        assert rate == pytest.approx(LEADER_RATE_25, rel=1e-9)
        assert rate == pytest.approx(5.86e-3, rel=2e-3)

    def test_hard_braking_clamps_to_idle(self, catalog):
        _, energy = catalog
        rate = fuel_rate(25.0, -5.0, energy.cd0_a, 0.0, energy)
        assert rate == pytest.approx(IDLE_RATE, rel=1e-12)

    def test_negative_speed_rejected(self, catalog):
        _, energy = catalog
        with pytest.raises(ValueError):
            fuel_rate(-1.0, 0.0, energy.cd0_a, 0.0, energy)

    def test_monotone_in_speed(self, catalog):
        _, energy = catalog
        rates = [fuel_rate(v, 0.0, energy.cd0_a, 0.0, energy)
                 for v in np.linspace(0.0, 30.0, 31)]
        assert all(b > a for a, b in zip(rates, rates[1:]))

    def test_grade_adds_load(self, catalog):
        _, energy = catalog
        flat = fuel_rate(20.0, 0.0, energy.cd0_a, 0.0, energy)
        uphill = fuel_rate(20.0, 0.0, energy.cd0_a, 0.02, energy)
        assert uphill > flat

    def test_tighter_spacing_lowers_steady_fuel(self, catalog):
        _, energy = catalog
        near = fuel_rate(25.0, 0.0, drag_area(12.0, False, energy), 0.0, energy)
        far = fuel_rate(25.0, 0.0, drag_area(40.0, False, energy), 0.0, energy)
        assert near < far


class TestAccumulate:
    def test_rectangle_rule(self):
        acc = accumulate(FuelAccumulator(), 5.86e-3, 25.0, 1.0)
        assert acc.fuel_mass == pytest.approx(5.86e-3)
        assert acc.distance == pytest.approx(25.0)

    def test_zero_rate(self):
        acc = accumulate(FuelAccumulator(1.0, 100.0), 0.0, 10.0, 0.5)
        assert acc.fuel_mass == 1.0
        assert acc.distance == pytest.approx(105.0)

    def test_long_cruise_magnitude(self, catalog):
        # 4000 s at the 25 m/s leader rate: ~23.4 kg over 100 km
        _, energy = catalog
        acc = FuelAccumulator()
        for _ in range(4000):
            acc = accumulate(acc, LEADER_RATE_25, 25.0, 1.0)
        assert acc.distance == pytest.approx(1e5, rel=1e-12)
        assert acc.fuel_mass == pytest.approx(23.43, abs=0.05)

    def test_nonpositive_dt_rejected(self):
        with pytest.raises(ValueError):
            accumulate(FuelAccumulator(), 1.0, 1.0, 0.0)


class TestFuelEconomyMetric:
    def test_unit_conversion(self, catalog):
        _, energy = catalog
        metric = fuel_economy_metric([FuelAccumulator(23.4, 1e5)], energy)
        assert metric == pytest.approx(23.4 / 0.84, rel=1e-12)
        assert metric == pytest.approx(27.857, abs=2e-3)

    def test_zero_fuel(self, catalog):
        _, energy = catalog
        assert fuel_economy_metric([FuelAccumulator(0.0, 1e5)], energy) == 0.0

    def test_duplication_invariance(self, catalog):
        _, energy = catalog
        one = fuel_economy_metric([FuelAccumulator(23.4, 1e5)], energy)
        two = fuel_economy_metric([FuelAccumulator(23.4, 1e5)] * 2, energy)
        assert two == pytest.approx(one, rel=1e-12)

    def test_zero_distance_rejected(self, catalog):
        _, energy = catalog
        with pytest.raises(ValueError):
            fuel_economy_metric([FuelAccumulator(0.0, 0.0)], energy)
