import math
from dataclasses import replace

import numpy as np
import pytest

from platoonsim.controllers import (
    GainSpec,
    LeaderServoState,
    baseline_a_command,
    baseline_b_command,
    gains_from_spec,
    leader_servo_step,
    pid_command,
    pid_integral_update,
)


class TestGainMap:
    def test_default_spec(self):
        kp, ki, kd = gains_from_spec(GainSpec(zeta=1.0, omega_n=0.2, tau=1.0))
        assert kp == pytest.approx(0.4, rel=1e-14)
        assert ki == pytest.approx(0.04, rel=1e-14)
        assert kd == 1.0

    def test_direct_evaluation(self):
        kp, ki, kd = gains_from_spec(GainSpec(zeta=1.0, omega_n=1.0, tau=2.0))
        assert (kp, ki, kd) == (1.0, 0.5, 0.5)

    @pytest.mark.parametrize("seed", range(5))
    def test_kd_tau_identity(self, seed):
        rng = np.random.default_rng(seed)
        spec = GainSpec(zeta=rng.uniform(0.3, 2.0), omega_n=rng.uniform(0.05, 1.0),
                        tau=rng.uniform(0.5, 3.0))
        _, _, kd = gains_from_spec(spec)
        assert kd * spec.tau == pytest.approx(1.0, rel=1e-14)

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            GainSpec(zeta=0.0, omega_n=0.2, tau=1.0)


class TestPidCommand:
    def test_equilibrium(self, catalog):
        control, _ = catalog
        assert pid_command(0.0, 0.0, 0.0, control) == 0.0

    def test_proportional_only(self, catalog):
        control, _ = catalog
        assert pid_command(1.0, 0.0, 0.0, control) == pytest.approx(0.4, rel=1e-14)

    def test_derivative_term_unclipped_here(self, catalog):
        control, _ = catalog
        assert pid_command(0.0, 0.0, 7.0, control) == pytest.approx(7.0, rel=1e-14)


class TestBaselineCommands:
    def test_a_equilibrium(self, catalog):
        control, _ = catalog
        assert baseline_a_command(23.0, 18.0, control) == pytest.approx(0.0, abs=1e-12)

    def test_a_positive_error(self, catalog):
        control, _ = catalog
        c = replace(control, baseline_ks=0.4)
        assert baseline_a_command(25.0, 18.0, c) == pytest.approx(0.8, abs=1e-12)

    def test_a_negative_error_brakes(self, catalog):
        control, _ = catalog
        c = replace(control, baseline_ks=0.4)
        assert baseline_a_command(20.0, 18.0, c) == pytest.approx(-1.2, abs=1e-12)

    def test_b_matched_speeds(self, catalog):
        control, _ = catalog
        assert baseline_b_command(18.0, 18.0, control) == 0.0

    def test_b_direct_evaluation(self, catalog):
        control, _ = catalog
        c = replace(control, baseline_kv=0.4)
        assert baseline_b_command(25.0, 18.0, c) == pytest.approx(2.8, rel=1e-14)
        assert baseline_b_command(18.0, 25.0, c) == pytest.approx(-2.8, rel=1e-14)


class TestLeaderServo:
    def test_step_response_start_clipped(self, catalog):
        control, _ = catalog
        servo, u0 = leader_servo_step(LeaderServoState(18.0), 25.0, 0.01, control)
        # raw command 7/1.6 = 4.375 clipped to u_max
        assert u0 == control.u_max
        assert servo.v_cmd == pytest.approx(18.0 + 0.01 * 1.5, rel=1e-14)

    def test_converged(self, catalog):
        control, _ = catalog
        servo, u0 = leader_servo_step(LeaderServoState(25.0), 25.0, 0.01, control)
        assert u0 == 0.0
        assert servo.v_cmd == 25.0

    def test_unclipped_closed_form(self, catalog):
        # with the clip removed, v_cmd(t) = v* + (v0 - v*) exp(-t/T)
        control, _ = catalog
        c = replace(control, u_min=-100.0, u_max=100.0)
        servo = LeaderServoState(18.0)
        dt = 0.001
        for _ in range(1600):
            servo, _ = leader_servo_step(servo, 25.0, dt, c)
        expected = 25.0 - 7.0 * math.exp(-1.0)
        assert servo.v_cmd == pytest.approx(expected, abs=5e-3)
        assert expected == pytest.approx(22.4249, abs=1e-4)

    def test_monotone_no_overshoot_through_lag(self, catalog):
        # servo + actuator chain with t_lead = 4*tau_a: realized speed rises
        # monotonically and never exceeds the target
        control, _ = catalog
        c = replace(control, u_min=-100.0, u_max=100.0)
        servo = LeaderServoState(18.0)
        v, a = 18.0, 0.0
        dt = 0.002
        speeds = [v]
        for _ in range(30000):
            servo, u0 = leader_servo_step(servo, 25.0, dt, c)
            a += dt * (u0 - a) / c.tau_a
            v += dt * a
            speeds.append(v)
        speeds = np.array(speeds)
        assert np.all(np.diff(speeds) >= -1e-12)
        assert np.max(speeds) <= 25.0 + 1e-9
        assert speeds[-1] == pytest.approx(25.0, abs=1e-3)

    def test_commanded_jerk_bound(self, catalog):
        # |d2 v_cmd / dt2| <= dv / T^2 for the unclipped filter
        control, _ = catalog
        c = replace(control, u_min=-100.0, u_max=100.0)
        dv = 7.0
        servo = LeaderServoState(18.0)
        dt = 0.001
        v_cmd = [servo.v_cmd]
        for _ in range(20000):
            servo, _ = leader_servo_step(servo, 18.0 + dv, dt, c)
            v_cmd.append(servo.v_cmd)
        v_cmd = np.array(v_cmd)
        accel_cmd = np.diff(v_cmd) / dt
        jerk_cmd = np.abs(np.diff(accel_cmd)) / dt
        assert np.max(jerk_cmd) <= dv / c.t_lead ** 2 + 1e-6


class TestIntegralUpdate:
    def test_euler_accumulation(self):
        assert pid_integral_update(0.0, 1.0, 0.01, saturated=False) == pytest.approx(0.01)

    def test_windup_freeze(self):
        assert pid_integral_update(5.0, 1.0, 0.01, saturated=True) == 5.0

    def test_unwinding_allowed(self):
        assert pid_integral_update(5.0, -1.0, 0.01, saturated=True) == pytest.approx(4.99)

    def test_zero_integral_frozen_when_saturated(self):
        assert pid_integral_update(0.0, 3.0, 0.01, saturated=True) == 0.0
