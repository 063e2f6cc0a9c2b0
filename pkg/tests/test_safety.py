import math

import numpy as np
import pytest

from platoonsim.safety import (
    BarrierEval,
    FeasibleInterval,
    affine_constraint,
    barrier,
    discrete_one_step_check,
    exact_affine_constraint,
    feasible_interval,
    project,
)


def lagged_flow(s0, v0, vp0, a0, ap0, u, up, tau_a, t):
    """Closed-form state at time t under constant commands (u, up).

    a(t) = u + (a0-u)e^(-t/tau_a); v integrates a; s integrates vp - v.
    Valid for negative t as well, which makes centered finite differences of
    the barrier along the true flow an independent oracle.
    """

    def accel(a_init, cmd):
        return cmd + (a_init - cmd) * math.exp(-t / tau_a)

    def speed(v_init, a_init, cmd):
        return v_init + cmd * t + tau_a * (a_init - cmd) * (1.0 - math.exp(-t / tau_a))

    def travel(v_init, a_init, cmd):
        return (v_init * t + 0.5 * cmd * t * t
                + tau_a * (a_init - cmd) * (t - tau_a * (1.0 - math.exp(-t / tau_a))))

    s = s0 + travel(vp0, ap0, up) - travel(v0, a0, u)
    return s, speed(v0, a0, u), speed(vp0, ap0, up), accel(a0, u), accel(ap0, up)


def barrier_along_flow(state, u, up, params, t):
    s, v, vp, a, ap = lagged_flow(*state, u, up, params.tau_a, t)
    return barrier(s, v, vp, a, ap, params).h


class TestBarrier:
    def test_equilibrium_value(self, catalog):
        control, _ = catalog
        be = barrier(23.0, 18.0, 18.0, 0.0, 0.0, control)
        assert be.h == pytest.approx(7.2, abs=1e-9)
        assert not be.closing

    def test_standstill_boundary(self, catalog):
        control, _ = catalog
        assert barrier(5.0, 0.0, 0.0, 0.0, 0.0, control).h == pytest.approx(0.0, abs=1e-12)

    def test_closing_evaluation(self, catalog):
        control, _ = catalog
        be = barrier(30.0, 20.0, 15.0, 0.0, 0.0, control)
        # 30 - 5 - 0.6*20 - 5^2/10
        assert be.h == pytest.approx(10.5, abs=1e-9)
        assert be.closing

    def test_closing_flag_exact(self, catalog):
        control, _ = catalog
        assert not barrier(30.0, 15.0, 15.0, 0.0, 0.0, control).closing
        assert barrier(30.0, 15.0 + 1e-12, 15.0, 0.0, 0.0, control).closing

    def test_continuity_across_switching_surface(self, catalog):
        control, _ = catalog
        lo = barrier(30.0, 20.0 - 1e-9, 20.0, 0.5, -0.5, control)
        hi = barrier(30.0, 20.0 + 1e-9, 20.0, 0.5, -0.5, control)
        assert lo.h == pytest.approx(hi.h, abs=1e-7)
        assert lo.h_dot == pytest.approx(hi.h_dot, abs=1e-7)

    @pytest.mark.parametrize("seed", range(6))
    def test_h_dot_matches_flow_derivative(self, catalog, seed):
        control, _ = catalog
        rng = np.random.default_rng(seed)
        state = (rng.uniform(10, 50), rng.uniform(5, 28), rng.uniform(5, 28),
                 rng.uniform(-4, 1.4), rng.uniform(-4, 1.4))
        if abs(state[1] - state[2]) < 0.5:  # stay off the switching surface
            state = (state[0], state[1] + 1.0, state[2], state[3], state[4])
        u, up = rng.uniform(-5, 1.5), rng.uniform(-5, 1.5)
        eps = 1e-5
        h_plus = barrier_along_flow(state, u, up, control, eps)
        h_minus = barrier_along_flow(state, u, up, control, -eps)
        numeric = (h_plus - h_minus) / (2 * eps)
        be = barrier(*state, control)
        assert be.h_dot == pytest.approx(numeric, rel=1e-6, abs=1e-6)


class TestExactAffineConstraint:
    @pytest.mark.parametrize("seed", range(10))
    def test_matches_numeric_barrier_condition(self, catalog, seed):
        # psi(u) = h'' + k1 h' + k2 h must equal A*u - b along the true flow.
        control, _ = catalog
        rng = np.random.default_rng(100 + seed)
        state = (rng.uniform(8, 60), rng.uniform(3, 28), rng.uniform(3, 28),
                 rng.uniform(-4.5, 1.4), rng.uniform(-4.5, 1.4))
        if abs(state[1] - state[2]) < 0.5:
            state = (state[0], state[1] + 1.0, state[2], state[3], state[4])
        u, up = rng.uniform(-5, 1.5), rng.uniform(-5, 1.5)
        eps = 1e-4
        h = [barrier_along_flow(state, u, up, control, k * eps) for k in (-2, -1, 0, 1, 2)]
        h_dot = (h[0] - 8 * h[1] + 8 * h[3] - h[4]) / (12 * eps)
        h_ddot = (-h[0] + 16 * h[1] - 30 * h[2] + 16 * h[3] - h[4]) / (12 * eps * eps)
        psi = h_ddot + control.cbf_k1 * h_dot + control.cbf_k2 * h[2]
        a_coef, b_coef = exact_affine_constraint(*state, up, control)
        assert a_coef * u - b_coef == pytest.approx(psi, rel=1e-4, abs=1e-5)

    def test_command_coefficient_is_nonpositive(self, catalog):
        control, _ = catalog
        a_coef, _ = exact_affine_constraint(23.0, 18.0, 18.0, 0.0, 0.0, 0.0, control)
        assert a_coef == pytest.approx(-1.5)
        a_coef, _ = exact_affine_constraint(20.0, 20.0, 15.0, 0.0, 0.0, 0.0, control)
        assert a_coef < -1.5

    def test_equilibrium_upper_bound_inactive(self, catalog):
        control, _ = catalog
        a_coef, b_coef = exact_affine_constraint(23.0, 18.0, 18.0, 0.0, 0.0, 0.0, control)
        interval = feasible_interval(a_coef, b_coef, control)
        assert interval.feasible
        assert interval == FeasibleInterval(control.u_min, control.u_max, True)


class TestPublishedAffineConstraint:
    def test_non_closing_coefficient(self, catalog):
        control, _ = catalog
        a_coef, _ = affine_constraint(30.0, 15.0, 15.0, 0.0, 0.0, 0.0, control)
        assert a_coef == pytest.approx(1.5, abs=1e-12)  # tau_min / tau_a

    def test_equilibrium_rhs(self, catalog):
        control, _ = catalog
        a_coef, b_coef = affine_constraint(23.0, 18.0, 18.0, 0.0, 0.0, 0.0, control)
        assert b_coef == pytest.approx(-28.8, abs=1e-9)  # only -k2*h survives

    def test_closing_coefficient(self, catalog):
        control, _ = catalog
        a_coef, _ = affine_constraint(30.0, 20.0, 15.0, 0.0, 0.0, 0.0, control)
        assert a_coef == pytest.approx(1.5 + 20.0 / 2.0, abs=1e-12)


class TestFeasibleInterval:
    def test_inactive_lower_bound(self, catalog):
        control, _ = catalog
        interval = feasible_interval(1.5, -28.8, control)
        assert interval == FeasibleInterval(-5.0, 1.5, True)

    def test_infeasible(self, catalog):
        control, _ = catalog
        interval = feasible_interval(2.0, 4.0, control)
        assert interval.lower == 2.0 and interval.upper == 1.5
        assert not interval.feasible

    def test_negative_coefficient_upper_bound(self, catalog):
        control, _ = catalog
        interval = feasible_interval(-1.0, 5.0, control)
        assert interval == FeasibleInterval(-5.0, -5.0, True)

    def test_degenerate_zero_coefficient_infeasible(self, catalog):
        control, _ = catalog
        interval = feasible_interval(0.0, 1.0, control)
        assert not interval.feasible

    def test_degenerate_zero_coefficient_unconstrained(self, catalog):
        control, _ = catalog
        interval = feasible_interval(0.0, -1.0, control)
        assert interval == FeasibleInterval(-5.0, 1.5, True)
        assert feasible_interval(0.0, 0.0, control).feasible


class TestProject:
    def test_upper_clamp(self, catalog):
        control, _ = catalog
        applied, clipped = project(2.0, FeasibleInterval(-1.0, 1.5, True), control)
        assert applied == 1.5 and clipped

    def test_interior_point(self, catalog):
        control, _ = catalog
        applied, clipped = project(0.3, FeasibleInterval(-5.0, 1.5, True), control)
        assert applied == 0.3 and not clipped

    def test_infeasible_falls_back_to_max_braking(self, catalog):
        control, _ = catalog
        applied, clipped = project(0.0, FeasibleInterval(2.0, 1.5, False), control)
        assert applied == control.u_min and clipped

    def test_idempotent_clamp(self, catalog):
        control, _ = catalog
        interval = FeasibleInterval(-2.0, 0.8, True)
        for nominal in (0.9, 5.0, 100.0):
            applied, _ = project(nominal, interval, control)
            assert applied == interval.upper

    @pytest.mark.parametrize("seed", range(4))
    def test_output_always_within_actuator_range(self, catalog, seed):
        control, _ = catalog
        rng = np.random.default_rng(seed)
        for _ in range(200):
            a_coef = rng.uniform(-20, 20)
            b_coef = rng.uniform(-100, 100)
            interval = feasible_interval(a_coef, b_coef, control)
            applied, _ = project(rng.uniform(-50, 50), interval, control)
            assert control.u_min <= applied <= control.u_max


class TestDiscreteOneStepCheck:
    def test_stationary_h(self):
        assert discrete_one_step_check(7.2, 7.2, 2.0, 0.01)

    def test_decay_violation(self):
        assert not discrete_one_step_check(1.0, 0.97, 2.0, 0.01)

    def test_boundary(self):
        assert discrete_one_step_check(0.0, 0.0, 2.0, 0.01)
        assert discrete_one_step_check(0.0, 0.5, 2.0, 0.01)

    def test_requires_small_kappa_dt(self):
        with pytest.raises(ValueError):
            discrete_one_step_check(1.0, 1.0, 200.0, 0.01)


class TestClosedLoopInvariance:
    def test_feasible_run_keeps_barrier_nonnegative(self, preset_run):
        from platoonsim.params import Controller

        res = preset_run("c2-n4", Controller.PID)
        assert len(res.infeasibility_events) == 0
        assert res.metrics.h_min >= -1e-6
