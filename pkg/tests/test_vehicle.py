"""Closed-loop 6-DOF simulation: integrator physics, force model, scenarios."""

import math

import numpy as np
import pytest

from coaxtail import quat
from coaxtail.aero import TandemConfig, WingMode, WingPanel
from coaxtail.control import ActuatorCommand
from coaxtail.errors import ConfigError, SimulationFault
from coaxtail.propulsion import PropellerTable
from coaxtail.vehicle import (
    LambdaSchedule,
    ScenarioSpec,
    SimLog,
    VehicleParams,
    VehicleState,
    WindProfile,
    WingSchedule,
    _drag_body,
    _panel_cn,
    _wing_wrench,
    measured_pitch,
    realized_wrench,
    run_scenario,
    step_6dof,
    transition_profile,
    wind_force,
)

RHO = 1.225


def resting_state(z=2.0, mode=WingMode.RETRACTED):
    return VehicleState.at_rest(np.array([0.0, 0.0, z]), mode)


def pitched_quat(theta):
    return quat.from_axis_angle(np.array([0.0, 1.0, 0.0]), theta)


class TestRigidStep:
    def test_free_fall_matches_analytic(self):
        params = VehicleParams()
        state = resting_state(z=100.0)
        dt = 1e-3
        for _ in range(1000):
            state = step_6dof(state, np.zeros(3), np.zeros(3), params, dt)
        t = 1.0
        assert state.velocity[2] == pytest.approx(-9.81 * t, abs=1e-9)
        assert state.position[2] == pytest.approx(100.0 - 0.5 * 9.81 * t * t,
                                                  abs=1e-9)
        assert np.allclose(state.orientation, [1, 0, 0, 0], atol=1e-12)

    def test_free_body_coasts(self):
        """No force and no gravity: translation and spin are untouched for
        10 s of integration."""
        params = VehicleParams(gravity=0.0)
        state = VehicleState(
            position=np.zeros(3), velocity=np.array([1.0, -2.0, 0.5]),
            orientation=np.array([1.0, 0.0, 0.0, 0.0]),
            body_rate=np.array([0.0, 0.0, 1.3]))  # principal axis spin
        for _ in range(10000):
            state = step_6dof(state, np.zeros(3), np.zeros(3), params, 1e-3)
        assert np.allclose(state.velocity, [1.0, -2.0, 0.5], atol=1e-12)
        assert np.allclose(state.body_rate, [0.0, 0.0, 1.3], atol=1e-12)

    def test_weight_balanced_by_body_thrust(self):
        params = VehicleParams()
        state = resting_state()
        hold = np.array([0.0, 0.0, params.mass * params.gravity])
        for _ in range(500):
            state = step_6dof(state, hold, np.zeros(3), params, 1e-3)
        assert np.allclose(state.position, [0, 0, 2.0], atol=1e-12)
        assert np.allclose(state.velocity, 0.0, atol=1e-12)

    def test_dt_bounds_enforced(self):
        params = VehicleParams()
        state = resting_state()
        for dt in (0.0, -1e-3, 2e-3):
            with pytest.raises(ConfigError):
                step_6dof(state, np.zeros(3), np.zeros(3), params, dt)

    def test_nonfinite_inputs_fault(self):
        params = VehicleParams()
        state = resting_state()
        with pytest.raises(SimulationFault):
            step_6dof(state, np.array([np.nan, 0, 0]), np.zeros(3), params,
                      1e-3)
        with pytest.raises(SimulationFault):
            step_6dof(state, np.zeros(3), np.array([0, np.inf, 0]), params,
                      1e-3)

    def test_state_validation(self):
        with pytest.raises(SimulationFault):
            VehicleState(position=np.zeros(3), velocity=np.zeros(3),
                         orientation=np.array([1.0, 0.0, 0.1, 0.0]),
                         body_rate=np.zeros(3))
        with pytest.raises(SimulationFault):
            VehicleState(position=np.array([np.nan, 0, 0]),
                         velocity=np.zeros(3),
                         orientation=np.array([1.0, 0, 0, 0]),
                         body_rate=np.zeros(3))

    def test_torque_free_tumble_conserves_invariants(self):
        """Asymmetric-inertia tumble: rotational energy and the world-frame
        angular momentum vector must survive 10 s of RK4, and the fall is
        exactly ballistic."""
        params = VehicleParams()
        inertia = params.inertia
        state = VehicleState(
            position=np.zeros(3), velocity=np.array([3.0, 1.0, 2.0]),
            orientation=np.array([1.0, 0.0, 0.0, 0.0]),
            body_rate=np.array([2.0, -1.5, 3.0]))

        def invariants(s):
            e_rot = 0.5 * float(s.body_rate @ inertia @ s.body_rate)
            l_world = quat.rotate(s.orientation, inertia @ s.body_rate)
            return e_rot, l_world

        e0, l0 = invariants(state)
        dt = 1e-3
        for _ in range(10000):
            state = step_6dof(state, np.zeros(3), np.zeros(3), params, dt)
        e1, l1 = invariants(state)
        assert abs(e1 - e0) / e0 < 1e-6
        assert np.linalg.norm(l1 - l0) / np.linalg.norm(l0) < 1e-6
        assert abs(np.linalg.norm(state.orientation) - 1.0) < 1e-9
        assert state.velocity[0] == pytest.approx(3.0, abs=1e-9)
        assert state.velocity[2] == pytest.approx(2.0 - 9.81 * 10.0, abs=1e-6)

    def test_step_is_deterministic(self):
        params = VehicleParams()
        state = VehicleState(
            position=np.array([1.0, 2.0, 3.0]),
            velocity=np.array([0.3, -0.2, 0.1]),
            orientation=quat.from_axis_angle(np.array([1.0, 1.0, 0.0])
                                             / math.sqrt(2.0), 0.4),
            body_rate=np.array([0.5, 0.2, -0.7]))
        f = np.array([0.1, -0.2, 11.0])
        tau = np.array([0.01, 0.02, -0.005])
        a = step_6dof(state, f, tau, params, 1e-3)
        b = step_6dof(state, f, tau, params, 1e-3)
        for name in ("position", "velocity", "orientation", "body_rate"):
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_halving_dt_changes_little(self):
        # RK4 is O(dt^4); one tumbling second at 1 ms vs 0.5 ms
        params = VehicleParams()
        def run(dt):
            s = VehicleState(
                position=np.zeros(3), velocity=np.array([1.0, 0.0, 0.0]),
                orientation=np.array([1.0, 0.0, 0.0, 0.0]),
                body_rate=np.array([2.0, -1.5, 3.0]))
            for _ in range(int(round(1.0 / dt))):
                s = step_6dof(s, np.zeros(3), np.zeros(3), params, dt)
            return s
        a, b = run(1e-3), run(5e-4)
        assert np.allclose(a.orientation, b.orientation, atol=1e-9)
        assert np.allclose(a.position, b.position, atol=1e-9)


class TestMeasuredPitch:
    def test_identity_is_level(self):
        assert measured_pitch(np.array([1.0, 0.0, 0.0, 0.0])) == 0.0

    def test_pure_pitch_recovered(self):
        for theta in (-1.2, -0.5, 0.0, 0.3):
            assert measured_pitch(pitched_quat(theta)) == pytest.approx(
                theta, abs=1e-12)

    def test_body_yaw_does_not_register(self):
        q = quat.multiply(pitched_quat(-0.8),
                          quat.from_axis_angle(np.array([0.0, 0.0, 1.0]), 0.4))
        assert measured_pitch(q) == pytest.approx(-0.8, abs=1e-12)


class TestWindForce:
    def test_quadratic_oracle(self):
        state = resting_state()
        f = wind_force(state, np.array([5.0, 0.0, 0.0]), 0.1, 1.0, RHO)
        assert f[0] == pytest.approx(0.5 * RHO * 0.1 * 25.0, rel=1e-12)
        assert f[1] == 0.0 and f[2] == 0.0

    def test_quadratic_in_speed_linear_in_area(self):
        state = resting_state()
        base = wind_force(state, np.array([4.0, 0.0, 0.0]), 0.05, 1.0, RHO)
        double_v = wind_force(state, np.array([8.0, 0.0, 0.0]), 0.05, 1.0,
                              RHO)
        double_a = wind_force(state, np.array([4.0, 0.0, 0.0]), 0.10, 1.0,
                              RHO)
        assert double_v[0] == pytest.approx(4.0 * base[0], rel=1e-12)
        assert double_a[0] == pytest.approx(2.0 * base[0], rel=1e-12)

    def test_zero_relative_flow(self):
        state = resting_state()
        state.velocity = np.array([3.0, -2.0, 1.0])
        f = wind_force(state, state.velocity.copy(), 0.1, 1.0, RHO)
        assert np.all(f == 0.0)


class TestTransitionProfile:
    def test_exact_breakpoints(self):
        assert transition_profile(0.0) == math.radians(-10.0)
        assert transition_profile(1.999) == math.radians(-10.0)
        assert transition_profile(12.0) == pytest.approx(math.radians(-45.0),
                                                         abs=1e-12)
        assert transition_profile(22.0) == math.radians(-80.0)
        assert transition_profile(42.0) == math.radians(-80.0)
        assert transition_profile(43.0) == pytest.approx(math.radians(-40.0),
                                                         abs=1e-12)
        assert transition_profile(44.0) == 0.0
        assert transition_profile(50.0) == 0.0

    def test_negative_time_rejected(self):
        with pytest.raises(ConfigError):
            transition_profile(-0.1)

    def test_ramp_is_monotone(self):
        ts = np.linspace(2.0, 22.0, 400)
        vals = [transition_profile(float(t)) for t in ts]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


class TestWindProfile:
    def test_ramp_envelope(self):
        w = WindProfile(speed=5.0, direction=(1.0, 0.0, 0.0), start=2.0,
                        ramp=0.5)
        assert np.all(w.vector(1.99) == 0.0)
        assert w.vector(2.25)[0] == pytest.approx(2.5, rel=1e-12)
        assert w.vector(3.0)[0] == pytest.approx(5.0, rel=1e-12)

    def test_stop_ramps_back_down(self):
        w = WindProfile(speed=4.0, direction=(0.0, 1.0, 0.0), start=0.0,
                        stop=5.0, ramp=0.5)
        assert w.vector(4.9)[1] == pytest.approx(4.0, rel=1e-12)
        assert w.vector(5.25)[1] == pytest.approx(2.0, rel=1e-12)
        assert np.all(w.vector(6.0) == 0.0)

    def test_direction_normalized(self):
        w = WindProfile(speed=2.0, direction=(3.0, 4.0, 0.0))
        assert np.linalg.norm(w.direction) == pytest.approx(1.0, rel=1e-12)
        assert w.vector(10.0)[0] == pytest.approx(1.2, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ConfigError):
            WindProfile(speed=-1.0)
        with pytest.raises(ConfigError):
            WindProfile(speed=1.0, direction=(0.0, 0.0, 0.0))


class TestSchedules:
    def test_fixed_wing_schedule(self):
        s = WingSchedule(kind="fixed", mode=WingMode.EXTENDED)
        assert s.mode_at(0.0) is WingMode.EXTENDED
        assert s.mode_at(-1.5) is WingMode.EXTENDED

    def test_pitch_wing_schedule_threshold(self):
        s = WingSchedule(kind="pitch", extend_below=math.radians(-20.0))
        assert s.mode_at(math.radians(-19.9)) is WingMode.RETRACTED
        assert s.mode_at(math.radians(-20.1)) is WingMode.EXTENDED

    def test_bad_kind_rejected(self):
        with pytest.raises(ConfigError):
            WingSchedule(kind="sometimes")

    def test_lambda_blend(self):
        lam = LambdaSchedule()
        assert lam.value(0.0) == 1.0
        assert lam.value(math.radians(-30.0)) == 1.0
        assert lam.value(math.radians(-50.0)) == pytest.approx(0.65,
                                                               rel=1e-12)
        assert lam.value(math.radians(-70.0)) == pytest.approx(0.3, rel=1e-12)
        assert lam.value(math.radians(-85.0)) == pytest.approx(0.3, rel=1e-12)
        grid = np.linspace(0.2, -1.5, 300)
        vals = [lam.value(p) for p in grid]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_lambda_validation(self):
        with pytest.raises(ConfigError):
            LambdaSchedule(lam_hover=1.2)
        with pytest.raises(ConfigError):
            LambdaSchedule(pitch_start=-1.0, pitch_end=-0.5)


class TestWingWrench:
    def tandem(self):
        return VehicleParams().tandem

    def test_retracted_is_exactly_zero(self):
        fx, ty = _wing_wrench(np.array([-8.0, 0.0, 3.0]), self.tandem(),
                              WingMode.RETRACTED)
        assert fx == 0.0 and ty == 0.0

    def test_linear_range_matches_static_model(self):
        """Pure axial inflow puts each panel at its incidence angle, where
        the coefficient is the plain lift line used by the static tool."""
        tandem = self.tandem()
        v = 12.0
        fx, ty = _wing_wrench(np.array([0.0, 0.0, v]), tandem,
                              WingMode.EXTENDED)
        q = 0.5 * RHO * v * v
        f_front = q * 0.048 * (2.2 * math.radians(4.5) + 0.32)
        f_rear = q * 0.056 * (2.2 * math.radians(2.0) + 0.32)
        assert fx == pytest.approx(f_front + f_rear, rel=1e-12)
        assert ty == pytest.approx(0.24 * f_front - 0.30 * f_rear, rel=1e-12)

    def test_spanwise_flow_produces_nothing(self):
        fx, ty = _wing_wrench(np.array([0.0, 25.0, 0.0]), self.tandem(),
                              WingMode.EXTENDED)
        assert fx == 0.0 and ty == 0.0

    def test_pure_crossflow_pushes_downwind(self):
        # alpha near +90 deg: post-stall plate force, directed along +x
        fx, _ = _wing_wrench(np.array([-6.0, 0.0, 0.0]), self.tandem(),
                             WingMode.EXTENDED)
        q = 0.5 * RHO * 36.0
        expected = q * (0.048 * 1.2 * math.sin(math.pi / 2
                                               + math.radians(4.5))
                        + 0.056 * 1.2 * math.sin(math.pi / 2
                                                 + math.radians(2.0)))
        assert fx == pytest.approx(expected, rel=1e-12)
        assert fx > 0.0

    def test_coefficient_is_continuous(self):
        panel = self.tandem().front
        grid = np.radians(np.arange(-180.0, 180.01, 0.05))
        vals = np.array([_panel_cn(panel, float(a)) for a in grid])
        assert np.max(np.abs(np.diff(vals))) < 3e-3
        assert np.max(np.abs(vals)) < 1.35

    def test_coefficient_matches_lift_line_in_range(self):
        panel = self.tandem().front
        for deg in (-5.0, -2.0, 0.0, 4.0, 10.0):
            a = math.radians(deg)
            assert _panel_cn(panel, a) == panel.lift_slope * a + panel.cl0


class TestDragAndWrench:
    def test_per_axis_drag_signs(self):
        f = _drag_body(np.array([3.0, -2.0, 1.0]), 0.05, 0.02, 1.0, RHO)
        assert f[0] == pytest.approx(-0.5 * RHO * 0.05 * 9.0, rel=1e-12)
        assert f[1] == pytest.approx(+0.5 * RHO * 0.05 * 4.0, rel=1e-12)
        assert f[2] == pytest.approx(-0.5 * RHO * 0.02 * 1.0, rel=1e-12)
        assert np.all(_drag_body(np.zeros(3), 0.05, 0.02, 1.0, RHO) == 0.0)

    def test_static_thrust_and_torque_maps(self):
        params = VehicleParams()
        cmd = ActuatorCommand(t_d1=600.0, t_d2=900.0, m_dx=50.0, m_dy=-80.0,
                              d_1=0.2, d_2=0.1)
        force, torque = realized_wrench(resting_state(), params, cmd,
                                        np.zeros(3), WingMode.RETRACTED)
        a = params.alloc
        assert force[2] == pytest.approx(a.c_t1 * 600 + a.c_t2 * 900,
                                         rel=1e-12)
        assert force[0] == 0.0 and force[1] == 0.0
        assert torque[0] == pytest.approx(a.c_m * 50.0, rel=1e-12)
        # elevons see zero dynamic pressure at rest, so only modulation
        assert torque[1] == pytest.approx(a.c_m * -80.0, rel=1e-12)
        assert torque[2] == pytest.approx(-a.k_t1 * 600 + a.k_t2 * 900,
                                          rel=1e-12)

    def test_elevons_reach_nominal_authority_at_reference_speed(self):
        params = VehicleParams()
        state = resting_state()
        state.velocity = np.array([0.0, 0.0, -15.6])  # q matches q_ref
        cmd = ActuatorCommand(d_1=0.3, d_2=-0.1)
        _, torque = realized_wrench(state, params, cmd, np.zeros(3),
                                    WingMode.RETRACTED)
        assert torque[1] == pytest.approx(params.alloc.k_ey * 0.2, rel=1e-9)
        assert torque[2] == pytest.approx(params.alloc.k_ez * 0.4, rel=1e-9)

    def test_descending_drag_opposes_motion(self):
        params = VehicleParams()
        state = resting_state()
        state.velocity = np.array([0.0, 0.0, -10.0])
        force, _ = realized_wrench(state, params, ActuatorCommand(),
                                   np.zeros(3), WingMode.RETRACTED)
        expected = 0.5 * RHO * params.drag_cd * params.axial_area * 100.0
        assert force[2] == pytest.approx(expected, rel=1e-12)

    def test_aft_table_thrust(self):
        """A constant-coefficient table makes the aft rotor quadratic in
        commanded speed regardless of inflow."""
        table = PropellerTable.single(diameter=0.1778, j=np.array([0.5]),
                                      ct=np.array([0.09]),
                                      cp=np.array([0.05]))
        params = VehicleParams(aft_table=table, aft_speed_per_count=0.2)
        cmd = ActuatorCommand(t_d2=800.0)
        force, _ = realized_wrench(resting_state(), params, cmd, np.zeros(3),
                                   WingMode.RETRACTED)
        n = 0.2 * 800.0
        assert force[2] == pytest.approx(0.09 * RHO * n * n * 0.1778 ** 4,
                                         rel=1e-12)
        zero, _ = realized_wrench(resting_state(), params, ActuatorCommand(),
                                  np.zeros(3), WingMode.RETRACTED)
        assert zero[2] == 0.0


class TestDragOnlyDescent:
    def test_terminal_speed_bounded_and_monotone(self):
        """Free fall with quadratic drag: speed rises monotonically toward
        sqrt(2 m g / (rho Cd A)) and never exceeds it."""
        params = VehicleParams()
        v_t = math.sqrt(2.0 * params.mass * params.gravity
                        / (RHO * params.drag_cd * params.axial_area))
        state = resting_state(z=0.0)
        speeds = []
        for _ in range(12000):
            u = state.velocity  # identity attitude, body equals world
            drag = _drag_body(u, params.lateral_area, params.axial_area,
                              params.drag_cd, RHO)
            state = step_6dof(state, drag, np.zeros(3), params, 1e-3)
            speeds.append(-state.velocity[2])
        speeds = np.array(speeds)
        assert np.all(np.diff(speeds) > 0.0)
        assert np.all(speeds < v_t)
        assert speeds[-1] == pytest.approx(v_t, rel=0.02)


def hover_spec(duration=8.0, **kw):
    return ScenarioSpec(name="hover", mode="hover", duration=duration,
                        position=(0.0, 0.0, 1.5),
                        start_position=(0.1, -0.1, 1.3), **kw)


def wind_spec(mode, duration=12.0, speed=5.0):
    return ScenarioSpec(
        name=f"wind_{mode.value}", mode="hover", duration=duration,
        position=(0.0, 0.0, 1.5),
        wind=WindProfile(speed=speed, direction=(1.0, 0.0, 0.0), start=2.0),
        wing=WingSchedule(kind="fixed", mode=mode))


class TestScenarios:
    def test_spec_validation(self):
        with pytest.raises(ConfigError):
            ScenarioSpec(mode="loiter")
        with pytest.raises(ConfigError):
            ScenarioSpec(duration=0.0)
        with pytest.raises(ConfigError):
            ScenarioSpec(dt=2e-3)
        with pytest.raises(ConfigError):
            ScenarioSpec(dt=3e-4)  # 1/dt not an integer rate
        assert ScenarioSpec(dt=5e-4).base_rate == 2000

    def test_hover_settles_to_setpoint(self):
        log = run_scenario(hover_spec(), VehicleParams())
        err = np.linalg.norm(log.position[-1] - np.array([0, 0, 1.5]))
        assert err < 0.01
        assert np.linalg.norm(log.velocity[-1]) < 0.01
        assert log.t.size == 8000
        assert log.t[-1] == pytest.approx(7.999, abs=1e-12)

    def test_hover_at_finer_step(self):
        spec = hover_spec(duration=2.0, dt=5e-4)
        log = run_scenario(spec, VehicleParams())
        assert log.t.size == 4000
        assert np.all(np.isfinite(log.state))

    def test_wind_retracted_beats_extended(self):
        params = VehicleParams()
        target = np.array([0.0, 0.0, 1.5])
        dev = {}
        for mode in (WingMode.EXTENDED, WingMode.RETRACTED):
            log = run_scenario(wind_spec(mode), params)
            dev[mode] = log.peak_deviation(target, t_min=2.0)
        assert dev[WingMode.RETRACTED] <= 0.5 * dev[WingMode.EXTENDED]

    def test_wind_deviation_grows_with_wing_area(self):
        target = np.array([0.0, 0.0, 1.5])
        devs = []
        for scale in (0.6, 1.0, 1.4):
            base = VehicleParams()
            tandem = TandemConfig(
                front=WingPanel(area=0.048 * scale, lift_slope=2.2, cl0=0.32,
                                incidence=math.radians(4.5), arm=0.24),
                rear=WingPanel(area=0.056 * scale, lift_slope=2.2, cl0=0.32,
                               incidence=math.radians(2.0), arm=0.30))
            params = VehicleParams(tandem=tandem)
            log = run_scenario(wind_spec(WingMode.EXTENDED, duration=8.0),
                               params)
            devs.append(log.peak_deviation(target, t_min=2.0))
        assert devs[0] < devs[1] < devs[2]

    def test_wind_peak_converged_in_dt(self):
        # halving the step moves the wind-scenario peak by under 1 %
        target = np.array([0.0, 0.0, 1.5])
        devs = []
        for dt in (1e-3, 5e-4):
            spec = ScenarioSpec(
                name="wind", mode="hover", duration=8.0, dt=dt,
                position=tuple(target),
                wind=WindProfile(speed=5.0, direction=(1.0, 0.0, 0.0),
                                 start=2.0),
                wing=WingSchedule(kind="fixed", mode=WingMode.EXTENDED))
            devs.append(run_scenario(spec, VehicleParams())
                        .peak_deviation(target, t_min=2.0))
        assert abs(devs[1] - devs[0]) / devs[0] < 0.01

    def test_transition_smoke_tracks_early_ramp(self):
        spec = ScenarioSpec(name="transition", mode="transition",
                            duration=10.0, position=(0.0, 0.0, 2.0),
                            wing=WingSchedule(kind="pitch"))
        log = run_scenario(spec, VehicleParams())
        pitch = log.pitch()
        sp = np.array([transition_profile(t) for t in log.t])
        tail = log.t >= 4.0
        err = np.degrees(pitch[tail] - sp[tail])
        assert np.max(np.abs(err)) < 2.0
        assert abs(log.position[-1, 2] - 2.0) < 0.5

    def test_fault_reports_tick_and_cause(self):
        spec = hover_spec(duration=2.0,
                          wind=WindProfile(speed=1e160,
                                           direction=(1.0, 0.0, 0.0)))
        with np.errstate(over="ignore"):
            with pytest.raises(SimulationFault, match=r"tick \d+"):
                run_scenario(spec, VehicleParams())


class TestSimLog:
    def write_twice(self, tmp_path):
        paths = []
        for i in range(2):
            log = run_scenario(hover_spec(duration=1.0), VehicleParams())
            p = tmp_path / f"run{i}.csv"
            log.write_csv(p)
            paths.append(p)
        return paths

    def test_runs_are_byte_identical(self, tmp_path):
        a, b = self.write_twice(tmp_path)
        assert a.read_bytes() == b.read_bytes()

    def test_csv_layout(self, tmp_path):
        log = run_scenario(hover_spec(duration=0.5), VehicleParams())
        p = tmp_path / "log.csv"
        log.write_csv(p)
        lines = p.read_text().splitlines()
        comments = [ln for ln in lines if ln.startswith("# ")]
        keys = [ln.split("=")[0] for ln in comments]
        assert keys == sorted(keys)
        assert any(ln.startswith("# aft_model = linear") for ln in comments)
        header = lines[len(comments)]
        assert header == SimLog.COLUMNS
        rows = lines[len(comments) + 1:]
        assert len(rows) == 500
        assert rows[0].split(",")[0] == "0"
        assert rows[0].split(",")[-2] == "retracted"

    def test_pitch_helper_matches_measured(self):
        log = run_scenario(ScenarioSpec(name="t", mode="transition",
                                        duration=3.0,
                                        position=(0.0, 0.0, 2.0)),
                           VehicleParams())
        direct = np.array([measured_pitch(q) for q in log.quaternion])
        assert np.allclose(log.pitch(), direct, atol=1e-12)
