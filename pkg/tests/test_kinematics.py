"""Pose integration, mark conversion, and velocity decomposition."""

import csv
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from favbot.kinematics import (
    Pose,
    TrajectorySample,
    characterize_trajectory,
    decompose_window,
    integrate_pose,
    marks_to_pose,
    pose_to_marks,
    read_trajectory_csv,
    wrap_angle,
    write_trajectory_csv,
)

finite = st.floats(min_value=-100.0, max_value=100.0, allow_nan=False)
angles = st.floats(min_value=-math.pi, max_value=math.pi, allow_nan=False)


def poses(draw_theta=angles):
    return st.builds(Pose, x=finite, y=finite, theta=draw_theta)


class TestIntegratePose:
    def test_pure_translation(self):
        p = integrate_pose(Pose(0, 0, 0), v_t=1, v_l=0, omega=0, dt=2)
        assert (p.x, p.y, p.theta) == (2, 0, 0)

    def test_pure_rotation(self):
        p = integrate_pose(Pose(0, 0, 0), v_t=0, v_l=0, omega=math.pi / 2, dt=1)
        assert p.x == 0 and p.y == 0
        assert p.theta == pytest.approx(math.pi / 2)

    def test_semicircle_closed_form(self):
        # R=1 circle: x = R sin(wt), y = R (1 - cos(wt)); half turn lands at (0, 2R).
        p = integrate_pose(Pose(0, 0, 0), v_t=1, v_l=0, omega=1, dt=math.pi)
        assert p.x == pytest.approx(0, abs=1e-12)
        assert p.y == pytest.approx(2, abs=1e-12)
        assert p.theta == pytest.approx(math.pi)

    def test_lateral_only_moves_left(self):
        p = integrate_pose(Pose(0, 0, 0), v_t=0, v_l=1, omega=0, dt=1)
        assert p.x == pytest.approx(0)
        assert p.y == pytest.approx(1)

    def test_matches_fine_euler_integration(self):
        vt, vl, om, dt = 3.0, -1.2, 0.7, 0.8
        x = y = th = 0.0
        n = 200_000
        h = dt / n
        for _ in range(n):
            x += (vt * math.cos(th) - vl * math.sin(th)) * h
            y += (vt * math.sin(th) + vl * math.cos(th)) * h
            th += om * h
        p = integrate_pose(Pose(0, 0, 0), vt, vl, om, dt)
        assert p.x == pytest.approx(x, abs=1e-4)
        assert p.y == pytest.approx(y, abs=1e-4)
        assert p.theta == pytest.approx(wrap_angle(th), abs=1e-9)

    def test_theta_stays_normalized(self):
        p = integrate_pose(Pose(0, 0, 3.0), v_t=0, v_l=0, omega=1.0, dt=10.0)
        assert -math.pi < p.theta <= math.pi

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            integrate_pose(Pose(0, 0, 0), 1, 0, 0, dt=0)
        with pytest.raises(ValueError):
            integrate_pose(Pose(0, 0, 0), 1, 0, 0, dt=-0.1)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            integrate_pose(Pose(0, 0, 0), math.nan, 0, 0, dt=0.1)
        with pytest.raises(ValueError):
            integrate_pose(Pose(0, 0, 0), 0, math.inf, 0, dt=0.1)

    def test_arc_continuous_at_omega_threshold(self):
        # Arc branch at tiny omega must agree with the straight branch.
        lo = integrate_pose(Pose(1, 2, 0.5), 4, 1, 0.0, dt=0.5)
        hi = integrate_pose(Pose(1, 2, 0.5), 4, 1, 1e-8, dt=0.5)
        assert hi.x == pytest.approx(lo.x, abs=1e-7)
        assert hi.y == pytest.approx(lo.y, abs=1e-7)


class TestMarks:
    def test_symmetric_marks_head_up(self):
        p = marks_to_pose(TrajectorySample(0, mark_left=(-1, 0), mark_right=(1, 0)))
        assert (p.x, p.y) == (0, 0)
        assert p.theta == pytest.approx(math.pi / 2)

    def test_vertical_marks_head_along_x(self):
        p = marks_to_pose(TrajectorySample(0, mark_left=(0, 1), mark_right=(0, -1)))
        assert (p.x, p.y) == (0, 0)
        assert p.theta == pytest.approx(0, abs=1e-12)

    def test_translated_marks(self):
        p = marks_to_pose(TrajectorySample(0, mark_left=(1, 1), mark_right=(3, 1)))
        assert (p.x, p.y) == (2, 1)
        assert p.theta == pytest.approx(math.pi / 2)

    def test_coincident_marks_rejected(self):
        with pytest.raises(ValueError):
            TrajectorySample(0, mark_left=(1, 1), mark_right=(1, 1))

    @given(pose=poses(), hw=st.floats(min_value=0.1, max_value=5.0))
    def test_round_trip_with_pose_to_marks(self, pose, hw):
        left, right = pose_to_marks(pose, half_width=hw)
        back = marks_to_pose(TrajectorySample(0, left, right))
        assert back.x == pytest.approx(pose.x, abs=1e-9)
        assert back.y == pytest.approx(pose.y, abs=1e-9)
        assert math.cos(back.theta - pose.theta) == pytest.approx(1.0, abs=1e-12)

    @given(pose=poses(), dx=finite, dy=finite)
    def test_translation_invariance(self, pose, dx, dy):
        (lx, ly), (rx, ry) = pose_to_marks(pose)
        a = marks_to_pose(TrajectorySample(0, (lx, ly), (rx, ry)))
        b = marks_to_pose(TrajectorySample(0, (lx + dx, ly + dy), (rx + dx, ry + dy)))
        assert math.cos(b.theta - a.theta) == pytest.approx(1.0, abs=1e-12)
        assert b.x - a.x == pytest.approx(dx, abs=1e-9)
        assert b.y - a.y == pytest.approx(dy, abs=1e-9)

    @given(pose=poses(), rot=angles)
    def test_rotation_equivariance(self, pose, rot):
        c, s = math.cos(rot), math.sin(rot)
        marks = pose_to_marks(pose)
        rotated = [(c * mx - s * my, s * mx + c * my) for mx, my in marks]
        a = marks_to_pose(TrajectorySample(0, *marks))
        b = marks_to_pose(TrajectorySample(0, *rotated))
        assert math.cos(b.theta - (a.theta + rot)) == pytest.approx(1.0, abs=1e-9)


class TestDecomposeWindow:
    def test_forward_step(self):
        d = decompose_window(Pose(0, 0, 0), Pose(1, 0, 0), dt=1)
        assert (d.v, d.v_t, d.omega) == (1, 1, 0)
        assert d.v_l == pytest.approx(0, abs=1e-12)

    def test_pure_lateral_drift(self):
        d = decompose_window(Pose(0, 0, 0), Pose(0, 1, 0), dt=1)
        assert d.v == pytest.approx(1)
        assert d.v_t == pytest.approx(0, abs=1e-12)
        assert d.v_l == pytest.approx(1)
        assert d.omega == 0

    @pytest.mark.parametrize("dt", [0.1, 0.05, 0.01])
    def test_circular_motion_oracle(self, dt):
        # Tangent motion on a circle: v_t -> R*omega and v_l -> 0 as dt -> 0,
        # with |v_l| bounded by R*omega^2*dt/2.
        R, om = 2.0, 0.1

        def pose_at(t):
            return Pose(R * math.sin(om * t), R * (1 - math.cos(om * t)), om * t)

        d = decompose_window(pose_at(0.0), pose_at(dt), dt)
        assert d.omega == pytest.approx(om, abs=1e-12)
        assert d.v_t == pytest.approx(R * om, abs=R * om * om * dt)
        assert abs(d.v_l) <= 0.5 * R * om * om * dt * 1.01

    def test_heading_wrap_across_pi(self):
        d = decompose_window(Pose(0, 0, 3.1), Pose(0, 0, -3.1), dt=0.1)
        # Short way around crosses pi: +0.083 rad, not -6.2.
        assert d.omega == pytest.approx(wrap_angle(-3.1 - 3.1) / 0.1)
        assert d.omega > 0

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            decompose_window(Pose(0, 0, 0), Pose(1, 0, 0), dt=0)

    @given(p0=poses(), p1=poses(), dt=st.floats(min_value=1e-3, max_value=10))
    def test_component_norm_identity(self, p0, p1, dt):
        d = decompose_window(p0, p1, dt)
        assert d.v >= 0
        assert d.v_t**2 + d.v_l**2 == pytest.approx(d.v**2, rel=1e-9, abs=1e-12)

    @settings(max_examples=200)
    @given(
        pose=poses(),
        v_t=st.floats(min_value=-10, max_value=10),
        v_l=st.floats(min_value=-10, max_value=10),
        omega=st.floats(min_value=-2, max_value=2),
    )
    def test_round_trip_recovers_body_velocity(self, pose, v_t, v_l, omega):
        dt = 1e-4
        nxt = integrate_pose(pose, v_t, v_l, omega, dt)
        d = decompose_window(pose, nxt, dt)
        scale = max(1.0, abs(v_t), abs(v_l))
        assert d.v_t == pytest.approx(v_t, abs=1e-2 * scale)
        assert d.v_l == pytest.approx(v_l, abs=1e-2 * scale)
        assert d.omega == pytest.approx(omega, abs=1e-2 * max(1.0, abs(omega)))


class TestCharacterize:
    @staticmethod
    def _simulate(p0, v_t, v_l, omega, dt, n):
        samples = []
        p = p0
        for i in range(n + 1):
            left, right = pose_to_marks(p)
            samples.append(TrajectorySample(i * dt, left, right))
            p = integrate_pose(p, v_t, v_l, omega, dt)
        return samples

    def test_constant_velocity_track_matches_instantaneous(self):
        dt = 1 / 30
        samples = self._simulate(Pose(0, 0, 0.3), v_t=2.0, v_l=-0.5, omega=0.0, dt=dt, n=90)
        d = characterize_trajectory(samples, dt)
        assert d.v_t == pytest.approx(2.0, abs=1e-9)
        assert d.v_l == pytest.approx(-0.5, abs=1e-9)
        assert d.omega == pytest.approx(0.0, abs=1e-9)
        assert d.v == pytest.approx(math.hypot(2.0, -0.5), abs=1e-9)

    def test_arc_track_averages_equal_single_window(self):
        # Constant body velocity: every window sees the same geometry, so the
        # average equals any one window's decomposition.
        dt = 1 / 30
        samples = self._simulate(Pose(5, -3, 1.0), v_t=4.0, v_l=1.0, omega=0.19, dt=dt, n=60)
        d = characterize_trajectory(samples, dt)
        one = decompose_window(marks_to_pose(samples[0]), marks_to_pose(samples[1]), dt)
        assert d.v_t == pytest.approx(one.v_t, abs=1e-9)
        assert d.v_l == pytest.approx(one.v_l, abs=1e-9)
        assert d.omega == pytest.approx(one.omega, abs=1e-9)

    def test_speed_average_is_not_component_norm(self):
        # Heading noise makes mean v exceed ||(mean v_t, mean v_l)||.
        dt = 1 / 30
        samples = []
        p = Pose(0, 0, 0)
        for i in range(61):
            left, right = pose_to_marks(p)
            samples.append(TrajectorySample(i * dt, left, right))
            wobble = 3.0 if i % 2 == 0 else -3.0
            p = integrate_pose(p, 2.0, wobble, 0.0, dt)
        d = characterize_trajectory(samples, dt)
        assert d.v > math.hypot(d.v_t, d.v_l) + 0.1

    def test_rejects_short_and_non_monotone(self):
        dt = 1 / 30
        samples = self._simulate(Pose(0, 0, 0), 1, 0, 0, dt, n=3)
        with pytest.raises(ValueError):
            characterize_trajectory(samples[:1], dt)
        backwards = [samples[0], samples[2], samples[1]]
        with pytest.raises(ValueError):
            characterize_trajectory(backwards, dt)

    def test_rejects_incompatible_spacing(self):
        samples = self._simulate(Pose(0, 0, 0), 1, 0, 0, dt=1 / 30, n=5)
        with pytest.raises(ValueError):
            characterize_trajectory(samples, delta_t=1 / 25)

    def test_agrees_with_independent_csv_recompute(self, tmp_path):
        dt = 1 / 30
        samples = self._simulate(Pose(2, 1, 0.7), v_t=3.0, v_l=-1.0, omega=0.11, dt=dt, n=45)
        path = tmp_path / "track.csv"
        write_trajectory_csv(path, samples)

        # One-off recompute straight from the CSV, sharing no package code.
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        sv = svt = svl = sw = 0.0
        for a, b in zip(rows, rows[1:]):
            def mid_heading(r):
                lx, ly = float(r["mark_left_x"]), float(r["mark_left_y"])
                rx, ry = float(r["mark_right_x"]), float(r["mark_right_y"])
                return (
                    (lx + rx) / 2,
                    (ly + ry) / 2,
                    math.atan2(ry - ly, rx - lx) + math.pi / 2,
                )
            x0, y0, t0 = mid_heading(a)
            x1, y1, t1 = mid_heading(b)
            xd, yd = (x1 - x0) / dt, (y1 - y0) / dt
            dth = math.atan2(math.sin(t1 - t0), math.cos(t1 - t0))
            sv += math.hypot(xd, yd)
            svt += xd * math.cos(t0) + yd * math.sin(t0)
            svl += -xd * math.sin(t0) + yd * math.cos(t0)
            sw += dth / dt
        n = len(rows) - 1
        d = characterize_trajectory(read_trajectory_csv(path), dt)
        assert d.v == pytest.approx(sv / n, rel=1e-9)
        assert d.v_t == pytest.approx(svt / n, rel=1e-9)
        assert d.v_l == pytest.approx(svl / n, rel=1e-9)
        assert d.omega == pytest.approx(sw / n, rel=1e-9)


class TestCsvRoundTrip:
    def test_write_then_read(self, tmp_path):
        samples = [
            TrajectorySample(0.0, (0.0, 1.5), (0.0, -1.5)),
            TrajectorySample(1 / 30, (0.1, 1.5), (0.1, -1.5)),
        ]
        path = tmp_path / "t.csv"
        write_trajectory_csv(path, samples)
        back = read_trajectory_csv(path)
        assert back == samples

    def test_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            read_trajectory_csv(path)
