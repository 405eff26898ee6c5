"""Planar pose integration and trajectory characterization.

The robot is a unicycle with lateral slip: body velocity is expressed as a
translational component ``v_t`` along the heading, a lateral component
``v_l`` 90 degrees counter-clockwise of the heading, and an angular rate
``omega`` (CCW positive).  Trajectories are recorded as pairs of tracking
marks; characterization converts marks back to poses and decomposes the
per-frame world velocity into the same body components.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

TWO_PI = 2.0 * math.pi

# Below this |omega| the arc update degenerates; use the straight-line form.
_OMEGA_EPS = 1e-9


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    elif a > math.pi:
        a -= TWO_PI
    return a


@dataclass(frozen=True)
class Pose:
    """Robot center position (cm) and heading (rad, normalized to (-pi, pi])."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError(f"non-finite pose ({self.x}, {self.y}, {self.theta})")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class TrajectorySample:
    """One tracked frame: timestamp and the two rear mark positions (cm)."""

    t: float
    mark_left: tuple[float, float]
    mark_right: tuple[float, float]

    def __post_init__(self):
        if self.mark_left == self.mark_right:
            raise ValueError("tracking marks coincide")


@dataclass(frozen=True)
class VelocityDecomposition:
    """World-speed magnitude plus signed body components for one window."""

    v: float
    v_t: float
    v_l: float
    omega: float


def integrate_pose(p: Pose, v_t: float, v_l: float, omega: float, dt: float) -> Pose:
    """Advance ``p`` by constant body velocity over ``dt`` (closed form).

    For |omega| below 1e-9 the body velocity is rotated into the world frame
    and applied linearly; otherwise the exact circular-arc update is used.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    for name, val in (("v_t", v_t), ("v_l", v_l), ("omega", omega), ("dt", dt)):
        if not math.isfinite(val):
            raise ValueError(f"non-finite {name}: {val}")
    sin0, cos0 = math.sin(p.theta), math.cos(p.theta)
    if abs(omega) < _OMEGA_EPS:
        x = p.x + (v_t * cos0 - v_l * sin0) * dt
        y = p.y + (v_t * sin0 + v_l * cos0) * dt
        return Pose(x, y, p.theta)
    th1 = p.theta + omega * dt
    sin1, cos1 = math.sin(th1), math.cos(th1)
    x = p.x + (v_t * (sin1 - sin0) + v_l * (cos1 - cos0)) / omega
    y = p.y + (-v_t * (cos1 - cos0) + v_l * (sin1 - sin0)) / omega
    return Pose(x, y, th1)


MARK_HALF_WIDTH_CM = 1.5  # half the 3 cm robot diameter


def pose_to_marks(
    p: Pose, half_width: float = MARK_HALF_WIDTH_CM
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Place the (left, right) tracking marks for a pose.

    Inverse of :func:`marks_to_pose`: marks sit at center +- half_width along
    the lateral axis, left mark on the robot's left.
    """
    nx = math.cos(p.theta + 0.5 * math.pi)
    ny = math.sin(p.theta + 0.5 * math.pi)
    left = (p.x + half_width * nx, p.y + half_width * ny)
    right = (p.x - half_width * nx, p.y - half_width * ny)
    return left, right


def marks_to_pose(s: TrajectorySample) -> Pose:
    """Recover the center pose from the two tracking marks.

    The center is the midpoint; the heading is the left-to-right mark
    direction rotated +90 degrees, so the left mark sits on the robot's left.
    """
    lx, ly = s.mark_left
    rx, ry = s.mark_right
    x = 0.5 * (lx + rx)
    y = 0.5 * (ly + ry)
    theta = math.atan2(ry - ly, rx - lx) + 0.5 * math.pi
    return Pose(x, y, theta)


def decompose_window(p0: Pose, p1: Pose, dt: float) -> VelocityDecomposition:
    """Decompose the displacement p0 -> p1 over ``dt`` into body components.

    The world velocity is projected onto the heading unit vector at the
    window start; the heading difference is wrapped to (-pi, pi] before
    dividing by ``dt``.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    xdot = (p1.x - p0.x) / dt
    ydot = (p1.y - p0.y) / dt
    omega = wrap_angle(p1.theta - p0.theta) / dt
    v = math.hypot(xdot, ydot)
    nt = (math.cos(p0.theta), math.sin(p0.theta))
    nl = (math.cos(p0.theta + 0.5 * math.pi), math.sin(p0.theta + 0.5 * math.pi))
    v_t = xdot * nt[0] + ydot * nt[1]
    v_l = xdot * nl[0] + ydot * nl[1]
    return VelocityDecomposition(v=v, v_t=v_t, v_l=v_l, omega=omega)


def characterize_trajectory(
    samples: Sequence[TrajectorySample], delta_t: float
) -> VelocityDecomposition:
    """Average the per-frame decomposition over a tracked trajectory.

    Each component is averaged independently, so the averaged ``v`` is in
    general not the norm of (mean v_t, mean v_l).
    """
    if len(samples) < 2:
        raise ValueError("need at least 2 samples to characterize")
    if delta_t <= 0:
        raise ValueError(f"delta_t must be positive, got {delta_t}")
    sv = svt = svl = sw = 0.0
    n = 0
    prev = samples[0]
    prev_pose = marks_to_pose(prev)
    for cur in samples[1:]:
        gap = cur.t - prev.t
        if gap <= 0:
            raise ValueError(f"timestamps not increasing at t={cur.t}")
        if abs(gap - delta_t) > 1e-6 * max(1.0, delta_t):
            raise ValueError(
                f"sample spacing {gap:.9g} s incompatible with delta_t={delta_t:.9g} s"
            )
        cur_pose = marks_to_pose(cur)
        d = decompose_window(prev_pose, cur_pose, delta_t)
        sv += d.v
        svt += d.v_t
        svl += d.v_l
        sw += d.omega
        n += 1
        prev, prev_pose = cur, cur_pose
    return VelocityDecomposition(v=sv / n, v_t=svt / n, v_l=svl / n, omega=sw / n)


TRAJECTORY_CSV_HEADER = ("t", "mark_left_x", "mark_left_y", "mark_right_x", "mark_right_y")


def write_trajectory_csv(path, samples: Iterable[TrajectorySample]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_CSV_HEADER)
        for s in samples:
            w.writerow(
                [
                    repr(s.t),
                    repr(s.mark_left[0]),
                    repr(s.mark_left[1]),
                    repr(s.mark_right[0]),
                    repr(s.mark_right[1]),
                ]
            )


def read_trajectory_csv(path) -> list[TrajectorySample]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRAJECTORY_CSV_HEADER:
            raise ValueError(f"unexpected trajectory CSV header: {header}")
        for row in reader:
            t, lx, ly, rx, ry = (float(v) for v in row)
            out.append(TrajectorySample(t=t, mark_left=(lx, ly), mark_right=(rx, ry)))
    return out
