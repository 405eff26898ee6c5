"""Arena simulation: robot pose under actuation, star target, pinhole camera.

The world advances only through two operations.  ``step_actuation`` vibrates
the robot at one frequency for a span of ticks, sampling noisy body velocity
from the mode table and integrating the pose.  ``capture_image`` renders the
camera view and advances the clock by the (stochastic) vision latency while
vibration stays off, reproducing the strict actuate/sense alternation of the
physical robot.  Everything lands in a telemetry log.

The camera is a forward-facing pinhole at the robot center, reduced to 2-D:
the star's horizontal position comes from its bearing, its apparent size
from outer_radius over distance, and the vertical axis is purely
decorative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from favbot.kinematics import Pose, TrajectorySample, integrate_pose, pose_to_marks, wrap_angle
from favbot.noise import standard_normal_pair
from favbot.raster import rasterize_star
from favbot.resonance import ModeTable, lookup_mode, sample_body_velocity
from favbot.telemetry import (
    TelemetryLog,
    bounds_event,
    capture_event,
    pose_event,
    segment_event,
    target_event,
)

CAMERA_WIDTH_PX = 40
CAMERA_HEIGHT_PX = 30
CAMERA_FOV_DEG = 60.0

CAPTURE_LATENCY_MEAN_S = 3.59
CAPTURE_LATENCY_SD_S = 0.12
CAPTURE_LATENCY_MIN_S = 0.1

DEFAULT_TICK_DT = 1.0 / 30.0
DEFAULT_REACH_THRESHOLD_CM = 2.0
DEFAULT_BOUNDS = (0.0, 0.0, 60.0, 60.0)


@dataclass(frozen=True)
class StarTarget:
    """Flat 5-point star marker: position (cm), outer radius (cm), spin."""

    position: tuple[float, float]
    outer_radius: float = 2.0
    orientation: float = 0.0

    def __post_init__(self):
        if not (self.outer_radius > 0 and math.isfinite(self.outer_radius)):
            raise ValueError(f"outer_radius must be positive, got {self.outer_radius}")


@dataclass(frozen=True, eq=False)
class CameraImage:
    """Grayscale 30x40 frame with intensities in [0, 1]."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        px = self.pixels
        if px.shape != (CAMERA_HEIGHT_PX, CAMERA_WIDTH_PX):
            raise ValueError(f"expected {CAMERA_HEIGHT_PX}x{CAMERA_WIDTH_PX}, got {px.shape}")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        px.setflags(write=False)

    @property
    def width(self) -> int:
        return CAMERA_WIDTH_PX

    @property
    def height(self) -> int:
        return CAMERA_HEIGHT_PX


def focal_length_px(fov_deg: float = CAMERA_FOV_DEG, width: int = CAMERA_WIDTH_PX) -> float:
    return (width / 2.0) / math.tan(math.radians(fov_deg) / 2.0)


def render_camera_view(
    robot: Pose,
    target: StarTarget,
    fov_deg: float = CAMERA_FOV_DEG,
    supersample: int = 4,
) -> np.ndarray:
    """Deterministic white-on-black view of the star from the robot.

    A target behind the camera plane (or exactly at the center) renders as
    an all-black frame; partial frustum exits clip naturally.
    """
    tx, ty = target.position
    dx, dy = tx - robot.x, ty - robot.y
    dist = math.hypot(dx, dy)
    bearing = wrap_angle(math.atan2(dy, dx) - robot.theta)
    if dist < 1e-9 or math.cos(bearing) <= 0.0:
        return np.zeros((CAMERA_HEIGHT_PX, CAMERA_WIDTH_PX), dtype=np.float64)
    f = focal_length_px(fov_deg)
    u = CAMERA_WIDTH_PX / 2.0 - f * math.tan(bearing)
    radius_px = f * target.outer_radius / dist
    return rasterize_star(
        u,
        CAMERA_HEIGHT_PX / 2.0,
        radius_px,
        target.orientation,
        CAMERA_WIDTH_PX,
        CAMERA_HEIGHT_PX,
        supersample=supersample,
    )


class World:
    """Mutable simulation state; one controller drives it at a time."""

    def __init__(
        self,
        robot: Pose,
        target: StarTarget,
        bounds: tuple[float, float, float, float] = DEFAULT_BOUNDS,
        seed: int = 0,
        noise: bool = True,
        waypoints: list[tuple[float, float]] | None = None,
        tick_dt: float = DEFAULT_TICK_DT,
    ):
        xmin, ymin, xmax, ymax = bounds
        if not (xmin < xmax and ymin < ymax):
            raise ValueError(f"degenerate arena bounds {bounds}")
        if not (xmin <= robot.x <= xmax and ymin <= robot.y <= ymax):
            raise ValueError(f"robot start {robot} outside bounds {bounds}")
        if tick_dt <= 0:
            raise ValueError(f"tick_dt must be positive, got {tick_dt}")
        self.robot = robot
        self.bounds = (float(xmin), float(ymin), float(xmax), float(ymax))
        self.clock = 0.0
        self.vibration_on = False
        self.noise = bool(noise)
        self.seed = seed
        self.tick_dt = float(tick_dt)
        self.rng = np.random.Generator(np.random.PCG64(seed))
        self.telemetry = TelemetryLog()
        self._capturing = False
        self._target = target
        self._pending = [
            (float(p[0]), float(p[1])) for p in (waypoints or [])
        ]

    @property
    def target(self) -> StarTarget:
        return self._target

    @property
    def pending_waypoints(self) -> list[tuple[float, float]]:
        return list(self._pending)

    @property
    def has_pending_waypoint(self) -> bool:
        return bool(self._pending)

    def advance_waypoint(self) -> StarTarget:
        """Move the target to the next queued waypoint and log the move."""
        if not self._pending:
            raise RuntimeError("no pending waypoint to advance to")
        x, y = self._pending.pop(0)
        self._target = StarTarget(
            position=(x, y),
            outer_radius=self._target.outer_radius,
            orientation=self._target.orientation,
        )
        self.telemetry.append(target_event(self.clock, x, y))
        return self._target

    def _clamped(self, pose: Pose) -> tuple[Pose, bool]:
        xmin, ymin, xmax, ymax = self.bounds
        x = min(max(pose.x, xmin), xmax)
        y = min(max(pose.y, ymin), ymax)
        if x == pose.x and y == pose.y:
            return pose, False
        return Pose(x, y, pose.theta), True

    def step_actuation(
        self,
        table: ModeTable,
        freq_khz: int,
        duration: float,
        tick_dt: float | None = None,
    ) -> list[TrajectorySample]:
        """Vibrate at freq_khz for duration seconds (a whole number of ticks).

        Returns the tracked samples including the segment-start pose, so a
        single segment can be characterized on its own.
        """
        if self._capturing:
            raise RuntimeError("vibration requested while a capture is in progress")
        dt = self.tick_dt if tick_dt is None else tick_dt
        if dt <= 0:
            raise ValueError(f"tick_dt must be positive, got {dt}")
        if duration <= 0:
            raise ValueError(f"duration must be positive, got {duration}")
        n = round(duration / dt)
        if n < 1 or abs(n * dt - duration) > dt:
            raise ValueError(f"duration {duration} s is not a whole number of {dt} s ticks")
        mode = lookup_mode(table, freq_khz)
        t0 = self.clock
        t_end = t0 + n * dt
        self.telemetry.append(segment_event(t0, t_end, freq_khz))
        self.vibration_on = True
        samples = [TrajectorySample(t0, *pose_to_marks(self.robot))]
        for k in range(n):
            if self.noise:
                v_t, v_l, omega = sample_body_velocity(mode, dt, self.rng)
            else:
                v_t, v_l, omega = mode.v_t, mode.v_l, mode.omega
            pose = integrate_pose(self.robot, v_t, v_l, omega, dt)
            pose, hit = self._clamped(pose)
            self.clock = t0 + (k + 1) * dt
            self.robot = pose
            if hit:
                self.telemetry.append(bounds_event(self.clock, pose.x, pose.y))
            self.telemetry.append(pose_event(self.clock, pose.x, pose.y, pose.theta))
            samples.append(TrajectorySample(self.clock, *pose_to_marks(pose)))
        self.vibration_on = False
        return samples

    def capture_image(
        self,
        fov_deg: float = CAMERA_FOV_DEG,
        latency_mean: float = CAPTURE_LATENCY_MEAN_S,
        latency_sd: float = CAPTURE_LATENCY_SD_S,
    ) -> tuple[CameraImage, float]:
        """Render the current view, then idle for the sampled vision latency.

        Vibration stays off for the whole capture; the clock advance is the
        idle time visible in telemetry.
        """
        self._capturing = True
        self.vibration_on = False
        try:
            pixels = render_camera_view(self.robot, self.target, fov_deg)
            n1, _ = standard_normal_pair(self.rng)
            elapsed = max(CAPTURE_LATENCY_MIN_S, latency_mean + latency_sd * n1)
            t0 = self.clock
            self.clock = t0 + elapsed
            self.telemetry.append(capture_event(t0, self.clock))
        finally:
            self._capturing = False
        return CameraImage(pixels), elapsed

    def target_reached(self, threshold_cm: float = DEFAULT_REACH_THRESHOLD_CM) -> bool:
        if threshold_cm <= 0:
            raise ValueError(f"threshold must be positive, got {threshold_cm}")
        tx, ty = self.target.position
        return math.hypot(self.robot.x - tx, self.robot.y - ty) <= threshold_cm
