"""Frequency-to-motion mapping for a vibration-driven bristle robot.

A piezo buzzer excites the robot at an integer frequency between 1 and
100 kHz.  Each frequency lands on a resonance mode with its own steady-state
body velocity: translational (along heading), lateral (90 degrees left of
heading), and angular (CCW positive).  Several frequency bands produce no
motion at all.  The mapping is empirical, so it lives in a calibration file
that users can replace with their own sweep measurements; the shipped
default anchors the known characterization points and fills the rest of the
active range by linear interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

from favbot.noise import standard_normal_pair

FREQ_MIN = 1
FREQ_MAX = 100

DEFAULT_NO_MOTION_BANDS = ((13, 34), (36, 55), (63, 100))

CALIBRATION_HEADER = "freq_khz,v_t,v_l,omega,sigma_heading,sigma_speed,label"


@dataclass(frozen=True)
class MotionMode:
    """Steady-state body motion and noise scales at one drive frequency.

    sigma_heading is in rad/sqrt(s) (heading-rate random walk scale),
    sigma_speed is a unitless multiplicative fraction.
    """

    freq_khz: int
    v_t: float
    v_l: float
    omega: float
    sigma_heading: float
    sigma_speed: float
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.freq_khz, int) or isinstance(self.freq_khz, bool):
            raise ValueError(f"freq_khz must be an integer, got {self.freq_khz!r}")
        if not FREQ_MIN <= self.freq_khz <= FREQ_MAX:
            raise ValueError(f"freq_khz {self.freq_khz} outside [{FREQ_MIN}, {FREQ_MAX}]")
        for name in ("v_t", "v_l", "omega", "sigma_heading", "sigma_speed"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite {name} at {self.freq_khz} kHz")
        if self.sigma_heading < 0 or self.sigma_speed < 0:
            raise ValueError(f"negative noise scale at {self.freq_khz} kHz")
        if "\n" in self.label or "\r" in self.label:
            raise ValueError("label must be a single line")

    @property
    def is_zero_motion(self) -> bool:
        return self.v_t == 0.0 and self.v_l == 0.0 and self.omega == 0.0


@dataclass(frozen=True)
class ModeTable:
    """One MotionMode per integer kHz in [1, 100] plus the no-motion bands."""

    entries: dict[int, MotionMode]
    no_motion_bands: tuple[tuple[int, int], ...]

    def __post_init__(self):
        missing = [f for f in range(FREQ_MIN, FREQ_MAX + 1) if f not in self.entries]
        if missing or len(self.entries) != FREQ_MAX - FREQ_MIN + 1:
            raise ValueError(f"table must cover every kHz in [1, 100]; missing {missing[:5]}")
        for f, mode in self.entries.items():
            if mode.freq_khz != f:
                raise ValueError(f"entry keyed {f} holds mode for {mode.freq_khz}")
            if in_no_motion_band(self.no_motion_bands, f) and not mode.is_zero_motion:
                raise ValueError(f"{f} kHz lies in a no-motion band but has nonzero motion")


def in_no_motion_band(bands, freq_khz: int) -> bool:
    return any(lo <= freq_khz <= hi for lo, hi in bands)


def _normalize_bands(bands) -> tuple[tuple[int, int], ...]:
    out = sorted(tuple(b) for b in bands)
    for (lo, hi), (lo2, hi2) in zip(out, out[1:]):
        if lo2 <= hi:
            raise ValueError(f"no-motion bands overlap: [{lo},{hi}] and [{lo2},{hi2}]")
    return tuple(out)


def _parse_calibration(text: str):
    anchors: dict[int, MotionMode] = {}
    bands: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head = line.split(",", 1)[0].strip()
        if head == "band":
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: band line needs 'band,lo,hi'")
            try:
                lo, hi = int(parts[1]), int(parts[2])
            except ValueError:
                raise ValueError(f"line {lineno}: non-integer band bounds") from None
            if not (FREQ_MIN <= lo <= hi <= FREQ_MAX):
                raise ValueError(f"line {lineno}: band [{lo},{hi}] outside [1,100] or inverted")
            bands.append((lo, hi))
            continue
        parts = line.split(",", 6)
        if len(parts) != 7:
            raise ValueError(f"line {lineno}: expected '{CALIBRATION_HEADER}'")
        try:
            freq = int(parts[0])
            nums = [float(p) for p in parts[1:6]]
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric field") from None
        if freq in anchors:
            raise ValueError(f"line {lineno}: duplicate anchor for {freq} kHz")
        try:
            anchors[freq] = MotionMode(freq, *nums, label=parts[6].strip())
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
    return anchors, _normalize_bands(bands)


def load_mode_table(calibration_text: str) -> ModeTable:
    """Parse calibration text into a fully populated, validated ModeTable.

    Anchor rows inside a no-motion band must declare zero motion (anything
    else is a contradiction) and are replaced by the synthesized zero-motion
    entry.  Active frequencies without an anchor are filled by linear
    interpolation between the nearest anchors in the same contiguous active
    run, so every run must anchor its endpoints.
    """
    anchors, bands = _parse_calibration(calibration_text)
    for f, m in anchors.items():
        if in_no_motion_band(bands, f) and not m.is_zero_motion:
            raise ValueError(
                f"{f} kHz declared with nonzero motion but lies in a no-motion band"
            )

    entries: dict[int, MotionMode] = {}
    run: list[int] = []

    def fill_run(run_freqs):
        known = [f for f in run_freqs if f in anchors]
        if not known or known[0] != run_freqs[0] or known[-1] != run_freqs[-1]:
            raise ValueError(
                f"active run {run_freqs[0]}..{run_freqs[-1]} kHz is not covered: "
                "both endpoints need anchors"
            )
        for f in run_freqs:
            if f in anchors:
                entries[f] = anchors[f]
                continue
            g = max(k for k in known if k < f)
            h = min(k for k in known if k > f)
            a, b = anchors[g], anchors[h]
            w = (f - g) / (h - g)
            entries[f] = MotionMode(
                f,
                a.v_t + w * (b.v_t - a.v_t),
                a.v_l + w * (b.v_l - a.v_l),
                a.omega + w * (b.omega - a.omega),
                a.sigma_heading + w * (b.sigma_heading - a.sigma_heading),
                a.sigma_speed + w * (b.sigma_speed - a.sigma_speed),
                label=f"{f} kHz interpolated",
            )

    for f in range(FREQ_MIN, FREQ_MAX + 1):
        if in_no_motion_band(bands, f):
            if run:
                fill_run(run)
                run = []
            entries[f] = MotionMode(f, 0.0, 0.0, 0.0, 0.0, 0.0, label=f"{f} kHz no-motion band")
        else:
            run.append(f)
    if run:
        fill_run(run)
    return ModeTable(entries=entries, no_motion_bands=bands)


def serialize_mode_table(table: ModeTable) -> str:
    """Render a table back to calibration text (loads back to an equal table)."""
    lines = [f"# {CALIBRATION_HEADER}"]
    for lo, hi in table.no_motion_bands:
        lines.append(f"band,{lo},{hi}")
    for f in range(FREQ_MIN, FREQ_MAX + 1):
        if in_no_motion_band(table.no_motion_bands, f):
            continue
        m = table.entries[f]
        lines.append(
            f"{f},{m.v_t!r},{m.v_l!r},{m.omega!r},"
            f"{m.sigma_heading!r},{m.sigma_speed!r},{m.label}"
        )
    return "\n".join(lines) + "\n"


def lookup_mode(table: ModeTable, freq_khz: int) -> MotionMode:
    """Pure table lookup; no interpolation happens at query time."""
    if not isinstance(freq_khz, int) or isinstance(freq_khz, bool):
        raise ValueError(f"frequency must be an integer kHz, got {freq_khz!r}")
    if not FREQ_MIN <= freq_khz <= FREQ_MAX:
        raise ValueError(f"frequency {freq_khz} kHz outside [{FREQ_MIN}, {FREQ_MAX}]")
    return table.entries[freq_khz]


def sample_body_velocity(mode: MotionMode, dt: float, rng) -> tuple[float, float, float]:
    """Draw one noisy body velocity (v_t, v_l, omega) for a tick of length dt.

    Noise model, documented so results can be re-derived exactly: two
    uniforms u1, u2 in [0, 1) come from ``rng`` (a numpy Generator; the
    package uses PCG64 throughout) and become standard normals via the
    Box-Muller transform

        n1 = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
        n2 = sqrt(-2 ln(1 - u1)) * sin(2 pi u2)

    All three components are scaled by (1 + sigma_speed * n1); the heading
    rate additionally gets sigma_heading * n2 / sqrt(dt), which makes the
    integrated heading a random walk whose standard deviation grows as
    sigma_heading * sqrt(T) over a segment of length T, independent of the
    tick size.  Zero-motion modes return exact zeros without consuming any
    random numbers.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if mode.is_zero_motion:
        return 0.0, 0.0, 0.0
    n1, n2 = standard_normal_pair(rng)
    scale = 1.0 + mode.sigma_speed * n1
    eps_heading = mode.sigma_heading * n2 / math.sqrt(dt)
    return mode.v_t * scale, mode.v_l * scale, mode.omega * scale + eps_heading


def default_calibration_text() -> str:
    return resources.files("favbot").joinpath("calibration/default.csv").read_text("utf-8")


def load_default_table() -> ModeTable:
    return load_mode_table(default_calibration_text())
