"""Closed-loop autonomy state machine.

Two phases mirror the robot's firmware: characterization, where an operator
sets frequencies and registers them to the four motion modes, and autonomous,
where the robot loops capture -> classify -> actuate until the target is
reached or the cycle budget runs out.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from favbot.kinematics import Pose, wrap_angle
from favbot.resonance import FREQ_MAX, FREQ_MIN, ModeTable
from favbot.telemetry import classification_event, mission_event, registry_event
from favbot.vision import CnnParams, classify
from favbot.world import DEFAULT_REACH_THRESHOLD_CM, World

MODE_NAMES = ("STRAIGHT", "LEFT", "RIGHT", "SEARCH")

CMD_IDLE = 0
CMD_AUTONOMOUS = 101
CMD_ABORT = 102
REGISTER_COMMANDS = {103: "STRAIGHT", 104: "LEFT", 105: "RIGHT", 106: "SEARCH"}
ARM_COMMANDS = {203: "STRAIGHT", 204: "LEFT", 205: "RIGHT", 206: "SEARCH"}

ARM_TIMEOUT_S = 5.0
DEFAULT_DURATION_MS = 1000
DEFAULT_MAX_CYCLES = 100


class CommandError(ValueError):
    """A command that is well-formed on the wire but invalid right now."""


class Phase(enum.Enum):
    CHARACTERIZATION = "characterization"
    AUTONOMOUS = "autonomous"
    FINISHED = "finished"


def zone_to_mode(zone: int) -> str:
    """Motion mode actuated for a classified target zone."""
    mapping = {0: "LEFT", 1: "STRAIGHT", 2: "RIGHT", 3: "SEARCH"}
    if zone not in mapping:
        raise ValueError(f"zone label must be in 0..3, got {zone!r}")
    return mapping[zone]


def heading_error(pose: Pose, target_xy: tuple[float, float]) -> float:
    """Signed bearing from the robot's heading to the target, in (-pi, pi]."""
    bearing = math.atan2(target_xy[1] - pose.y, target_xy[0] - pose.x)
    return wrap_angle(bearing - pose.theta)


@dataclass(frozen=True)
class ModeEntry:
    freq_khz: int
    duration_ms: int

    def __post_init__(self):
        if not isinstance(self.freq_khz, int) or isinstance(self.freq_khz, bool):
            raise ValueError(f"frequency must be an integer, got {self.freq_khz!r}")
        if not FREQ_MIN <= self.freq_khz <= FREQ_MAX:
            raise ValueError(f"frequency {self.freq_khz} outside [{FREQ_MIN}, {FREQ_MAX}]")
        if not isinstance(self.duration_ms, int) or isinstance(self.duration_ms, bool):
            raise ValueError(f"duration must be an integer, got {self.duration_ms!r}")
        if self.duration_ms < 100 or self.duration_ms % 100:
            raise ValueError(
                f"duration must be a multiple of 100 ms and at least 100 ms, got {self.duration_ms}"
            )

    @property
    def duration_s(self) -> float:
        return self.duration_ms / 1000.0


class ModeRegistry:
    """Frequency and duration per motion mode.

    Frequencies arrive via register commands; durations default to 1 s until
    a duration-arm sequence overrides them, so the registry is complete as
    soon as all four frequencies are known.
    """

    def __init__(self):
        self._freqs: dict[str, int] = {}
        self._durations: dict[str, int] = {mode: DEFAULT_DURATION_MS for mode in MODE_NAMES}

    @staticmethod
    def _check_mode(mode: str) -> str:
        if mode not in MODE_NAMES:
            raise ValueError(f"unknown mode {mode!r}, expected one of {MODE_NAMES}")
        return mode

    def register_frequency(self, mode: str, freq_khz: int) -> None:
        self._check_mode(mode)
        probe = ModeEntry(freq_khz, self._durations[mode])
        self._freqs[mode] = probe.freq_khz

    def set_duration(self, mode: str, duration_ms: int) -> None:
        self._check_mode(mode)
        ModeEntry(FREQ_MIN, duration_ms)
        self._durations[mode] = duration_ms

    def entry(self, mode: str) -> ModeEntry:
        self._check_mode(mode)
        if mode not in self._freqs:
            raise KeyError(f"mode {mode} has no registered frequency")
        return ModeEntry(self._freqs[mode], self._durations[mode])

    @property
    def is_complete(self) -> bool:
        return all(mode in self._freqs for mode in MODE_NAMES)

    @property
    def missing(self) -> tuple[str, ...]:
        return tuple(mode for mode in MODE_NAMES if mode not in self._freqs)

    def as_dict(self) -> dict[str, dict[str, int]]:
        return {
            mode: {"freq_khz": self._freqs[mode], "duration_ms": self._durations[mode]}
            for mode in MODE_NAMES
            if mode in self._freqs
        }

    def __eq__(self, other):
        if not isinstance(other, ModeRegistry):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __repr__(self):
        return f"ModeRegistry({self.as_dict()})"

    @classmethod
    def from_entries(cls, entries: dict[str, ModeEntry]) -> "ModeRegistry":
        reg = cls()
        for mode, entry in entries.items():
            reg.register_frequency(mode, entry.freq_khz)
            reg.set_duration(mode, entry.duration_ms)
        return reg


def load_registry(text: str) -> ModeRegistry:
    """Parse a parameter-set file: one table per mode with freq/duration."""
    data = tomllib.loads(text)
    unknown = set(data) - set(MODE_NAMES)
    if unknown:
        raise ValueError(f"unknown sections in parameter set: {sorted(unknown)}")
    missing = [mode for mode in MODE_NAMES if mode not in data]
    if missing:
        raise ValueError(f"parameter set is missing modes: {missing}")
    entries = {}
    for mode in MODE_NAMES:
        row = data[mode]
        extra = set(row) - {"freq_khz", "duration_ms"}
        if extra:
            raise ValueError(f"unexpected keys in [{mode}]: {sorted(extra)}")
        if "freq_khz" not in row:
            raise ValueError(f"[{mode}] is missing freq_khz")
        entries[mode] = ModeEntry(row["freq_khz"], row.get("duration_ms", DEFAULT_DURATION_MS))
    return ModeRegistry.from_entries(entries)


def packaged_registry_text(name: str) -> str:
    root = resources.files("favbot") / "params"
    path = root / f"{name}.toml"
    if not path.is_file():
        available = sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))
        raise FileNotFoundError(f"no packaged parameter set {name!r}; available: {available}")
    return path.read_text()


def packaged_registry(name: str) -> ModeRegistry:
    return load_registry(packaged_registry_text(name))


@dataclass(frozen=True)
class Action:
    """What a handled command did, for logging and transports."""

    kind: str
    mode: str | None = None
    freq_khz: int | None = None
    duration_ms: int | None = None


@dataclass(frozen=True)
class CycleRecord:
    """One autonomous cycle: the decision and the segment it produced."""

    index: int
    zone: int
    mode: str
    freq_khz: int
    duration_s: float
    t_capture: float
    t_start: float
    t_end: float
    heading_error: float
    distance_cm: float

    def segment_dict(self) -> dict:
        return {
            "t0": self.t_start,
            "t1": self.t_end,
            "freq_khz": self.freq_khz,
            "mode": self.mode,
        }


def over_correction_events(records: list[CycleRecord]) -> list[tuple[int, int]]:
    """Pairs of consecutive turn corrections whose heading errors flip sign.

    A correction that lands the bearing on the far side of the target makes
    the next correction fire with the opposite error sign.  Straight and
    search cycles between two corrections do not break the pair; what counts
    is adjacency in the sequence of corrections, not in the raw cycle list.
    """
    turns = [r for r in records if r.mode in ("LEFT", "RIGHT")]
    out = []
    for a, b in zip(turns, turns[1:]):
        if a.heading_error * b.heading_error < 0:
            out.append((a.index, b.index))
    return out


@dataclass
class MissionReport:
    outcome: str
    cycles: int
    records: list[CycleRecord]
    trajectory_csv_path: str | None = None

    @property
    def segments(self) -> list[dict]:
        return [r.segment_dict() for r in self.records]

    @property
    def over_corrections(self) -> list[tuple[int, int]]:
        return over_correction_events(self.records)

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "cycles": self.cycles,
            "segments": self.segments,
            "over_corrections": [list(pair) for pair in self.over_corrections],
            "trajectory_csv_path": self.trajectory_csv_path,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class Controller:
    """Single owner of a world; consumes commands between cycles."""

    def __init__(
        self,
        world: World | None = None,
        table: ModeTable | None = None,
        params: CnnParams | None = None,
        max_cycles: int = DEFAULT_MAX_CYCLES,
        reach_threshold_cm: float = DEFAULT_REACH_THRESHOLD_CM,
    ):
        if max_cycles < 1:
            raise ValueError(f"max_cycles must be at least 1, got {max_cycles}")
        self.world = world
        self.table = table
        self.params = params
        self.max_cycles = max_cycles
        self.reach_threshold_cm = reach_threshold_cm
        self.phase = Phase.CHARACTERIZATION
        self.current_freq: int | None = None
        self.registry = ModeRegistry()
        self.cycle_count = 0
        self.outcome: str | None = None
        self.records: list[CycleRecord] = []
        self.waypoints_reached = 0
        self._armed: tuple[str, float] | None = None

    # ------------------------------------------------------------ commands

    def snapshot(self) -> dict:
        """Comparable view of the command-visible state."""
        return {
            "phase": self.phase.value,
            "current_freq": self.current_freq,
            "registry": self.registry.as_dict(),
            "armed": self._armed[0] if self._armed else None,
            "cycle_count": self.cycle_count,
        }

    def _now(self, now: float | None) -> float:
        if now is not None:
            return now
        return self.world.clock if self.world is not None else 0.0

    def _telemetry(self, event: dict) -> None:
        if self.world is not None:
            self.world.telemetry.append(event)

    def handle_command(self, code: int, now: float | None = None) -> Action:
        """Apply one wire command; returns the action it caused.

        `now` is the receive time used for the duration-arm timeout; it
        defaults to the world clock so replayed scripts stay deterministic.
        """
        if not isinstance(code, int) or isinstance(code, bool):
            raise CommandError(f"command must be an integer, got {code!r}")
        known = (
            code == CMD_IDLE
            or FREQ_MIN <= code <= FREQ_MAX
            or code in (CMD_AUTONOMOUS, CMD_ABORT)
            or code in REGISTER_COMMANDS
            or code in ARM_COMMANDS
        )
        if not known:
            raise CommandError(f"reserved command code {code}")
        t = self._now(now)

        if self.phase is Phase.FINISHED:
            raise CommandError("mission finished; controller accepts no further commands")

        if self.phase is Phase.AUTONOMOUS:
            if code != CMD_ABORT:
                raise CommandError("robot is in autonomous mode; only abort (102) is accepted")
            self.phase = Phase.CHARACTERIZATION
            self.current_freq = None
            self._armed = None
            self._telemetry(mission_event(t, "aborted"))
            return Action("abort")

        if self._armed is not None:
            mode, since = self._armed
            if t - since > ARM_TIMEOUT_S:
                self._armed = None
            elif FREQ_MIN <= code <= FREQ_MAX:
                self._armed = None
                duration_ms = code * 100
                self.registry.set_duration(mode, duration_ms)
                entry = self.registry.as_dict().get(mode)
                self._telemetry(
                    registry_event(t, mode, entry["freq_khz"] if entry else 0, duration_ms / 1000.0)
                )
                return Action("set_duration", mode=mode, duration_ms=duration_ms)

        if code == CMD_IDLE:
            self.current_freq = None
            self._armed = None
            return Action("idle")
        if FREQ_MIN <= code <= FREQ_MAX:
            self.current_freq = code
            return Action("actuate", freq_khz=code)
        if code in REGISTER_COMMANDS:
            mode = REGISTER_COMMANDS[code]
            if self.current_freq is None:
                raise CommandError(f"cannot register {mode}: no frequency is active")
            self.registry.register_frequency(mode, self.current_freq)
            entry = self.registry.entry(mode)
            self._telemetry(registry_event(t, mode, entry.freq_khz, entry.duration_s))
            return Action("register", mode=mode, freq_khz=entry.freq_khz)
        if code in ARM_COMMANDS:
            mode = ARM_COMMANDS[code]
            self._armed = (mode, t)
            return Action("arm", mode=mode)
        if code == CMD_ABORT:
            # harmless during characterization: stop vibrating, forget the arm
            self.current_freq = None
            self._armed = None
            return Action("abort")
        assert code == CMD_AUTONOMOUS
        if not self.registry.is_complete:
            raise CommandError(
                f"cannot enter autonomous mode: unregistered modes {list(self.registry.missing)}"
            )
        self.phase = Phase.AUTONOMOUS
        self.current_freq = None
        self._armed = None
        self._telemetry(mission_event(t, "autonomous", registry=self.registry.as_dict()))
        return Action("start_autonomous")

    # ------------------------------------------------------------ autonomy

    def _require_autonomy_deps(self) -> tuple[World, ModeTable, CnnParams]:
        if self.world is None or self.table is None or self.params is None:
            raise RuntimeError("autonomous cycles need a world, a mode table, and CNN params")
        return self.world, self.table, self.params

    def autonomous_cycle(self) -> CycleRecord:
        """capture -> classify -> actuate the registered mode, once."""
        if self.phase is not Phase.AUTONOMOUS:
            raise RuntimeError(f"autonomous_cycle requires the autonomous phase, not {self.phase}")
        world, table, params = self._require_autonomy_deps()

        t_capture = world.clock
        image, _ = world.capture_image()
        zone = classify(params, image)
        world.telemetry.append(classification_event(world.clock, zone))
        target_xy = world.target.position
        err = heading_error(world.robot, target_xy)
        dist = math.hypot(world.robot.x - target_xy[0], world.robot.y - target_xy[1])

        mode = zone_to_mode(zone)
        entry = self.registry.entry(mode)
        t_start = world.clock
        world.step_actuation(table, entry.freq_khz, entry.duration_s)

        record = CycleRecord(
            index=self.cycle_count,
            zone=zone,
            mode=mode,
            freq_khz=entry.freq_khz,
            duration_s=entry.duration_s,
            t_capture=t_capture,
            t_start=t_start,
            t_end=world.clock,
            heading_error=err,
            distance_cm=dist,
        )
        self.records.append(record)
        self.cycle_count += 1

        if world.target_reached(self.reach_threshold_cm):
            tx, ty = world.target.position
            self.waypoints_reached += 1
            self._telemetry(
                mission_event(
                    world.clock,
                    "waypoint_reached",
                    index=self.waypoints_reached - 1,
                    x=tx,
                    y=ty,
                )
            )
            if world.has_pending_waypoint:
                world.advance_waypoint()
            else:
                self._finish("reached")
        if self.phase is Phase.AUTONOMOUS and self.cycle_count >= self.max_cycles:
            self._finish("budget_exhausted")
        return record

    def _finish(self, outcome: str) -> None:
        self.phase = Phase.FINISHED
        self.outcome = outcome
        self._telemetry(mission_event(self.world.clock, "finished", outcome=outcome))

    def run_mission(self) -> MissionReport:
        """Cycle to termination; requires the autonomous phase to be entered."""
        if self.phase is not Phase.AUTONOMOUS:
            raise RuntimeError("run_mission requires handle_command(101) first")
        world, _, _ = self._require_autonomy_deps()
        world.telemetry.append(
            mission_event(world.clock, "mission_start", max_cycles=self.max_cycles)
        )
        while self.phase is Phase.AUTONOMOUS:
            self.autonomous_cycle()
        return MissionReport(outcome=self.outcome, cycles=self.cycle_count, records=list(self.records))
