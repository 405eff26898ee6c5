"""Append-only JSON-lines telemetry shared by the simulator and controller.

One JSON object per line, every event carrying a non-decreasing timestamp
``t`` (seconds) and a ``type`` tag:

    pose            robot center after a tick: x, y, theta
    segment         actuation span: t (start), t_end, freq_khz
    capture         camera frame plus its processing latency: t, t_end
    classification  vision verdict for a capture: zone
    mission         controller lifecycle marker: event, plus details
    registry        command-set registration: mode, freq_khz, duration
    bounds          robot clamped at the arena wall: x, y
    target          target moved to a new position: x, y
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Iterator

EVENT_KINDS = frozenset(
    {"pose", "segment", "capture", "classification", "mission", "registry", "bounds", "target"}
)


class TelemetryLog:
    """In-memory event list with JSON-lines (de)serialization.

    Appends validate the timestamp ordering, so a log is always a
    consistent, replayable record.
    """

    def __init__(self):
        self._events: list[dict] = []

    def append(self, event: dict) -> dict:
        t = event.get("t")
        kind = event.get("type")
        if not isinstance(t, (int, float)) or isinstance(t, bool) or not math.isfinite(t):
            raise ValueError(f"event needs a finite numeric 't': {event!r}")
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event type {kind!r}")
        if self._events and t < self._events[-1]["t"]:
            raise ValueError(
                f"timestamps must be non-decreasing: {t} after {self._events[-1]['t']}"
            )
        self._events.append(event)
        return event

    def extend(self, events: Iterable[dict]) -> None:
        for e in events:
            self.append(e)

    def events(self, kind: str | None = None) -> list[dict]:
        if kind is None:
            return list(self._events)
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event type {kind!r}")
        return [e for e in self._events if e["type"] == kind]

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self) -> Iterator[dict]:
        return iter(list(self._events))

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self._events)

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "TelemetryLog":
        log = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"line {lineno}: invalid JSON ({e.msg})") from None
            if not isinstance(event, dict):
                raise ValueError(f"line {lineno}: expected a JSON object")
            log.append(event)
        return log

    @classmethod
    def read_jsonl(cls, path) -> "TelemetryLog":
        with open(path, encoding="utf-8") as fh:
            return cls.from_jsonl(fh.read())


def pose_event(t: float, x: float, y: float, theta: float) -> dict:
    return {"t": t, "type": "pose", "x": x, "y": y, "theta": theta}


def segment_event(t_start: float, t_end: float, freq_khz: int) -> dict:
    return {"t": t_start, "type": "segment", "t_end": t_end, "freq_khz": freq_khz}


def capture_event(t_start: float, t_end: float) -> dict:
    return {"t": t_start, "type": "capture", "t_end": t_end, "elapsed": t_end - t_start}


def classification_event(t: float, zone: int) -> dict:
    return {"t": t, "type": "classification", "zone": zone}


def mission_event(t: float, event: str, **details) -> dict:
    return {"t": t, "type": "mission", "event": event, **details}


def registry_event(t: float, mode: str, freq_khz: int, duration: float) -> dict:
    return {"t": t, "type": "registry", "mode": mode, "freq_khz": freq_khz, "duration": duration}


def bounds_event(t: float, x: float, y: float) -> dict:
    return {"t": t, "type": "bounds", "x": x, "y": y}


def target_event(t: float, x: float, y: float) -> dict:
    return {"t": t, "type": "target", "x": x, "y": y}
