/**
 * Console session state as a pure fold over the telemetry stream.
 *
 * The registry panel and autonomy gate derive exclusively from
 * acknowledged `registry` telemetry events, never from commands the
 * console sent: what you see is what the robot confirmed.
 */

import { MODES, type Mode } from "./protocol.js";
import type {
  BoundsEvent,
  CaptureEvent,
  MissionEvent,
  PoseEvent,
  SegmentEvent,
  TelemetryEvent,
} from "./telemetry.js";

export interface RegistrySlot {
  freqKhz: number;
  durationS: number;
}

export interface SessionState {
  readonly registry: Partial<Record<Mode, RegistrySlot>>;
  readonly poses: readonly PoseEvent[];
  readonly segments: readonly SegmentEvent[];
  readonly captures: readonly CaptureEvent[];
  readonly wallHits: readonly BoundsEvent[];
  readonly missionLog: readonly MissionEvent[];
  readonly target: { x: number; y: number } | null;
  readonly zone: number | null;
  readonly clock: number;
}

export function initialState(): SessionState {
  return {
    registry: {},
    poses: [],
    segments: [],
    captures: [],
    wallHits: [],
    missionLog: [],
    target: null,
    zone: null,
    clock: 0,
  };
}

function isMode(name: string): name is Mode {
  return (MODES as readonly string[]).includes(name);
}

/** Pure: returns a new state, never mutates the old one or the event. */
export function applyEvent(state: SessionState, ev: TelemetryEvent): SessionState {
  const clock = Math.max(state.clock, ev.t);
  switch (ev.type) {
    case "pose":
      return { ...state, clock, poses: [...state.poses, ev] };
    case "segment":
      return { ...state, clock, segments: [...state.segments, ev] };
    case "capture":
      return { ...state, clock, captures: [...state.captures, ev] };
    case "classification":
      return { ...state, clock, zone: ev.zone };
    case "registry": {
      if (!isMode(ev.mode)) return { ...state, clock };
      const slot: RegistrySlot = { freqKhz: ev.freq_khz, durationS: ev.duration };
      return { ...state, clock, registry: { ...state.registry, [ev.mode]: slot } };
    }
    case "mission":
      return { ...state, clock, missionLog: [...state.missionLog, ev] };
    case "bounds":
      return { ...state, clock, wallHits: [...state.wallHits, ev] };
    case "target":
      return { ...state, clock, target: { x: ev.x, y: ev.y } };
  }
}

export function replay(events: readonly TelemetryEvent[]): SessionState {
  return events.reduce(applyEvent, initialState());
}

/** Autonomy unlocks only once all four modes have acknowledged slots. */
export function canGoAutonomous(state: SessionState): boolean {
  return MODES.every((mode) => state.registry[mode] !== undefined);
}

export function latestPose(state: SessionState): PoseEvent | null {
  return state.poses.length > 0 ? state.poses[state.poses.length - 1]! : null;
}
