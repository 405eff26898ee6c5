/**
 * Telemetry-channel event types: one JSON object per line, a `type` tag
 * and a non-decreasing timestamp `t` on every event (see PROTOCOL.md).
 */

export interface PoseEvent {
  t: number;
  type: "pose";
  x: number;
  y: number;
  theta: number;
}

export interface SegmentEvent {
  t: number;
  type: "segment";
  t_end: number;
  freq_khz: number;
}

export interface CaptureEvent {
  t: number;
  type: "capture";
  t_end: number;
  elapsed: number;
}

export interface ClassificationEvent {
  t: number;
  type: "classification";
  zone: number;
}

export interface MissionEvent {
  t: number;
  type: "mission";
  event: string;
  [detail: string]: unknown;
}

export interface RegistryEvent {
  t: number;
  type: "registry";
  mode: string;
  freq_khz: number;
  duration: number;
}

export interface BoundsEvent {
  t: number;
  type: "bounds";
  x: number;
  y: number;
}

export interface TargetEvent {
  t: number;
  type: "target";
  x: number;
  y: number;
}

export type TelemetryEvent =
  | PoseEvent
  | SegmentEvent
  | CaptureEvent
  | ClassificationEvent
  | MissionEvent
  | RegistryEvent
  | BoundsEvent
  | TargetEvent;

export function parseTelemetryLine(line: string): TelemetryEvent {
  const doc: unknown = JSON.parse(line);
  if (
    typeof doc !== "object" ||
    doc === null ||
    typeof (doc as { type?: unknown }).type !== "string" ||
    typeof (doc as { t?: unknown }).t !== "number"
  ) {
    throw new Error(`not a telemetry event: ${line}`);
  }
  return doc as TelemetryEvent;
}

/** Parse a whole JSON-lines log (blank lines ignored). */
export function parseTelemetryLog(text: string): TelemetryEvent[] {
  return text
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map(parseTelemetryLine);
}
