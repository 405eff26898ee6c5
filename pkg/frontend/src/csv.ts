/**
 * Trajectory export in the exact format the headless CLI writes, so a
 * replayed telemetry log reproduces the run's trajectory.csv byte for
 * byte: CRLF rows of t,x,y,theta with shortest-round-trip floats.
 */

import type { TelemetryEvent } from "./telemetry.js";

/**
 * Shortest-round-trip decimal form of a float64, matching CPython's repr:
 * integral values keep a trailing ".0" and exponents are two digits.
 */
export function pythonRepr(x: number): string {
  if (Number.isNaN(x)) return "nan";
  if (x === Infinity) return "inf";
  if (x === -Infinity) return "-inf";
  if (Object.is(x, -0)) return "-0.0";
  if (Number.isInteger(x) && Math.abs(x) < 1e16) return `${x}.0`;
  const s = x.toString();
  const m = s.match(/^(-?)(\d(?:\.\d+)?)e([+-])(\d+)$/);
  if (m) {
    const exp = m[4]!.length < 2 ? `0${m[4]}` : m[4]!;
    return `${m[1]}${m[2]}e${m[3]}${exp}`;
  }
  return s;
}

export function trajectoryCsv(events: readonly TelemetryEvent[]): string {
  const rows = ["t,x,y,theta"];
  for (const ev of events) {
    if (ev.type === "pose") {
      rows.push([ev.t, ev.x, ev.y, ev.theta].map(pythonRepr).join(","));
    }
  }
  return rows.join("\r\n") + "\r\n";
}
