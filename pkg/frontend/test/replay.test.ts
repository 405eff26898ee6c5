import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { pythonRepr, trajectoryCsv } from "../src/csv.js";
import { arenaOps, timelineOps, type Viewport } from "../src/render.js";
import { applyEvent, replay } from "../src/session.js";
import { parseTelemetryLog } from "../src/telemetry.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
const VIEWPORT: Viewport = { width: 640, height: 640, arena: [0, 0, 60, 60] };

function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

describe("float formatting", () => {
  it("reproduces shortest-round-trip reprs", () => {
    expect(pythonRepr(2)).toBe("2.0");
    expect(pythonRepr(45.0)).toBe("45.0");
    expect(pythonRepr(-0)).toBe("-0.0");
    expect(pythonRepr(0.1)).toBe("0.1");
    expect(pythonRepr(1.5651296601282298)).toBe("1.5651296601282298");
    expect(pythonRepr(1e-7)).toBe("1e-07");
    expect(pythonRepr(-2.5e-12)).toBe("-2.5e-12");
    expect(pythonRepr(1.5e21)).toBe("1.5e+21");
  });
});

describe("telemetry replay", () => {
  const events = parseTelemetryLog(fixture("telemetry.jsonl"));

  it("renders a trajectory byte-identical to the headless run's CSV", () => {
    expect(trajectoryCsv(events)).toBe(fixture("trajectory.csv"));
  });

  it("covers a full mission's worth of events", () => {
    const state = replay(events);
    expect(state.poses.length).toBeGreaterThan(500);
    expect(state.segments.length).toBeGreaterThan(10);
    expect(state.captures.length).toBe(state.segments.length);
    expect(state.missionLog.some((m) => m.event === "finished")).toBe(true);
  });

  it("renders as a pure function of the telemetry prefix", () => {
    // folding in two chunks lands on the same state and draw operations
    const split = Math.floor(events.length / 3);
    const incremental = events.slice(split).reduce(applyEvent, replay(events.slice(0, split)));
    const whole = replay(events);
    expect(incremental).toEqual(whole);
    expect(arenaOps(incremental, VIEWPORT)).toEqual(arenaOps(whole, VIEWPORT));
    expect(timelineOps(incremental, 640, 60)).toEqual(timelineOps(whole, 640, 60));
  });
});
