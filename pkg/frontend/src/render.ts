/**
 * Arena and timeline rendering as pure data: a session state maps to a
 * list of draw operations, and a thin painter walks that list on a 2D
 * canvas. Same telemetry prefix in, same operations out.
 */

import { latestPose, type SessionState } from "./session.js";

export interface Viewport {
  width: number;
  height: number;
  /** world-space view rectangle [x0, y0, x1, y1] in cm, y up */
  arena: [number, number, number, number];
}

export type DrawOp =
  | { kind: "polyline"; points: [number, number][]; color: string; width: number }
  | { kind: "polygon"; points: [number, number][]; fill: string }
  | { kind: "disc"; center: [number, number]; radius: number; fill: string }
  | { kind: "rect"; x: number; y: number; w: number; h: number; fill: string }
  | { kind: "text"; at: [number, number]; text: string; color: string };

export function worldToScreen(vp: Viewport, x: number, y: number): [number, number] {
  const [x0, y0, x1, y1] = vp.arena;
  const sx = ((x - x0) / (x1 - x0)) * vp.width;
  const sy = vp.height - ((y - y0) / (y1 - y0)) * vp.height;
  return [sx, sy];
}

function starPoints(vp: Viewport, cx: number, cy: number, outer: number): [number, number][] {
  // pentagram: 10 vertices alternating outer/inner radius, first spike up
  const inner = outer * (Math.cos((72 * Math.PI) / 180) / Math.cos((36 * Math.PI) / 180));
  const pts: [number, number][] = [];
  for (let k = 0; k < 10; k++) {
    const r = k % 2 === 0 ? outer : inner;
    const a = (k * Math.PI) / 5;
    pts.push(worldToScreen(vp, cx + r * Math.sin(a), cy + r * Math.cos(a)));
  }
  return pts;
}

function arrowOps(vp: Viewport, x: number, y: number, theta: number, lengthCm: number, color: string): DrawOp[] {
  const tip: [number, number] = [x + lengthCm * Math.cos(theta), y + lengthCm * Math.sin(theta)];
  const barb = (side: number): [number, number] => [
    tip[0] + 0.4 * lengthCm * Math.cos(theta + Math.PI + side * 0.5),
    tip[1] + 0.4 * lengthCm * Math.sin(theta + Math.PI + side * 0.5),
  ];
  const shaft: [number, number][] = [worldToScreen(vp, x, y), worldToScreen(vp, tip[0], tip[1])];
  const head: [number, number][] = [
    worldToScreen(vp, ...barb(1)),
    shaft[1]!,
    worldToScreen(vp, ...barb(-1)),
  ];
  return [
    { kind: "polyline", points: shaft, color, width: 1.5 },
    { kind: "polyline", points: head, color, width: 1.5 },
  ];
}

/** Every draw operation for the arena view; pure in the state. */
export function arenaOps(state: SessionState, vp: Viewport): DrawOp[] {
  const ops: DrawOp[] = [
    { kind: "rect", x: 0, y: 0, w: vp.width, h: vp.height, fill: "#10151c" },
  ];
  if (state.target) {
    ops.push({ kind: "polygon", points: starPoints(vp, state.target.x, state.target.y, 4), fill: "#e8c21a" });
  }
  if (state.poses.length > 1) {
    ops.push({
      kind: "polyline",
      points: state.poses.map((p) => worldToScreen(vp, p.x, p.y)),
      color: "#3fa7ff",
      width: 1,
    });
  }
  for (let i = 0; i < state.poses.length; i += 30) {
    const p = state.poses[i]!;
    ops.push(...arrowOps(vp, p.x, p.y, p.theta, 1.6, "#2d6da3"));
  }
  const here = latestPose(state);
  if (here) {
    ops.push({ kind: "disc", center: worldToScreen(vp, here.x, here.y), radius: 4, fill: "#9fe870" });
    ops.push(...arrowOps(vp, here.x, here.y, here.theta, 2.4, "#9fe870"));
  }
  for (const hit of state.wallHits) {
    ops.push({ kind: "disc", center: worldToScreen(vp, hit.x, hit.y), radius: 2, fill: "#e85b5b" });
  }
  return ops;
}

/** Actuation segments and capture intervals as a horizontal strip. */
export function timelineOps(state: SessionState, width: number, height: number): DrawOp[] {
  const ops: DrawOp[] = [{ kind: "rect", x: 0, y: 0, w: width, h: height, fill: "#10151c" }];
  const span = Math.max(state.clock, 1e-9);
  const toX = (t: number) => (t / span) * width;
  for (const c of state.captures) {
    ops.push({
      kind: "rect",
      x: toX(c.t),
      y: height * 0.55,
      w: Math.max(toX(c.t_end) - toX(c.t), 1),
      h: height * 0.35,
      fill: "#5d6672",
    });
  }
  for (const s of state.segments) {
    // hue tracks frequency so mode changes are visible at a glance
    const hue = (s.freq_khz * 3.6) % 360;
    ops.push({
      kind: "rect",
      x: toX(s.t),
      y: height * 0.1,
      w: Math.max(toX(s.t_end) - toX(s.t), 1),
      h: height * 0.35,
      fill: `hsl(${hue}, 70%, 55%)`,
    });
  }
  return ops;
}

export function paint(ctx: CanvasRenderingContext2D, ops: readonly DrawOp[]): void {
  for (const op of ops) {
    switch (op.kind) {
      case "rect":
        ctx.fillStyle = op.fill;
        ctx.fillRect(op.x, op.y, op.w, op.h);
        break;
      case "disc":
        ctx.fillStyle = op.fill;
        ctx.beginPath();
        ctx.arc(op.center[0], op.center[1], op.radius, 0, 2 * Math.PI);
        ctx.fill();
        break;
      case "polygon":
        ctx.fillStyle = op.fill;
        ctx.beginPath();
        op.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
        ctx.closePath();
        ctx.fill();
        break;
      case "polyline":
        ctx.strokeStyle = op.color;
        ctx.lineWidth = op.width;
        ctx.beginPath();
        op.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
        ctx.stroke();
        break;
      case "text":
        ctx.fillStyle = op.color;
        ctx.fillText(op.text, op.at[0], op.at[1]);
        break;
    }
  }
}
