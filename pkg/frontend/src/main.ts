/**
 * Browser entry point: connect both WebSocket channels of the gateway,
 * wire the control panel, and repaint the arena and timeline as
 * telemetry arrives. Reconnects with a fixed backoff; while the command
 * channel is down all controls are disabled.
 */

import { OperatorConsole, type CommandLink } from "./console.js";
import { arenaOps, paint, timelineOps, type Viewport } from "./render.js";
import type { SessionState } from "./session.js";

const RECONNECT_MS = 1500;

function wsUrl(path: string): string {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}${path}`;
}

function connectCommands(panel: OperatorConsole, link: { ws: WebSocket | null }): void {
  const ws = new WebSocket(wsUrl("/ws/command"));
  ws.binaryType = "arraybuffer";
  ws.onopen = () => panel.setConnected(true);
  ws.onclose = () => {
    panel.setConnected(false);
    link.ws = null;
    setTimeout(() => connectCommands(panel, link), RECONNECT_MS);
  };
  link.ws = ws;
}

function connectTelemetry(panel: OperatorConsole): void {
  const ws = new WebSocket(wsUrl("/ws/telemetry"));
  ws.onmessage = (msg) => {
    if (typeof msg.data === "string") panel.handleTelemetryLine(msg.data);
  };
  ws.onclose = () => setTimeout(() => connectTelemetry(panel), RECONNECT_MS);
}

function main(): void {
  const controls = document.getElementById("controls")!;
  const arena = document.getElementById("arena") as HTMLCanvasElement;
  const timeline = document.getElementById("timeline") as HTMLCanvasElement;

  const link: { ws: WebSocket | null } = { ws: null };
  const commandLink: CommandLink = {
    send(frame) {
      link.ws?.send(frame);
    },
  };

  const panel = new OperatorConsole(controls, commandLink);

  const viewport: Viewport = {
    width: arena.width,
    height: arena.height,
    arena: [0, 0, 60, 60],
  };
  let repaintQueued = false;
  panel.onStateChange = (state: SessionState) => {
    if (repaintQueued) return;
    repaintQueued = true;
    requestAnimationFrame(() => {
      repaintQueued = false;
      paint(arena.getContext("2d")!, arenaOps(state, viewport));
      paint(timeline.getContext("2d")!, timelineOps(state, timeline.width, timeline.height));
    });
  };

  connectCommands(panel, link);
  connectTelemetry(panel);
}

main();
