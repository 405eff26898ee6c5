/**
 * Operator console: the control panel DOM and its wiring.
 *
 * Every outgoing byte goes through `encodeCommand`, so the panel can only
 * emit valid codes. The registry column and the autonomy gate read the
 * session state, which is folded purely from received telemetry: a
 * registration shows up only after the robot acknowledges it.
 */

import {
  ARM_DURATION_CODE,
  CODE_ABORT,
  CODE_GO_AUTONOMOUS,
  CODE_IDLE,
  MODES,
  REGISTER_CODE,
  clampDurationSeconds,
  clampFrequency,
  durationArgumentCode,
  encodeCommand,
  frequencyCode,
  type Mode,
} from "./protocol.js";
import {
  applyEvent,
  canGoAutonomous,
  initialState,
  type SessionState,
} from "./session.js";
import { parseTelemetryLine } from "./telemetry.js";

export interface CommandLink {
  send(frame: Uint8Array): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

function filled<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
  ...children: (HTMLElement | string)[]
): HTMLElementTagNameMap[K] {
  const node = el(tag, attrs);
  node.append(...children);
  return node;
}

export class OperatorConsole {
  state: SessionState = initialState();
  connected = false;
  onStateChange: ((state: SessionState) => void) | null = null;

  private readonly link: CommandLink;
  private readonly freqInput: HTMLInputElement;
  private readonly freqSlider: HTMLInputElement;
  private readonly durationInputs = new Map<Mode, HTMLInputElement>();
  private readonly registryCells = new Map<Mode, HTMLElement>();
  private readonly commandButtons: HTMLButtonElement[] = [];
  private readonly goButton: HTMLButtonElement;
  private readonly statusBadge: HTMLElement;
  private readonly missionList: HTMLElement;

  constructor(root: HTMLElement, link: CommandLink) {
    this.link = link;

    this.statusBadge = el("span", { id: "status", class: "status down" }, "disconnected");
    root.append(this.statusBadge);

    this.freqInput = el("input", { id: "freq", type: "number", min: "1", max: "100", step: "1", value: "5" });
    this.freqSlider = el("input", { id: "freq-slider", type: "range", min: "1", max: "100", value: "5" });
    this.freqSlider.addEventListener("input", () => (this.freqInput.value = this.freqSlider.value));
    this.freqInput.addEventListener("input", () => (this.freqSlider.value = this.freqInput.value));
    root.append(
      filled(
        "div",
        { class: "row" },
        el("label", { for: "freq" }, "frequency kHz"),
        this.freqInput,
        this.freqSlider,
        this.button("drive", "Drive", () => this.sendCode(frequencyCode(this.currentFrequency()))),
        this.button("idle", "Idle", () => this.sendCode(CODE_IDLE)),
        this.button("abort", "Abort", () => this.sendCode(CODE_ABORT)),
      ),
    );

    const table = el("table", { class: "modes" });
    table.append(
      filled(
        "tr",
        {},
        el("th", {}, "mode"),
        el("th", {}, "register"),
        el("th", {}, "duration s"),
        el("th", {}, "acknowledged"),
      ),
    );
    for (const mode of MODES) {
      const duration = el("input", {
        id: `dur-${mode}`,
        type: "number",
        min: "0.1",
        max: "10",
        step: "0.1",
        value: "1.0",
      });
      this.durationInputs.set(mode, duration);
      const cell = el("td", { id: `registry-${mode}` }, "—");
      this.registryCells.set(mode, cell);
      table.append(
        filled(
          "tr",
          {},
          el("td", {}, mode),
          filled("td", {}, this.button(`register-${mode}`, `Register ${mode}`, () => this.register(mode))),
          filled("td", {}, duration, this.button(`arm-${mode}`, "Set duration", () => this.setDuration(mode))),
          cell,
        ),
      );
    }
    root.append(table);

    this.goButton = this.button("go-autonomous", "Go Autonomous", () =>
      this.sendCode(CODE_GO_AUTONOMOUS),
    );
    root.append(this.goButton);

    this.missionList = el("ul", { id: "mission-log" });
    root.append(this.missionList);

    this.refresh();
  }

  private button(id: string, label: string, onClick: () => void): HTMLButtonElement {
    const b = el("button", { id, type: "button" }, label);
    b.addEventListener("click", onClick);
    this.commandButtons.push(b);
    return b;
  }

  private currentFrequency(): number {
    return clampFrequency(parseFloat(this.freqInput.value), 1);
  }

  private sendCode(code: number): void {
    if (!this.connected) return;
    this.link.send(encodeCommand(code));
  }

  /** Bind the current frequency to a mode: drive code, then register code. */
  register(mode: Mode): void {
    this.sendCode(frequencyCode(this.currentFrequency()));
    this.sendCode(REGISTER_CODE[mode]);
  }

  /** Arm the mode's duration slot, then send the span in 100 ms units. */
  setDuration(mode: Mode): void {
    const input = this.durationInputs.get(mode)!;
    const seconds = clampDurationSeconds(parseFloat(input.value), 1.0);
    this.sendCode(ARM_DURATION_CODE[mode]);
    this.sendCode(durationArgumentCode(seconds));
  }

  setConnected(connected: boolean): void {
    this.connected = connected;
    this.refresh();
  }

  handleTelemetryLine(line: string): void {
    this.state = applyEvent(this.state, parseTelemetryLine(line));
    this.refresh();
    this.onStateChange?.(this.state);
  }

  private refresh(): void {
    this.statusBadge.textContent = this.connected ? "connected" : "disconnected";
    this.statusBadge.className = this.connected ? "status up" : "status down";
    for (const b of this.commandButtons) b.disabled = !this.connected;
    this.freqInput.disabled = this.freqSlider.disabled = !this.connected;
    for (const input of this.durationInputs.values()) input.disabled = !this.connected;
    this.goButton.disabled = !this.connected || !canGoAutonomous(this.state);

    for (const mode of MODES) {
      const slot = this.state.registry[mode];
      this.registryCells.get(mode)!.textContent = slot
        ? `${slot.freqKhz} kHz / ${slot.durationS.toFixed(1)} s`
        : "—";
    }

    const lines = this.state.missionLog.slice(-6).map((m) => {
      const extra = Object.entries(m)
        .filter(([key]) => !["t", "type", "event"].includes(key))
        .map(([key, value]) => `${key}=${JSON.stringify(value)}`)
        .join(" ");
      return `${m.t.toFixed(2)}s ${m.event} ${extra}`.trimEnd();
    });
    this.missionList.replaceChildren(...lines.map((text) => el("li", {}, text)));
  }
}
