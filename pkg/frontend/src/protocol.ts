/**
 * Command-channel framing, mirroring PROTOCOL.md exactly.
 *
 * Every command is three bytes: magic 0xFA, a code, and the XOR checksum
 * of the two. Codes 0-106 and 203-206 are valid; everything else is
 * reserved and unreachable from this module.
 */

export const MAGIC = 0xfa;
export const FRAME_SIZE = 3;

export const CODE_IDLE = 0;
export const CODE_GO_AUTONOMOUS = 101;
export const CODE_ABORT = 102;

export const MODES = ["STRAIGHT", "LEFT", "RIGHT", "SEARCH"] as const;
export type Mode = (typeof MODES)[number];

export const REGISTER_CODE: Record<Mode, number> = {
  STRAIGHT: 103,
  LEFT: 104,
  RIGHT: 105,
  SEARCH: 106,
};

export const ARM_DURATION_CODE: Record<Mode, number> = {
  STRAIGHT: 203,
  LEFT: 204,
  RIGHT: 205,
  SEARCH: 206,
};

export function isValidCode(code: number): boolean {
  if (!Number.isInteger(code)) return false;
  return (code >= 0 && code <= 106) || (code >= 203 && code <= 206);
}

export function encodeCommand(code: number): Uint8Array {
  if (!isValidCode(code)) throw new Error(`invalid command code ${code}`);
  return Uint8Array.of(MAGIC, code, MAGIC ^ code);
}

/** Frequency codes are the frequency itself; integers 1-100 kHz only. */
export function frequencyCode(khz: number): number {
  if (!Number.isInteger(khz) || khz < 1 || khz > 100) {
    throw new Error(`frequency ${khz} kHz outside 1-100`);
  }
  return khz;
}

/**
 * Clamp a free-form field value to a legal frequency: non-numbers become
 * the fallback, everything else is rounded and pinned to 1-100.
 */
export function clampFrequency(raw: number, fallback = 1): number {
  if (!Number.isFinite(raw)) return fallback;
  return Math.min(100, Math.max(1, Math.round(raw)));
}

/** A duration argument is the span in units of 100 ms: 0.1 s to 10 s. */
export function durationArgumentCode(seconds: number): number {
  const tenths = Math.round(seconds * 10);
  if (!Number.isFinite(seconds) || tenths < 1 || tenths > 100) {
    throw new Error(`duration ${seconds} s outside 0.1-10.0`);
  }
  return tenths;
}

export function clampDurationSeconds(raw: number, fallback = 1.0): number {
  if (!Number.isFinite(raw)) return fallback;
  return Math.min(10, Math.max(0.1, Math.round(raw * 10) / 10));
}
