import { describe, expect, it } from "vitest";

import {
  ARM_DURATION_CODE,
  FRAME_SIZE,
  MAGIC,
  MODES,
  REGISTER_CODE,
  clampDurationSeconds,
  clampFrequency,
  durationArgumentCode,
  encodeCommand,
  frequencyCode,
  isValidCode,
} from "../src/protocol.js";

describe("command framing", () => {
  it("matches the documented byte examples", () => {
    expect([...encodeCommand(5)]).toEqual([0xfa, 0x05, 0xff]);
    expect([...encodeCommand(103)]).toEqual([0xfa, 0x67, 0x9d]);
    expect([...encodeCommand(203)]).toEqual([0xfa, 0xcb, 0x31]);
    expect([...encodeCommand(20)]).toEqual([0xfa, 0x14, 0xee]);
    expect([...encodeCommand(101)]).toEqual([0xfa, 0x65, 0x9f]);
  });

  it("accepts exactly codes 0-106 and 203-206 over the whole byte range", () => {
    for (let code = 0; code <= 255; code++) {
      const expected = (code >= 0 && code <= 106) || (code >= 203 && code <= 206);
      expect(isValidCode(code)).toBe(expected);
      if (expected) {
        const frame = encodeCommand(code);
        expect(frame.length).toBe(FRAME_SIZE);
        expect(frame[0]).toBe(MAGIC);
        expect(frame[0]! ^ frame[1]!).toBe(frame[2]);
      } else {
        expect(() => encodeCommand(code)).toThrow(/invalid command code/);
      }
    }
    expect(isValidCode(3.5)).toBe(false);
    expect(isValidCode(NaN)).toBe(false);
  });

  it("exposes the four register and arm codes in mode order", () => {
    expect(MODES).toEqual(["STRAIGHT", "LEFT", "RIGHT", "SEARCH"]);
    expect(MODES.map((m) => REGISTER_CODE[m])).toEqual([103, 104, 105, 106]);
    expect(MODES.map((m) => ARM_DURATION_CODE[m])).toEqual([203, 204, 205, 206]);
  });
});

describe("frequency codes", () => {
  it("passes integers 1-100 through and rejects the rest", () => {
    expect(frequencyCode(1)).toBe(1);
    expect(frequencyCode(100)).toBe(100);
    for (const bad of [0, 101, 57.5, NaN, -9]) {
      expect(() => frequencyCode(bad)).toThrow(/outside 1-100/);
    }
  });

  it("clamps free-form field values into the legal range", () => {
    expect(clampFrequency(250)).toBe(100);
    expect(clampFrequency(-3)).toBe(1);
    expect(clampFrequency(57.4)).toBe(57);
    expect(clampFrequency(NaN, 9)).toBe(9);
  });
});

describe("duration arguments", () => {
  it("converts seconds to 100 ms units", () => {
    expect(durationArgumentCode(2.0)).toBe(20);
    expect(durationArgumentCode(1.0)).toBe(10);
    expect(durationArgumentCode(0.1)).toBe(1);
    expect(durationArgumentCode(10.0)).toBe(100);
  });

  it("rejects spans outside 0.1-10 s", () => {
    for (const bad of [0, 0.04, 10.1, -1, NaN]) {
      expect(() => durationArgumentCode(bad)).toThrow(/outside 0.1-10.0/);
    }
  });

  it("clamps free-form field values to representable spans", () => {
    expect(clampDurationSeconds(99)).toBe(10);
    expect(clampDurationSeconds(0)).toBe(0.1);
    expect(clampDurationSeconds(1.25)).toBeCloseTo(1.3, 12);
    expect(clampDurationSeconds(NaN)).toBe(1.0);
  });
});
