import { describe, expect, it } from "vitest";

import {
  encodeMessage,
  parseMessage,
  ProtocolError,
  validateMessage,
} from "../src/protocol.js";

describe("validateMessage", () => {
  it("accepts every message type", () => {
    validateMessage({ type: "control", channel: 0, value: 0.5 });
    validateMessage({ type: "latent", dim: 3, value: -1.2 });
    validateMessage({ type: "latent", dim: 3, value: null });
    validateMessage({ type: "mode", mode: "model" });
    validateMessage({ type: "gain", value: 2.0 });
    validateMessage({ type: "alpha", dim: null, value: 0.8 });
  });

  it("strips unknown fields", () => {
    const msg = validateMessage({
      type: "control", channel: 1, value: 0.5, pineapple: true,
    }) as Record<string, unknown>;
    expect("pineapple" in msg).toBe(false);
  });

  it("rejects out-of-range and malformed fields", () => {
    expect(() => validateMessage({ type: "control", channel: 8, value: 0.5 })).toThrow(ProtocolError);
    expect(() => validateMessage({ type: "control", channel: 0, value: 1.5 })).toThrow(ProtocolError);
    expect(() => validateMessage({ type: "control", channel: 0.5, value: 0.5 })).toThrow(ProtocolError);
    expect(() => validateMessage({ type: "gain", value: -1 })).toThrow(ProtocolError);
    expect(() => validateMessage({ type: "mode", mode: "robot" })).toThrow(ProtocolError);
    expect(() => validateMessage({ type: "detonate" })).toThrow(ProtocolError);
    expect(() => validateMessage([1, 2, 3])).toThrow(ProtocolError);
  });

  it("requires declared fields", () => {
    expect(() => validateMessage({ type: "control", channel: 2 })).toThrow(ProtocolError);
    expect(() => validateMessage({ type: "alpha", dim: 0 })).toThrow(ProtocolError);
  });
});

describe("encode/parse", () => {
  it("round-trips and matches the engine's field order", () => {
    const text = encodeMessage({ type: "control", t: 1.5, channel: 3, value: 0.25 });
    expect(text).toBe('{"t":1.5,"type":"control","channel":3,"value":0.25}');
    expect(parseMessage(text)).toEqual({ t: 1.5, type: "control", channel: 3, value: 0.25 });
  });

  it("throws ProtocolError on malformed JSON", () => {
    expect(() => parseMessage("{oops")).toThrow(ProtocolError);
  });
});
