// Wire protocol shared with the engine: one JSON object per message.
// Validation here mirrors the engine exactly, so anything this module
// accepts or emits is schema-valid on the other side too.

export const NUM_CONTROL_CHANNELS = 8;

export type Mode = "user" | "model";

export interface ControlMessage {
  type: "control";
  t?: number;
  channel: number; // 0..7
  value: number;   // 0..1
}

export interface LatentMessage {
  type: "latent";
  t?: number;
  dim: number;
  value: number | null; // null clears the manipulation
}

export interface ModeMessage {
  type: "mode";
  t?: number;
  mode: Mode;
}

export interface GainMessage {
  type: "gain";
  t?: number;
  value: number; // >= 0
}

export interface AlphaMessage {
  type: "alpha";
  t?: number;
  dim: number | null; // null broadcasts to all dims
  value: number;      // 0..1
}

export type Message =
  | ControlMessage
  | LatentMessage
  | ModeMessage
  | GainMessage
  | AlphaMessage;

const FIELD_ORDER = ["t", "type", "channel", "dim", "value", "mode"] as const;

export class ProtocolError extends Error {}

function wantNumber(
  msg: Record<string, unknown>,
  key: string,
  opts: { lo?: number; hi?: number; optional?: boolean; allowNull?: boolean } = {},
): number | null {
  const v = msg[key];
  if (v === undefined || v === null) {
    if (v === undefined && opts.optional) return null;
    if (v === null && opts.allowNull) return null;
    throw new ProtocolError(`'${key}' is required for type '${msg.type}'`);
  }
  if (typeof v !== "number" || !Number.isFinite(v)) {
    throw new ProtocolError(`'${key}' must be a finite number`);
  }
  if (opts.lo !== undefined && v < opts.lo) throw new ProtocolError(`'${key}' ${v} below ${opts.lo}`);
  if (opts.hi !== undefined && v > opts.hi) throw new ProtocolError(`'${key}' ${v} above ${opts.hi}`);
  return v;
}

function wantInt(
  msg: Record<string, unknown>,
  key: string,
  lo: number,
  hi?: number,
  allowNull = false,
): number | null {
  const v = wantNumber(msg, key, { lo, hi, allowNull });
  if (v === null) return null;
  if (!Number.isInteger(v)) throw new ProtocolError(`'${key}' must be an integer`);
  return v;
}

/** Check shape and ranges; returns the message stripped of unknown fields. */
export function validateMessage(raw: unknown): Message {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ProtocolError("message must be a JSON object");
  }
  const msg = raw as Record<string, unknown>;
  const t = wantNumber(msg, "t", { lo: 0, optional: true });
  const base = t === null ? {} : { t };

  switch (msg.type) {
    case "control":
      return {
        ...base,
        type: "control",
        channel: wantInt(msg, "channel", 0, NUM_CONTROL_CHANNELS - 1)!,
        value: wantNumber(msg, "value", { lo: 0, hi: 1 })!,
      };
    case "latent":
      return {
        ...base,
        type: "latent",
        dim: wantInt(msg, "dim", 0)!,
        value: wantNumber(msg, "value", { allowNull: true }),
      };
    case "mode":
      if (msg.mode !== "user" && msg.mode !== "model") {
        throw new ProtocolError(`mode must be 'user' or 'model'`);
      }
      return { ...base, type: "mode", mode: msg.mode };
    case "gain":
      return { ...base, type: "gain", value: wantNumber(msg, "value", { lo: 0 })! };
    case "alpha":
      return {
        ...base,
        type: "alpha",
        dim: wantInt(msg, "dim", 0, undefined, true),
        value: wantNumber(msg, "value", { lo: 0, hi: 1 })!,
      };
    default:
      throw new ProtocolError(`unknown message type '${String(msg.type)}'`);
  }
}

/** Validate and serialize with the engine's field order. */
export function encodeMessage(msg: Message): string {
  const checked = validateMessage(msg) as unknown as Record<string, unknown>;
  const ordered: Record<string, unknown> = {};
  for (const key of FIELD_ORDER) {
    if (key in checked) ordered[key] = checked[key];
  }
  return JSON.stringify(ordered);
}

export function parseMessage(text: string): Message {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new ProtocolError(`malformed JSON: ${String(err)}`);
  }
  return validateMessage(raw);
}
