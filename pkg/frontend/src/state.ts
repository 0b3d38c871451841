// UI state: what the control surface shows. Incoming engine messages are
// folded in through applyMessage; widgets write through the client, never
// directly into here.

import { Message, Mode, NUM_CONTROL_CHANNELS } from "./protocol.js";
import { RingBuffer } from "./ringbuffer.js";

export const TRACE_CAPACITY = 512;

export type ConnectionStatus = "connecting" | "open" | "closed";
export type ValueSource = "user" | "model";

export interface TraceRow {
  t: number;
  values: Map<number, number>; // latent dim -> mean
}

export class UiState {
  connection: ConnectionStatus = "closed";
  mode: Mode = "user";
  controls: number[] = new Array(NUM_CONTROL_CHANNELS).fill(0);
  /** Who moved each slider last; model-driven motion renders differently. */
  controlSources: ValueSource[] = new Array(NUM_CONTROL_CHANNELS).fill("user");
  latent: (number | null)[] = [];
  alpha: number[] = [];
  gain = 0;
  trace = new RingBuffer<TraceRow>(TRACE_CAPACITY);
  droppedSends = 0;

  constructor(readonly latentDims = 8) {
    this.latent = new Array(latentDims).fill(null);
    this.alpha = new Array(latentDims).fill(0);
  }

  /** Fold one engine message in; returns true if anything visible changed. */
  applyMessage(msg: Message): boolean {
    switch (msg.type) {
      case "mode":
        this.mode = msg.mode;
        return true;
      case "control":
        this.controls[msg.channel] = msg.value;
        // Engine echoes of our own gestures arrive while the human leads;
        // anything received in model lead is the model playing.
        this.controlSources[msg.channel] = this.mode === "model" ? "model" : "user";
        return true;
      case "latent": {
        if (msg.value === null) return false;
        const t = msg.t ?? 0;
        const last = this.trace.last();
        if (last !== undefined && last.t === t) {
          last.values.set(msg.dim, msg.value);
        } else {
          this.trace.push({ t, values: new Map([[msg.dim, msg.value]]) });
        }
        return true;
      }
      case "gain":
        this.gain = msg.value;
        return true;
      case "alpha":
        if (msg.dim === null) {
          this.alpha.fill(msg.value);
        } else if (msg.dim < this.alpha.length) {
          this.alpha[msg.dim] = msg.value;
        }
        return true;
    }
  }

  // Local writes reflecting the user's own gestures, so widgets track the
  // hand immediately instead of waiting for the engine echo.
  setControlLocal(channel: number, value: number): void {
    this.controls[channel] = value;
    this.controlSources[channel] = "user";
  }

  setLatentLocal(dim: number, value: number | null): void {
    this.latent[dim] = value;
  }

  setGainLocal(value: number): void {
    this.gain = value;
  }

  setAlphaLocal(dim: number | null, value: number): void {
    if (dim === null) this.alpha.fill(value);
    else this.alpha[dim] = value;
  }
}
