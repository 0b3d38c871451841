// DOM widgets. All protocol semantics live in client/state; this file only
// draws and forwards gestures.

import { EngineClient } from "./client.js";
import { UiState } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function slider(
  label: string,
  onInput: (value: number) => void,
  opts: { min?: number; max?: number; step?: number; value?: number } = {},
): { root: HTMLElement; input: HTMLInputElement } {
  const root = el("div", "slider");
  const input = el("input");
  input.type = "range";
  input.min = String(opts.min ?? 0);
  input.max = String(opts.max ?? 1);
  input.step = String(opts.step ?? 0.001);
  input.value = String(opts.value ?? 0);
  input.addEventListener("input", () => onInput(Number(input.value)));
  root.append(el("label", undefined, label), input);
  return { root, input };
}

export class ControlSurface {
  private modeEl: HTMLElement;
  private statusEl: HTMLElement;
  private droppedEl: HTMLElement;
  private controlInputs: HTMLInputElement[] = [];
  private traceCanvas: HTMLCanvasElement;

  constructor(
    root: HTMLElement,
    private readonly state: UiState,
    client: EngineClient,
  ) {
    const header = el("div", "header");
    this.statusEl = el("span", "status", "disconnected");
    this.modeEl = el("span", "mode user", "USER LEAD");
    this.droppedEl = el("span", "dropped", "");
    header.append(this.statusEl, this.modeEl, this.droppedEl);
    root.append(header);

    const controls = el("div", "bank controls");
    controls.append(el("h2", undefined, "controllers"));
    for (let ch = 0; ch < state.controls.length; ch++) {
      const { root: row, input } = slider(`ch ${ch}`, (v) => {
        state.setControlLocal(ch, v);
        client.sendControl(ch, v);
      });
      this.controlInputs.push(input);
      controls.append(row);
    }
    root.append(controls);

    const latent = el("div", "bank latent");
    latent.append(el("h2", undefined, "latent manipulation"));
    for (let dim = 0; dim < state.latentDims; dim++) {
      const { root: row } = slider(
        `z${dim}`,
        (v) => {
          state.setLatentLocal(dim, v);
          client.sendLatent(dim, v);
        },
        { min: -3, max: 3, value: 0 },
      );
      const clear = el("button", undefined, "clear");
      clear.addEventListener("click", () => {
        state.setLatentLocal(dim, null);
        client.sendLatent(dim, null);
      });
      row.append(clear);
      latent.append(row);
    }
    root.append(latent);

    const fb = el("div", "bank feedback");
    fb.append(el("h2", undefined, "feedback"));
    fb.append(
      slider("alpha (all dims)", (v) => {
        state.setAlphaLocal(null, v);
        client.sendAlpha(null, v);
      }).root,
      slider(
        "audio gain",
        (v) => {
          state.setGainLocal(v);
          client.sendGain(v);
        },
        { max: 4 },
      ).root,
    );
    root.append(fb);

    this.traceCanvas = el("canvas", "trace");
    this.traceCanvas.width = 512;
    this.traceCanvas.height = 160;
    root.append(this.traceCanvas);
  }

  /** Redraw everything the engine can move underneath the performer. */
  render(): void {
    this.modeEl.textContent = this.state.mode === "model" ? "MODEL LEAD" : "USER LEAD";
    this.modeEl.className = `mode ${this.state.mode}`;
    this.statusEl.textContent = this.state.connection;
    this.droppedEl.textContent =
      this.state.droppedSends > 0 ? `dropped: ${this.state.droppedSends}` : "";
    for (let ch = 0; ch < this.controlInputs.length; ch++) {
      const input = this.controlInputs[ch];
      if (document.activeElement !== input) {
        input.value = String(this.state.controls[ch]);
      }
      input.classList.toggle("model-driven", this.state.controlSources[ch] === "model");
    }
    this.drawTrace();
  }

  private drawTrace(): void {
    const ctx = this.traceCanvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.traceCanvas;
    ctx.clearRect(0, 0, width, height);
    const rows = this.state.trace.toArray();
    if (rows.length < 2) return;
    for (let dim = 0; dim < this.state.latentDims; dim++) {
      ctx.beginPath();
      ctx.strokeStyle = `hsl(${(dim * 360) / this.state.latentDims}, 70%, 55%)`;
      rows.forEach((row, i) => {
        const v = row.values.get(dim);
        if (v === undefined) return;
        const x = (i / (this.state.trace.capacity - 1)) * width;
        const y = height / 2 - Math.max(-4, Math.min(4, v)) * (height / 8);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.stroke();
    }
  }
}
