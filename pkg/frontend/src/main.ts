import { EngineClient } from "./client.js";
import { UiState } from "./state.js";
import { ControlSurface } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const url = params.get("engine") ?? "ws://127.0.0.1:8765";
const dims = Number(params.get("dims") ?? 8);

const state = new UiState(dims);
const client = new EngineClient({ url });
const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");
const surface = new ControlSurface(root, state, client);

let dirty = true;
client.onMessage = (msg) => {
  if (state.applyMessage(msg)) dirty = true;
};
client.onStatus = (status) => {
  state.connection = status;
  dirty = true;
};
client.connect();

function frame() {
  state.droppedSends = client.dropped;
  if (dirty) {
    surface.render();
    dirty = false;
  }
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
