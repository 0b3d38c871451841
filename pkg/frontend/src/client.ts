// Engine connection: validated sends, drop counting, reconnect with backoff.
// Never blocks on the socket; a send that can't go out right now is dropped
// and counted so the surface can show it.

import { encodeMessage, Message, parseMessage } from "./protocol.js";
import { RateLimiter } from "./ratelimit.js";

export interface WebSocketLike {
  readyState: number;
  bufferedAmount: number;
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
}

const OPEN = 1;
const INITIAL_BACKOFF_MS = 500;
const MAX_BACKOFF_MS = 30_000;
const MAX_BUFFERED_BYTES = 64 * 1024; // beyond this the socket is backed up

export interface ClientOptions {
  url: string;
  wsFactory?: (url: string) => WebSocketLike;
  maxSendsPerSecond?: number;
  now?: () => number;
}

export class EngineClient {
  dropped = 0;
  private ws: WebSocketLike | null = null;
  private backoffMs = INITIAL_BACKOFF_MS;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;
  private readonly limiter: RateLimiter;
  private readonly factory: (url: string) => WebSocketLike;

  onMessage: ((msg: Message) => void) | null = null;
  onStatus: ((status: "connecting" | "open" | "closed") => void) | null = null;

  constructor(private readonly opts: ClientOptions) {
    this.factory = opts.wsFactory ?? ((url) => new WebSocket(url) as unknown as WebSocketLike);
    this.limiter = new RateLimiter(
      opts.maxSendsPerSecond ?? 100,
      opts.now ?? (() => performance.now()),
    );
  }

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    this.onStatus?.("connecting");
    const ws = this.factory(this.opts.url);
    this.ws = ws;
    ws.onopen = () => {
      this.backoffMs = INITIAL_BACKOFF_MS;
      this.onStatus?.("open");
    };
    ws.onclose = () => {
      this.onStatus?.("closed");
      this.scheduleReconnect();
    };
    ws.onerror = () => {
      // onclose follows and owns the retry
    };
    ws.onmessage = (ev) => {
      let msg: Message;
      try {
        msg = parseMessage(ev.data);
      } catch {
        return; // an engine we don't understand; ignore rather than crash
      }
      this.onMessage?.(msg);
    };
  }

  private scheduleReconnect(): void {
    if (this.closed || this.reconnectTimer !== null) return;
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      this.backoffMs = Math.min(this.backoffMs * 2, MAX_BACKOFF_MS);
      this.open();
    }, this.backoffMs);
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.reconnectTimer = null;
    this.limiter.dispose();
    this.ws?.close();
  }

  /** Validate and send one message, dropping (and counting) if the socket
   * is down or backed up. Rate limiting coalesces per widget key. */
  private offer(key: string, msg: Message): void {
    const text = encodeMessage(msg); // throws on schema violations: a UI bug
    this.limiter.offer(key, () => {
      const ws = this.ws;
      if (!ws || ws.readyState !== OPEN || ws.bufferedAmount > MAX_BUFFERED_BYTES) {
        this.dropped += 1;
        return;
      }
      ws.send(text);
    });
  }

  sendControl(channel: number, value: number): void {
    this.offer(`control:${channel}`, { type: "control", channel, value });
  }

  sendLatent(dim: number, value: number | null): void {
    this.offer(`latent:${dim}`, { type: "latent", dim, value });
  }

  sendGain(value: number): void {
    this.offer("gain", { type: "gain", value });
  }

  sendAlpha(dim: number | null, value: number): void {
    this.offer(`alpha:${dim ?? "all"}`, { type: "alpha", dim, value });
  }
}
