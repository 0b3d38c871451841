// Per-widget send throttle: at most one message per interval per key, with
// trailing-edge coalescing so the final position of a gesture always lands.

type SendFn = () => void;

export class RateLimiter {
  private lastSent = new Map<string, number>();
  private pending = new Map<string, SendFn>();
  private timers = new Map<string, ReturnType<typeof setTimeout>>();

  constructor(
    readonly maxPerSecond = 100,
    private readonly now: () => number = () => performance.now(),
  ) {}

  get intervalMs(): number {
    return 1000 / this.maxPerSecond;
  }

  /** Run `send` now if the key is under its rate, else queue it to replace
   * any previously queued send for the same key. */
  offer(key: string, send: SendFn): void {
    const t = this.now();
    const last = this.lastSent.get(key);
    if (last === undefined || t - last >= this.intervalMs) {
      this.lastSent.set(key, t);
      send();
      return;
    }
    this.pending.set(key, send);
    if (!this.timers.has(key)) {
      const delay = this.intervalMs - (t - last);
      this.timers.set(key, setTimeout(() => this.flush(key), delay));
    }
  }

  private flush(key: string): void {
    this.timers.delete(key);
    const send = this.pending.get(key);
    if (!send) return;
    this.pending.delete(key);
    this.lastSent.set(key, this.now());
    send();
  }

  dispose(): void {
    for (const timer of this.timers.values()) clearTimeout(timer);
    this.timers.clear();
    this.pending.clear();
  }
}
