import type { ApiClient } from "./api";
import type { LineEdit, Point } from "./types";

export interface DragOptions {
  maxRatePerSec?: number;
  now?: () => number;
}

// Endpoint drag controller.
//
// - PATCH requests are throttled to maxRatePerSec; intermediate positions
//   are coalesced and the latest one is sent on flush.
// - Responses carry a sequence number; a response older than one already
//   applied is discarded, so the displayed angle is always the angle of
//   the newest confirmed position.
// - On a service error the endpoint reverts to its last confirmed
//   position and the angle text is left untouched.
export class DragController {
  private lastSentAt = -Infinity;
  private seq = 0;
  private appliedSeq = 0;
  private pending: LineEdit | null = null;
  private confirmed: Point;
  private inflight: Promise<void>[] = [];

  angleText: string | null = null;
  position: Point;

  private readonly minIntervalMs: number;
  private readonly now: () => number;

  constructor(
    private client: ApiClient,
    private sessionId: string,
    private edit: Omit<LineEdit, "x" | "y">,
    start: Point,
    opts: DragOptions = {}
  ) {
    this.minIntervalMs = 1000 / (opts.maxRatePerSec ?? 30);
    this.now = opts.now ?? (() => Date.now());
    this.confirmed = [...start] as Point;
    this.position = [...start] as Point;
  }

  move(x: number, y: number): void {
    this.position = [x, y];
    const edit: LineEdit = { ...this.edit, x, y };
    const t = this.now();
    if (t - this.lastSentAt >= this.minIntervalMs) {
      this.lastSentAt = t;
      this.send(edit);
    } else {
      this.pending = edit;
    }
  }

  // send whatever was coalesced during the throttle window (call on a
  // timer while dragging and once on mouse-up)
  flush(): void {
    if (this.pending) {
      const edit = this.pending;
      this.pending = null;
      this.lastSentAt = this.now();
      this.send(edit);
    }
  }

  private send(edit: LineEdit): void {
    const seq = ++this.seq;
    const done = this.client
      .patchLine(this.sessionId, edit)
      .then((resp) => {
        if (seq <= this.appliedSeq) {
          return; // a newer response already landed
        }
        this.appliedSeq = seq;
        this.confirmed = [edit.x, edit.y];
        this.angleText = `${resp.ccd_degrees.toFixed(1)}°`;
      })
      .catch(() => {
        if (seq > this.appliedSeq) {
          this.appliedSeq = seq;
          this.position = [...this.confirmed] as Point;
        }
      });
    this.inflight.push(done);
  }

  async settle(): Promise<void> {
    this.flush();
    while (this.inflight.length) {
      const batch = this.inflight;
      this.inflight = [];
      await Promise.all(batch);
    }
  }

  get requestCount(): number {
    return this.seq;
  }
}
