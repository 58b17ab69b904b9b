import type { EventFrame, StateDoc } from "./types.js";

export interface PowerSample {
  timeS: number;
  watts: number;
}

export type FrameListener = (frame: EventFrame) => void;

const HISTORY_LIMIT = 600;

/**
 * Client-side mirror of the strip. Frames normally arrive in sequence over
 * the stream; if the server reports a gap (dropped subscriber, replay ring
 * overrun) the model refetches /state once to land back on a consistent
 * snapshot instead of trusting whatever arrives next.
 *
 * A /state snapshot is labeled one past the last emitted frame, so adopting
 * one moves the display but keeps the stream position at seq-1; the next
 * emitted frame reuses that number and must still be accepted.
 */
export class StripModel {
  private position = 0; // last stream seq covered
  private lastFrame: EventFrame | null = null;
  private history: PowerSample[] = [];
  private listeners: FrameListener[] = [];
  private resyncing = false;
  resyncCount = 0;

  constructor(private readonly fetchState: () => Promise<StateDoc>) {}

  get frame(): EventFrame | null {
    return this.lastFrame;
  }

  /** Where to resume the stream from (the ?after value). */
  get seq(): number {
    return this.position;
  }

  get powerHistory(): readonly PowerSample[] {
    return this.history;
  }

  onFrame(listener: FrameListener): void {
    this.listeners.push(listener);
  }

  /** Seed from a /state snapshot (startup or post-gap resync). */
  adoptSnapshot(state: StateDoc): void {
    this.accept(state.frame, state.frame.seq - 1);
  }

  async ingest(frame: EventFrame): Promise<void> {
    if (frame.seq <= this.position) return; // replayed duplicate
    if (this.position !== 0 && frame.seq > this.position + 1 && !this.resyncing) {
      this.resyncing = true;
      this.resyncCount += 1;
      try {
        const state = await this.fetchState();
        if (state.frame.seq > frame.seq) {
          this.adoptSnapshot(state);
          return;
        }
      } finally {
        this.resyncing = false;
      }
      // snapshot did not cover the gap frame; take the frame itself
    }
    this.accept(frame, frame.seq);
  }

  private accept(frame: EventFrame, position: number): void {
    this.position = position;
    this.lastFrame = frame;
    this.history.push({ timeS: frame.time_s, watts: frame.totals.instant_w });
    if (this.history.length > HISTORY_LIMIT) {
      this.history.splice(0, this.history.length - HISTORY_LIMIT);
    }
    for (const listener of this.listeners) listener(frame);
  }
}
