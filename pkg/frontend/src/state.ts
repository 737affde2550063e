/** Session state machine for the rating flow.
 *
 * The controller owns every server interaction and keeps them sequential:
 * one in-flight request, failed rating submissions are queued and retried
 * without moving the cursor. The server is the authority on scores; local
 * storage only remembers which session this browser belongs to plus any
 * rating that has not been acknowledged yet.
 */

import { ApiError, SessionCreated, SessionSnapshot } from "./api.js";

/** The slice of the service the controller drives; ApiClient satisfies it. */
export interface RatingApi {
  createSession(): Promise<SessionCreated>;
  getSession(sessionId: string): Promise<SessionSnapshot>;
  submitRating(
    sessionId: string,
    stimulusId: string,
    score: number,
  ): Promise<void>;
}

export const SCALE_LABELS: Readonly<Record<number, string>> = {
  1: "Bad",
  2: "Poor",
  3: "Fair",
  4: "Good",
  5: "Excellent",
};

export const SESSION_KEY = "voceval-mos-session";
export const PENDING_KEY = "voceval-mos-pending";

/** Subset of the DOM Storage interface the controller needs. */
export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export type Phase =
  | "loading"
  | "unreachable"
  | "instructions"
  | "rating"
  | "complete";

export interface ViewState {
  phase: Phase;
  sessionId: string | null;
  playlist: readonly string[];
  /** Index of the next unrated stimulus; equals playlist length when done. */
  cursor: number;
  /** True once the current stimulus has played to the end at least once. */
  played: boolean;
  /** A submission is on the wire; rating controls are locked. */
  submitting: boolean;
  /** A failed submission is waiting for its retry timer. */
  pendingRetry: boolean;
}

interface PendingRating {
  stimulusId: string;
  score: number;
}

export interface ControllerOptions {
  retryDelayMs?: number;
  schedule?: (fn: () => void, delayMs: number) => void;
}

/** First index in the playlist without a stored score. Rating is strictly
 * in order, but a gap would still resume at the earliest unrated item. */
export function nextUnrated(
  playlist: readonly string[],
  scores: Record<string, number>,
): number {
  for (let i = 0; i < playlist.length; i++) {
    if (!(playlist[i] in scores)) return i;
  }
  return playlist.length;
}

/** Ratings banked so far, e.g. "4 / 30". */
export function progressLabel(state: ViewState): string {
  return `${state.cursor} / ${state.playlist.length}`;
}

export class SessionController {
  private state: ViewState = {
    phase: "loading",
    sessionId: null,
    playlist: [],
    cursor: 0,
    played: false,
    submitting: false,
    pendingRetry: false,
  };
  private sawInstructions = false;
  private readonly retryDelayMs: number;
  private readonly schedule: (fn: () => void, delayMs: number) => void;

  constructor(
    private readonly api: RatingApi,
    private readonly storage: StorageLike,
    private readonly onChange: (state: ViewState) => void,
    options: ControllerOptions = {},
  ) {
    this.retryDelayMs = options.retryDelayMs ?? 4000;
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  }

  view(): ViewState {
    return { ...this.state };
  }

  currentStimulus(): string | null {
    return this.state.cursor < this.state.playlist.length
      ? this.state.playlist[this.state.cursor]
      : null;
  }

  /** Resume the stored session, or create a fresh one. A resumed playlist is
   * taken verbatim from the server, never reshuffled. */
  async startOrResume(): Promise<void> {
    this.update({ phase: "loading" });
    const storedId = this.storage.getItem(SESSION_KEY);
    try {
      if (storedId !== null) {
        try {
          const snap = await this.api.getSession(storedId);
          this.adopt(snap.sessionId, snap.playlist, snap.scores);
        } catch (err) {
          if (err instanceof ApiError && err.status === 404) {
            // state directory was reset server-side; start over
            this.storage.removeItem(SESSION_KEY);
            this.storage.removeItem(PENDING_KEY);
            await this.startFresh();
          } else {
            throw err;
          }
        }
      } else {
        await this.startFresh();
      }
    } catch {
      this.update({ phase: "unreachable" });
      return;
    }
    await this.flushPending();
  }

  private async startFresh(): Promise<void> {
    const made = await this.api.createSession();
    this.storage.setItem(SESSION_KEY, made.sessionId);
    this.adopt(made.sessionId, made.playlist, {});
  }

  private adopt(
    sessionId: string,
    playlist: string[],
    scores: Record<string, number>,
  ): void {
    const cursor = nextUnrated(playlist, scores);
    const done = cursor >= playlist.length;
    // a rater with recorded progress has already read the instructions;
    // after a reload they land straight back on the sample they were on
    const seen = this.sawInstructions || cursor > 0;
    this.update({
      phase: done ? "complete" : seen ? "rating" : "instructions",
      sessionId,
      playlist,
      cursor,
      played: false,
    });
  }

  beginRating(): void {
    this.sawInstructions = true;
    if (this.state.phase === "instructions") {
      this.update({ phase: "rating" });
    }
  }

  /** Called by the player when the current stimulus finishes playing. */
  markPlayed(): void {
    if (this.state.phase === "rating") {
      this.update({ played: true });
    }
  }

  canRate(): boolean {
    return (
      this.state.phase === "rating" &&
      this.state.played &&
      !this.state.submitting &&
      !this.state.pendingRetry
    );
  }

  /** Submit a score for the current stimulus. The cursor advances only on
   * server acknowledgment; a failure queues a durable retry in place. */
  async rate(score: number): Promise<void> {
    if (!this.canRate() || !Number.isInteger(score) || score < 1 || score > 5) {
      return;
    }
    const stimulusId = this.currentStimulus();
    if (stimulusId === null || this.state.sessionId === null) return;

    this.update({ submitting: true });
    try {
      await this.api.submitRating(this.state.sessionId, stimulusId, score);
      this.advance();
    } catch {
      const pending: PendingRating = { stimulusId, score };
      this.storage.setItem(PENDING_KEY, JSON.stringify(pending));
      this.update({ submitting: false, pendingRetry: true });
      this.schedule(() => void this.flushPending(), this.retryDelayMs);
    }
  }

  /** Resubmit the queued rating, if any. Safe to call when nothing is queued. */
  async flushPending(): Promise<void> {
    const raw = this.storage.getItem(PENDING_KEY);
    if (raw === null || this.state.sessionId === null) return;
    let pending: PendingRating;
    try {
      pending = JSON.parse(raw);
    } catch {
      this.storage.removeItem(PENDING_KEY);
      return;
    }
    this.update({ submitting: true, pendingRetry: false });
    try {
      await this.api.submitRating(
        this.state.sessionId,
        pending.stimulusId,
        pending.score,
      );
      this.storage.removeItem(PENDING_KEY);
      if (pending.stimulusId === this.currentStimulus()) {
        this.advance();
      } else {
        this.update({ submitting: false });
      }
    } catch {
      this.update({ submitting: false, pendingRetry: true });
      this.schedule(() => void this.flushPending(), this.retryDelayMs);
    }
  }

  retryConnect(): Promise<void> {
    return this.startOrResume();
  }

  private advance(): void {
    const cursor = this.state.cursor + 1;
    const done = cursor >= this.state.playlist.length;
    this.update({
      phase: done ? "complete" : "rating",
      cursor,
      played: false,
      submitting: false,
      pendingRetry: false,
    });
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.view());
  }
}
