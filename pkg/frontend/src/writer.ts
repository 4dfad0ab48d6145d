/**
 * Writer console flow: one session at a time, attempts until the model is
 * fooled or the tries run out, then (only after fooling) the reason form.
 *
 * Retries are safe: each submission is keyed by its try index, so a lost
 * response re-sent after a network failure replays the recorded feedback
 * instead of burning a second try.
 */

import { Api, ApiError, AttemptFeedback, LabelToken } from "./api.js";

export type WriterPhase =
  | "idle"
  | "writing"
  | "awaiting_reason"
  | "done_fooled"
  | "exhausted"
  | "error";

export interface AttemptRow {
  tryIndex: number;
  hypothesis: string;
  probabilities: Record<LabelToken, number>;
  fooled: boolean;
}

export interface WriterState {
  phase: WriterPhase;
  sessionId: string | null;
  context: string;
  targetPhrase: string;
  triesRemaining: number;
  attempts: AttemptRow[];
  error: string | null;
}

const LABELS: LabelToken[] = ["entailment", "neutral", "contradiction"];

/** Percentage bars for the feedback panel; they sum to 100 up to rounding. */
export function probabilityBars(
  probabilities: Record<LabelToken, number>,
): { label: LabelToken; pct: number }[] {
  return LABELS.map((label) => ({
    label,
    pct: Math.round(probabilities[label] * 1000) / 10,
  }));
}

export class WriterFlow {
  state: WriterState = {
    phase: "idle",
    sessionId: null,
    context: "",
    targetPhrase: "",
    triesRemaining: 0,
    attempts: [],
    error: null,
  };

  constructor(
    private api: Api,
    private writerId: string,
    private onChange: (state: WriterState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  async start(round: number): Promise<void> {
    try {
      const session = await this.api.openSession(this.writerId, round);
      this.state = {
        phase: "writing",
        sessionId: session.session_id,
        context: session.context,
        targetPhrase: session.target_phrase,
        triesRemaining: session.tries_remaining,
        attempts: [],
        error: null,
      };
    } catch (error) {
      this.state = { ...this.state, phase: "error", error: describe(error) };
    }
    this.emit();
  }

  /**
   * Submit one hypothesis. The try index is fixed before the request goes
   * out; a transport failure is retried once with the same key.
   */
  async submitHypothesis(text: string): Promise<void> {
    if (this.state.phase !== "writing" || !this.state.sessionId) {
      throw new Error("no open session to submit to");
    }
    const tryIndex = this.state.attempts.length + 1;
    let feedback: AttemptFeedback;
    try {
      feedback = await this.submitWithRetry(this.state.sessionId, text, tryIndex);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // try-limit rejection is terminal, not retryable
        this.state = { ...this.state, phase: "exhausted", error: error.detail };
        this.emit();
        return;
      }
      this.state = { ...this.state, phase: "error", error: describe(error) };
      this.emit();
      return;
    }
    this.state.attempts = [
      ...this.state.attempts,
      {
        tryIndex: feedback.try_index,
        hypothesis: text,
        probabilities: feedback.probabilities,
        fooled: feedback.fooled,
      },
    ];
    this.state.triesRemaining = feedback.tries_remaining;
    if (feedback.fooled) {
      this.state.phase = "awaiting_reason";
    } else if (feedback.tries_remaining === 0) {
      this.state.phase = "exhausted";
    }
    this.emit();
  }

  private async submitWithRetry(
    sessionId: string,
    text: string,
    tryIndex: number,
  ): Promise<AttemptFeedback> {
    try {
      return await this.api.submitAttempt(sessionId, text, tryIndex);
    } catch (error) {
      if (error instanceof ApiError) throw error; // the server answered; don't re-send
      return this.api.submitAttempt(sessionId, text, tryIndex);
    }
  }

  async submitReason(text: string): Promise<void> {
    if (this.state.phase !== "awaiting_reason" || !this.state.sessionId) {
      throw new Error("the reason form is only available after fooling the model");
    }
    try {
      await this.api.submitReason(this.state.sessionId, text);
      this.state.phase = "done_fooled";
    } catch (error) {
      this.state = { ...this.state, phase: "error", error: describe(error) };
    }
    this.emit();
  }

  /** The reason box is rendered only in this state. */
  get reasonFormVisible(): boolean {
    return this.state.phase === "awaiting_reason";
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return error.detail;
  return error instanceof Error ? error.message : String(error);
}
