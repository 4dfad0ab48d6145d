/**
 * Verifier console flow: pull the next open case, post exactly one verdict,
 * move on. Verification is blind; the case view never carries the writer's
 * label and this module never tries to infer it.
 */

import { Api, ApiError, CaseView, LabelToken } from "./api.js";

export type VerifierPhase = "idle" | "judging" | "empty" | "notice" | "error";

export interface VerifierState {
  phase: VerifierPhase;
  current: CaseView | null;
  notice: string | null;
  error: string | null;
  submitted: number;
}

export class VerifierFlow {
  state: VerifierState = {
    phase: "idle",
    current: null,
    notice: null,
    error: null,
    submitted: 0,
  };

  private busy = false;

  constructor(
    private api: Api,
    private verifierId: string,
    private onChange: (state: VerifierState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  async next(): Promise<void> {
    try {
      const found = await this.api.nextCase(this.verifierId);
      this.state = {
        ...this.state,
        phase: found ? "judging" : "empty",
        current: found,
        notice: null,
        error: null,
      };
    } catch (error) {
      this.state = { ...this.state, phase: "error", error: describe(error) };
    }
    this.emit();
  }

  /**
   * Post one verdict. A double click while the first post is in flight is
   * dropped locally; an identical re-post after a lost response is
   * acknowledged by the server without recording a duplicate. A case that
   * resolved elsewhere in the meantime surfaces as a notice and the next
   * case loads.
   */
  async submitVerdict(label: LabelToken): Promise<void> {
    if (this.busy) return;
    if (this.state.phase !== "judging" || !this.state.current) {
      throw new Error("no case on screen");
    }
    this.busy = true;
    try {
      await this.api.submitVerdict(this.state.current.case_id, label);
      this.state.submitted += 1;
    } catch (error) {
      if (error instanceof ApiError && isStaleCase(error)) {
        this.state = { ...this.state, phase: "notice", notice: "case closed elsewhere" };
        this.emit();
        this.busy = false;
        await this.next();
        return;
      }
      this.state = { ...this.state, phase: "error", error: describe(error) };
      this.emit();
      this.busy = false;
      return;
    }
    this.busy = false;
    await this.next();
  }
}

function isStaleCase(error: ApiError): boolean {
  return error.status === 409 || error.detail.includes("already resolved");
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return error.detail;
  return error instanceof Error ? error.message : String(error);
}
