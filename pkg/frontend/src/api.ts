/**
 * Typed client for the annotation service API.
 *
 * Every mutating call is safe to retry: attempts carry a try_index
 * idempotency key and verdict re-posts of the same label are acknowledged
 * by the server instead of duplicated. The client never computes labels,
 * fates, or statistics locally; it only moves server values around.
 */

export type LabelToken = "entailment" | "neutral" | "contradiction";

export interface SessionView {
  session_id: string;
  round: number;
  context: string;
  target_phrase: string;
  tries_remaining: number;
}

export interface AttemptFeedback {
  try_index: number;
  probabilities: Record<LabelToken, number>;
  fooled: boolean;
  tries_remaining: number;
  state: string;
  replayed: boolean;
}

export interface CaseView {
  case_id: string;
  round: number;
  context: string;
  hypothesis: string;
  verdicts_recorded: number;
}

export interface VerdictAck {
  case_id: string;
  round: number;
  status: string;
  replayed: boolean;
  fate?: string;
  gold?: string | null;
}

export interface SplitCounts {
  round: number;
  counts: Record<string, number>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body === undefined ? {} : { "Content-Type": "application/json" }),
      },
      ...(body === undefined ? {} : { body: JSON.stringify(body) }),
    };
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { detail?: string };
        if (parsed.detail) detail = parsed.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  openSession(writerId: string, round: number): Promise<SessionView> {
    return this.request<SessionView>("POST", "/api/sessions", {
      writer_id: writerId,
      round,
    });
  }

  submitAttempt(sessionId: string, hypothesis: string, tryIndex: number): Promise<AttemptFeedback> {
    return this.request<AttemptFeedback>("POST", `/api/sessions/${sessionId}/attempts`, {
      hypothesis,
      try_index: tryIndex,
    });
  }

  submitReason(sessionId: string, text: string): Promise<{ state: string; replayed: boolean }> {
    return this.request("POST", `/api/sessions/${sessionId}/reason`, { text });
  }

  nextCase(verifierId: string, round?: number): Promise<CaseView | null> {
    const query = round === undefined ? "" : `&round=${round}`;
    return this.request<{ case: CaseView | null }>(
      "GET",
      `/api/verify/next?verifier=${encodeURIComponent(verifierId)}${query}`,
    ).then((body) => body.case);
  }

  submitVerdict(caseId: string, label: LabelToken | string): Promise<VerdictAck> {
    return this.request<VerdictAck>("POST", `/api/verify/${caseId}`, { label });
  }

  /** Raw canonical stats text: byte-identical to the stats CLI output. */
  async roundStatsText(round: number): Promise<string> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/rounds/${round}/stats`, {
      headers: { Authorization: `Bearer ${this.token}` },
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.text();
  }

  // -- admin ----------------------------------------------------------------

  openRound(config: Record<string, unknown>): Promise<{ round: number }> {
    return this.request("POST", "/api/rounds", { config });
  }

  addContext(body: Record<string, unknown>): Promise<{ id: string }> {
    return this.request("POST", "/api/contexts", body);
  }

  closeRound(round: number): Promise<{ round: number; abandoned_sessions: string[] }> {
    return this.request("POST", `/api/rounds/${round}/close`);
  }

  assignSplits(round: number): Promise<SplitCounts> {
    return this.request("POST", `/api/rounds/${round}/splits`);
  }

  exportSplit(round: number, split: string): Promise<string> {
    return this.fetchImpl(`${this.baseUrl}/api/rounds/${round}/export?split=${split}`, {
      headers: { Authorization: `Bearer ${this.token}` },
    }).then(async (response) => {
      if (!response.ok) throw new ApiError(response.status, await response.text());
      return response.text();
    });
  }
}
