/**
 * Admin dashboard model. Numbers come from the canonical stats payload the
 * service returns -- the same bytes the stats CLI writes -- and are only
 * formatted for display, never recomputed.
 */

import { Api, ApiError } from "./api.js";

export interface RoundStatsPayload {
  round: number;
  total_attempts: number;
  unverified_error_rate: number;
  verified_error_rate: number;
  tries_mean: number | null;
  tries_median: number | null;
  seconds_mean: number | null;
  seconds_median: number | null;
  fate_counts: Record<string, number>;
  histograms: {
    tries: Record<string, number>;
    seconds: Record<string, number>;
    context_tokens: Record<string, number>;
    hypothesis_tokens: Record<string, number>;
  };
  n_collected: number;
  n_sessions: number;
}

export interface DashboardState {
  phase: "idle" | "loaded" | "provisional" | "error";
  rawText: string;
  stats: RoundStatsPayload | null;
  error: string | null;
}

const FATES = ["A", "B1", "B2", "C", "D"] as const;

export class Dashboard {
  state: DashboardState = { phase: "idle", rawText: "", stats: null, error: null };

  constructor(
    private api: Api,
    private onChange: (state: DashboardState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  async load(round: number): Promise<void> {
    try {
      const rawText = await this.api.roundStatsText(round);
      this.state = {
        phase: "loaded",
        rawText,
        stats: JSON.parse(rawText) as RoundStatsPayload,
        error: null,
      };
    } catch (error) {
      if (error instanceof ApiError && error.detail.includes("unresolved")) {
        // round still in progress: show what exists, flagged as provisional
        try {
          const rawText = await this.api.roundStatsText(round).catch(() => "");
          this.state = {
            phase: "provisional",
            rawText,
            stats: rawText ? (JSON.parse(rawText) as RoundStatsPayload) : null,
            error: error.detail,
          };
        } catch {
          this.state = { phase: "provisional", rawText: "", stats: null, error: error.detail };
        }
      } else {
        this.state = {
          phase: "error",
          rawText: "",
          stats: null,
          error: error instanceof ApiError ? error.detail : String(error),
        };
      }
    }
    this.emit();
  }

  /** Percentage shares per outcome class, straight from the payload counts. */
  fateShares(): { fate: string; count: number; pct: number }[] {
    const stats = this.state.stats;
    if (!stats) return [];
    const total = FATES.reduce((sum, fate) => sum + (stats.fate_counts[fate] ?? 0), 0) || 1;
    return FATES.map((fate) => {
      const count = stats.fate_counts[fate] ?? 0;
      return { fate, count, pct: Math.round((1000 * count) / total) / 10 };
    });
  }

  /** Histogram bins exactly as emitted by the service, sorted numerically. */
  bins(name: keyof RoundStatsPayload["histograms"]): { x: number; n: number }[] {
    const stats = this.state.stats;
    if (!stats) return [];
    return Object.entries(stats.histograms[name])
      .map(([x, n]) => ({ x: Number(x), n }))
      .sort((a, b) => a.x - b.x);
  }

  headline(): { label: string; value: string }[] {
    const stats = this.state.stats;
    if (!stats) return [];
    const pct = (x: number) => `${(100 * x).toFixed(2)}%`;
    const opt = (x: number | null) => (x === null ? "-" : x.toFixed(1));
    return [
      { label: "sessions", value: String(stats.n_sessions) },
      { label: "attempts", value: String(stats.total_attempts) },
      { label: "collected", value: String(stats.n_collected) },
      { label: "error rate (unverified)", value: pct(stats.unverified_error_rate) },
      { label: "error rate (verified)", value: pct(stats.verified_error_rate) },
      { label: "tries mean/median", value: `${opt(stats.tries_mean)} / ${opt(stats.tries_median)}` },
      { label: "seconds mean/median", value: `${opt(stats.seconds_mean)} / ${opt(stats.seconds_median)}` },
    ];
  }
}
