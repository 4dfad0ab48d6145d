/**
 * Contract tests against recorded API fixtures.
 *
 * The payloads below were captured verbatim from the running service. The
 * assertions pin two properties: the controllers drive the documented
 * endpoint sequence, and every displayed number originates from an API
 * response (the UI performs no label/fate computation of its own).
 */

import { describe, expect, it } from "vitest";

import { Api, FetchLike } from "../src/api.js";
import { Dashboard } from "../src/dashboard.js";
import { probabilityBars, WriterFlow } from "../src/writer.js";
import { VerifierFlow } from "../src/verifier.js";

const SESSION_FIXTURE = {
  session_id: "93ef9a1433379f50",
  round: 1,
  context: "The castle of Arden opened in 1901 and drew many visitors.",
  target_phrase: "definitely correct",
  tries_remaining: 5,
};

const ATTEMPT_FOOLED_FIXTURE = {
  try_index: 1,
  probabilities: { entailment: 0.1, neutral: 0.8, contradiction: 0.1 },
  fooled: true,
  tries_remaining: 4,
  state: "awaiting_reason",
  replayed: false,
};

const ATTEMPT_REPLAYED_FIXTURE = { ...ATTEMPT_FOOLED_FIXTURE, replayed: true };

const REASON_ACK_FIXTURE = { state: "closed_fooled", replayed: false };

const CASE_FIXTURE = {
  case: {
    case_id: "379f193fdffb624c",
    round: 1,
    context: "The castle of Arden opened in 1901 and drew many visitors.",
    hypothesis: "The castle opened.",
    verdicts_recorded: 0,
  },
};

const VERDICT_FIRST_FIXTURE = {
  case_id: "379f193fdffb624c",
  round: 1,
  status: "needs_first_pair",
  replayed: false,
};

const STATS_TEXT_FIXTURE =
  '{"fate_counts":{"A":0,"B1":1,"B2":0,"C":0,"D":0},"histograms":{"context_tokens":{"11":1},' +
  '"hypothesis_tokens":{"3":1},"seconds":{"0":1},"tries":{"1":1}},"n_collected":1,"n_sessions":1,' +
  '"round":1,"seconds_mean":0.0031490325927734375,"seconds_median":0.0031490325927734375,' +
  '"total_attempts":1,"tries_mean":1.0,"tries_median":1.0,"unverified_error_rate":1.0,' +
  '"verified_error_rate":1.0}';

interface Recorded {
  method: string;
  path: string;
  body: unknown;
}

function fakeFetch(
  routes: Record<string, unknown>,
  log: Recorded[] = [],
): FetchLike {
  return async (input, init) => {
    const url = new URL(input, "http://service");
    const key = `${init?.method ?? "GET"} ${url.pathname}${url.search}`;
    log.push({
      method: init?.method ?? "GET",
      path: `${url.pathname}${url.search}`,
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    if (!(key in routes)) {
      return new Response(JSON.stringify({ detail: `no fixture for ${key}` }), { status: 404 });
    }
    const fixture = routes[key];
    if (typeof fixture === "string") {
      return new Response(fixture, { status: 200, headers: { "Content-Type": "application/json" } });
    }
    return new Response(JSON.stringify(fixture), {
      status: 200,
      headers: { "Content-Type": "application/json" },
    });
  };
}

describe("writer flow", () => {
  it("walks session -> attempt -> reason and only computes percentages", async () => {
    const log: Recorded[] = [];
    const api = new Api(
      "http://service",
      "tok-w1",
      fakeFetch(
        {
          "POST /api/sessions": SESSION_FIXTURE,
          "POST /api/sessions/93ef9a1433379f50/attempts": ATTEMPT_FOOLED_FIXTURE,
          "POST /api/sessions/93ef9a1433379f50/reason": REASON_ACK_FIXTURE,
        },
        log,
      ),
    );
    const flow = new WriterFlow(api, "w1");
    await flow.start(1);
    expect(flow.state.phase).toBe("writing");
    expect(flow.state.targetPhrase).toBe("definitely correct");
    expect(flow.reasonFormVisible).toBe(false);

    await flow.submitHypothesis("The castle opened.");
    expect(flow.state.phase).toBe("awaiting_reason");
    expect(flow.reasonFormVisible).toBe(true);
    // displayed probabilities are the server's values, verbatim
    expect(flow.state.attempts[0].probabilities).toEqual(ATTEMPT_FOOLED_FIXTURE.probabilities);
    expect(flow.state.attempts[0].fooled).toBe(ATTEMPT_FOOLED_FIXTURE.fooled);

    await flow.submitReason("the model shrugged");
    expect(flow.state.phase).toBe("done_fooled");
    expect(flow.reasonFormVisible).toBe(false);

    // documented endpoint sequence, idempotency key included
    expect(log.map((r) => r.path)).toEqual([
      "/api/sessions",
      "/api/sessions/93ef9a1433379f50/attempts",
      "/api/sessions/93ef9a1433379f50/reason",
    ]);
    expect(log[1].body).toEqual({ hypothesis: "The castle opened.", try_index: 1 });
  });

  it("renders probability bars that sum to 100 within rounding", () => {
    const bars = probabilityBars(ATTEMPT_FOOLED_FIXTURE.probabilities);
    const total = bars.reduce((sum, bar) => sum + bar.pct, 0);
    expect(Math.abs(total - 100)).toBeLessThanOrEqual(0.2);
    expect(bars.map((b) => b.label)).toEqual(["entailment", "neutral", "contradiction"]);
  });

  it("retries a lost response with the same try index", async () => {
    let calls = 0;
    const fetchWithFault: FetchLike = async (input, init) => {
      const url = new URL(input, "http://service");
      if (url.pathname === "/api/sessions") {
        return new Response(JSON.stringify(SESSION_FIXTURE), { status: 200 });
      }
      calls += 1;
      if (calls === 1) throw new TypeError("network dropped the response");
      expect(JSON.parse(String(init?.body)).try_index).toBe(1);
      return new Response(JSON.stringify(ATTEMPT_REPLAYED_FIXTURE), { status: 200 });
    };
    const flow = new WriterFlow(new Api("http://service", "tok-w1", fetchWithFault), "w1");
    await flow.start(1);
    await flow.submitHypothesis("The castle opened.");
    expect(calls).toBe(2);
    expect(flow.state.attempts).toHaveLength(1);
    expect(flow.state.phase).toBe("awaiting_reason");
  });

  it("treats a try-limit rejection as terminal", async () => {
    const fetchExhausted: FetchLike = async (input) => {
      const url = new URL(input, "http://service");
      if (url.pathname === "/api/sessions") {
        return new Response(JSON.stringify(SESSION_FIXTURE), { status: 200 });
      }
      return new Response(JSON.stringify({ detail: "try limit of 5 reached" }), { status: 409 });
    };
    const flow = new WriterFlow(new Api("http://service", "tok-w1", fetchExhausted), "w1");
    await flow.start(1);
    await flow.submitHypothesis("one more");
    expect(flow.state.phase).toBe("exhausted");
  });
});

describe("verifier flow", () => {
  it("shows a blind case and posts one verdict", async () => {
    const log: Recorded[] = [];
    const api = new Api(
      "http://service",
      "tok-v1",
      fakeFetch(
        {
          "GET /api/verify/next?verifier=v1": CASE_FIXTURE,
          "POST /api/verify/379f193fdffb624c": VERDICT_FIRST_FIXTURE,
        },
        log,
      ),
    );
    const flow = new VerifierFlow(api, "v1");
    await flow.next();
    expect(flow.state.phase).toBe("judging");
    // the recorded case payload never exposes the writer's label
    expect(Object.keys(CASE_FIXTURE.case)).not.toContain("writer_label");
    expect(Object.keys(CASE_FIXTURE.case)).not.toContain("target");

    await flow.submitVerdict("entailment");
    expect(flow.state.submitted).toBe(1);
    expect(log.filter((r) => r.method === "POST")).toHaveLength(1);
    expect(log.at(-1)?.path).toBe("/api/verify/next?verifier=v1"); // next case auto-loads
  });

  it("handles a case resolved elsewhere by refreshing", async () => {
    let verdictCalls = 0;
    const fetchStale: FetchLike = async (input, init) => {
      const url = new URL(input, "http://service");
      if (url.pathname === "/api/verify/next") {
        return new Response(
          JSON.stringify(verdictCalls === 0 ? CASE_FIXTURE : { case: null }),
          { status: 200 },
        );
      }
      verdictCalls += 1;
      return new Response(JSON.stringify({ detail: "case 379f is already resolved" }), {
        status: 409,
      });
    };
    const flow = new VerifierFlow(new Api("http://service", "tok-v1", fetchStale), "v1");
    await flow.next();
    await flow.submitVerdict("entailment");
    expect(flow.state.phase).toBe("empty"); // notice shown, then the queue re-polled
    expect(verdictCalls).toBe(1);
  });
});

describe("dashboard", () => {
  it("displays API numbers verbatim and keeps the raw bytes", async () => {
    const api = new Api(
      "http://service",
      "tok-admin",
      fakeFetch({ "GET /api/rounds/1/stats": STATS_TEXT_FIXTURE }),
    );
    const dashboard = new Dashboard(api);
    await dashboard.load(1);
    expect(dashboard.state.phase).toBe("loaded");
    expect(dashboard.state.rawText).toBe(STATS_TEXT_FIXTURE);

    const stats = dashboard.state.stats!;
    expect(stats.unverified_error_rate).toBe(1.0);
    expect(stats.fate_counts).toEqual({ A: 0, B1: 1, B2: 0, C: 0, D: 0 });

    const shares = dashboard.fateShares();
    expect(shares.find((s) => s.fate === "B1")).toEqual({ fate: "B1", count: 1, pct: 100 });
    expect(shares.reduce((sum, s) => sum + s.pct, 0)).toBe(100);

    // bins come straight from the emitted histogram, numerically sorted
    expect(dashboard.bins("tries")).toEqual([{ x: 1, n: 1 }]);
    expect(dashboard.bins("context_tokens")).toEqual([{ x: 11, n: 1 }]);

    const headline = Object.fromEntries(dashboard.headline().map((h) => [h.label, h.value]));
    expect(headline["error rate (unverified)"]).toBe("100.00%");
    expect(headline["attempts"]).toBe("1");
  });
});
