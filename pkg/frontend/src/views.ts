/**
 * DOM rendering. Thin by design: all state lives in the flow controllers,
 * all numbers come from API payloads.
 */

import { LabelToken } from "./api.js";
import { Dashboard } from "./dashboard.js";
import { probabilityBars, WriterFlow, WriterState } from "./writer.js";
import { VerifierFlow, VerifierState } from "./verifier.js";

const LABEL_BUTTONS: { token: LabelToken; caption: string }[] = [
  { token: "entailment", caption: "definitely correct" },
  { token: "contradiction", caption: "definitely incorrect" },
  { token: "neutral", caption: "neither" },
];

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function renderBars(container: HTMLElement, probabilities: Record<LabelToken, number>): void {
  for (const { label, pct } of probabilityBars(probabilities)) {
    const row = el("div", "bar-row");
    row.appendChild(el("span", "bar-label", label));
    const track = el("div", "bar-track");
    const fill = el("div", `bar-fill bar-${label}`);
    fill.style.width = `${pct}%`;
    track.appendChild(fill);
    row.appendChild(track);
    row.appendChild(el("span", "bar-pct", `${pct.toFixed(1)}%`));
    container.appendChild(row);
  }
}

// -- writer console ----------------------------------------------------------

export function renderWriter(root: HTMLElement, flow: WriterFlow, round: number): void {
  const state = flow.state;
  root.replaceChildren();

  if (state.phase === "idle" || state.phase === "done_fooled" || state.phase === "exhausted") {
    const start = el("button", "primary", "Start a writing task") as HTMLButtonElement;
    start.onclick = () => void flow.start(round);
    if (state.phase === "done_fooled") {
      root.appendChild(el("p", "notice ok", "Task complete: the model was fooled and your reason is recorded."));
    }
    if (state.phase === "exhausted") {
      root.appendChild(el("p", "notice", "Out of tries for this task. The model held up this time."));
    }
    root.appendChild(start);
    if (state.phase === "idle") return;
  }

  if (state.phase === "error") {
    root.appendChild(el("p", "notice error", `Something went wrong: ${state.error}`));
    const retry = el("button", "", "Reload") as HTMLButtonElement;
    retry.onclick = () => void flow.start(round);
    root.appendChild(retry);
    return;
  }

  if (!state.sessionId) return;

  const contextBox = el("div", "context-box");
  contextBox.appendChild(el("h3", "", "Context"));
  contextBox.appendChild(el("p", "", state.context));
  root.appendChild(contextBox);

  root.appendChild(
    el("p", "target", `Write a statement that is ${state.targetPhrase} given the context.`),
  );
  root.appendChild(el("p", "tries", `Tries remaining: ${state.triesRemaining}`));

  const history = el("div", "attempts");
  for (const attempt of state.attempts) {
    const card = el("div", attempt.fooled ? "attempt fooled" : "attempt");
    card.appendChild(el("p", "hypothesis", `${attempt.tryIndex}. ${attempt.hypothesis}`));
    renderBars(card, attempt.probabilities);
    card.appendChild(
      el("p", "verdict", attempt.fooled ? "The model was fooled." : "The model got it right."),
    );
    history.appendChild(card);
  }
  root.appendChild(history);

  if (state.phase === "writing") {
    const form = el("div", "entry");
    const input = el("textarea") as HTMLTextAreaElement;
    input.placeholder = "Your hypothesis";
    const submit = el("button", "primary", "Submit") as HTMLButtonElement;
    submit.onclick = () => {
      if (input.value.trim()) void flow.submitHypothesis(input.value.trim());
    };
    form.appendChild(input);
    form.appendChild(submit);
    root.appendChild(form);
  }

  if (flow.reasonFormVisible) {
    const form = el("div", "entry reason");
    form.appendChild(el("p", "", "You fooled the model. Why do you think it was wrong?"));
    const input = el("textarea") as HTMLTextAreaElement;
    input.placeholder = "Your reason";
    const submit = el("button", "primary", "Send reason") as HTMLButtonElement;
    submit.onclick = () => {
      if (input.value.trim()) void flow.submitReason(input.value.trim());
    };
    form.appendChild(input);
    form.appendChild(submit);
    root.appendChild(form);
  }
}

// -- verifier console ----------------------------------------------------------

export function renderVerifier(root: HTMLElement, flow: VerifierFlow): void {
  const state: VerifierState = flow.state;
  root.replaceChildren();

  if (state.phase === "idle" || state.phase === "empty") {
    if (state.phase === "empty") {
      root.appendChild(el("p", "notice", "No cases waiting for you right now."));
    }
    const next = el("button", "primary", "Fetch next case") as HTMLButtonElement;
    next.onclick = () => void flow.next();
    root.appendChild(next);
    return;
  }

  if (state.phase === "notice") {
    root.appendChild(el("p", "notice", state.notice ?? ""));
    return;
  }

  if (state.phase === "error") {
    root.appendChild(el("p", "notice error", `Something went wrong: ${state.error}`));
    const retry = el("button", "", "Try again") as HTMLButtonElement;
    retry.onclick = () => void flow.next();
    root.appendChild(retry);
    return;
  }

  const current = state.current;
  if (!current) return;
  const contextBox = el("div", "context-box");
  contextBox.appendChild(el("h3", "", "Context"));
  contextBox.appendChild(el("p", "", current.context));
  root.appendChild(contextBox);
  root.appendChild(el("h3", "", "Statement"));
  root.appendChild(el("p", "hypothesis", current.hypothesis));
  root.appendChild(
    el("p", "prompt", "Given the context, this statement is..."),
  );
  const buttons = el("div", "verdict-buttons");
  for (const { token, caption } of LABEL_BUTTONS) {
    const button = el("button", `verdict-${token}`, caption) as HTMLButtonElement;
    button.onclick = () => void flow.submitVerdict(token);
    buttons.appendChild(button);
  }
  root.appendChild(buttons);
}

// -- admin dashboard -------------------------------------------------------------

export function renderDashboard(root: HTMLElement, dashboard: Dashboard, round: number): void {
  const state = dashboard.state;
  root.replaceChildren();

  const reload = el("button", "", `Reload round ${round}`) as HTMLButtonElement;
  reload.onclick = () => void dashboard.load(round);
  root.appendChild(reload);

  if (state.phase === "idle") return;
  if (state.phase === "error") {
    root.appendChild(el("p", "notice error", state.error ?? "failed to load"));
    return;
  }
  if (state.phase === "provisional") {
    root.appendChild(
      el("p", "notice", `Round still in progress (${state.error}); numbers are provisional.`),
    );
  }
  if (!state.stats) return;

  const headline = el("table", "stats-table");
  for (const { label, value } of dashboard.headline()) {
    const row = el("tr");
    row.appendChild(el("td", "k", label));
    row.appendChild(el("td", "v", value));
    headline.appendChild(row);
  }
  root.appendChild(headline);

  root.appendChild(el("h3", "", "Outcome proportions"));
  const fateBar = el("div", "fate-bar");
  for (const { fate, pct } of dashboard.fateShares()) {
    const segment = el("div", `fate-segment fate-${fate}`, pct >= 8 ? `${fate} ${pct}%` : "");
    segment.style.width = `${pct}%`;
    segment.title = `${fate}: ${pct}%`;
    fateBar.appendChild(segment);
  }
  root.appendChild(fateBar);

  for (const name of ["tries", "seconds", "hypothesis_tokens"] as const) {
    const bins = dashboard.bins(name);
    if (!bins.length) continue;
    root.appendChild(el("h3", "", `${name.replace("_", " ")} histogram`));
    const chart = el("div", "hist");
    const peak = Math.max(...bins.map((b) => b.n));
    for (const bin of bins) {
      const column = el("div", "hist-col");
      const bar = el("div", "hist-bar");
      bar.style.height = `${Math.round((100 * bin.n) / peak)}%`;
      bar.title = `${bin.x}: ${bin.n}`;
      column.appendChild(bar);
      column.appendChild(el("span", "hist-x", String(bin.x)));
      chart.appendChild(column);
    }
    root.appendChild(chart);
  }
}
