/**
 * Entry point: connection panel plus the three consoles behind tabs.
 */

import { Api } from "./api.js";
import { Dashboard } from "./dashboard.js";
import { renderDashboard, renderVerifier, renderWriter } from "./views.js";
import { VerifierFlow } from "./verifier.js";
import { WriterFlow } from "./writer.js";

type Tab = "writer" | "verifier" | "dashboard";

function readSetting(key: string, fallback: string): string {
  return localStorage.getItem(`outfox.${key}`) ?? fallback;
}

function storeSetting(key: string, value: string): void {
  localStorage.setItem(`outfox.${key}`, value);
}

function init(): void {
  const root = document.getElementById("app");
  if (!root) return;

  const settingsForm = document.getElementById("settings") as HTMLFormElement;
  const tokenInput = document.getElementById("token") as HTMLInputElement;
  const annotatorInput = document.getElementById("annotator") as HTMLInputElement;
  const roundInput = document.getElementById("round") as HTMLInputElement;
  tokenInput.value = readSetting("token", "");
  annotatorInput.value = readSetting("annotator", "");
  roundInput.value = readSetting("round", "1");

  const panel = document.getElementById("panel") as HTMLElement;
  let active: Tab = "writer";

  function rebuild(): void {
    storeSetting("token", tokenInput.value);
    storeSetting("annotator", annotatorInput.value);
    storeSetting("round", roundInput.value);
    const api = new Api(window.location.origin, tokenInput.value.trim());
    const round = Number(roundInput.value) || 1;
    const annotator = annotatorInput.value.trim();

    if (active === "writer") {
      const flow = new WriterFlow(api, annotator, () => renderWriter(panel, flow, round));
      renderWriter(panel, flow, round);
    } else if (active === "verifier") {
      const flow = new VerifierFlow(api, annotator, () => renderVerifier(panel, flow));
      renderVerifier(panel, flow);
    } else {
      const dashboard = new Dashboard(api, () => renderDashboard(panel, dashboard, round));
      renderDashboard(panel, dashboard, round);
      void dashboard.load(round);
    }
  }

  for (const tab of ["writer", "verifier", "dashboard"] as Tab[]) {
    const button = document.getElementById(`tab-${tab}`);
    if (!button) continue;
    button.addEventListener("click", () => {
      active = tab;
      for (const other of ["writer", "verifier", "dashboard"]) {
        document.getElementById(`tab-${other}`)?.classList.toggle("active", other === tab);
      }
      rebuild();
    });
  }

  settingsForm.addEventListener("submit", (event) => {
    event.preventDefault();
    rebuild();
  });

  rebuild();
}

document.addEventListener("DOMContentLoaded", init);
