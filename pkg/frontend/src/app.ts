// Browser bootstrap: hash routing, leaderboard polling, submit/poll wiring.
// All rendering goes through the pure view modules, which the test suite
// drives from recorded fixtures without any DOM.

import { ApiClient } from "./api.js";
import { applyResponse, emptyViewModel, renderLeaderboard, toggleSort } from "./leaderboard.js";
import { renderNotFound, renderResult } from "./result.js";
import { pollJob, renderJobProgress, renderSubmitError, renderSubmitForm } from "./submit.js";
import type { LeaderboardViewModel, SortColumn } from "./types.js";

declare global {
  interface Window {
    FAIRAUDIT_API?: string;
  }
}

const LEADERBOARD_POLL_MS = 2_000;

function main(): void {
  const client = new ApiClient(window.FAIRAUDIT_API ?? "");
  const outlet = document.getElementById("outlet");
  if (!outlet) {
    throw new Error("missing #outlet element");
  }

  let vm: LeaderboardViewModel = emptyViewModel();
  let offline = false;
  let leaderboardTimer: number | null = null;
  let lastLeaderboardHtml = "";

  function paintLeaderboard(): void {
    const html = `
      <h1>ASR fairness leaderboard</h1>
      <nav><a href="#/submit">submit a model</a></nav>
      ${renderLeaderboard(vm, offline)}`;
    if (html !== lastLeaderboardHtml) {
      outlet!.innerHTML = html;
      lastLeaderboardHtml = html;
    }
  }

  async function refreshLeaderboard(): Promise<void> {
    try {
      const response = await client.getLeaderboard(vm.etag);
      offline = false;
      vm = applyResponse(vm, response, new Date().toISOString());
    } catch {
      offline = true; // keep cached rows visible under the banner
    }
    paintLeaderboard();
  }

  function showLeaderboard(): void {
    stopTimers();
    lastLeaderboardHtml = "";
    paintLeaderboard();
    void refreshLeaderboard();
    leaderboardTimer = window.setInterval(() => void refreshLeaderboard(), LEADERBOARD_POLL_MS);
  }

  function showSubmit(): void {
    stopTimers();
    outlet!.innerHTML = `<h1>submit transcripts</h1><nav><a href="#/">back to leaderboard</a></nav>${renderSubmitForm()}<div id="submit-outcome"></div>`;
    const form = document.getElementById("submit-form") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void handleSubmit(form);
    });
  }

  async function handleSubmit(form: HTMLFormElement): Promise<void> {
    const outcome = document.getElementById("submit-outcome")!;
    const modelId = (form.elements.namedItem("model_id") as HTMLInputElement).value;
    const fileInput = form.elements.namedItem("transcripts") as HTMLInputElement;
    const file = fileInput.files?.[0];
    if (!file) {
      return;
    }
    const submitted = await client.submit(modelId, file, file.name);
    if (!submitted.ok) {
      outcome.innerHTML = renderSubmitError(submitted);
      return;
    }
    pollJob(
      (jobId) => client.getStatus(jobId),
      submitted.jobId,
      {
        onUpdate: (job) => {
          outcome.innerHTML = renderJobProgress(job);
          if (job.state === "done" && job.result_ref) {
            window.location.hash = `#/model/${encodeURIComponent(job.result_ref)}`;
          }
        },
      },
    );
  }

  async function showResult(modelId: string): Promise<void> {
    stopTimers();
    outlet!.innerHTML = `<h1>audit result</h1><nav><a href="#/">back to leaderboard</a></nav><div class="card">loading…</div>`;
    const audit = await client.getResult(modelId);
    const shell = `<h1>audit result</h1><nav><a href="#/">back to leaderboard</a></nav>`;
    if (!audit) {
      outlet!.innerHTML = shell + renderNotFound(modelId);
      return;
    }
    const plots = await client.getPlots(modelId);
    outlet!.innerHTML = shell + renderResult(audit, plots);
  }

  function stopTimers(): void {
    if (leaderboardTimer !== null) {
      window.clearInterval(leaderboardTimer);
      leaderboardTimer = null;
    }
  }

  function route(): void {
    const hash = window.location.hash || "#/";
    if (hash.startsWith("#/model/")) {
      void showResult(decodeURIComponent(hash.slice("#/model/".length)));
    } else if (hash === "#/submit") {
      showSubmit();
    } else {
      showLeaderboard();
    }
  }

  document.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const th = target.closest("th.sortable");
    if (th) {
      vm = toggleSort(vm, th.getAttribute("data-sort") as SortColumn);
      lastLeaderboardHtml = "";
      paintLeaderboard();
      return;
    }
    const row = target.closest("tr.lb-row");
    if (row) {
      const modelId = row.getAttribute("data-model-id");
      if (modelId) {
        window.location.hash = `#/model/${encodeURIComponent(modelId)}`;
      }
    }
  });

  window.addEventListener("hashchange", route);
  route();
}

main();
