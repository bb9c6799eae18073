import type { SubmitError } from "./api.js";
import { escapeHtml } from "./format.js";
import type { JobPayload } from "./types.js";

export const POLL_INTERVAL_MS = 2_000;
export const POLL_BACKOFF_MAX_MS = 30_000;

const HINTS: Record<number, string> = {
  400: "check that the file is a UTF-8 CSV with an `utterance_id,hypothesis` header",
  413: "the file exceeds the upload limit — split or trim the transcript CSV",
  429: "the audit queue is full — wait a moment and resubmit",
};

export function renderSubmitForm(): string {
  return `
  <form id="submit-form" class="card" data-testid="submit-form">
    <label>model id
      <input name="model_id" required pattern="[A-Za-z0-9._/-]{1,128}"
             placeholder="org/model-name" />
    </label>
    <label>transcript CSV (utterance_id,hypothesis)
      <input name="transcripts" type="file" accept=".csv,text/csv" required />
    </label>
    <button type="submit">submit for audit</button>
  </form>`;
}

export function renderSubmitError(error: SubmitError): string {
  const hint = HINTS[error.status] ?? "see the service logs for details";
  return `
  <div class="card error" data-testid="submit-error">
    <strong>submission rejected (HTTP ${error.status})</strong>
    <p class="verbatim">${escapeHtml(error.message)}</p>
    <p class="hint">${escapeHtml(hint)}</p>
  </div>`;
}

export function renderJobProgress(job: JobPayload): string {
  const steps = ["queued", "running", "done"] as const;
  if (job.state === "failed") {
    return `
    <div class="card failure" data-testid="job-failed">
      <strong>audit failed${job.error_kind ? ` (${escapeHtml(job.error_kind)})` : ""}</strong>
      <p class="verbatim">${escapeHtml(job.error ?? "no detail provided")}</p>
    </div>`;
  }
  const trail = steps
    .map((s) => {
      const reached = steps.indexOf(s) <= steps.indexOf(job.state as (typeof steps)[number]);
      const current = s === job.state;
      return `<span class="step${reached ? " reached" : ""}${current ? " current" : ""}">${s}</span>`;
    })
    .join(" → ");
  const link =
    job.state === "done" && job.result_ref
      ? `<a class="result-link" href="#/model/${encodeURIComponent(job.result_ref)}" data-testid="result-link">view audit</a>`
      : "";
  return `
  <div class="card progress" data-testid="job-progress" data-state="${escapeHtml(job.state)}">
    <strong>${escapeHtml(job.model_id)}</strong>
    <div class="trail">${trail}</div>
    ${link}
  </div>`;
}

export interface PollCallbacks {
  onUpdate: (job: JobPayload) => void;
  onError?: (error: unknown) => void;
}

export interface PollHandle {
  stop(): void;
  readonly settled: Promise<JobPayload | null>;
}

type Scheduler = (fn: () => void, ms: number) => unknown;

/**
 * Poll a job every 2 s until it settles, backing off exponentially to 30 s
 * while the service is unreachable. One request is in flight at a time by
 * construction: the next tick is only scheduled after the current finishes.
 */
export function pollJob(
  getStatus: (jobId: string) => Promise<JobPayload>,
  jobId: string,
  callbacks: PollCallbacks,
  schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
): PollHandle {
  let stopped = false;
  let delay = POLL_INTERVAL_MS;
  let resolveSettled: (job: JobPayload | null) => void;
  const settled = new Promise<JobPayload | null>((resolve) => {
    resolveSettled = resolve;
  });

  const tick = async (): Promise<void> => {
    if (stopped) {
      resolveSettled(null);
      return;
    }
    try {
      const job = await getStatus(jobId);
      callbacks.onUpdate(job);
      if (job.state === "done" || job.state === "failed") {
        resolveSettled(job);
        return;
      }
      delay = POLL_INTERVAL_MS; // healthy response resets the cadence
    } catch (error) {
      callbacks.onError?.(error);
      delay = Math.min(delay * 2, POLL_BACKOFF_MAX_MS);
    }
    schedule(() => void tick(), delay);
  };

  schedule(() => void tick(), 0);
  return {
    stop() {
      stopped = true;
    },
    settled,
  };
}
