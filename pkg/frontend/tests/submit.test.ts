import { describe, expect, it, vi } from "vitest";

import {
  POLL_BACKOFF_MAX_MS,
  POLL_INTERVAL_MS,
  pollJob,
  renderJobProgress,
  renderSubmitError,
  renderSubmitForm,
} from "../src/submit.js";
import type { JobPayload } from "../src/types.js";
import { fixture } from "./helpers.js";

const queued = fixture<JobPayload>("job_queued.json");
const running = fixture<JobPayload>("job_running.json");
const done = fixture<JobPayload>("job_done.json");
const failed = fixture<JobPayload>("job_failed.json");
const rejected400 = fixture<{ error: string }>("submit_400.json");

describe("submit form and job progress", () => {
  it("renders the form with the model id pattern enforced", () => {
    const html = renderSubmitForm();
    expect(html).toContain('pattern="[A-Za-z0-9._/-]{1,128}"');
    expect(html).toContain('type="file"');
  });

  it("walks the queued -> running -> done trail", () => {
    expect(renderJobProgress(queued)).toContain('data-state="queued"');
    expect(renderJobProgress(running)).toContain('data-state="running"');
    const doneHtml = renderJobProgress(done);
    expect(doneHtml).toContain('data-state="done"');
    expect(doneHtml).toContain(`#/model/${encodeURIComponent(done.result_ref!)}`);
  });

  it("surfaces a 400 rejection verbatim with a remediation hint", () => {
    const html = renderSubmitError({ ok: false, status: 400, message: rejected400.error });
    expect(html).toContain(rejected400.error);
    expect(html).toContain("HTTP 400");
    expect(html).toContain("utterance_id,hypothesis");
  });

  it("adds hints for 413 and 429 responses", () => {
    expect(renderSubmitError({ ok: false, status: 413, message: "too big" })).toContain(
      "upload limit",
    );
    expect(renderSubmitError({ ok: false, status: 429, message: "queue full" })).toContain(
      "resubmit",
    );
  });

  it("shows the failed-job card with the API's coverage message verbatim", () => {
    const html = renderJobProgress(failed);
    expect(failed.error_kind).toBe("CoverageTooLow");
    expect(html).toContain("CoverageTooLow");
    expect(html).toContain(failed.error!); // includes the coverage fraction
    expect(html).toContain("50.0%");
  });
});

describe("job polling", () => {
  function manualScheduler() {
    const queue: Array<{ fn: () => void; ms: number }> = [];
    return {
      schedule: (fn: () => void, ms: number) => queue.push({ fn, ms }),
      async runNext(): Promise<number> {
        const next = queue.shift();
        if (!next) throw new Error("nothing scheduled");
        next.fn();
        await Promise.resolve(); // let the async tick settle
        await new Promise((r) => setTimeout(r, 0));
        return next.ms;
      },
      pendingDelay(): number {
        return queue[0]?.ms ?? -1;
      },
    };
  }

  it("polls at a 2 s cadence and stops once the job settles", async () => {
    const sched = manualScheduler();
    const states = [queued, running, done];
    let inFlight = 0;
    let maxInFlight = 0;
    const getStatus = vi.fn(async () => {
      inFlight += 1;
      maxInFlight = Math.max(maxInFlight, inFlight);
      await Promise.resolve();
      inFlight -= 1;
      return states[Math.min(getStatus.mock.calls.length - 1, states.length - 1)]!;
    });

    const seen: string[] = [];
    const handle = pollJob(getStatus, "job", { onUpdate: (j) => seen.push(j.state) }, sched.schedule);

    expect(await sched.runNext()).toBe(0); // initial tick fires immediately
    expect(sched.pendingDelay()).toBe(POLL_INTERVAL_MS);
    await sched.runNext(); // running
    expect(sched.pendingDelay()).toBe(POLL_INTERVAL_MS);
    await sched.runNext(); // done -> settles, nothing else scheduled
    expect(sched.pendingDelay()).toBe(-1);

    const settled = await handle.settled;
    expect(settled?.state).toBe("done");
    expect(seen).toEqual(["queued", "running", "done"]);
    expect(maxInFlight).toBe(1); // never more than one request in flight
  });

  it("backs off exponentially to 30 s while the service is unreachable", async () => {
    const sched = manualScheduler();
    const getStatus = vi.fn(async (): Promise<JobPayload> => {
      throw new Error("connection refused");
    });

    const errors: unknown[] = [];
    pollJob(getStatus, "job", { onUpdate: () => {}, onError: (e) => errors.push(e) }, sched.schedule);

    await sched.runNext(); // first failure
    const delays: number[] = [];
    for (let i = 0; i < 6; i += 1) {
      delays.push(sched.pendingDelay());
      await sched.runNext();
    }
    expect(delays).toEqual([4000, 8000, 16000, 30000, 30000, 30000]);
    expect(delays.every((d) => d <= POLL_BACKOFF_MAX_MS)).toBe(true);
    expect(errors.length).toBeGreaterThan(0);
  });

  it("resets the cadence after the service recovers", async () => {
    const sched = manualScheduler();
    let calls = 0;
    const getStatus = vi.fn(async (): Promise<JobPayload> => {
      calls += 1;
      if (calls <= 2) throw new Error("down");
      return running;
    });

    pollJob(getStatus, "job", { onUpdate: () => {} }, sched.schedule);
    await sched.runNext(); // failure 1
    expect(sched.pendingDelay()).toBe(4000);
    await sched.runNext(); // failure 2
    expect(sched.pendingDelay()).toBe(8000);
    await sched.runNext(); // success
    expect(sched.pendingDelay()).toBe(POLL_INTERVAL_MS);
  });

  it("stops scheduling after stop() is called", async () => {
    const sched = manualScheduler();
    const getStatus = vi.fn(async () => queued);
    const handle = pollJob(getStatus, "job", { onUpdate: () => {} }, sched.schedule);
    handle.stop();
    await sched.runNext();
    expect(getStatus).not.toHaveBeenCalled();
    expect(await handle.settled).toBeNull();
  });
});
