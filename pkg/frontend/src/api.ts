import type { AuditPayload, JobPayload, LeaderboardEntry, PlotsPayload } from "./types.js";

export interface LeaderboardResponse {
  notModified: boolean;
  etag: string | null;
  rows: LeaderboardEntry[];
}

export interface SubmitOk {
  ok: true;
  jobId: string;
}

export interface SubmitError {
  ok: false;
  status: number;
  message: string;
}

export type SubmitResult = SubmitOk | SubmitError;

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async getLeaderboard(etag: string | null): Promise<LeaderboardResponse> {
    const headers: Record<string, string> = {};
    if (etag) {
      headers["If-None-Match"] = etag;
    }
    const response = await this.fetchImpl(this.url("/api/leaderboard"), { headers });
    if (response.status === 304) {
      return { notModified: true, etag, rows: [] };
    }
    if (!response.ok) {
      throw new Error(`leaderboard request failed: ${response.status}`);
    }
    return {
      notModified: false,
      etag: response.headers.get("etag"),
      rows: (await response.json()) as LeaderboardEntry[],
    };
  }

  async submit(modelId: string, file: Blob, fileName = "transcripts.csv"): Promise<SubmitResult> {
    const body = new FormData();
    body.append("model_id", modelId);
    body.append("transcripts", file, fileName);
    const response = await this.fetchImpl(this.url("/api/submit"), { method: "POST", body });
    if (response.status === 202) {
      const payload = (await response.json()) as { job_id: string };
      return { ok: true, jobId: payload.job_id };
    }
    let message = `submission failed with status ${response.status}`;
    try {
      const payload = (await response.json()) as { error?: string };
      if (payload.error) {
        message = payload.error;
      }
    } catch {
      // non-JSON error body: keep the status line
    }
    return { ok: false, status: response.status, message };
  }

  async getStatus(jobId: string): Promise<JobPayload> {
    const response = await this.fetchImpl(this.url(`/api/status/${jobId}`));
    if (!response.ok) {
      throw new Error(`status request failed: ${response.status}`);
    }
    return (await response.json()) as JobPayload;
  }

  async getResult(modelId: string): Promise<AuditPayload | null> {
    const response = await this.fetchImpl(this.url(`/api/result/${modelId}`));
    if (response.status === 404) {
      return null;
    }
    if (!response.ok) {
      throw new Error(`result request failed: ${response.status}`);
    }
    return (await response.json()) as AuditPayload;
  }

  async getPlots(modelId: string): Promise<PlotsPayload | "missing" | "no-detail"> {
    const response = await this.fetchImpl(this.url(`/api/plots/${modelId}`));
    if (response.status === 404) {
      return "missing";
    }
    if (response.status === 409) {
      return "no-detail";
    }
    if (!response.ok) {
      throw new Error(`plots request failed: ${response.status}`);
    }
    return (await response.json()) as PlotsPayload;
  }
}
