/** Typed client over the six documented studio endpoints — nothing else. */

import {
  ApiError,
  ApiErrorBody,
  JobView,
  SessionView,
  TermRowResponse,
} from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let body: ApiErrorBody | null = null;
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    // non-JSON error body; fall through to a generic error
  }
  return new ApiError(
    response.status,
    body?.error ?? "unknown",
    body?.message ?? response.statusText,
  );
}

export class StudioClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  createSession(input: { text?: string; audio_ref?: string }): Promise<SessionView> {
    return this.request<SessionView>("/api/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(input),
    });
  }

  async extractTerms(sessionId: string): Promise<TermRowResponse[]> {
    const payload = await this.request<{ rows: TermRowResponse[] }>(
      `/api/sessions/${sessionId}/terms`,
      { method: "POST" },
    );
    return payload.rows;
  }

  putSelection(
    sessionId: string,
    term: string,
    assetIds: string[],
  ): Promise<SessionView> {
    return this.request<SessionView>(
      `/api/sessions/${sessionId}/terms/${encodeURIComponent(term)}/selection`,
      {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ asset_ids: assetIds }),
      },
    );
  }

  composeVideo(sessionId: string): Promise<{ job_id: string }> {
    return this.request<{ job_id: string }>(`/api/sessions/${sessionId}/video`, {
      method: "POST",
    });
  }

  jobStatus(jobId: string): Promise<JobView> {
    return this.request<JobView>(`/api/jobs/${jobId}`);
  }

  /** Returns an object URL for the downloaded video blob. */
  async downloadVideo(
    sessionId: string,
    kind: "silent" | "final",
  ): Promise<{ url: string; size: number }> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/sessions/${sessionId}/video?kind=${kind}`,
    );
    if (!response.ok) {
      throw await parseError(response);
    }
    const blob = await response.blob();
    return { url: URL.createObjectURL(blob), size: blob.size };
  }
}
