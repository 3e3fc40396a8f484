/** Typed client for the retrieval session HTTP API. */

export interface ResultEntry {
  id: string;
  score: number;
  image_url: string;
  labels: string[];
}

export interface CreateSessionResponse {
  session_id: string;
  results: ResultEntry[];
}

export interface FeedbackResponse {
  failure?: boolean;
  results?: ResultEntry[];
  control: ResultEntry[];
}

export interface SessionSnapshot {
  session_id: string;
  state: string;
  query_id: string | null;
  m: number;
  results: ResultEntry[];
  failure?: boolean;
  refined?: ResultEntry[] | null;
  control?: ResultEntry[];
}

export interface CorpusSummary {
  count: number;
  dim: number;
  label_histogram: Record<string, number>;
  sample_ids: string[];
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(
    path: string,
    init?: RequestInit,
  ): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(body: {
    query_id?: string;
    vector?: number[];
    m?: number;
  }): Promise<CreateSessionResponse> {
    return this.request("/api/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  submitFeedback(sessionId: string, bits: number[]): Promise<FeedbackResponse> {
    return this.request(`/api/sessions/${sessionId}/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ bits }),
    });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.request(`/api/sessions/${sessionId}`);
  }

  corpusSummary(): Promise<CorpusSummary> {
    return this.request("/api/corpus/summary");
  }

  imageUrl(entry: ResultEntry): string {
    return this.base + entry.image_url;
  }
}
