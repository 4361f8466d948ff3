// Typed client for the pipeline service HTTP API. Every response status is
// recorded so tests can assert the studio never triggers illegal-state
// answers during a scripted flow.

export interface SessionStatus {
  session_id: string;
  state: string;
  prompt: string | null;
  seed: number;
  candidate_count: number;
  selected: number | null;
  timings_ms: Record<string, number>;
  error: { stage: string; message: string } | null;
  has_asset: boolean;
}

export interface Manifest {
  version: number;
  session_id: string;
  prompt: string;
  seed: number;
  backend_ids: Record<string, string>;
  counts: { vertices: number; triangles: number };
  timings_ms: Record<string, number>;
  sha256: { obj: string; mtl: string };
  budget_exceeded?: boolean;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly path: string, detail: string) {
    super(`${path} -> ${status}: ${detail}`);
  }
}

export interface ResponseLogEntry {
  method: string;
  path: string;
  status: number;
}

type FetchLike = typeof fetch;

export class PipelineClient {
  readonly responseLog: ResponseLogEntry[] = [];
  private readonly fetchImpl: FetchLike;

  constructor(readonly baseUrl: string, fetchImpl?: FetchLike) {
    this.fetchImpl = fetchImpl ?? fetch;
  }

  private async request(method: string, path: string, body?: BodyInit,
                        contentType?: string): Promise<Response> {
    const headers: Record<string, string> = {};
    if (contentType) headers["Content-Type"] = contentType;
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body,
    });
    this.responseLog.push({ method, path, status: response.status });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = await response.json();
        if (parsed && typeof parsed.detail === "string") detail = parsed.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, path, detail);
    }
    return response;
  }

  async createSession(): Promise<string> {
    const r = await this.request("POST", "/v1/sessions");
    const body = (await r.json()) as { session_id: string };
    return body.session_id;
  }

  async putSketch(sessionId: string, documentJson: string): Promise<void> {
    await this.request("PUT", `/v1/sessions/${sessionId}/sketch`,
      documentJson, "application/json");
  }

  async generate(sessionId: string, prompt: string, seed?: number,
                 candidates?: number): Promise<void> {
    const body: Record<string, unknown> = { prompt };
    if (seed !== undefined) body.seed = seed;
    if (candidates !== undefined) body.candidates = candidates;
    await this.request("POST", `/v1/sessions/${sessionId}/generate`,
      JSON.stringify(body), "application/json");
  }

  async status(sessionId: string): Promise<SessionStatus> {
    const r = await this.request("GET", `/v1/sessions/${sessionId}`);
    return (await r.json()) as SessionStatus;
  }

  candidateUrl(sessionId: string, index: number): string {
    return `${this.baseUrl}/v1/sessions/${sessionId}/candidates/${index}`;
  }

  async candidatePng(sessionId: string, index: number): Promise<ArrayBuffer> {
    const r = await this.request("GET", `/v1/sessions/${sessionId}/candidates/${index}`);
    return r.arrayBuffer();
  }

  async select(sessionId: string, index: number): Promise<void> {
    await this.request("POST", `/v1/sessions/${sessionId}/select`,
      JSON.stringify({ index }), "application/json");
  }

  async manifest(sessionId: string): Promise<Manifest> {
    const r = await this.request("GET", `/v1/sessions/${sessionId}/asset/manifest`);
    return (await r.json()) as Manifest;
  }

  async meshObj(sessionId: string): Promise<string> {
    const r = await this.request("GET", `/v1/sessions/${sessionId}/asset/mesh.obj`);
    return r.text();
  }

  async materialMtl(sessionId: string): Promise<string> {
    const r = await this.request("GET", `/v1/sessions/${sessionId}/asset/material.mtl`);
    return r.text();
  }
}
