// Thin client over the session HTTP API. The UI holds no solver logic:
// everything it shows comes from these endpoints.

import type {
  FeedbackAction,
  FeedbackEffect,
  SessionDoc,
  SessionSummary,
  StreamEvent,
  TraceNode,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private token: string = "",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  setToken(token: string): void {
    this.token = token;
  }

  private headers(json = true): Record<string, string> {
    const headers: Record<string, string> = {
      Authorization: `Bearer ${this.token}`,
    };
    if (json) headers["Content-Type"] = "application/json";
    return headers;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      const text = await response.text();
      throw new ApiError(response.status, text || response.statusText);
    }
    return (await response.json()) as T;
  }

  createSession(title?: string): Promise<SessionSummary> {
    return this.request("POST", "/api/sessions", { title: title ?? null });
  }

  listSessions(savedOnly = false): Promise<SessionSummary[]> {
    const query = savedOnly ? "?saved=true" : "";
    return this.request("GET", `/api/sessions${query}`);
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.request("GET", `/api/sessions/${sessionId}`);
  }

  patchSession(
    sessionId: string,
    patch: { title?: string; saved?: boolean; notes?: string },
  ): Promise<SessionSummary> {
    return this.request("PATCH", `/api/sessions/${sessionId}`, patch);
  }

  postFeedback(
    sessionId: string,
    action: FeedbackAction,
    critique = "",
  ): Promise<FeedbackEffect> {
    return this.request("POST", `/api/sessions/${sessionId}/feedback`, {
      action,
      critique,
    });
  }

  getTrace(turnId: string): Promise<{ turn_id: string; trace: TraceNode | null }> {
    return this.request("GET", `/api/turns/${turnId}/trace`);
  }

  bufferedEvents(sessionId: string, after: number): Promise<{ events: StreamEvent[] }> {
    return this.request(
      "GET",
      `/api/sessions/${sessionId}/events?after=${after}`,
    );
  }

  artifactUrl(path: string): string {
    return `${this.baseUrl}/api/artifacts/${path}`;
  }

  async fetchArtifactText(path: string): Promise<string> {
    const response = await this.fetchImpl(this.artifactUrl(path), {
      headers: this.headers(false),
    });
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return response.text();
  }

  /** POST a turn and stream its server-sent events. */
  async streamTurn(
    sessionId: string,
    message: string,
    onEvent: (event: StreamEvent) => void,
    signal?: AbortSignal,
  ): Promise<void> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/sessions/${sessionId}/turns`,
      {
        method: "POST",
        headers: this.headers(),
        body: JSON.stringify({ message }),
        signal,
      },
    );
    if (!response.ok) {
      const text = await response.text();
      throw new ApiError(response.status, text || response.statusText);
    }
    if (!response.body) throw new ApiError(0, "response has no body");
    await parseSseStream(response.body, onEvent);
  }
}

/** Incremental SSE parser over a fetch body stream. */
export async function parseSseStream(
  body: ReadableStream<Uint8Array>,
  onEvent: (event: StreamEvent) => void,
): Promise<void> {
  const reader = body.getReader();
  const decoder = new TextDecoder("utf-8");
  let buffer = "";
  for (;;) {
    const { value, done } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    const frames = buffer.split(/\r?\n\r?\n/);
    buffer = frames.pop() ?? "";
    for (const frame of frames) {
      const event = parseSseFrame(frame);
      if (event) onEvent(event);
    }
  }
  const tail = parseSseFrame(buffer);
  if (tail) onEvent(tail);
}

export function parseSseFrame(frame: string): StreamEvent | null {
  let id = -1;
  let type = "message";
  const dataLines: string[] = [];
  for (const raw of frame.split(/\r?\n/)) {
    if (raw.startsWith("id:")) id = Number(raw.slice(3).trim());
    else if (raw.startsWith("event:")) type = raw.slice(6).trim();
    else if (raw.startsWith("data:")) dataLines.push(raw.slice(5).trim());
  }
  if (dataLines.length === 0) return null;
  let data: Record<string, unknown>;
  try {
    data = JSON.parse(dataLines.join("\n")) as Record<string, unknown>;
  } catch {
    data = { raw: dataLines.join("\n") };
  }
  return { id, event: type as StreamEvent["event"], data };
}
