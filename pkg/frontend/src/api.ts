/**
 * Typed client for the annotation service HTTP contract:
 *
 *   POST /sessions {task, items}      -> {session_id}
 *   GET  /sessions                    -> {sessions: [...]}
 *   GET  /sessions/{id}               -> view incl. the valid label set
 *   GET  /sessions/{id}/next          -> item | {done: true}
 *   POST /sessions/{id}/labels {...}  -> {ok: true}
 *   GET  /sessions/{id}/export        -> NDJSON label records
 *
 * Errors arrive as {code, message} with status 400/404/409 and are
 * rethrown as ApiError; transport failures become status-0 ApiErrors.
 */

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface SessionSummary {
  session_id: string;
  task: string;
  total: number;
  labeled: number;
}

export interface SessionView extends SessionSummary {
  labels: string[];
}

export interface SessionItem {
  item_id: string;
  uid: string;
  [field: string]: unknown;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class AnnotationClient {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  async health(): Promise<boolean> {
    const body = await this.request<{ ok?: boolean }>("GET", "/health");
    return body.ok === true;
  }

  async listSessions(): Promise<SessionSummary[]> {
    const body = await this.request<{ sessions: SessionSummary[] }>("GET", "/sessions");
    return body.sessions;
  }

  async createSession(task: string, items: unknown[]): Promise<string> {
    const body = await this.request<{ session_id: string }>("POST", "/sessions", {
      task,
      items,
    });
    return body.session_id;
  }

  session(sessionId: string): Promise<SessionView> {
    return this.request<SessionView>("GET", `/sessions/${encodeURIComponent(sessionId)}`);
  }

  /** The next unlabeled item, or null once the session is fully labeled. */
  async next(sessionId: string): Promise<SessionItem | null> {
    const body = await this.request<Record<string, unknown>>(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/next`,
    );
    return "item_id" in body ? (body as SessionItem) : null;
  }

  async submitLabel(
    sessionId: string,
    itemId: string,
    label: string,
    annotator = "",
    overwrite = false,
  ): Promise<void> {
    await this.request<{ ok: boolean }>(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/labels`,
      { item_id: itemId, label, annotator, overwrite },
    );
  }

  async exportNdjson(sessionId: string): Promise<string> {
    const resp = await this.send(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/export`,
    );
    return resp.text();
  }

  private async send(method: string, path: string, body?: unknown): Promise<Response> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, {
        method,
        ...(body === undefined
          ? {}
          : {
              headers: { "content-type": "application/json" },
              body: JSON.stringify(body),
            }),
      });
    } catch (err) {
      throw new ApiError(0, "NetworkError", String(err));
    }
    if (!resp.ok) {
      let code = `HTTP${resp.status}`;
      let message = resp.statusText || `request failed with status ${resp.status}`;
      try {
        const payload = (await resp.json()) as { code?: string; message?: string };
        if (payload.code) code = payload.code;
        if (payload.message) message = payload.message;
      } catch {
        // non-JSON error body: keep the status-derived description
      }
      throw new ApiError(resp.status, code, message);
    }
    return resp;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.send(method, path, body);
    return (await resp.json()) as T;
  }
}
