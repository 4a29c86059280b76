/**
 * Thin fetch client for the v1 adjudication API. Errors are normalized to
 * ApiError carrying the server's {error: {code, message}} body when present.
 */

import type {
  ExportResponse,
  NextResponse,
  Resolution,
  SessionDetail,
  SessionSummary,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export interface ApiClientOptions {
  baseUrl?: string;
  token?: string;
  fetchFn?: typeof fetch;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly token?: string;
  private readonly fetchFn: typeof fetch;

  constructor(options: ApiClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? '').replace(/\/+$/, '');
    this.token = options.token;
    this.fetchFn = options.fetchFn ?? fetch.bind(globalThis);
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers: Record<string, string> = {
      Accept: 'application/json',
      ...(init.body ? { 'Content-Type': 'application/json' } : {}),
      ...(this.token ? { 'X-Api-Token': this.token } : {}),
    };
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, { ...init, headers });
    } catch (err) {
      throw new ApiError(0, 'connection', `API unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let code = 'error';
      let message = `HTTP ${response.status}`;
      try {
        const body = await response.json();
        if (body?.error) {
          code = body.error.code ?? code;
          message = body.error.message ?? message;
        }
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  async listSessions(): Promise<SessionSummary[]> {
    const body = await this.request<{ sessions: SessionSummary[] }>('/v1/sessions');
    return body.sessions;
  }

  getSession(sessionId: string): Promise<SessionDetail> {
    return this.request(`/v1/sessions/${encodeURIComponent(sessionId)}`);
  }

  nextItem(sessionId: string): Promise<NextResponse> {
    return this.request(`/v1/sessions/${encodeURIComponent(sessionId)}/next`);
  }

  postResolution(
    sessionId: string,
    resolution: { context_id: string; label: string; resolver: string; note?: string },
  ): Promise<{ resolution: Resolution }> {
    return this.request(`/v1/sessions/${encodeURIComponent(sessionId)}/resolutions`, {
      method: 'POST',
      body: JSON.stringify({ note: '', ...resolution }),
    });
  }

  exportResolved(sessionId: string): Promise<ExportResponse> {
    return this.request(`/v1/sessions/${encodeURIComponent(sessionId)}/export`);
  }
}
