/**
 * Fetch client for the phishpond service.
 *
 * fetchFn is injectable so tests can point the client at a stub server (or
 * any compatible implementation) without patching globals. Non-2xx responses
 * become ApiError with the server's error name and detail.
 */

import type { ActionResponse, PlayerAction, SessionState, SessionSummary } from './types.js';

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: string;

  constructor(status: number, code: string, detail: string) {
    super(`${code}: ${detail}`);
    this.name = 'ApiError';
    this.status = status;
    this.code = code;
    this.detail = detail;
  }
}

export interface ClientOptions {
  baseUrl: string;
  fetchFn?: typeof fetch;
}

export class PondClient {
  private readonly baseUrl: string;
  private readonly fetchFn: typeof fetch;

  constructor(options: ClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/+$/, '');
    this.fetchFn = options.fetchFn ?? globalThis.fetch.bind(globalThis);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload: unknown = await res.json().catch(() => null);
    if (!res.ok) {
      const record = (payload ?? {}) as Partial<Record<'error' | 'detail', string>>;
      throw new ApiError(
        res.status,
        record.error ?? 'unknown_error',
        record.detail ?? `request failed with status ${res.status}`
      );
    }
    return payload as T;
  }

  createSession(participantId?: string, seed?: number): Promise<SessionState> {
    const body: Record<string, unknown> = {};
    if (participantId !== undefined) body.participant_id = participantId;
    if (seed !== undefined) body.seed = seed;
    return this.request<SessionState>('POST', '/sessions', body);
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request<SessionState>('GET', `/sessions/${encodeURIComponent(sessionId)}`);
  }

  sendAction(
    sessionId: string,
    action: PlayerAction,
    expectedSeq: number,
    elapsedS: number
  ): Promise<ActionResponse> {
    return this.request<ActionResponse>('POST', `/sessions/${encodeURIComponent(sessionId)}/actions`, {
      expected_seq: expectedSeq,
      action,
      elapsed_s: elapsedS,
    });
  }

  getSummary(sessionId: string): Promise<SessionSummary> {
    return this.request<SessionSummary>('GET', `/sessions/${encodeURIComponent(sessionId)}/summary`);
  }
}
