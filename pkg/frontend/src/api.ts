import axios from 'axios';

import {
  FullTranscript,
  ScopedTranscript,
  SessionSummary,
  ViewModel,
  parseFullTranscript,
  parseScopedTranscript,
  parseSessionSummary,
  parseViewModel,
} from './types';

export interface LogEntry {
  method: string;
  url: string;
  body: unknown;
  status: number;
  response: unknown;
}

export interface SessionRequest {
  ks: string;
  formula: string;
  prophecy?: string;
  human_players?: number[];
  opponent?: { kind: string; seed?: number; certificate?: string };
  assist?: { kind: string; seed?: number; certificate?: string };
  horizon?: number;
  obs_mode?: string;
}

export interface CheckRequest {
  ks: string;
  formula: string;
  prophecy?: string;
  mode?: string;
  max_memory?: number;
}

export interface CheckResponse {
  status: string;
  method: string;
  guarantee: string;
  detail: string;
  bounds: Record<string, number>;
  witness: Record<string, unknown> | null;
  certificate: string | null;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = 'ApiError';
  }
}

export class ApiClient {
  // Every request and response body, in order; tests audit this log.
  readonly log: LogEntry[] = [];

  constructor(readonly base: string) {}

  private async request(method: 'GET' | 'POST', path: string, body?: unknown): Promise<unknown> {
    const url = `${this.base}${path}`;
    const res = await axios.request({ method, url, data: body, validateStatus: () => true });
    this.log.push({ method, url, body: body ?? null, status: res.status, response: res.data });
    if (res.status >= 400) {
      const detail =
        res.data && typeof res.data === 'object' && 'detail' in res.data
          ? String((res.data as { detail: unknown }).detail)
          : `request failed with status ${res.status}`;
      throw new ApiError(res.status, detail);
    }
    return res.data;
  }

  async health(): Promise<boolean> {
    const data = (await this.request('GET', '/healthz')) as { ok: boolean };
    return data.ok;
  }

  async check(req: CheckRequest): Promise<CheckResponse> {
    return (await this.request('POST', '/check', req)) as CheckResponse;
  }

  async createSession(req: SessionRequest): Promise<SessionSummary> {
    return parseSessionSummary(await this.request('POST', '/sessions', req));
  }

  async view(sid: string, player: number): Promise<ViewModel> {
    return parseViewModel(await this.request('GET', `/sessions/${sid}/view?player=${player}`));
  }

  async move(sid: string, player: number, direction: string): Promise<ViewModel> {
    return parseViewModel(await this.request('POST', `/sessions/${sid}/move`, { player, direction }));
  }

  async autoMove(sid: string, player: number): Promise<ViewModel> {
    return parseViewModel(await this.request('POST', `/sessions/${sid}/auto`, { player }));
  }

  async transcript(sid: string, player: number): Promise<ScopedTranscript> {
    return parseScopedTranscript(
      await this.request('GET', `/sessions/${sid}/transcript?player=${player}`)
    );
  }

  async fullTranscript(sid: string): Promise<FullTranscript> {
    return parseFullTranscript(await this.request('GET', `/sessions/${sid}/transcript`));
  }
}
