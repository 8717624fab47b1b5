/**
 * Thin typed client over fetch. Every write goes through postLabel;
 * nothing else mutates server state.
 */

import type { Polarity, QueueResponse, StatsReport, TriageItem } from './types.js';

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

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let code = 'http_error';
  let message = `request failed with status ${response.status}`;
  try {
    const body = await response.json();
    if (typeof body.code === 'string') code = body.code;
    if (typeof body.message === 'string') message = body.message;
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(response.status, code, message);
}

export class Api {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path);
    } catch (err) {
      throw new ApiError(0, 'network', `service unreachable: ${String(err)}`);
    }
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  getQueue(threshold: number, limit?: number): Promise<QueueResponse> {
    const params = new URLSearchParams({ threshold: String(threshold) });
    if (limit !== undefined) params.set('limit', String(limit));
    return this.getJson<QueueResponse>(`/api/queue?${params.toString()}`);
  }

  async postLabel(commentId: string, polarity: Polarity): Promise<TriageItem> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}/api/labels`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ comment_id: commentId, polarity }),
      });
    } catch (err) {
      throw new ApiError(0, 'network', `service unreachable: ${String(err)}`);
    }
    if (!response.ok) throw await parseError(response);
    const body = await response.json();
    return body.item as TriageItem;
  }

  getStats(): Promise<StatsReport> {
    return this.getJson<StatsReport>('/api/stats');
  }

  getHealth(): Promise<{ status: string; comments: number }> {
    return this.getJson('/api/health');
  }

  exportUrl(): string {
    return `${this.baseUrl}/api/export/labels`;
  }
}
