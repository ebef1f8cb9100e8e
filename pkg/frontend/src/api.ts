// HTTP client for the jam server. The frontend talks to the backend only
// through these endpoints.

import { Instrument, TouchSample, toCsv } from "./model.js";

export interface FeedItem {
  id: string;
  performer: string;
  instrument: string;
  date: string;
  parent_id: string | null;
  created_at: string;
}

export interface FeedPage {
  page: number;
  page_size: number;
  total: number;
  items: FeedItem[];
}

export interface PerformanceDetail extends FeedItem {
  events: TouchSample[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
    readonly violations?: { code: string; message: string }[],
  ) {
    super(detail);
  }
}

export interface SubmitOptions {
  instrument: Instrument;
  events: readonly TouchSample[];
  performer?: string;
  parentId?: string | null;
}

export class JamClient {
  constructor(readonly baseUrl: string) {}

  async submit(options: SubmitOptions): Promise<string> {
    const path = options.parentId
      ? `/v1/performances/${encodeURIComponent(options.parentId)}/reply`
      : "/v1/performances";
    const body = {
      performer: options.performer ?? "",
      instrument: options.instrument,
      events_csv: toCsv(options.events),
    };
    const created = await this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return created.id as string;
  }

  feed(page = 1, pageSize = 20): Promise<FeedPage> {
    return this.request(`/v1/performances?page=${page}&page_size=${pageSize}`);
  }

  get(id: string): Promise<PerformanceDetail> {
    return this.request(`/v1/performances/${encodeURIComponent(id)}`);
  }

  chain(id: string): Promise<{ layers: FeedItem[] }> {
    return this.request(`/v1/performances/${encodeURIComponent(id)}/chain`);
  }

  audioUrl(id: string): string {
    return `${this.baseUrl}/v1/performances/${encodeURIComponent(id)}/audio.wav`;
  }

  traceUrl(id: string): string {
    return `${this.baseUrl}/v1/performances/${encodeURIComponent(id)}/trace.png`;
  }

  private async request(path: string, init?: RequestInit): Promise<any> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      let code = "http-error";
      let detail = response.statusText;
      let violations;
      try {
        const body = await response.json();
        code = body.code ?? code;
        detail = body.detail ?? detail;
        violations = body.violations;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, detail, violations);
    }
    return response.json();
  }
}
