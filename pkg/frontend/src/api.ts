/** Thin fetch client for the pricing service. The workbench only reads and
 * reprices; it never edits session contents. */

import type { PricingRequest, PricingResponse, SessionSpec, SessionSummary } from "./types.js";

export class ServiceError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.name = "ServiceError";
    this.status = status;
  }
}

export interface HealthInfo {
  status: string;
  sessions: number;
  session_cap: number;
  backend: string;
  compiled_available: boolean;
  table_builds: number;
}

export class PricingClient {
  readonly baseUrl: string;

  /** baseUrl "" targets the origin that served the page. */
  constructor(baseUrl = "") {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let res: Response;
    try {
      res = await fetch(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ServiceError(0, err instanceof Error ? err.message : "network failure");
    }
    if (!res.ok) {
      let detail = `${res.status} ${res.statusText}`;
      try {
        const data: unknown = await res.json();
        if (data !== null && typeof data === "object" && "detail" in data) {
          const d = (data as { detail: unknown }).detail;
          detail = typeof d === "string" ? d : JSON.stringify(d);
        }
      } catch {
        // non-JSON error body, keep the status line
      }
      throw new ServiceError(res.status, detail);
    }
    if (res.status === 204) {
      return undefined as T;
    }
    return (await res.json()) as T;
  }

  health(): Promise<HealthInfo> {
    return this.request("GET", "/health");
  }

  listSessions(): Promise<{ sessions: SessionSummary[] }> {
    return this.request("GET", "/sessions");
  }

  createSession(spec: SessionSpec): Promise<SessionSummary> {
    return this.request("POST", "/sessions", { spec });
  }

  reprice(sessionId: string, req: PricingRequest): Promise<PricingResponse> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/reprice`, req);
  }
}
