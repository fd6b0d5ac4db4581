/** Workbench state machine. Every submission carries a sequence number; an
 * outcome is applied only if nothing newer has completed, so a delayed
 * response can never overwrite a fresher one. Displayed numbers always come
 * from a single PricingResponse, never from client-side recomputation. */

import { ServiceError } from "./api.js";
import type { PricingRequest, PricingResponse, SessionSummary } from "./types.js";

export const AUTO_SUBMIT_DELAY_MS = 250;

/** The slice of the service client the workbench needs; tests swap in stubs. */
export interface RepriceClient {
  reprice(sessionId: string, req: PricingRequest): Promise<PricingResponse>;
}

export interface WorkbenchView {
  session: SessionSummary | null;
  latest: PricingResponse | null;
  banner: string | null;
  inFlight: boolean;
}

export type Renderer = (view: WorkbenchView) => void;

/** Returns the request to send, or null when the form is invalid. */
export type RequestBuilder = () => PricingRequest | null;

export class Workbench {
  readonly view: WorkbenchView = { session: null, latest: null, banner: null, inFlight: false };

  private readonly client: RepriceClient;
  private readonly render: Renderer;
  private seq = 0;
  private completed = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(client: RepriceClient, render: Renderer = () => {}) {
    this.client = client;
    this.render = render;
  }

  setSession(session: SessionSummary | null): void {
    this.view.session = session;
    this.view.latest = null;
    this.view.banner = null;
    this.render(this.view);
  }

  /** Auto-submit after a quiet quarter second; each edit restarts the clock. */
  scheduleSubmit(build: RequestBuilder): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.submitNow(build);
    }, AUTO_SUBMIT_DELAY_MS);
  }

  /** Manual submit; cancels any pending auto-submit so nothing fires twice. */
  async submitNow(build: RequestBuilder): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    const session = this.view.session;
    if (session === null) {
      return;
    }
    const req = build();
    if (req === null) {
      return;
    }
    const seq = ++this.seq;
    this.view.inFlight = true;
    this.render(this.view);

    let resp: PricingResponse;
    try {
      resp = await this.client.reprice(session.session_id, req);
    } catch (err) {
      if (seq > this.completed) {
        this.completed = seq;
        this.view.banner = err instanceof ServiceError ? err.message : String(err);
        this.view.inFlight = this.seq > this.completed;
        this.render(this.view);
      }
      return;
    }
    if (seq > this.completed) {
      this.completed = seq;
      this.view.latest = resp;
      this.view.banner = null;
      this.view.inFlight = this.seq > this.completed;
      this.render(this.view);
    }
  }
}
