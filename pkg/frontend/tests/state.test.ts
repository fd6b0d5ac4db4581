import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ServiceError } from "../src/api.js";
import { AUTO_SUBMIT_DELAY_MS, Workbench, type RepriceClient } from "../src/state.js";
import type { PricingRequest, PricingResponse, SessionSummary } from "../src/types.js";

const SESSION: SessionSummary = {
  session_id: "abc123",
  trial_count: 500,
  catalog_size: 300,
  elt_count: 2,
  elts: [
    { index: 0, record_count: 30 },
    { index: 1, record_count: 40 },
  ],
  table_bytes: 4816,
  created_at: 0,
  reprice_count: 0,
};

function response(tag: number): PricingResponse {
  return {
    session_id: SESSION.session_id,
    trial_count: SESSION.trial_count,
    metrics: [{ return_period: 10, pml: tag, tvar: tag + 1 }],
    ep_curve: [{ loss: tag, exceedance_probability: 0.1 }],
    trial_mean: tag,
    trial_max: tag,
    lookups: 1000,
    engine_seconds: 0.001,
  };
}

function request(tag: number): PricingRequest {
  return {
    terms: { occ_retention: tag, occ_limit: null, agg_retention: 0, agg_limit: null },
    elt_selection: [0, 1],
    return_periods: [10],
  };
}

/** Client stub whose responses resolve only when the test says so. */
class DelayedClient implements RepriceClient {
  calls: { req: PricingRequest; resolve: (r: PricingResponse) => void; reject: (e: Error) => void }[] =
    [];

  reprice(_sessionId: string, req: PricingRequest): Promise<PricingResponse> {
    return new Promise((resolve, reject) => {
      this.calls.push({ req, resolve, reject });
    });
  }
}

const tick = () => new Promise<void>((resolve) => setTimeout(resolve, 0));

describe("sequence numbering", () => {
  it("renders responses that arrive in order", async () => {
    const client = new DelayedClient();
    const wb = new Workbench(client);
    wb.setSession(SESSION);

    const first = wb.submitNow(() => request(1));
    client.calls[0]!.resolve(response(1));
    await first;
    expect(wb.view.latest?.trial_mean).toBe(1);
    expect(wb.view.inFlight).toBe(false);

    const second = wb.submitNow(() => request(2));
    client.calls[1]!.resolve(response(2));
    await second;
    expect(wb.view.latest?.trial_mean).toBe(2);
  });

  it("discards a delayed response that arrives after a newer one", async () => {
    const client = new DelayedClient();
    const renders: (number | undefined)[] = [];
    const wb = new Workbench(client, (view) => renders.push(view.latest?.trial_mean));
    wb.setSession(SESSION);

    const slow = wb.submitNow(() => request(1));
    const fast = wb.submitNow(() => request(2));
    expect(client.calls).toHaveLength(2);

    // the later request completes first, then the stale one straggles in
    client.calls[1]!.resolve(response(2));
    await fast;
    expect(wb.view.latest?.trial_mean).toBe(2);

    client.calls[0]!.resolve(response(1));
    await slow;
    expect(wb.view.latest?.trial_mean).toBe(2);
    expect(renders).not.toContain(1);
    expect(wb.view.inFlight).toBe(false);
  });

  it("a stale error does not overwrite a newer success", async () => {
    const client = new DelayedClient();
    const wb = new Workbench(client);
    wb.setSession(SESSION);

    const slow = wb.submitNow(() => request(1));
    const fast = wb.submitNow(() => request(2));
    client.calls[1]!.resolve(response(2));
    await fast;
    client.calls[0]!.reject(new ServiceError(400, "stale failure"));
    await slow;

    expect(wb.view.banner).toBeNull();
    expect(wb.view.latest?.trial_mean).toBe(2);
  });
});

describe("error banner", () => {
  it("shows the service message and keeps the previous metrics", async () => {
    const client = new DelayedClient();
    const wb = new Workbench(client);
    wb.setSession(SESSION);

    const ok = wb.submitNow(() => request(1));
    client.calls[0]!.resolve(response(1));
    await ok;

    const bad = wb.submitNow(() => request(2));
    client.calls[1]!.reject(new ServiceError(400, "return period 900.0 outside (1, 500]"));
    await bad;

    expect(wb.view.banner).toBe("return period 900.0 outside (1, 500]");
    expect(wb.view.latest?.trial_mean).toBe(1);
    expect(wb.view.inFlight).toBe(false);
  });

  it("a successful submit clears the banner", async () => {
    const client = new DelayedClient();
    const wb = new Workbench(client);
    wb.setSession(SESSION);

    const bad = wb.submitNow(() => request(1));
    client.calls[0]!.reject(new ServiceError(0, "connection refused"));
    await bad;
    expect(wb.view.banner).toBe("connection refused");

    const ok = wb.submitNow(() => request(2));
    client.calls[1]!.resolve(response(2));
    await ok;
    expect(wb.view.banner).toBeNull();
    expect(wb.view.latest?.trial_mean).toBe(2);
  });

  it("an invalid form sends nothing", async () => {
    const client = new DelayedClient();
    const wb = new Workbench(client);
    wb.setSession(SESSION);
    await wb.submitNow(() => null);
    expect(client.calls).toHaveLength(0);
  });

  it("no session sends nothing", async () => {
    const client = new DelayedClient();
    const wb = new Workbench(client);
    await wb.submitNow(() => request(1));
    expect(client.calls).toHaveLength(0);
  });
});

describe("debounced auto-submit", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("coalesces rapid edits into one request after the quiet period", () => {
    const client = new DelayedClient();
    const wb = new Workbench(client);
    wb.setSession(SESSION);

    wb.scheduleSubmit(() => request(1));
    vi.advanceTimersByTime(100);
    wb.scheduleSubmit(() => request(2));
    vi.advanceTimersByTime(AUTO_SUBMIT_DELAY_MS - 1);
    expect(client.calls).toHaveLength(0);

    vi.advanceTimersByTime(1);
    expect(client.calls).toHaveLength(1);
    expect(client.calls[0]!.req.terms.occ_retention).toBe(2);
  });

  it("manual submit cancels the pending auto-submit", () => {
    const client = new DelayedClient();
    const wb = new Workbench(client);
    wb.setSession(SESSION);

    wb.scheduleSubmit(() => request(1));
    void wb.submitNow(() => request(2));
    expect(client.calls).toHaveLength(1);

    vi.advanceTimersByTime(AUTO_SUBMIT_DELAY_MS * 2);
    expect(client.calls).toHaveLength(1);
    expect(client.calls[0]!.req.terms.occ_retention).toBe(2);
  });
});
