/** DOM wiring for the workbench page. All pricing state lives in Workbench;
 * this file only reads the form and projects the view into the page. */

import { PricingClient } from "./api.js";
import { renderEpChart, renderMetricsTable } from "./chart.js";
import { Workbench, type WorkbenchView } from "./state.js";
import type { PricingRequest, SessionSpec, SessionSummary } from "./types.js";
import {
  validateReturnPeriods,
  validateSelection,
  validateTerms,
  type TermsForm,
} from "./validation.js";

const DEMO_SPEC: SessionSpec = {
  seed: 42,
  catalog_size: 10_000,
  trial_count: 20_000,
  events_per_trial_range: [5, 15],
  elt_count: 4,
  elt_size_range: [200, 800],
  loss_scale: 1000,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

// The service location is configurable via ?service=http://host:port;
// by default the page talks to the origin that served it.
const serviceParam = new URLSearchParams(window.location.search).get("service");
const client = new PricingClient(serviceParam ?? "");

const termsInputs = {
  occ_retention: el<HTMLInputElement>("occ-retention"),
  occ_limit: el<HTMLInputElement>("occ-limit"),
  occ_unlimited: el<HTMLInputElement>("occ-unlimited"),
  agg_retention: el<HTMLInputElement>("agg-retention"),
  agg_limit: el<HTMLInputElement>("agg-limit"),
  agg_unlimited: el<HTMLInputElement>("agg-unlimited"),
};
const rpInput = el<HTMLInputElement>("return-periods");
const eltBox = el<HTMLDivElement>("elt-boxes");
const submitBtn = el<HTMLButtonElement>("submit");
const banner = el<HTMLDivElement>("banner");
const statusLine = el<HTMLSpanElement>("status-line");
const sessionInfo = el<HTMLDivElement>("session-info");
const metricsMount = el<HTMLDivElement>("metrics");
const chartMount = el<HTMLDivElement>("chart");
const responseInfo = el<HTMLDivElement>("response-info");

function readForm(): TermsForm {
  return {
    occ_retention: termsInputs.occ_retention.value,
    occ_limit: termsInputs.occ_limit.value,
    occ_unlimited: termsInputs.occ_unlimited.checked,
    agg_retention: termsInputs.agg_retention.value,
    agg_limit: termsInputs.agg_limit.value,
    agg_unlimited: termsInputs.agg_unlimited.checked,
  };
}

function selectedElts(): number[] {
  return Array.from(eltBox.querySelectorAll<HTMLInputElement>("input:checked")).map((box) =>
    Number(box.value),
  );
}

function setFieldError(field: string, message: string | null): void {
  const span = document.getElementById(`err-${field}`);
  if (span !== null) {
    span.textContent = message ?? "";
  }
}

/** Validates the whole form, paints inline errors, and returns the request
 * or null. Submit stays disabled while this returns null. */
function buildRequest(): PricingRequest | null {
  const session = workbench.view.session;
  if (session === null) {
    return null;
  }
  const terms = validateTerms(readForm());
  for (const field of ["occ_retention", "occ_limit", "agg_retention", "agg_limit"] as const) {
    setFieldError(field, terms.ok ? null : (terms.errors[field] ?? null));
  }
  const periods = validateReturnPeriods(rpInput.value, session.trial_count);
  setFieldError("return_periods", periods.ok ? null : periods.error);
  const selection = validateSelection(selectedElts(), session.elt_count);
  setFieldError("elt_selection", selection.ok ? null : selection.error);

  if (!terms.ok || !periods.ok || !selection.ok) {
    submitBtn.disabled = true;
    return null;
  }
  submitBtn.disabled = false;
  return {
    terms: terms.terms,
    elt_selection: selection.elt_selection,
    return_periods: periods.return_periods,
  };
}

function render(view: WorkbenchView): void {
  banner.hidden = view.banner === null;
  banner.textContent = view.banner ?? "";
  statusLine.textContent = view.inFlight ? "pricing…" : "";

  if (view.session === null) {
    sessionInfo.textContent = "no session";
  } else {
    const s = view.session;
    sessionInfo.textContent =
      `session ${s.session_id} · ${s.trial_count.toLocaleString("en-US")} trials · ` +
      `catalog ${s.catalog_size.toLocaleString("en-US")} · ${s.elt_count} ELTs · ` +
      `tables ${(s.table_bytes / 1e6).toFixed(1)} MB`;
  }

  if (view.latest === null) {
    metricsMount.innerHTML = '<div class="placeholder">no metrics yet</div>';
    chartMount.innerHTML = '<div class="placeholder">no exceedance curve to plot</div>';
    responseInfo.textContent = "";
  } else {
    metricsMount.innerHTML = renderMetricsTable(view.latest.metrics);
    chartMount.innerHTML = renderEpChart(view.latest.ep_curve);
    responseInfo.textContent =
      `trial mean ${view.latest.trial_mean.toFixed(2)} · ` +
      `trial max ${view.latest.trial_max.toFixed(2)} · ` +
      `${view.latest.lookups.toLocaleString("en-US")} lookups in ` +
      `${(view.latest.engine_seconds * 1000).toFixed(1)} ms`;
  }
}

const workbench = new Workbench(client, render);

function buildEltBoxes(session: SessionSummary): void {
  eltBox.innerHTML = "";
  for (const elt of session.elts) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.value = String(elt.index);
    box.checked = true;
    box.addEventListener("change", onEdit);
    label.append(box, ` elt ${elt.index} (${elt.record_count} events)`);
    eltBox.append(label);
  }
}

function onEdit(): void {
  if (buildRequest() !== null) {
    workbench.scheduleSubmit(buildRequest);
  }
}

function syncUnlimited(): void {
  termsInputs.occ_limit.disabled = termsInputs.occ_unlimited.checked;
  termsInputs.agg_limit.disabled = termsInputs.agg_unlimited.checked;
}

for (const input of [
  termsInputs.occ_retention,
  termsInputs.occ_limit,
  termsInputs.agg_retention,
  termsInputs.agg_limit,
  rpInput,
]) {
  input.addEventListener("input", onEdit);
}
for (const toggle of [termsInputs.occ_unlimited, termsInputs.agg_unlimited]) {
  toggle.addEventListener("change", () => {
    syncUnlimited();
    onEdit();
  });
}
submitBtn.addEventListener("click", () => {
  void workbench.submitNow(buildRequest);
});

async function start(): Promise<void> {
  let session: SessionSummary;
  try {
    const listing = await client.listSessions();
    const existing = listing.sessions[listing.sessions.length - 1];
    session = existing ?? (await client.createSession(DEMO_SPEC));
  } catch (err) {
    banner.hidden = false;
    banner.textContent = `service unavailable: ${err instanceof Error ? err.message : String(err)}`;
    return;
  }
  buildEltBoxes(session);
  workbench.setSession(session);
  syncUnlimited();
  void workbench.submitNow(buildRequest);
}

void start();
