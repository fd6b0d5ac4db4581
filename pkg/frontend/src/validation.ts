/** Client-side form validation. Fields must be non-negative finite numbers
 * before anything is sent; an unlimited toggle replaces its limit field with
 * the null sentinel the service documents. */

import type { LayerTermsWire } from "./types.js";

export interface TermsForm {
  occ_retention: string;
  occ_limit: string;
  occ_unlimited: boolean;
  agg_retention: string;
  agg_limit: string;
  agg_unlimited: boolean;
}

export type TermsField = "occ_retention" | "occ_limit" | "agg_retention" | "agg_limit";

export type TermsResult =
  | { ok: true; terms: LayerTermsWire }
  | { ok: false; errors: Partial<Record<TermsField, string>> };

function parseAmount(raw: string): number | string {
  const text = raw.trim();
  if (text === "") {
    return "required";
  }
  const value = Number(text);
  if (!Number.isFinite(value)) {
    return "must be a number";
  }
  if (value < 0) {
    return "must be non-negative";
  }
  return value;
}

export function validateTerms(form: TermsForm): TermsResult {
  const errors: Partial<Record<TermsField, string>> = {};
  const parsed: Partial<Record<TermsField, number>> = {};

  const fields: [TermsField, string, boolean][] = [
    ["occ_retention", form.occ_retention, false],
    ["occ_limit", form.occ_limit, form.occ_unlimited],
    ["agg_retention", form.agg_retention, false],
    ["agg_limit", form.agg_limit, form.agg_unlimited],
  ];
  for (const [field, raw, unlimited] of fields) {
    if (unlimited) {
      continue;
    }
    const result = parseAmount(raw);
    if (typeof result === "string") {
      errors[field] = result;
    } else {
      parsed[field] = result;
    }
  }
  if (Object.keys(errors).length > 0) {
    return { ok: false, errors };
  }
  return {
    ok: true,
    terms: {
      occ_retention: parsed.occ_retention as number,
      occ_limit: form.occ_unlimited ? null : (parsed.occ_limit as number),
      agg_retention: parsed.agg_retention as number,
      agg_limit: form.agg_unlimited ? null : (parsed.agg_limit as number),
    },
  };
}

export type ReturnPeriodsResult =
  | { ok: true; return_periods: number[] }
  | { ok: false; error: string };

/** Comma or whitespace separated list; each period must lie in (1, trials]. */
export function validateReturnPeriods(raw: string, trialCount: number): ReturnPeriodsResult {
  const parts = raw.split(/[\s,]+/).filter((p) => p.length > 0);
  if (parts.length === 0) {
    return { ok: false, error: "at least one return period" };
  }
  const periods: number[] = [];
  for (const part of parts) {
    const value = Number(part);
    if (!Number.isFinite(value)) {
      return { ok: false, error: `"${part}" is not a number` };
    }
    if (value <= 1 || value > trialCount) {
      return { ok: false, error: `${part} outside (1, ${trialCount}]` };
    }
    periods.push(value);
  }
  return { ok: true, return_periods: periods };
}

export type SelectionResult =
  | { ok: true; elt_selection: number[] }
  | { ok: false; error: string };

export function validateSelection(selected: number[], eltCount: number): SelectionResult {
  if (selected.length === 0) {
    return { ok: false, error: "select at least one ELT" };
  }
  for (const index of selected) {
    if (!Number.isInteger(index) || index < 0 || index >= eltCount) {
      return { ok: false, error: `ELT index ${index} out of range` };
    }
  }
  return { ok: true, elt_selection: [...selected].sort((a, b) => a - b) };
}
