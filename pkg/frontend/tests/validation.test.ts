import { describe, expect, it } from "vitest";

import {
  validateReturnPeriods,
  validateSelection,
  validateTerms,
  type TermsForm,
} from "../src/validation.js";

function form(overrides: Partial<TermsForm> = {}): TermsForm {
  return {
    occ_retention: "100",
    occ_limit: "5000",
    occ_unlimited: false,
    agg_retention: "0",
    agg_limit: "20000",
    agg_unlimited: false,
    ...overrides,
  };
}

describe("validateTerms", () => {
  it("accepts a fully numeric form", () => {
    const result = validateTerms(form());
    expect(result).toEqual({
      ok: true,
      terms: { occ_retention: 100, occ_limit: 5000, agg_retention: 0, agg_limit: 20000 },
    });
  });

  it("flags a negative retention and names the field", () => {
    const result = validateTerms(form({ occ_retention: "-5" }));
    expect(result.ok).toBe(false);
    if (!result.ok) {
      expect(result.errors.occ_retention).toMatch(/non-negative/);
      expect(result.errors.agg_retention).toBeUndefined();
    }
  });

  it("flags non-numeric and empty fields", () => {
    const result = validateTerms(form({ agg_limit: "plenty", agg_retention: " " }));
    expect(result.ok).toBe(false);
    if (!result.ok) {
      expect(result.errors.agg_limit).toMatch(/number/);
      expect(result.errors.agg_retention).toMatch(/required/);
    }
  });

  it("maps the unlimited toggle to the null sentinel and ignores the field text", () => {
    const result = validateTerms(form({ occ_limit: "garbage", occ_unlimited: true }));
    expect(result).toEqual({
      ok: true,
      terms: { occ_retention: 100, occ_limit: null, agg_retention: 0, agg_limit: 20000 },
    });
  });

  it("both limits unlimited sends null twice", () => {
    const result = validateTerms(form({ occ_unlimited: true, agg_unlimited: true }));
    expect(result.ok).toBe(true);
    if (result.ok) {
      expect(result.terms.occ_limit).toBeNull();
      expect(result.terms.agg_limit).toBeNull();
    }
  });

  it("zero is a valid amount everywhere", () => {
    const result = validateTerms(
      form({ occ_retention: "0", occ_limit: "0", agg_retention: "0", agg_limit: "0" }),
    );
    expect(result.ok).toBe(true);
    if (result.ok) {
      expect(result.terms.agg_limit).toBe(0);
    }
  });

  it("rejects infinite text input", () => {
    const result = validateTerms(form({ occ_limit: "Infinity" }));
    expect(result.ok).toBe(false);
  });
});

describe("validateReturnPeriods", () => {
  it("parses comma and space separated values", () => {
    expect(validateReturnPeriods("10, 50 250", 1000)).toEqual({
      ok: true,
      return_periods: [10, 50, 250],
    });
  });

  it("rejects empty input", () => {
    const result = validateReturnPeriods("  ", 1000);
    expect(result.ok).toBe(false);
  });

  it("rejects periods outside (1, trials]", () => {
    expect(validateReturnPeriods("1", 1000).ok).toBe(false);
    expect(validateReturnPeriods("1001", 1000).ok).toBe(false);
    expect(validateReturnPeriods("1000", 1000).ok).toBe(true);
  });

  it("rejects non-numeric entries with the offending token", () => {
    const result = validateReturnPeriods("10, ten", 1000);
    expect(result.ok).toBe(false);
    if (!result.ok) {
      expect(result.error).toContain("ten");
    }
  });
});

describe("validateSelection", () => {
  it("sorts and accepts in-range indices", () => {
    expect(validateSelection([2, 0], 3)).toEqual({ ok: true, elt_selection: [0, 2] });
  });

  it("rejects empty and out-of-range selections", () => {
    expect(validateSelection([], 3).ok).toBe(false);
    expect(validateSelection([3], 3).ok).toBe(false);
    expect(validateSelection([-1], 3).ok).toBe(false);
  });
});
