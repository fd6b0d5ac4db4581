import { describe, expect, it } from "vitest";

import { renderEpChart, renderMetricsTable } from "../src/chart.js";
import type { EpPoint, MetricRow } from "../src/types.js";

const CURVE: EpPoint[] = [
  { loss: 500, exceedance_probability: 0.5 },
  { loss: 900, exceedance_probability: 0.1 },
  { loss: 990, exceedance_probability: 0.01 },
];

describe("renderEpChart", () => {
  it("renders a polyline and one marker per point", () => {
    const svg = renderEpChart(CURVE);
    expect(svg).toContain("<svg");
    expect((svg.match(/<polyline/g) ?? []).length).toBe(1);
    expect((svg.match(/<circle/g) ?? []).length).toBe(CURVE.length);
  });

  it("labels the log-probability axis with decades", () => {
    const svg = renderEpChart(CURVE);
    expect(svg).toContain(">0.1<");
    expect(svg).toContain(">0.01<");
    expect(svg).toContain("exceedance probability");
  });

  it("larger losses sit lower on the probability axis", () => {
    const svg = renderEpChart(CURVE);
    const ys = [...svg.matchAll(/<circle[^>]*cy="([0-9.]+)"/g)].map((m) => Number(m[1]));
    expect(ys).toHaveLength(3);
    // markers are emitted in loss order; smaller probability plots lower
    expect(ys[0]!).toBeLessThan(ys[1]!);
    expect(ys[1]!).toBeLessThan(ys[2]!);
  });

  it("a single point renders one marker and no line", () => {
    const svg = renderEpChart([{ loss: 1200, exceedance_probability: 0.04 }]);
    expect((svg.match(/<circle/g) ?? []).length).toBe(1);
    expect(svg).not.toContain("<polyline");
  });

  it("an empty curve renders the placeholder", () => {
    const html = renderEpChart([]);
    expect(html).not.toContain("<svg");
    expect(html).toContain("placeholder");
  });

  it("all-zero losses still render without NaN coordinates", () => {
    const svg = renderEpChart([
      { loss: 0, exceedance_probability: 0.1 },
      { loss: 0, exceedance_probability: 0.1 },
    ]);
    expect(svg).toContain("<svg");
    expect(svg).not.toContain("NaN");
  });
});

describe("renderMetricsTable", () => {
  const METRICS: MetricRow[] = [
    { return_period: 10, pml: 7568.25, tvar: 11243.31 },
    { return_period: 100, pml: 16903.03, tvar: 16980.96 },
  ];

  it("lists pml and tvar per return period in request order", () => {
    const html = renderMetricsTable(METRICS);
    const cells = [...html.matchAll(/<td[^>]*>([^<]*)<\/td>/g)].map((m) => m[1]);
    expect(cells).toEqual(["10", "7,568.25", "11,243.31", "100", "16,903.03", "16,980.96"]);
  });

  it("tvar cell is at least the pml cell in every row", () => {
    const html = renderMetricsTable(METRICS);
    for (const row of html.matchAll(/<tr><td>[^<]*<\/td><td[^>]*>([^<]*)<\/td><td[^>]*>([^<]*)<\/td><\/tr>/g)) {
      const pml = Number(row[1]!.replace(/,/g, ""));
      const tvar = Number(row[2]!.replace(/,/g, ""));
      expect(tvar).toBeGreaterThanOrEqual(pml);
    }
  });

  it("empty metrics render the placeholder", () => {
    expect(renderMetricsTable([])).toContain("placeholder");
  });
});
