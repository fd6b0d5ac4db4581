/** EP chart and metrics table renderers. Pure functions from response data to
 * markup; only service-provided numbers appear, formatted but never
 * recomputed. */

import type { EpPoint, MetricRow } from "./types.js";

const WIDTH = 580;
const HEIGHT = 320;
const MARGIN = { top: 16, right: 24, bottom: 46, left: 72 };

function fmtLoss(value: number): string {
  const abs = Math.abs(value);
  if (abs >= 1e9) return `${(value / 1e9).toFixed(2)}B`;
  if (abs >= 1e6) return `${(value / 1e6).toFixed(2)}M`;
  if (abs >= 1e4) return `${(value / 1e3).toFixed(1)}k`;
  return value.toFixed(abs >= 100 || Number.isInteger(value) ? 0 : 2);
}

function fmtProb(value: number): string {
  if (value >= 0.01) return value.toFixed(value >= 0.1 ? 1 : 2);
  return value.toExponential(0);
}

function fmtFull(value: number): string {
  return value.toLocaleString("en-US", { maximumFractionDigits: 2 });
}

/** Loss on a linear x axis against exceedance probability on a log y axis.
 * Empty input renders a placeholder, a single point renders one marker. */
export function renderEpChart(points: EpPoint[]): string {
  if (points.length === 0) {
    return '<div class="placeholder">no exceedance curve to plot</div>';
  }
  const sorted = [...points].sort((a, b) => a.loss - b.loss);

  let xMin = sorted[0]!.loss;
  let xMax = sorted[sorted.length - 1]!.loss;
  if (xMax === xMin) {
    const pad = xMax === 0 ? 1 : Math.abs(xMax) * 0.1;
    xMin -= pad;
    xMax += pad;
  }
  const logs = sorted.map((p) => Math.log10(p.exceedance_probability));
  let yMin = Math.min(...logs);
  let yMax = Math.max(...logs);
  if (yMax === yMin) {
    yMin -= 1;
    yMax += 1;
  }

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (loss: number) => MARGIN.left + ((loss - xMin) / (xMax - xMin)) * plotW;
  const sy = (logP: number) => MARGIN.top + ((yMax - logP) / (yMax - yMin)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="exceedance probability curve">`,
  );

  // decade grid lines on the log axis, endpoints as a fallback for narrow ranges
  const decades: number[] = [];
  for (let d = Math.ceil(yMin); d <= Math.floor(yMax); d++) {
    decades.push(d);
  }
  const yTicks = decades.length > 0 ? decades : [yMin, yMax];
  for (const logP of yTicks) {
    const y = sy(logP);
    parts.push(
      `<line class="grid" x1="${MARGIN.left}" y1="${y.toFixed(1)}" x2="${WIDTH - MARGIN.right}" y2="${y.toFixed(1)}"/>`,
      `<text class="tick" x="${MARGIN.left - 8}" y="${(y + 4).toFixed(1)}" text-anchor="end">${fmtProb(10 ** logP)}</text>`,
    );
  }
  const xTickCount = 4;
  for (let i = 0; i <= xTickCount; i++) {
    const loss = xMin + ((xMax - xMin) * i) / xTickCount;
    const x = sx(loss);
    parts.push(
      `<line class="grid" x1="${x.toFixed(1)}" y1="${MARGIN.top}" x2="${x.toFixed(1)}" y2="${HEIGHT - MARGIN.bottom}"/>`,
      `<text class="tick" x="${x.toFixed(1)}" y="${HEIGHT - MARGIN.bottom + 18}" text-anchor="middle">${fmtLoss(loss)}</text>`,
    );
  }
  parts.push(
    `<text class="axis" x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 6}" text-anchor="middle">loss</text>`,
    `<text class="axis" x="14" y="${MARGIN.top + plotH / 2}" text-anchor="middle" transform="rotate(-90 14 ${MARGIN.top + plotH / 2})">exceedance probability</text>`,
  );

  const coords = sorted.map((p) => ({
    x: sx(p.loss),
    y: sy(Math.log10(p.exceedance_probability)),
    p,
  }));
  if (coords.length > 1) {
    const path = coords.map((c) => `${c.x.toFixed(1)},${c.y.toFixed(1)}`).join(" ");
    parts.push(`<polyline class="curve" points="${path}"/>`);
  }
  for (const c of coords) {
    parts.push(
      `<circle class="marker" cx="${c.x.toFixed(1)}" cy="${c.y.toFixed(1)}" r="3.5">` +
        `<title>loss ${fmtFull(c.p.loss)}, probability ${c.p.exceedance_probability}</title></circle>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

/** Tabular fallback: PML and TVAR per return period, straight off the wire. */
export function renderMetricsTable(metrics: MetricRow[]): string {
  if (metrics.length === 0) {
    return '<div class="placeholder">no metrics yet</div>';
  }
  const rows = metrics
    .map(
      (m) =>
        `<tr><td>${fmtFull(m.return_period)}</td>` +
        `<td class="num">${fmtFull(m.pml)}</td>` +
        `<td class="num">${fmtFull(m.tvar)}</td></tr>`,
    )
    .join("");
  return (
    "<table><thead><tr><th>return period</th><th>PML</th><th>TVAR</th></tr></thead>" +
    `<tbody>${rows}</tbody></table>`
  );
}
