import { escapeHtml, metric } from "./format.js";
import type { BoxPayload, HistogramPayload } from "./types.js";

// SVG layout constants. Pixel positions are presentation-layer scaling; every
// number *rendered as text* comes verbatim from the API payload.
const BOX_WIDTH = 560;
const ROW_HEIGHT = 44;
const LABEL_WIDTH = 130;
const HIST_WIDTH = 560;
const HIST_HEIGHT = 120;

function scale(value: number, lo: number, hi: number, pixels: number): number {
  if (hi <= lo) {
    return 0;
  }
  return ((value - lo) / (hi - lo)) * pixels;
}

export function boxPlotSvg(rows: Array<{ label: string; box: BoxPayload; count: number }>): string {
  if (rows.length === 0) {
    return "";
  }
  const lo = Math.min(...rows.map((r) => r.box.min));
  const hi = Math.max(...rows.map((r) => r.box.max));
  const plotWidth = BOX_WIDTH - LABEL_WIDTH - 20;
  const height = rows.length * ROW_HEIGHT + 10;

  const parts = rows.map((row, i) => {
    const y = i * ROW_HEIGHT + ROW_HEIGHT / 2;
    const x = (v: number) => LABEL_WIDTH + scale(v, lo, hi, plotWidth);
    const b = row.box;
    const title =
      `${row.label}: min ${metric(b.min)}, Q1 ${metric(b.q1)}, median ${metric(b.median)}, ` +
      `Q3 ${metric(b.q3)}, max ${metric(b.max)} (n=${metric(row.count)})`;
    return `
    <g class="box-row" data-level="${escapeHtml(row.label)}">
      <title>${escapeHtml(title)}</title>
      <text x="0" y="${y + 4}" class="level-label">${escapeHtml(row.label)}</text>
      <line x1="${x(b.min)}" y1="${y}" x2="${x(b.q1)}" y2="${y}" class="whisker" />
      <line x1="${x(b.q3)}" y1="${y}" x2="${x(b.max)}" y2="${y}" class="whisker" />
      <line x1="${x(b.min)}" y1="${y - 7}" x2="${x(b.min)}" y2="${y + 7}" class="cap" />
      <line x1="${x(b.max)}" y1="${y - 7}" x2="${x(b.max)}" y2="${y + 7}" class="cap" />
      <rect x="${x(b.q1)}" y="${y - 11}" width="${Math.max(1, x(b.q3) - x(b.q1))}" height="22" class="iqr" />
      <line x1="${x(b.median)}" y1="${y - 11}" x2="${x(b.median)}" y2="${y + 11}" class="median" />
    </g>`;
  });

  // Axis endpoints show the pooled min/max verbatim.
  const axis = `
    <text x="${LABEL_WIDTH}" y="${height - 2}" class="axis">${escapeHtml(metric(lo))}</text>
    <text x="${BOX_WIDTH - 20}" y="${height - 2}" class="axis" text-anchor="end">${escapeHtml(metric(hi))}</text>`;

  return `<svg class="boxplot" viewBox="0 0 ${BOX_WIDTH} ${height + 14}" role="img">${parts.join("")}${axis}</svg>`;
}

export function histogramSvg(hist: HistogramPayload): string {
  const bars = [...hist.counts.map((count) => ({ count, overflow: false }))];
  bars.push({ count: hist.overflow, overflow: true });
  const maxCount = Math.max(1, ...bars.map((b) => b.count));
  const barWidth = HIST_WIDTH / bars.length;
  const overflowLabel = `≥${hist.range[1].toFixed(1)}`; // axis label, not a metric

  const rects = bars
    .map((bar, i) => {
      const h = scale(bar.count, 0, maxCount, HIST_HEIGHT - 16);
      const x = i * barWidth;
      const klass = bar.overflow ? "bar overflow" : "bar";
      const title = bar.overflow
        ? `${overflowLabel}: ${metric(bar.count)}`
        : `bin ${i}: ${metric(bar.count)}`;
      return `
    <rect x="${x + 1}" y="${HIST_HEIGHT - 16 - h}" width="${Math.max(1, barWidth - 2)}" height="${h}" class="${klass}">
      <title>${escapeHtml(title)}</title>
    </rect>`;
    })
    .join("");

  const axis = `
    <text x="0" y="${HIST_HEIGHT - 2}" class="axis">${escapeHtml(metric(hist.range[0]))}</text>
    <text x="${HIST_WIDTH - barWidth / 2}" y="${HIST_HEIGHT - 2}" class="axis overflow-label" text-anchor="end">${escapeHtml(overflowLabel)}</text>`;

  return `<svg class="histogram" viewBox="0 0 ${HIST_WIDTH} ${HIST_HEIGHT}" role="img">${rects}${axis}</svg>`;
}
