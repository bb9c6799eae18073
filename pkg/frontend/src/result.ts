import { boxPlotSvg, histogramSvg } from "./charts.js";
import { escapeHtml, metric } from "./format.js";
import type { AuditPayload, CategoryPayload, PlotsPayload } from "./types.js";

const SIGNIFICANCE_ALPHA = 0.05;

export function renderNotFound(modelId: string): string {
  return `<div class="card placeholder" data-testid="not-found">no audit found for ${escapeHtml(modelId)}</div>`;
}

function summaryCard(audit: AuditPayload): string {
  const faas =
    audit.faas === null
      ? `<span class="sentinel">${escapeHtml(audit.faas_sentinel ?? "undefined")}</span>`
      : escapeHtml(metric(audit.faas));
  return `
  <div class="card summary" data-testid="summary">
    <h2>${escapeHtml(audit.model_id)}</h2>
    <dl>
      <dt>FAAS</dt><dd data-field="faas">${faas}</dd>
      <dt>WER</dt><dd data-field="wer">${escapeHtml(metric(audit.wer))}</dd>
      <dt>overall score</dt><dd data-field="overall_score">${escapeHtml(metric(audit.overall_score))}</dd>
      <dt>tier</dt><dd data-field="tier"><span class="tier">${escapeHtml(audit.tier)}</span></dd>
      <dt>coverage</dt><dd data-field="coverage">${escapeHtml(metric(audit.coverage))}</dd>
      <dt>audited</dt><dd data-field="created_at">${escapeHtml(audit.created_at)}</dd>
    </dl>
  </div>`;
}

function categoryCard(category: CategoryPayload): string {
  const significant = category.lrt.p_value < SIGNIFICANCE_ALPHA;
  const badge = significant
    ? `<span class="badge significant" data-testid="significance-badge" title="likelihood-ratio test p &lt; 0.05">significant disparity</span>`
    : "";
  const groups = Object.entries(category.groups)
    .map(
      ([level, row]) => `
      <tr>
        <td>${escapeHtml(level)}${level === category.reference_level ? " <span class=\"ref\">(ref)</span>" : ""}</td>
        <td class="num">${escapeHtml(metric(row.predicted_wer))}</td>
        <td class="num">${escapeHtml(metric(row.raw_score))}</td>
        <td class="num">${escapeHtml(metric(row.proportion))}</td>
      </tr>`,
    )
    .join("");
  return `
  <div class="card category" data-attribute="${escapeHtml(category.attribute)}">
    <h3>${escapeHtml(category.attribute)} ${badge}</h3>
    <dl class="inline">
      <dt>category score</dt><dd data-field="category_score">${escapeHtml(metric(category.category_score))}</dd>
      <dt>adjusted</dt><dd data-field="adjusted_score">${escapeHtml(metric(category.adjusted_score))}</dd>
      <dt>p-value</dt><dd data-field="p_value">${escapeHtml(metric(category.lrt.p_value))}</dd>
      <dt>tier</dt><dd><span class="tier">${escapeHtml(category.tier)}</span></dd>
    </dl>
    <table class="groups">
      <thead><tr><th>group</th><th>predicted WER</th><th>raw score</th><th>share</th></tr></thead>
      <tbody>${groups}</tbody>
    </table>
  </div>`;
}

function chartsSection(plots: PlotsPayload): string {
  const attributes = Object.entries(plots.attributes)
    .map(([attribute, data]) => {
      const rows = Object.entries(data.levels).map(([label, level]) => ({
        label,
        box: level.box,
        count: level.count,
      }));
      return `
      <div class="card charts" data-attribute="${escapeHtml(attribute)}">
        <h3>per-utterance WER by ${escapeHtml(attribute)}</h3>
        ${boxPlotSvg(rows)}
      </div>`;
    })
    .join("");
  return `
  <div class="card charts" data-testid="overall-histogram">
    <h3>per-utterance WER distribution</h3>
    ${histogramSvg(plots.histogram)}
  </div>
  ${attributes}`;
}

export function renderResult(
  audit: AuditPayload,
  plots: PlotsPayload | "no-detail" | "missing",
): string {
  const categories = audit.categories.map(categoryCard).join("");
  let charts: string;
  if (plots === "no-detail") {
    charts = `<div class="card placeholder" data-testid="charts-unavailable">charts unavailable: this audit was stored without per-utterance detail</div>`;
  } else if (plots === "missing") {
    charts = "";
  } else {
    charts = chartsSection(plots);
  }
  return `${summaryCard(audit)}<div class="categories">${categories}</div>${charts}`;
}
