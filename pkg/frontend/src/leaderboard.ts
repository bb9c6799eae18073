import type { LeaderboardResponse } from "./api.js";
import { escapeHtml, metric } from "./format.js";
import type { LeaderboardEntry, LeaderboardViewModel, SortColumn, SortState } from "./types.js";

export function emptyViewModel(): LeaderboardViewModel {
  return { rows: [], etag: null, sort: null, refreshedAt: "" };
}

/** Fold a leaderboard response into the view model; a 304 keeps it identical. */
export function applyResponse(
  vm: LeaderboardViewModel,
  response: LeaderboardResponse,
  now: string,
): LeaderboardViewModel {
  if (response.notModified) {
    return vm;
  }
  return { rows: response.rows, etag: response.etag, sort: vm.sort, refreshedAt: now };
}

export function toggleSort(vm: LeaderboardViewModel, column: SortColumn): LeaderboardViewModel {
  const descending = vm.sort?.column === column ? !vm.sort.descending : true;
  return { ...vm, sort: { column, descending } };
}

/** API order (FAAS descending) unless the user picked a sort column. */
export function orderedRows(vm: LeaderboardViewModel): LeaderboardEntry[] {
  if (!vm.sort) {
    return vm.rows;
  }
  const { column, descending } = vm.sort;
  const rows = [...vm.rows];
  rows.sort((a, b) => {
    const left = a[column];
    const right = b[column];
    let cmp: number;
    if (typeof left === "string" || typeof right === "string") {
      cmp = String(left).localeCompare(String(right));
    } else {
      // null FAAS (sentinel audits) sorts after any numeric value
      const l = left ?? Number.NEGATIVE_INFINITY;
      const r = right ?? Number.NEGATIVE_INFINITY;
      cmp = l < r ? -1 : l > r ? 1 : 0;
    }
    return descending ? -cmp : cmp;
  });
  return rows;
}

const COLUMNS: Array<{ key: SortColumn; label: string }> = [
  { key: "model_id", label: "model" },
  { key: "faas", label: "FAAS" },
  { key: "wer", label: "WER" },
  { key: "overall_score", label: "overall score" },
  { key: "tier", label: "tier" },
];

function faasCell(entry: LeaderboardEntry): string {
  if (entry.faas === null) {
    return `<span class="sentinel" title="${escapeHtml(entry.faas_sentinel ?? "")}">${
      entry.faas_sentinel === "perfect_accuracy" ? "perfect accuracy" : "—"
    }</span>`;
  }
  return escapeHtml(metric(entry.faas));
}

function sortIndicator(sort: SortState | null, column: SortColumn): string {
  if (!sort || sort.column !== column) {
    return "";
  }
  return sort.descending ? " ▾" : " ▴";
}

export function renderLeaderboard(vm: LeaderboardViewModel, offline = false): string {
  const banner = offline
    ? `<div class="banner offline" data-testid="offline-banner">service unreachable — showing cached rows</div>`
    : "";
  if (vm.rows.length === 0) {
    return `${banner}<div class="placeholder" data-testid="empty-leaderboard">no models yet — submit transcripts to start the leaderboard</div>`;
  }
  const header = COLUMNS.map(
    (c) =>
      `<th data-sort="${c.key}" class="sortable">${escapeHtml(c.label)}${sortIndicator(vm.sort, c.key)}</th>`,
  ).join("");
  const body = orderedRows(vm)
    .map(
      (entry, i) => `
    <tr data-model-id="${escapeHtml(entry.model_id)}" class="lb-row">
      <td class="rank">${i + 1}</td>
      <td class="model">${escapeHtml(entry.model_id)}</td>
      <td class="num">${faasCell(entry)}</td>
      <td class="num">${escapeHtml(metric(entry.wer))}</td>
      <td class="num">${escapeHtml(metric(entry.overall_score))}</td>
      <td><span class="tier">${escapeHtml(entry.tier)}</span></td>
    </tr>`,
    )
    .join("");
  return `
  ${banner}
  <table class="leaderboard" data-testid="leaderboard">
    <thead><tr><th>#</th>${header}</tr></thead>
    <tbody>${body}</tbody>
  </table>
  <div class="refreshed">refreshed ${escapeHtml(vm.refreshedAt)}</div>`;
}
