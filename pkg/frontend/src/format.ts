// Verbatim display: metric numbers pass through String() untouched so every
// rendered value is byte-traceable to the API payload that carried it.

export function metric(value: number | string | null): string {
  if (value === null) {
    return "—";
  }
  return String(value);
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}
