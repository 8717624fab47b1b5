/** String-building helpers shared by the review and dashboard views. */

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

export function pct(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

export function fixed(value: number, places = 2): string {
  return value.toFixed(places);
}
