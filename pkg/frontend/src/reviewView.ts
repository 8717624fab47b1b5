/** Markup for each review-session state. */

import type { ReviewState } from './review.js';
import type { Polarity } from './types.js';
import { escapeHtml, pct } from './render.js';

const KEY_OF: Record<Polarity, string> = {
  positive: '1',
  neutral: '2',
  negative: '3',
};

export function reviewHtml(state: ReviewState, exportUrl: string): string {
  switch (state.kind) {
    case 'loading':
      return `<p class="loading">loading queue…</p>`;
    case 'blocked':
      return [
        `<div class="banner error">`,
        `<p>${escapeHtml(state.message)}</p>`,
        `<button type="button" data-action="retry">retry</button>`,
        `</div>`,
      ].join('');
    case 'done':
      return [
        `<div class="done">`,
        `<h2>all reviewed</h2>`,
        `<p>${state.reviewed} of ${state.total} comments labeled this session.</p>`,
        `<p><a href="${escapeHtml(exportUrl)}">download labels CSV</a></p>`,
        `</div>`,
      ].join('');
    case 'reviewing': {
      const { item } = state;
      const notice = state.notice
        ? `<p class="notice">${escapeHtml(state.notice)}</p>`
        : '';
      const buttons = (Object.keys(KEY_OF) as Polarity[])
        .map(
          (p) =>
            `<button type="button" data-action="label" data-polarity="${p}" ${state.posting ? 'disabled' : ''}>` +
            `<kbd>${KEY_OF[p]}</kbd> ${p}</button>`,
        )
        .join('');
      return [
        `<div class="review-card" data-comment-id="${escapeHtml(item.comment_id)}">`,
        notice,
        `<p class="progress">comment ${state.position} of ${state.total} · ${state.reviewed} reviewed</p>`,
        `<blockquote class="comment-text">${escapeHtml(item.text)}</blockquote>`,
        `<p class="model-view">model says <strong>${item.predicted_polarity}</strong> ` +
          `at ${pct(item.confidence)} confidence · topic ${item.topic_id}</p>`,
        `<div class="label-buttons">${buttons}</div>`,
        `</div>`,
      ].join('');
    }
  }
}
