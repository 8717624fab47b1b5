/**
 * Dashboard renderers: pure functions from the stats report to markup.
 *
 * Quartile boxes are drawn from the server's numbers as-is; the client
 * only maps values to pixels, it never recomputes statistics.
 */

import { ApiError } from './api.js';
import type { CurvePoint, GroupRow, StatsReport, TopicInfo } from './types.js';
import { escapeHtml, fixed, pct } from './render.js';

const CURVE_WIDTH = 460;
const CURVE_HEIGHT = 220;
const MARGIN = 32;

function xScale(threshold: number): number {
  return MARGIN + threshold * (CURVE_WIDTH - 2 * MARGIN);
}

function yScale(fraction: number): number {
  return CURVE_HEIGHT - MARGIN - fraction * (CURVE_HEIGHT - 2 * MARGIN);
}

/** Coverage (and correctness) against the confidence threshold. */
export function coverageCurveSvg(points: CurvePoint[]): string {
  const coverage = points
    .map((p) => `${fixed(xScale(p.threshold), 1)},${fixed(yScale(p.coverage), 1)}`)
    .join(' ');
  const correctness = points
    .map((p) => `${fixed(xScale(p.threshold), 1)},${fixed(yScale(p.correctness), 1)}`)
    .join(' ');
  return [
    `<svg class="curve" viewBox="0 0 ${CURVE_WIDTH} ${CURVE_HEIGHT}" role="img" aria-label="coverage and correctness by threshold">`,
    `<line x1="${MARGIN}" y1="${CURVE_HEIGHT - MARGIN}" x2="${CURVE_WIDTH - MARGIN}" y2="${CURVE_HEIGHT - MARGIN}" class="axis"/>`,
    `<line x1="${MARGIN}" y1="${MARGIN}" x2="${MARGIN}" y2="${CURVE_HEIGHT - MARGIN}" class="axis"/>`,
    `<polyline class="coverage-line" fill="none" points="${coverage}"/>`,
    `<polyline class="correctness-line" fill="none" points="${correctness}"/>`,
    `</svg>`,
  ].join('');
}

export function confusionTable(classes: string[], matrix: number[][], caption: string): string {
  const header = classes.map((c) => `<th scope="col">${escapeHtml(c)}</th>`).join('');
  const total = matrix.flat().reduce((a, b) => a + b, 0) || 1;
  const rows = matrix
    .map((row, i) => {
      const cells = row
        .map((count) => {
          const share = count / total;
          return `<td class="cm-cell" data-count="${count}" style="--heat: ${fixed(share, 4)}">${count}</td>`;
        })
        .join('');
      return `<tr><th scope="row">${escapeHtml(classes[i] ?? '')}</th>${cells}</tr>`;
    })
    .join('');
  return [
    `<table class="confusion">`,
    `<caption>${escapeHtml(caption)}</caption>`,
    `<thead><tr><th>true \\ predicted</th>${header}</tr></thead>`,
    `<tbody>${rows}</tbody>`,
    `</table>`,
  ].join('');
}

export function topicPanel(topic: TopicInfo): string {
  const words = topic.top_words
    .map(([word, weight]) => `<li>${escapeHtml(word)} <span class="weight">${fixed(weight, 3)}</span></li>`)
    .join('');
  return [
    `<section class="topic-panel" data-topic-id="${topic.topic_id}">`,
    `<h3>${escapeHtml(topic.name)}</h3>`,
    `<ol class="top-words">${words}</ol>`,
    `</section>`,
  ].join('');
}

export function topicPanels(topics: TopicInfo[]): string {
  return `<div class="topics">${topics.map(topicPanel).join('')}</div>`;
}

const BOX_WIDTH = 160;

/** Horizontal box strip scaled into [lo, hi]; pure position mapping. */
export function boxStripSvg(row: GroupRow, lo: number, hi: number): string {
  const span = hi - lo || 1;
  const at = (v: number) => fixed(((v - lo) / span) * BOX_WIDTH, 1);
  return [
    `<svg class="box" viewBox="0 0 ${BOX_WIDTH} 20" role="img" aria-label="quartiles">`,
    `<line class="whisker" x1="${at(row.min)}" y1="10" x2="${at(row.max)}" y2="10"/>`,
    `<rect class="iqr" x="${at(row.q1)}" y="4" width="${fixed(((row.q3 - row.q1) / span) * BOX_WIDTH, 1)}" height="12"/>`,
    `<line class="median" x1="${at(row.median)}" y1="2" x2="${at(row.median)}" y2="18"/>`,
    `</svg>`,
  ].join('');
}

export function groupTable(
  rows: GroupRow[],
  topicNames: Map<number, string>,
  caption: string,
  lo: number,
  hi: number,
): string {
  const body = rows
    .map((row) => {
      const name = topicNames.get(row.topic_id) ?? `topic-${row.topic_id}`;
      return [
        `<tr>`,
        `<td>${escapeHtml(name)}</td>`,
        `<td>${escapeHtml(row.polarity)}</td>`,
        `<td>${row.count}</td>`,
        `<td>${fixed(row.median)}</td>`,
        `<td>${fixed(row.q1)} – ${fixed(row.q3)}</td>`,
        `<td>${boxStripSvg(row, lo, hi)}</td>`,
        `</tr>`,
      ].join('');
    })
    .join('');
  return [
    `<table class="groups">`,
    `<caption>${escapeHtml(caption)}</caption>`,
    `<thead><tr><th>topic</th><th>polarity</th><th>n</th><th>median</th><th>IQR</th><th>spread</th></tr></thead>`,
    `<tbody>${body}</tbody>`,
    `</table>`,
  ].join('');
}

export function dashboardHtml(report: StatsReport): string {
  const names = new Map(report.topics.map((t) => [t.topic_id, t.name]));
  const rrHi = Math.max(1, ...report.group_rr.map((r) => r.max));
  return [
    `<div class="dashboard">`,
    `<p class="macro">macro accuracy: train ${pct(report.macro_train)}, test ${pct(report.macro_test)}</p>`,
    `<h2>Selective prediction</h2>`,
    coverageCurveSvg(report.threshold_curve),
    `<h2>Confusion</h2>`,
    `<div class="confusions">`,
    confusionTable(report.classes, report.confusion_train, 'train'),
    confusionTable(report.classes, report.confusion_test, 'test'),
    `</div>`,
    `<h2>Topics</h2>`,
    topicPanels(report.topics),
    `<h2>Course scores by topic and polarity</h2>`,
    groupTable(report.group_scores, names, 'evaluation score quartiles', 1, 5),
    `<h2>Response rates by topic and polarity</h2>`,
    groupTable(report.group_rr, names, 'response rate quartiles', 0, rrHi),
    `</div>`,
  ].join('');
}

export function statsErrorHtml(err: unknown): string {
  if (err instanceof ApiError && err.status === 409) {
    return [
      `<div class="banner hint">`,
      `<p>No analytics report yet. Run the report stage of the pipeline first, then reload.</p>`,
      `</div>`,
    ].join('');
  }
  const message = err instanceof Error ? err.message : String(err);
  return `<div class="banner error"><p>${escapeHtml(message)}</p></div>`;
}
