import { describe, expect, it } from 'vitest';

import { ApiError } from '../src/api.js';
import {
  boxStripSvg,
  confusionTable,
  coverageCurveSvg,
  dashboardHtml,
  statsErrorHtml,
  topicPanels,
} from '../src/dashboard.js';
import type { CurvePoint, GroupRow, StatsReport, TopicInfo } from '../src/types.js';

function curve(points: [number, number, number][]): CurvePoint[] {
  return points.map(([threshold, coverage, correctness]) => ({
    threshold,
    coverage,
    correctness,
    covered_count: Math.round(coverage * 100),
  }));
}

function polylinePoints(svg: string, cls: string): [number, number][] {
  const match = svg.match(new RegExp(`class="${cls}"[^>]*points="([^"]*)"`));
  if (!match || match[1] === undefined) throw new Error(`no ${cls} in svg`);
  return match[1].split(' ').map((pair) => {
    const [x, y] = pair.split(',').map(Number);
    return [x ?? NaN, y ?? NaN];
  });
}

describe('coverageCurveSvg', () => {
  it('renders one vertex per curve point, x ascending', () => {
    const svg = coverageCurveSvg(
      curve([[0, 1, 0.9], [0.5, 0.6, 0.95], [0.9, 0.2, 1]]),
    );
    const pts = polylinePoints(svg, 'coverage-line');
    expect(pts).toHaveLength(3);
    const xs = pts.map(([x]) => x);
    expect([...xs].sort((a, b) => a - b)).toEqual(xs);
  });

  it('maps non-increasing coverage onto non-decreasing screen y', () => {
    // SVG y grows downward, so a falling curve must never move up
    const svg = coverageCurveSvg(
      curve([[0, 1, 0.9], [0.3, 1, 0.92], [0.6, 0.5, 0.98], [0.9, 0.1, 1]]),
    );
    const ys = polylinePoints(svg, 'coverage-line').map(([, y]) => y);
    for (let i = 1; i < ys.length; i++) {
      expect(ys[i]).toBeGreaterThanOrEqual(ys[i - 1] ?? NaN);
    }
  });

  it('draws the correctness companion line', () => {
    const svg = coverageCurveSvg(curve([[0, 1, 0.9], [0.9, 0.2, 1]]));
    expect(polylinePoints(svg, 'correctness-line')).toHaveLength(2);
  });
});

describe('confusionTable', () => {
  it('cells carry exactly the API counts', () => {
    const html = confusionTable(
      ['positive', 'neutral', 'negative'],
      [[8, 1, 1], [2, 6, 2], [0, 0, 10]],
      'test',
    );
    const counts = [...html.matchAll(/data-count="(\d+)"/g)].map((m) =>
      Number(m[1]),
    );
    expect(counts).toEqual([8, 1, 1, 2, 6, 2, 0, 0, 10]);
  });

  it('labels rows and columns with the class order', () => {
    const html = confusionTable(['positive', 'neutral', 'negative'], [
      [1, 0, 0],
      [0, 1, 0],
      [0, 0, 1],
    ], 'train');
    expect(html.indexOf('positive')).toBeLessThan(html.indexOf('neutral'));
    expect(html.indexOf('neutral')).toBeLessThan(html.indexOf('negative'));
  });

  it('escapes the caption', () => {
    const html = confusionTable(['positive'], [[1]], '<script>');
    expect(html).not.toContain('<script>');
    expect(html).toContain('&lt;script&gt;');
  });
});

function topics(k: number): TopicInfo[] {
  return Array.from({ length: k }, (_, i) => ({
    topic_id: i,
    name: `topic-${i}`,
    top_words: [['palabra', 0.1]],
    representative_comments: [],
  }));
}

describe('topicPanels', () => {
  it('renders K panels for K topics', () => {
    for (const k of [1, 3, 5]) {
      const html = topicPanels(topics(k));
      expect([...html.matchAll(/class="topic-panel"/g)]).toHaveLength(k);
    }
  });

  it('panel shows the topic name and word weights', () => {
    const html = topicPanels([
      {
        topic_id: 2,
        name: 'metodologia',
        top_words: [['claro', 0.25]],
        representative_comments: [],
      },
    ]);
    expect(html).toContain('metodologia');
    expect(html).toContain('claro');
    expect(html).toContain('0.250');
  });
});

const GROUP: GroupRow = {
  topic_id: 0,
  polarity: 'positive',
  count: 4,
  min: 2,
  q1: 3,
  median: 4,
  q3: 4.5,
  max: 5,
  mean: 3.9,
};

describe('boxStripSvg', () => {
  it('scales quartiles into the strip without reordering them', () => {
    const svg = boxStripSvg(GROUP, 1, 5);
    const rect = svg.match(/<rect[^>]*x="([\d.]+)"[^>]*width="([\d.]+)"/);
    const median = svg.match(/class="median" x1="([\d.]+)"/);
    expect(rect && median).toBeTruthy();
    const q1x = Number(rect?.[1]);
    const widthPx = Number(rect?.[2]);
    const medianX = Number(median?.[1]);
    expect(medianX).toBeGreaterThanOrEqual(q1x);
    expect(medianX).toBeLessThanOrEqual(q1x + widthPx);
  });
});

describe('dashboardHtml', () => {
  const report: StatsReport = {
    classes: ['positive', 'neutral', 'negative'],
    macro_train: 0.98,
    macro_test: 0.95,
    confusion_train: [[5, 0, 0], [0, 5, 0], [0, 0, 5]],
    confusion_test: [[4, 1, 0], [0, 5, 0], [0, 0, 5]],
    threshold_curve: curve([[0, 1, 0.9], [0.5, 0.7, 0.95], [0.9, 0.3, 1]]),
    topics: topics(4),
    group_scores: [GROUP],
    group_rr: [{ ...GROUP, min: 0.1, q1: 0.2, median: 0.3, q3: 0.5, max: 0.8 }],
  };

  it('assembles curve, confusions, panels, and group tables', () => {
    const html = dashboardHtml(report);
    expect(html).toContain('coverage-line');
    expect([...html.matchAll(/<table class="confusion">/g)]).toHaveLength(2);
    expect([...html.matchAll(/class="topic-panel"/g)]).toHaveLength(4);
    expect([...html.matchAll(/<table class="groups">/g)]).toHaveLength(2);
    expect(html).toContain('95.0%');
  });
});

describe('statsErrorHtml', () => {
  it('409 becomes the run-report-first hint', () => {
    const html = statsErrorHtml(
      new ApiError(409, 'report_missing', 'no report yet'),
    );
    expect(html).toContain('hint');
    expect(html.toLowerCase()).toContain('report');
  });

  it('other failures render their message', () => {
    const html = statsErrorHtml(new ApiError(0, 'network', 'down'));
    expect(html).toContain('error');
    expect(html).toContain('down');
  });
});
