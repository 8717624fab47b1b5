import { describe, expect, it } from 'vitest';

import { reviewHtml } from '../src/reviewView.js';
import type { ReviewState } from '../src/review.js';
import type { TriageItem } from '../src/types.js';

const ITEM: TriageItem = {
  comment_id: 'c7',
  text: 'El curso fue <bueno> & claro',
  predicted_polarity: 'positive',
  confidence: 0.62,
  topic_id: 3,
  status: 'pending',
  human_label: null,
};

const REVIEWING: ReviewState = {
  kind: 'reviewing',
  item: ITEM,
  position: 2,
  total: 9,
  reviewed: 1,
  notice: null,
  posting: false,
};

describe('reviewHtml', () => {
  it('shows text, prediction, confidence, and topic', () => {
    const html = reviewHtml(REVIEWING, '/api/export/labels');
    expect(html).toContain('El curso fue &lt;bueno&gt; &amp; claro');
    expect(html).toContain('positive');
    expect(html).toContain('62.0%');
    expect(html).toContain('topic 3');
  });

  it('shows the progress counter', () => {
    const html = reviewHtml(REVIEWING, '');
    expect(html).toContain('comment 2 of 9');
    expect(html).toContain('1 reviewed');
  });

  it('renders one button per polarity with its key hint', () => {
    const html = reviewHtml(REVIEWING, '');
    for (const [key, polarity] of [
      ['1', 'positive'],
      ['2', 'neutral'],
      ['3', 'negative'],
    ]) {
      expect(html).toContain(`data-polarity="${polarity}"`);
      expect(html).toContain(`<kbd>${key}</kbd>`);
    }
  });

  it('disables buttons while a post is in flight', () => {
    const html = reviewHtml({ ...REVIEWING, posting: true }, '');
    expect([...html.matchAll(/disabled/g)]).toHaveLength(3);
  });

  it('renders the skip notice when present', () => {
    const html = reviewHtml({ ...REVIEWING, notice: 'c6 skipped' }, '');
    expect(html).toContain('c6 skipped');
  });

  it('done state reports the session tally and export link', () => {
    const html = reviewHtml(
      { kind: 'done', reviewed: 3, total: 3 },
      '/api/export/labels',
    );
    expect(html).toContain('all reviewed');
    expect(html).toContain('3 of 3');
    expect(html).toContain('/api/export/labels');
  });

  it('blocked state offers a retry button', () => {
    const html = reviewHtml(
      { kind: 'blocked', message: 'service unreachable' },
      '',
    );
    expect(html).toContain('service unreachable');
    expect(html).toContain('data-action="retry"');
  });

  it('loading state is distinct', () => {
    expect(reviewHtml({ kind: 'loading' }, '')).toContain('loading');
  });
});
