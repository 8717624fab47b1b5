/**
 * Review flow state machine, UI-free so the contract is testable.
 *
 * One session walks the queue in API order (ascending confidence), one
 * comment at a time. Posting a label advances the cursor; the progress
 * denominator is frozen at fetch time so reviewers see "k of n" for the
 * batch they started. A stale item (404) is skipped with a notice; a
 * network failure blocks with a retry instead of dropping the keystroke.
 */

import { Api, ApiError } from './api.js';
import type { Polarity, TriageItem } from './types.js';

export type ReviewState =
  | { kind: 'loading' }
  | { kind: 'blocked'; message: string }
  | { kind: 'done'; reviewed: number; total: number }
  | {
      kind: 'reviewing';
      item: TriageItem;
      position: number;
      total: number;
      reviewed: number;
      notice: string | null;
      posting: boolean;
    };

type Listener = (state: ReviewState) => void;

export class ReviewSession {
  private items: TriageItem[] = [];
  private cursor = 0;
  private total = 0;
  private reviewed = 0;
  private notice: string | null = null;
  private posting = false;
  private blockedMessage: string | null = null;
  private loading = true;
  private listeners: Listener[] = [];
  private pendingLabel: { commentId: string; polarity: Polarity } | null = null;

  constructor(
    private readonly api: Api,
    private threshold: number,
  ) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
    listener(this.state());
  }

  state(): ReviewState {
    if (this.loading) return { kind: 'loading' };
    if (this.blockedMessage !== null) {
      return { kind: 'blocked', message: this.blockedMessage };
    }
    const item = this.items[this.cursor];
    if (item === undefined) {
      return { kind: 'done', reviewed: this.reviewed, total: this.total };
    }
    return {
      kind: 'reviewing',
      item,
      position: this.cursor + 1,
      total: this.total,
      reviewed: this.reviewed,
      notice: this.notice,
      posting: this.posting,
    };
  }

  getThreshold(): number {
    return this.threshold;
  }

  private emit(): void {
    const snapshot = this.state();
    for (const listener of this.listeners) listener(snapshot);
  }

  /** Fetch the queue and restart the walk; used at startup and whenever
   * the threshold changes. */
  async start(): Promise<void> {
    this.loading = true;
    this.blockedMessage = null;
    this.notice = null;
    this.emit();
    try {
      const queue = await this.api.getQueue(this.threshold);
      this.items = queue.items;
      this.cursor = 0;
      this.total = queue.items.length;
      this.reviewed = 0;
      this.loading = false;
    } catch (err) {
      this.loading = false;
      this.blockedMessage = describe(err);
    }
    this.emit();
  }

  async setThreshold(threshold: number): Promise<void> {
    this.threshold = threshold;
    await this.start();
  }

  /** Label the visible comment. Resolves once the state settled. */
  async label(polarity: Polarity): Promise<void> {
    const current = this.items[this.cursor];
    if (current === undefined || this.posting || this.loading) return;
    if (this.blockedMessage !== null) return;
    this.posting = true;
    this.notice = null;
    this.emit();
    try {
      await this.api.postLabel(current.comment_id, polarity);
      this.reviewed += 1;
      this.cursor += 1;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        // someone else's corpus snapshot; skip without counting it
        this.notice = `comment ${current.comment_id} no longer exists; skipped`;
        this.cursor += 1;
      } else {
        this.blockedMessage = describe(err);
        this.pendingLabel = { commentId: current.comment_id, polarity };
      }
    }
    this.posting = false;
    this.emit();
  }

  /** Retry after a blocking failure: re-post the lost label when there
   * was one, otherwise refetch the queue. */
  async retry(): Promise<void> {
    if (this.blockedMessage === null) return;
    const pending = this.pendingLabel;
    this.blockedMessage = null;
    this.pendingLabel = null;
    if (pending === null) {
      await this.start();
      return;
    }
    this.emit();
    await this.label(pending.polarity);
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return String(err);
}
