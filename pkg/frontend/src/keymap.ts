import type { Polarity } from './types.js';

/** Keystroke contract: 1 -> positive, 2 -> neutral, 3 -> negative. */
export function keyToPolarity(key: string): Polarity | null {
  switch (key) {
    case '1':
      return 'positive';
    case '2':
      return 'neutral';
    case '3':
      return 'negative';
    default:
      return null;
  }
}

const IGNORED_TAGS = new Set(['INPUT', 'TEXTAREA', 'SELECT']);

/** True when the event targets a form control that owns the keystroke. */
export function isTypingTarget(target: EventTarget | null): boolean {
  if (!target || !(target instanceof HTMLElement)) return false;
  return IGNORED_TAGS.has(target.tagName) || target.isContentEditable;
}
