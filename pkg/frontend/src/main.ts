/** Page wiring: tabs, threshold slider, keystrokes, rendering. */

import { Api } from './api.js';
import { dashboardHtml, statsErrorHtml } from './dashboard.js';
import { isTypingTarget, keyToPolarity } from './keymap.js';
import { ReviewSession } from './review.js';
import { reviewHtml } from './reviewView.js';

const DEFAULT_THRESHOLD = 0.7;

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

export function boot(): void {
  const api = new Api('');
  const session = new ReviewSession(api, DEFAULT_THRESHOLD);

  const reviewRoot = byId('review');
  const dashboardRoot = byId('dashboard');
  const slider = byId('threshold') as HTMLInputElement;
  const sliderValue = byId('threshold-value');

  slider.value = String(DEFAULT_THRESHOLD);
  sliderValue.textContent = String(DEFAULT_THRESHOLD);

  session.subscribe((state) => {
    reviewRoot.innerHTML = reviewHtml(state, api.exportUrl());
  });

  reviewRoot.addEventListener('click', (event) => {
    const target = event.target as HTMLElement | null;
    const button = target?.closest('button[data-action]') as HTMLElement | null;
    if (!button) return;
    if (button.dataset.action === 'retry') void session.retry();
    if (button.dataset.action === 'label') {
      const polarity = button.dataset.polarity;
      if (polarity === 'positive' || polarity === 'neutral' || polarity === 'negative') {
        void session.label(polarity);
      }
    }
  });

  window.addEventListener('keydown', (event) => {
    if (isTypingTarget(event.target)) return;
    const polarity = keyToPolarity(event.key);
    if (polarity) {
      event.preventDefault();
      void session.label(polarity);
    }
  });

  slider.addEventListener('change', () => {
    const threshold = Number(slider.value);
    sliderValue.textContent = slider.value;
    void session.setThreshold(threshold);
  });

  async function loadDashboard(): Promise<void> {
    try {
      const report = await api.getStats();
      dashboardRoot.innerHTML = dashboardHtml(report);
    } catch (err) {
      dashboardRoot.innerHTML = statsErrorHtml(err);
    }
  }

  for (const tab of document.querySelectorAll<HTMLElement>('[data-tab]')) {
    tab.addEventListener('click', () => {
      const name = tab.dataset.tab;
      byId('review-pane').hidden = name !== 'review';
      byId('dashboard-pane').hidden = name !== 'dashboard';
      for (const other of document.querySelectorAll('[data-tab]')) {
        other.classList.toggle('active', other === tab);
      }
      if (name === 'dashboard') void loadDashboard();
    });
  }

  void session.start();
}

boot();
