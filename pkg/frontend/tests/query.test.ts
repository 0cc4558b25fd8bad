import { beforeEach, expect, test, vi } from 'vitest';

import { ApiClient } from '../src/api.js';
import { renderQueryPanel } from '../src/query.js';
import { createAppStore } from '../src/state.js';
import type { AppStore } from '../src/state.js';
import { installFakeService, m1Document } from './fakeService.js';

let store: AppStore;
let el: HTMLElement;

function prime(): void {
  installFakeService();
  store = createAppStore();
  el = document.createElement('section');
  document.body.innerHTML = '';
  document.body.appendChild(el);
  renderQueryPanel(el, new ApiClient(''), store);
  store.set({ model: { id: 'm1', version: 1, document: m1Document } });
}

function click(testid: string, times = 1): void {
  for (let i = 0; i < times; i += 1) {
    (el.querySelector(`[data-testid=${testid}]`) as HTMLButtonElement).click();
  }
}

function result(): string {
  return (el.querySelector('[data-testid=query-result]') as HTMLElement).textContent ?? '';
}

beforeEach(prime);

test('marginal then conditional via evidence toggle', async () => {
  click('role-p'); // target
  click('run-query');
  await vi.waitFor(() => expect(result()).toBe('0.580000'));

  // toggling s to true evidence turns pr(p) into pr(p | s) = 1
  click('role-s', 2);
  expect(result()).toBe(''); // stale result cleared on toggle
  click('run-query');
  await vi.waitFor(() => expect(result()).toBe('1.000000'));
});

test('every role state round-trips through the cycle', () => {
  const toggle = () => el.querySelector('[data-testid=role-u]') as HTMLButtonElement;
  expect(toggle().dataset.role).toBe('ignore');
  click('role-u');
  expect(toggle().dataset.role).toBe('target');
  click('role-u', 3);
  expect(toggle().dataset.role).toBe('ignore');
});

test('zero-probability evidence surfaces the service error', async () => {
  click('role-u'); // target u
  click('role-s', 2); // s true
  click('role-p', 3); // p false: s without p is impossible
  click('run-query');
  await vi.waitFor(() => {
    expect(store.get().banner?.text).toContain('ZeroEvidence');
  });
  expect(result()).toBe('');
});

test('running with no target warns instead of querying', () => {
  click('run-query');
  expect(store.get().banner?.kind).toBe('warn');
});
