import type { ApiClient } from './api.js';
import { ServiceError } from './api.js';
import { fmt6 } from './format.js';
import type { AppStore, EventRole } from './state.js';

const CYCLE: EventRole[] = ['ignore', 'target', 'true', 'false'];

const ROLE_LABEL: Record<EventRole, string> = {
  ignore: '·',
  target: 'pr?',
  true: 'true',
  false: 'false',
};

/** Conditional-query panel: every event cycles through
 * ignored / query target / true evidence / false evidence. */
export function renderQueryPanel(el: HTMLElement, api: ApiClient, store: AppStore): void {
  el.innerHTML = `
    <h2>Query</h2>
    <div class="query-events"></div>
    <button type="button" data-testid="run-query">Run query</button>
    <output class="query-result" data-testid="query-result"></output>
  `;
  const list = el.querySelector('.query-events') as HTMLElement;
  const runBtn = el.querySelector('[data-testid=run-query]') as HTMLButtonElement;
  const output = el.querySelector('[data-testid=query-result]') as HTMLOutputElement;

  function run(): void {
    const s = store.get();
    if (!s.model) return;
    const targets: string[] = [];
    const yes: string[] = [];
    const no: string[] = [];
    for (const [id, role] of Object.entries(s.roles)) {
      if (role === 'target') targets.push(id);
      else if (role === 'true') yes.push(id);
      else if (role === 'false') no.push(id);
    }
    if (!targets.length) {
      store.set({ banner: { kind: 'warn', text: 'mark at least one event as a query target' } });
      return;
    }
    api
      .query(s.model.id, { targets, true: yes, false: no, method: 'exact' })
      .then((ans) => {
        if (ans.method === 'exact') {
          store.set({ result: fmt6(ans.probability), banner: null });
        }
      })
      .catch((err: unknown) => {
        const text = err instanceof ServiceError ? `${err.code}: ${err.message}` : String(err);
        store.set({ result: null, banner: { kind: 'error', text } });
      });
  }
  runBtn.addEventListener('click', run);

  function sync(): void {
    const s = store.get();
    el.hidden = !s.model;
    if (!s.model) return;

    list.innerHTML = '';
    for (const ev of s.model.document.events) {
      const role = s.roles[ev.id] ?? 'ignore';
      const row = document.createElement('div');
      row.className = 'query-row';
      const name = document.createElement('span');
      name.textContent = ev.id;
      if (ev.kind === 'process') name.style.fontWeight = 'bold';
      const toggle = document.createElement('button');
      toggle.type = 'button';
      toggle.dataset.testid = `role-${ev.id}`;
      toggle.dataset.role = role;
      toggle.textContent = ROLE_LABEL[role];
      toggle.addEventListener('click', () => {
        const next = CYCLE[(CYCLE.indexOf(role) + 1) % CYCLE.length] as EventRole;
        store.set({ roles: { ...store.get().roles, [ev.id]: next }, result: null });
      });
      row.appendChild(name);
      row.appendChild(toggle);
      list.appendChild(row);
    }
    output.textContent = s.result ?? '';
  }

  store.subscribe(sync);
  sync();
}
