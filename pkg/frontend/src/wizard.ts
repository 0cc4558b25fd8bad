import type { ApiClient } from './api.js';
import { ServiceError } from './api.js';
import { fmt6, subsetLabel } from './format.js';
import type { AppStore } from './state.js';

/** Guided marginal-by-marginal elicitation for one process.
 *
 * The service owns every legal range and every accept/reject decision;
 * the wizard only mirrors them. Commits echo the position the client
 * saw, so a concurrent commit from another client surfaces as a stale
 * banner and a reload instead of silent table corruption. */
export function renderWizard(el: HTMLElement, api: ApiClient, store: AppStore): void {
  let lastKey = '';

  function fail(err: unknown): void {
    if (err instanceof ServiceError) {
      if (err.code === 'StalePosition') {
        const stored = err.details?.stored;
        store.set({
          banner: {
            kind: 'warn',
            text: `another client advanced this session (position ${String(stored)}); reloaded`,
          },
        });
        reload();
        return;
      }
      const bounds =
        err.details && 'lo' in err.details
          ? ` legal range [${fmt6(Number(err.details.lo))}, ${fmt6(Number(err.details.hi))}]`
          : '';
      store.set({ banner: { kind: 'error', text: `${err.code}: ${err.message}${bounds}` } });
      return;
    }
    store.set({ banner: { kind: 'error', text: String(err) } });
  }

  function reload(): void {
    const s = store.get();
    if (!s.session) return;
    api
      .getSession(s.session.id)
      .then((session) => {
        store.set({ session });
        return session.done ? null : api.getRange(session.id);
      })
      .then((range) => store.set({ range }))
      .catch(fail);
  }

  function adopt(session: import('./types.js').SessionState): void {
    store.set({ session, range: null, completion: null });
    if (!session.done) {
      api.getRange(session.id).then((range) => store.set({ range })).catch(fail);
    }
  }

  function start(process: string): void {
    const s = store.get();
    if (!s.model) return;
    api
      .startSession(s.model.id, process)
      .then((session) => {
        store.set({ banner: null });
        adopt(session);
      })
      .catch(fail);
  }

  function commitValue(raw: string, givenRaw: string): void {
    const s = store.get();
    if (!s.session) return;
    const value = Number(raw);
    if (!Number.isFinite(value)) {
      store.set({ banner: { kind: 'error', text: `${JSON.stringify(raw)} is not a number` } });
      return;
    }
    const given = givenRaw
      .split(',')
      .map((x) => x.trim())
      .filter(Boolean);
    api
      .commit(s.session.id, value, s.session.position, given.length ? given : undefined)
      .then((session) => {
        store.set({ banner: null });
        adopt(session);
      })
      .catch(fail);
  }

  function defaultCurrent(): void {
    const s = store.get();
    if (!s.session) return;
    api
      .defaultCurrent(s.session.id, s.session.position)
      .then((session) => {
        store.set({ banner: null });
        adopt(session);
      })
      .catch(fail);
  }

  function completeSession(): void {
    const s = store.get();
    if (!s.session || !s.model) return;
    const modelId = s.model.id;
    api
      .complete(s.session.id)
      .then((completion) => {
        store.set({ completion, banner: null });
        return api.getModel(modelId);
      })
      .then((model) => store.set({ model }))
      .catch(fail);
  }

  function renderStart(root: HTMLElement): void {
    const s = store.get();
    if (!s.model) return;
    const processes = s.model.document.events.filter((e) => e.kind === 'process');
    root.innerHTML = `
      <label>process
        <select data-testid="process-select">
          ${processes.map((p) => `<option value="${p.id}">${p.id}</option>`).join('')}
        </select>
      </label>
      <button type="button" data-testid="start-session">Start elicitation</button>
    `;
    const select = root.querySelector('[data-testid=process-select]') as HTMLSelectElement;
    root
      .querySelector('[data-testid=start-session]')!
      .addEventListener('click', () => start(select.value));
  }

  function renderActive(root: HTMLElement): void {
    const s = store.get();
    const session = s.session!;
    const range = s.range;
    const label = session.current ? subsetLabel(session.current) : '';
    const lo = range ? range.lo : 0;
    const hi = range ? range.hi : 1;
    const mid = (lo + hi) / 2;
    root.innerHTML = `
      <p data-testid="wiz-progress">step ${session.position + 1} of ${session.total}</p>
      <p>
        pr(<span data-testid="wiz-subset">${label}</span>)
        <span data-testid="wiz-range">${
          range ? `legal range [${fmt6(lo)}, ${fmt6(hi)}]` : 'fetching range'
        }</span>
      </p>
      <input type="range" data-testid="wiz-slider"
             min="${lo}" max="${hi}" step="any" value="${mid}" ${range ? '' : 'disabled'}>
      <input type="text" inputmode="decimal" data-testid="wiz-value" value="${fmt6(mid)}">
      <label>given <input type="text" data-testid="wiz-given" placeholder="comma ids, optional"></label>
      <button type="button" data-testid="wiz-commit" ${range ? '' : 'disabled'}>Commit</button>
      <button type="button" data-testid="wiz-default">Default</button>
    `;
    const slider = root.querySelector('[data-testid=wiz-slider]') as HTMLInputElement;
    const value = root.querySelector('[data-testid=wiz-value]') as HTMLInputElement;
    const given = root.querySelector('[data-testid=wiz-given]') as HTMLInputElement;
    slider.addEventListener('input', () => {
      value.value = fmt6(Number(slider.value));
    });
    value.addEventListener('change', () => {
      const v = Number(value.value);
      if (Number.isFinite(v)) slider.value = String(Math.min(hi, Math.max(lo, v)));
    });
    root
      .querySelector('[data-testid=wiz-commit]')!
      .addEventListener('click', () => commitValue(value.value, given.value));
    root
      .querySelector('[data-testid=wiz-default]')!
      .addEventListener('click', defaultCurrent);
  }

  function renderDone(root: HTMLElement): void {
    root.innerHTML = `
      <p>every marginal is committed or defaulted</p>
      <button type="button" data-testid="wiz-complete">Complete and install</button>
    `;
    root
      .querySelector('[data-testid=wiz-complete]')!
      .addEventListener('click', completeSession);
  }

  function renderCompletion(root: HTMLElement): void {
    const s = store.get();
    const completion = s.completion!;
    const rows = completion.table
      .map(
        (row) =>
          `<tr><td>${subsetLabel(row.subset)}</td><td>${fmt6(row.p)}</td></tr>`,
      )
      .join('');
    root.innerHTML = `
      <p data-testid="wiz-installed">installed emission table for
        '${s.session?.process ?? ''}' as model version ${completion.installed_version}</p>
      <table data-testid="completion-table"><tbody>${rows}</tbody></table>
    `;
  }

  function sync(): void {
    const s = store.get();
    el.hidden = !s.model;
    if (!s.model) {
      lastKey = '';
      return;
    }
    const key = JSON.stringify([
      s.model.id,
      s.session?.id ?? null,
      s.session?.position ?? null,
      s.session?.done ?? null,
      s.range,
      s.completion !== null,
    ]);
    if (key === lastKey) return;
    lastKey = key;

    el.innerHTML = '<h2>Elicit emission table</h2><div class="wizard-body"></div>';
    const body = el.querySelector('.wizard-body') as HTMLElement;
    if (s.completion) renderCompletion(body);
    else if (!s.session) renderStart(body);
    else if (s.session.done) renderDone(body);
    else renderActive(body);
  }

  store.subscribe(sync);
  sync();
}
