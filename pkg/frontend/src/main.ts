import { ApiClient } from './api.js';
import { renderGraph } from './graph.js';
import { renderQueryPanel } from './query.js';
import { renderWizard } from './wizard.js';
import type { AppStore } from './state.js';
import { createAppStore } from './state.js';

export function initApp(root: HTMLElement, api: ApiClient, store: AppStore): void {
  root.innerHTML = `
    <header>
      <h1>causalproc workbench</h1>
      <label>model
        <select data-testid="model-select"><option value="">choose</option></select>
      </label>
      <button type="button" data-testid="refresh-models">Refresh</button>
      <span data-testid="model-version"></span>
    </header>
    <div class="banner" data-testid="banner" hidden></div>
    <section class="panel graph-panel"></section>
    <section class="panel query-panel"></section>
    <section class="panel wizard-panel"></section>
  `;
  const select = root.querySelector('[data-testid=model-select]') as HTMLSelectElement;
  const version = root.querySelector('[data-testid=model-version]') as HTMLElement;
  const banner = root.querySelector('[data-testid=banner]') as HTMLElement;
  const graphPanel = root.querySelector('.graph-panel') as HTMLElement;

  function refreshModels(): void {
    api
      .listModels()
      .then((models) => store.set({ models }))
      .catch((err: unknown) => store.set({ banner: { kind: 'error', text: String(err) } }));
  }

  function selectModel(id: string): void {
    if (!id) {
      store.set({ model: null, session: null, range: null, completion: null, roles: {}, result: null });
      return;
    }
    api
      .getModel(id)
      .then((model) =>
        store.set({
          model,
          roles: {},
          result: null,
          session: null,
          range: null,
          completion: null,
          banner: null,
        }),
      )
      .catch((err: unknown) => store.set({ banner: { kind: 'error', text: String(err) } }));
  }

  select.addEventListener('change', () => selectModel(select.value));
  root
    .querySelector('[data-testid=refresh-models]')!
    .addEventListener('click', refreshModels);

  renderQueryPanel(root.querySelector('.query-panel') as HTMLElement, api, store);
  renderWizard(root.querySelector('.wizard-panel') as HTMLElement, api, store);

  let renderedGraphFor = '';
  function sync(): void {
    const s = store.get();
    const options = ['<option value="">choose</option>']
      .concat(s.models.map((m) => `<option value="${m.id}">${m.id} (v${m.version})</option>`))
      .join('');
    if (select.innerHTML !== options) {
      const keep = select.value;
      select.innerHTML = options;
      select.value = keep;
    }
    version.textContent = s.model ? `version ${s.model.version}` : '';

    if (s.banner) {
      banner.textContent = s.banner.text;
      banner.dataset.kind = s.banner.kind;
      banner.hidden = false;
    } else {
      banner.hidden = true;
    }

    const graphKey = s.model ? `${s.model.id}:${s.model.version}` : '';
    if (graphKey !== renderedGraphFor) {
      renderedGraphFor = graphKey;
      if (s.model) renderGraph(graphPanel, s.model.document);
      else graphPanel.innerHTML = '';
    }
  }

  store.subscribe(sync);
  sync();
  refreshModels();
}

const appRoot = typeof document === 'undefined' ? null : document.getElementById('app');
if (appRoot) {
  const base =
    new URLSearchParams(window.location.search).get('service') ??
    window.localStorage.getItem('causalproc.service') ??
    'http://localhost:8000';
  window.localStorage.setItem('causalproc.service', base);
  initApp(appRoot, new ApiClient(base), createAppStore());
}
