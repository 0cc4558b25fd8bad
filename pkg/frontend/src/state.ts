import type { Store } from './store.js';
import { createStore } from './store.js';
import type {
  CompletionResult,
  LegalRange,
  ModelRef,
  SessionState,
  StoredModel,
} from './types.js';

export type EventRole = 'ignore' | 'target' | 'true' | 'false';

export interface Banner {
  kind: 'error' | 'warn' | 'info';
  text: string;
}

export interface AppState {
  models: ModelRef[];
  model: StoredModel | null;
  banner: Banner | null;
  // query panel
  roles: Record<string, EventRole>;
  result: string | null;
  // elicitation wizard
  session: SessionState | null;
  range: LegalRange | null;
  completion: CompletionResult | null;
}

export type AppStore = Store<AppState>;

export function createAppStore(): AppStore {
  return createStore<AppState>({
    models: [],
    model: null,
    banner: null,
    roles: {},
    result: null,
    session: null,
    range: null,
    completion: null,
  });
}
