import type {
  CompletionResult,
  LegalRange,
  ModelDocument,
  ModelRef,
  QueryAnswer,
  QueryRequest,
  SessionState,
  StoredModel,
} from './types.js';

/** Non-2xx response, carrying the service's structured error body. */
export class ServiceError extends Error {
  readonly status: number;
  readonly code: string;
  readonly details: Record<string, unknown> | null;

  constructor(status: number, code: string, message: string, details: Record<string, unknown> | null) {
    super(message);
    this.name = 'ServiceError';
    this.status = status;
    this.code = code;
    this.details = details;
  }
}

async function parseError(resp: Response): Promise<ServiceError> {
  let code = `HTTP${resp.status}`;
  let message = resp.statusText || `request failed with ${resp.status}`;
  let details: Record<string, unknown> | null = null;
  try {
    const body = await resp.json();
    if (body && typeof body.code === 'string') {
      code = body.code;
      message = body.message ?? message;
      details = body.details ?? null;
    }
  } catch {
    // non-JSON error body; keep the HTTP fallbacks
  }
  return new ServiceError(resp.status, code, message, details);
}

export class ApiClient {
  constructor(readonly baseUrl: string = '') {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { 'content-type': 'application/json' };
      init.body = JSON.stringify(body);
    }
    const resp = await fetch(this.baseUrl + path, init);
    if (!resp.ok) throw await parseError(resp);
    if (resp.status === 204) return undefined as T;
    return (await resp.json()) as T;
  }

  listModels(): Promise<ModelRef[]> {
    return this.request<{ models: ModelRef[] }>('GET', '/models').then((r) => r.models);
  }

  createModel(document: ModelDocument): Promise<ModelRef> {
    return this.request('POST', '/models', document);
  }

  getModel(id: string): Promise<StoredModel> {
    return this.request('GET', `/models/${encodeURIComponent(id)}`);
  }

  deleteModel(id: string): Promise<void> {
    return this.request('DELETE', `/models/${encodeURIComponent(id)}`);
  }

  query(id: string, q: QueryRequest): Promise<QueryAnswer> {
    return this.request('POST', `/models/${encodeURIComponent(id)}/query`, q);
  }

  startSession(modelId: string, process: string): Promise<SessionState> {
    return this.request('POST', `/models/${encodeURIComponent(modelId)}/sessions`, { process });
  }

  getSession(sid: string): Promise<SessionState> {
    return this.request('GET', `/sessions/${encodeURIComponent(sid)}`);
  }

  getRange(sid: string): Promise<LegalRange> {
    return this.request('GET', `/sessions/${encodeURIComponent(sid)}/range`);
  }

  commit(sid: string, value: number, position: number, given?: string[]): Promise<SessionState> {
    const body: Record<string, unknown> = { value, position };
    if (given && given.length) body.given = given;
    return this.request('POST', `/sessions/${encodeURIComponent(sid)}/commit`, body);
  }

  defaultCurrent(sid: string, position: number): Promise<SessionState> {
    return this.request('POST', `/sessions/${encodeURIComponent(sid)}/default`, { position });
  }

  complete(sid: string): Promise<CompletionResult> {
    return this.request('POST', `/sessions/${encodeURIComponent(sid)}/complete`);
  }
}
