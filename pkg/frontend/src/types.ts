// Wire types for the causalproc REST service.

export interface TableRow {
  subset: string[];
  p: number;
}

export interface EventDecl {
  id: string;
  kind: 'process' | 'simple';
}

export interface ModelDocument {
  events: EventDecl[];
  omega: string;
  causes: [string, string][];
  triggers: [string, string][];
  effectual: Record<string, unknown>;
  causal: Record<string, TableRow[]>;
}

export interface ModelRef {
  id: string;
  version: number;
}

export interface StoredModel extends ModelRef {
  document: ModelDocument;
}

export interface QueryRequest {
  targets: string[];
  true?: string[];
  false?: string[];
  method?: 'exact' | 'sample';
  n?: number;
  seed?: number;
}

export interface ExactAnswer {
  method: 'exact';
  probability: number;
}

export interface SampleAnswer {
  method: 'sample';
  estimate: number;
  standard_error: number;
  n: number;
  seed: number;
}

export type QueryAnswer = ExactAnswer | SampleAnswer;

export interface Commitment {
  subset: string[];
  value: number;
}

export interface SessionState {
  id: string;
  model_id: string;
  process: string;
  events: string[];
  subsets: string[][];
  position: number;
  total: number;
  done: boolean;
  current: string[] | null;
  commitments: Commitment[];
  defaulted: string[][];
  completed: boolean;
  installed_version: number | null;
}

export interface LegalRange {
  subset: string[];
  position: number;
  lo: number;
  hi: number;
}

export interface CompletionResult {
  installed_version: number;
  table: TableRow[];
}

export interface ErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown> | null;
}
