// In-memory double of the causalproc REST service, mirroring its wire
// contract (shapes, status codes, position echo) for UI tests.

import type { ModelDocument, TableRow } from '../src/types.js';

type Atom = [string[], number];

interface FakeModel {
  id: string;
  version: number;
  document: ModelDocument;
  atoms: Atom[];
}

interface FakeSession {
  id: string;
  model_id: string;
  process: string;
  events: string[];
  subsets: string[][];
  position: number;
  commitments: { subset: string[]; value: number }[];
  defaulted: string[][];
  completed: boolean;
  installed_version: number | null;
}

const TOL = 1e-9;

export const m1Document: ModelDocument = {
  events: [
    { id: 'omega', kind: 'process' },
    { id: 'u', kind: 'simple' },
    { id: 'p', kind: 'process' },
    { id: 's', kind: 'simple' },
  ],
  omega: 'omega',
  causes: [
    ['omega', 'u'],
    ['p', 's'],
  ],
  triggers: [['u', 'p']],
  effectual: {
    p: [
      { subset: [], p: 0.1 },
      { subset: ['u'], p: 0.9 },
    ],
  },
  causal: {
    omega: [
      { subset: [], p: 0.4 },
      { subset: ['u'], p: 0.6 },
    ],
    p: [
      { subset: [], p: 0.3 },
      { subset: ['s'], p: 0.7 },
    ],
  },
};

// exact atoms of m1Document, checked against the inference engine;
// the root process occurs in every world
const m1Atoms: Atom[] = [
  [['omega'], 0.36],
  [['omega', 'p'], 0.012],
  [['omega', 'p', 's'], 0.028],
  [['omega', 'u'], 0.06],
  [['omega', 'u', 'p'], 0.162],
  [['omega', 'u', 'p', 's'], 0.378],
];

export const sharedEffectDocument: ModelDocument = {
  events: [
    { id: 'omega', kind: 'process' },
    { id: 'ta', kind: 'simple' },
    { id: 'tb', kind: 'simple' },
    { id: 'a', kind: 'process' },
    { id: 'b', kind: 'process' },
    { id: 'x', kind: 'simple' },
    { id: 'y', kind: 'simple' },
  ],
  omega: 'omega',
  causes: [
    ['omega', 'ta'],
    ['omega', 'tb'],
    ['a', 'x'],
    ['a', 'y'],
    ['b', 'y'],
  ],
  triggers: [
    ['ta', 'a'],
    ['tb', 'b'],
  ],
  effectual: {},
  causal: {},
};

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

function error(status: number, code: string, message: string, details: unknown = null): Response {
  return json(status, { code, message, details });
}

export class FakeService {
  models = new Map<string, FakeModel>();
  sessions = new Map<string, FakeSession>();
  private nextSession = 1;

  constructor() {
    this.models.set('m1', { id: 'm1', version: 1, document: m1Document, atoms: m1Atoms });
    this.models.set('shared', {
      id: 'shared',
      version: 1,
      document: sharedEffectDocument,
      atoms: [],
    });
  }

  /** Simulate another client committing to the same session. */
  commitOutOfBand(sid: string, value: number): void {
    const sess = this.sessions.get(sid);
    if (!sess) throw new Error(`no session ${sid}`);
    const subset = sess.subsets[sess.position];
    if (!subset) throw new Error('session already done');
    sess.commitments.push({ subset, value });
    sess.position += 1;
  }

  private sessionState(sess: FakeSession) {
    const done = sess.position >= sess.subsets.length;
    return {
      ...sess,
      total: sess.subsets.length,
      done,
      current: done ? null : sess.subsets[sess.position],
    };
  }

  private committed(sess: FakeSession, subset: string[]): number | undefined {
    const key = [...subset].sort().join(',');
    const hit = sess.commitments.find((c) => [...c.subset].sort().join(',') === key);
    return hit?.value;
  }

  private rangeFor(sess: FakeSession): { lo: number; hi: number } {
    const subset = sess.subsets[sess.position];
    if (!subset || subset.length === 1) return { lo: 0, hi: 1 };
    // pair bound from the committed singletons
    const [a, b] = subset;
    const pa = this.committed(sess, [a!]) ?? 0;
    const pb = this.committed(sess, [b!]) ?? 0;
    return { lo: Math.max(0, pa + pb - 1), hi: Math.min(pa, pb) };
  }

  handle(method: string, path: string, body: any): Response {
    let m: RegExpMatchArray | null;

    if (method === 'GET' && path === '/models') {
      const models = [...this.models.values()].map((x) => ({ id: x.id, version: x.version }));
      return json(200, { models });
    }
    if ((m = path.match(/^\/models\/([^/]+)$/)) && method === 'GET') {
      const model = this.models.get(m[1]!);
      if (!model) return error(404, 'NotFound', `no model ${m[1]}`);
      return json(200, { id: model.id, version: model.version, document: model.document });
    }
    if ((m = path.match(/^\/models\/([^/]+)\/query$/)) && method === 'POST') {
      const model = this.models.get(m[1]!);
      if (!model) return error(404, 'NotFound', `no model ${m[1]}`);
      const yes: string[] = body.true ?? [];
      const no: string[] = body.false ?? [];
      const targets: string[] = body.targets ?? [];
      const mass = (need: string[], ban: string[]) =>
        model.atoms
          .filter(([atom]) => need.every((e) => atom.includes(e)) && !ban.some((e) => atom.includes(e)))
          .reduce((acc, [, p]) => acc + p, 0);
      const ev = mass(yes, no);
      if (ev <= 0) {
        return error(409, 'ZeroEvidence', `evidence (true=${JSON.stringify(yes)}, false=${JSON.stringify(no)}) has probability zero`);
      }
      return json(200, { method: 'exact', probability: mass([...targets, ...yes], no) / ev });
    }
    if ((m = path.match(/^\/models\/([^/]+)\/sessions$/)) && method === 'POST') {
      const model = this.models.get(m[1]!);
      if (!model) return error(404, 'NotFound', `no model ${m[1]}`);
      const id = `sess-${this.nextSession++}`;
      const sess: FakeSession = {
        id,
        model_id: model.id,
        process: body.process,
        events: ['x', 'y'],
        subsets: [['x'], ['y'], ['x', 'y']],
        position: 0,
        commitments: [],
        defaulted: [],
        completed: false,
        installed_version: null,
      };
      this.sessions.set(id, sess);
      return json(201, this.sessionState(sess));
    }
    if ((m = path.match(/^\/sessions\/([^/]+)$/)) && method === 'GET') {
      const sess = this.sessions.get(m[1]!);
      if (!sess) return error(404, 'NotFound', `no session ${m[1]}`);
      return json(200, this.sessionState(sess));
    }
    if ((m = path.match(/^\/sessions\/([^/]+)\/range$/)) && method === 'GET') {
      const sess = this.sessions.get(m[1]!);
      if (!sess) return error(404, 'NotFound', `no session ${m[1]}`);
      if (sess.completed) return error(410, 'Gone', 'session already completed');
      const subset = sess.subsets[sess.position];
      if (!subset) return error(409, 'SessionStateError', 'session already visited every subset');
      const { lo, hi } = this.rangeFor(sess);
      return json(200, { subset, position: sess.position, lo, hi });
    }
    if ((m = path.match(/^\/sessions\/([^/]+)\/commit$/)) && method === 'POST') {
      const sess = this.sessions.get(m[1]!);
      if (!sess) return error(404, 'NotFound', `no session ${m[1]}`);
      if (body.position !== sess.position) {
        return error(409, 'StalePosition', 'session advanced since this range was read', {
          sent: body.position,
          stored: sess.position,
        });
      }
      const subset = sess.subsets[sess.position];
      if (!subset) return error(409, 'SessionStateError', 'session already visited every subset');
      let value: number = body.value;
      if (body.given?.length) {
        const base = this.committed(sess, body.given);
        if (base === undefined || base <= 0) {
          return error(409, 'UndefinedConditional', 'conditioning marginal unavailable');
        }
        value = value * base;
      }
      const { lo, hi } = this.rangeFor(sess);
      if (value < lo - TOL || value > hi + TOL) {
        return error(409, 'OutOfRange', `${value} is outside the legal range`, { value, lo, hi });
      }
      sess.commitments.push({ subset, value });
      sess.position += 1;
      return json(200, this.sessionState(sess));
    }
    if ((m = path.match(/^\/sessions\/([^/]+)\/default$/)) && method === 'POST') {
      const sess = this.sessions.get(m[1]!);
      if (!sess) return error(404, 'NotFound', `no session ${m[1]}`);
      if (body.position !== sess.position) {
        return error(409, 'StalePosition', 'session advanced since this range was read', {
          sent: body.position,
          stored: sess.position,
        });
      }
      const subset = sess.subsets[sess.position];
      if (!subset) return error(409, 'SessionStateError', 'session already visited every subset');
      if (subset.length === 1) {
        return error(409, 'SingletonDefault', `pr(${subset[0]}) must be given, not defaulted`);
      }
      sess.defaulted.push(subset);
      sess.position += 1;
      return json(200, this.sessionState(sess));
    }
    if ((m = path.match(/^\/sessions\/([^/]+)\/complete$/)) && method === 'POST') {
      const sess = this.sessions.get(m[1]!);
      if (!sess) return error(404, 'NotFound', `no session ${m[1]}`);
      if (sess.position < sess.subsets.length) {
        return error(409, 'SessionStateError', 'session has unvisited subsets');
      }
      const px = this.committed(sess, ['x']) ?? 0;
      const py = this.committed(sess, ['y']) ?? 0;
      const pxy = this.committed(sess, ['x', 'y']) ?? px * py;
      const table: TableRow[] = [
        { subset: [], p: 1 - px - py + pxy },
        { subset: ['x'], p: px - pxy },
        { subset: ['y'], p: py - pxy },
        { subset: ['x', 'y'], p: pxy },
      ];
      const model = this.models.get(sess.model_id)!;
      model.version += 1;
      sess.completed = true;
      sess.installed_version = model.version;
      return json(200, { installed_version: model.version, table });
    }
    return error(404, 'NotFound', `${method} ${path} has no handler`);
  }

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = new URL(String(input), 'http://fake.local');
    const method = init?.method ?? 'GET';
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    return this.handle(method, url.pathname, body);
  };
}

export function installFakeService(): FakeService {
  const fake = new FakeService();
  (globalThis as any).fetch = fake.fetch;
  return fake;
}
