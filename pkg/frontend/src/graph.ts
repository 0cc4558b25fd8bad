import type { ModelDocument } from './types.js';

/** Longest-path level per event: the root process sits at level 0, every
 * other event one past its deepest incoming edge. */
export function assignLevels(doc: ModelDocument): Map<string, number> {
  const incoming = new Map<string, string[]>();
  for (const e of doc.events) incoming.set(e.id, []);
  for (const [p, s] of doc.causes) incoming.get(s)?.push(p);
  for (const [s, p] of doc.triggers) incoming.get(p)?.push(s);

  const levels = new Map<string, number>();
  levels.set(doc.omega, 0);
  // relaxation: documents are acyclic, so |events| passes suffice
  for (let pass = 0; pass < doc.events.length; pass += 1) {
    let changed = false;
    for (const e of doc.events) {
      const parents = incoming.get(e.id) ?? [];
      if (e.id === doc.omega) continue;
      let best = -1;
      for (const parent of parents) {
        const lv = levels.get(parent);
        if (lv !== undefined && lv > best) best = lv;
      }
      if (best >= 0 && (levels.get(e.id) ?? -1) < best + 1) {
        levels.set(e.id, best + 1);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return levels;
}

const COL_W = 130;
const ROW_H = 46;
const PAD = 30;

interface Placed {
  x: number;
  y: number;
  kind: 'process' | 'simple';
}

/** Draw the model as columns of events by level; processes render bold. */
export function renderGraph(el: HTMLElement, doc: ModelDocument): void {
  const levels = assignLevels(doc);
  const byLevel = new Map<number, string[]>();
  for (const e of doc.events) {
    const lv = levels.get(e.id) ?? 0;
    const col = byLevel.get(lv) ?? [];
    col.push(e.id);
    byLevel.set(lv, col);
  }
  const kinds = new Map(doc.events.map((e) => [e.id, e.kind]));

  const placed = new Map<string, Placed>();
  let maxRows = 1;
  for (const [lv, ids] of byLevel) {
    ids.sort();
    maxRows = Math.max(maxRows, ids.length);
    ids.forEach((id, row) => {
      placed.set(id, {
        x: PAD + lv * COL_W,
        y: PAD + row * ROW_H,
        kind: kinds.get(id) ?? 'simple',
      });
    });
  }

  const width = PAD * 2 + (Math.max(...byLevel.keys(), 0) + 1) * COL_W;
  const height = PAD * 2 + maxRows * ROW_H;
  const svgNS = 'http://www.w3.org/2000/svg';
  const svg = document.createElementNS(svgNS, 'svg');
  svg.setAttribute('viewBox', `0 0 ${width} ${height}`);
  svg.setAttribute('class', 'graph');
  svg.setAttribute('role', 'img');

  const edge = (from: string, to: string, dashed: boolean) => {
    const a = placed.get(from);
    const b = placed.get(to);
    if (!a || !b) return;
    const line = document.createElementNS(svgNS, 'line');
    line.setAttribute('x1', String(a.x + 40));
    line.setAttribute('y1', String(a.y));
    line.setAttribute('x2', String(b.x - 40));
    line.setAttribute('y2', String(b.y));
    line.setAttribute('stroke', '#8a8a8a');
    if (dashed) line.setAttribute('stroke-dasharray', '4 3');
    svg.appendChild(line);
  };
  for (const [p, s] of doc.causes) edge(p, s, false);
  for (const [s, p] of doc.triggers) edge(s, p, true);

  for (const [id, pos] of placed) {
    const g = document.createElementNS(svgNS, 'g');
    const box = document.createElementNS(svgNS, 'rect');
    const isProcess = pos.kind === 'process';
    box.setAttribute('x', String(pos.x - 40));
    box.setAttribute('y', String(pos.y - 14));
    box.setAttribute('width', '80');
    box.setAttribute('height', '28');
    box.setAttribute('rx', isProcess ? '4' : '14');
    box.setAttribute('fill', isProcess ? '#eef3ff' : '#ffffff');
    box.setAttribute('stroke', '#333');
    box.setAttribute('stroke-width', isProcess ? '2.5' : '1');
    const label = document.createElementNS(svgNS, 'text');
    label.setAttribute('x', String(pos.x));
    label.setAttribute('y', String(pos.y + 4));
    label.setAttribute('text-anchor', 'middle');
    label.setAttribute('font-size', '12');
    if (isProcess) label.setAttribute('font-weight', 'bold');
    label.textContent = id;
    label.classList.add(isProcess ? 'node-process' : 'node-simple');
    g.appendChild(box);
    g.appendChild(label);
    svg.appendChild(g);
  }

  el.innerHTML = '';
  el.appendChild(svg);
}
