import { FullTranscript, TranscriptRow, ViewModel } from './types';
import { KsGraph, allStates } from './ks';
import { PANEL_HEIGHT, PANEL_WIDTH, Point, circleLayout } from './layout';

export interface BoardContext {
  graph: KsGraph; // display graph; already extended for prophecy sessions
  players: number;
  directions: string[];
  notice?: string; // inline message from the last rejected action
}

const NODE_R = 16;

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#x27;');
}

function edgePath(a: Point, b: Point, bend: number): string {
  if (a.x === b.x && a.y === b.y) {
    // self loop drawn above the node
    return `M ${a.x - 8} ${a.y - 12} C ${a.x - 20} ${a.y - 44}, ${a.x + 20} ${a.y - 44}, ${a.x + 8} ${a.y - 12}`;
  }
  const mx = (a.x + b.x) / 2;
  const my = (a.y + b.y) / 2;
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const len = Math.hypot(dx, dy) || 1;
  const cx = Math.round(mx - (dy / len) * bend);
  const cy = Math.round(my + (dx / len) * bend);
  return `M ${a.x} ${a.y} Q ${cx} ${cy} ${b.x} ${b.y}`;
}

function labelPos(a: Point, b: Point, bend: number): Point {
  if (a.x === b.x && a.y === b.y) return { x: a.x, y: a.y - 40 };
  const mx = (a.x + b.x) / 2;
  const my = (a.y + b.y) / 2;
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const len = Math.hypot(dx, dy) || 1;
  return { x: Math.round(mx - (dy / len) * bend * 0.8), y: Math.round(my + (dx / len) * bend * 0.8) };
}

export function renderGraphSvg(graph: KsGraph, current: string): string {
  const names = allStates(graph);
  const points = circleLayout(names);
  const parts: string[] = [
    `<svg viewBox="0 0 ${PANEL_WIDTH} ${PANEL_HEIGHT}" xmlns="http://www.w3.org/2000/svg">`,
    '<defs><marker id="arrow" viewBox="0 0 8 8" refX="7" refY="4" markerWidth="6" markerHeight="6" orient="auto"><path d="M 0 0 L 8 4 L 0 8 z"/></marker></defs>',
  ];
  for (const src of names) {
    // one curve per target, labelled with every direction that reaches it
    const byTarget = new Map<string, string[]>();
    for (const dir of graph.directions) {
      const dst = graph.trans[src][dir];
      const dirs = byTarget.get(dst);
      if (dirs) dirs.push(dir);
      else byTarget.set(dst, [dir]);
    }
    for (const [dst, dirs] of byTarget) {
      const a = points.get(src)!;
      const b = points.get(dst)!;
      const back = src !== dst && names.indexOf(dst) < names.indexOf(src);
      const bend = src === dst ? 0 : back ? -18 : 18;
      const at = labelPos(a, b, bend);
      parts.push(
        `<path class="edge" d="${edgePath(a, b, bend)}" fill="none" marker-end="url(#arrow)"/>`,
        `<text class="edge-label" x="${at.x}" y="${at.y}">${escapeHtml(dirs.join(','))}</text>`
      );
    }
  }
  for (const name of names) {
    const p = points.get(name)!;
    const cls = name === current ? 'node current' : 'node';
    const tags = graph.labels[name].join(',');
    parts.push(
      `<g class="${cls}" data-state="${escapeHtml(name)}">`,
      `<circle cx="${p.x}" cy="${p.y}" r="${NODE_R}"/>`,
      `<text class="state-name" x="${p.x}" y="${p.y + 4}">${escapeHtml(name)}</text>`,
      `<text class="state-labels" x="${p.x}" y="${p.y + NODE_R + 12}">{${escapeHtml(tags)}}</text>`,
      '</g>'
    );
  }
  parts.push('</svg>');
  return parts.join('');
}

export function renderPanel(copy: number, state: string, badges: string[], graph: KsGraph): string {
  const pills = badges
    .map((name) => `<span class="badge" title="prophecy">${escapeHtml(name)}</span>`)
    .join('');
  return [
    `<section class="panel" data-copy="${copy}">`,
    `<h3>copy ${copy}: ${escapeHtml(state)}${pills}</h3>`,
    renderGraphSvg(graph, state),
    '</section>',
  ].join('');
}

export function renderPlaceholder(copy: number): string {
  return [
    `<section class="panel placeholder" data-copy="${copy}">`,
    `<h3>copy ${copy}</h3>`,
    '<p class="hidden-note">not observable</p>',
    '</section>',
  ].join('');
}

function renderMoves(vm: ViewModel, directions: string[]): string {
  const myTurn = vm.legal_directions.length > 0;
  const reason = vm.closed ? 'session closed' : 'opponent&#x27;s turn';
  const buttons = directions
    .map((d) => {
      const legal = vm.legal_directions.includes(d);
      return legal
        ? `<button class="move" data-direction="${escapeHtml(d)}">${escapeHtml(d)}</button>`
        : `<button class="move" data-direction="${escapeHtml(d)}" disabled>${escapeHtml(d)}</button>`;
    })
    .join('');
  const note = myTurn ? '' : `<span class="wait-note">${reason}</span>`;
  return `<div class="moves">${buttons}${note}</div>`;
}

function renderRows(rows: TranscriptRow[]): string {
  const body = rows
    .map(
      (r) =>
        `<tr><td>${r.step}</td><td>${escapeHtml(r.obs)}</td><td>${escapeHtml(r.direction)}</td><td>${escapeHtml(r.by)}</td></tr>`
    )
    .join('');
  return [
    '<table class="transcript"><thead><tr><th>step</th><th>observation</th><th>move</th><th>by</th></tr></thead>',
    `<tbody>${body}</tbody></table>`,
  ].join('');
}

// One panel per copy: the graph with the current state marked when the copy
// is observable, an explicit placeholder otherwise. Never stale data.
export function renderView(vm: ViewModel, ctx: BoardContext, rows?: TranscriptRow[]): string {
  const seen = new Map(vm.copies.map((c) => [c.copy, c.state]));
  const panels: string[] = [];
  for (let copy = 1; copy <= ctx.players; copy++) {
    const state = seen.get(copy);
    if (state === undefined) {
      panels.push(renderPlaceholder(copy));
      continue;
    }
    const badges = vm.prophecies[String(copy)] ?? [];
    panels.push(renderPanel(copy, state, badges, ctx.graph));
  }
  const status = vm.closed
    ? '<span class="turn closed-note">session closed</span>'
    : vm.mover === vm.player
      ? '<span class="turn mine">your turn</span>'
      : `<span class="turn">player ${vm.mover}&#x27;s turn</span>`;
  const banner = vm.closed ? '<div class="banner terminal">session closed</div>' : '';
  const notice = ctx.notice ? `<div class="notice" role="alert">${escapeHtml(ctx.notice)}</div>` : '';
  return [
    `<div class="session" data-player="${vm.player}">`,
    `<header>player ${vm.player} · round ${vm.round} · ${status}</header>`,
    banner,
    notice,
    `<div class="panels">${panels.join('')}</div>`,
    renderMoves(vm, ctx.directions),
    renderRows(rows ?? vm.own_transcript),
    '</div>',
  ].join('');
}

export function renderSchemaMismatch(message: string): string {
  return `<div class="banner schema-mismatch">${escapeHtml(message)}</div>`;
}

// Terminal banner for a finished fully-automated session: the dominant cycle
// color decides the winner by parity (even is good for the coalition).
export function renderOutcomeBanner(full: FullTranscript): string {
  if (!full.closed) return '<div class="banner">session still running</div>';
  const color = full.outcome ? full.outcome.dominant_color : full.dominant_color_so_far;
  const winner = color % 2 === 0 ? 'coalition wins' : 'opponents win';
  const cycle = full.outcome && full.outcome.cycle_found ? `cycle of length ${full.outcome.loop_length}` : 'no cycle closed';
  return `<div class="banner terminal ${color % 2 === 0 ? 'win' : 'loss'}">session over: dominant color ${color} (${cycle}) &#x2192; ${winner}</div>`;
}

// Spectator rendering of a finished play: outcome banner plus every move.
// The final vertex ends with the automaton state and the mover, so the copy
// count is its length minus two.
export function renderReplay(full: FullTranscript): string {
  const body = full.rows
    .map(
      (r) =>
        `<tr><td>${r.step}</td><td>${r.player}</td><td>${escapeHtml(r.obs)}</td><td>${escapeHtml(r.direction)}</td><td>${escapeHtml(r.by)}</td></tr>`
    )
    .join('');
  const finalCopies = full.final_vertex
    .slice(0, full.final_vertex.length - 2)
    .map((s, i) => `copy ${i + 1}: ${escapeHtml(String(s))}`)
    .join(' · ');
  return [
    `<div class="replay" data-session="${escapeHtml(full.session)}">`,
    renderOutcomeBanner(full),
    `<p class="final">${finalCopies}</p>`,
    '<table class="transcript"><thead><tr><th>step</th><th>player</th><th>observation</th><th>move</th><th>by</th></tr></thead>',
    `<tbody>${body}</tbody></table>`,
    '</div>',
  ].join('');
}
