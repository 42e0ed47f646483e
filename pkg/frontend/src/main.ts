import { ApiClient } from './api';
import { renderOutcomeBanner, renderReplay, renderSchemaMismatch } from './board';
import { SessionPage, boardContext } from './controller';
import { SchemaMismatchError } from './types';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function field(id: string): string {
  return el<HTMLInputElement | HTMLTextAreaElement>(id).value;
}

export function mount(): void {
  const board = el<HTMLDivElement>('board');
  let page: SessionPage | null = null;

  const draw = () => {
    if (page) board.innerHTML = page.render();
  };

  board.addEventListener('click', (ev) => {
    const target = ev.target as HTMLElement;
    if (!page || !(target instanceof HTMLButtonElement) || target.disabled) return;
    const direction = target.dataset.direction;
    if (direction) void page.submitMove(direction).then(draw);
  });

  el<HTMLButtonElement>('create').addEventListener('click', async () => {
    const api = new ApiClient(field('server') || window.location.origin);
    const player = Number(field('player'));
    const ks = field('ks');
    try {
      const summary = await api.createSession({
        ks,
        formula: field('formula'),
        prophecy: field('prophecy'),
        human_players: [player],
        opponent: { kind: 'random', seed: Number(field('seed')) || 0 },
        assist: field('certificate') ? { kind: 'certificate', certificate: field('certificate') } : undefined,
      });
      page = await SessionPage.open(api, summary.id, player, boardContext(ks, summary));
      el<HTMLSpanElement>('session-id').textContent = summary.id;
      draw();
    } catch (err) {
      if (err instanceof SchemaMismatchError) {
        board.innerHTML = renderSchemaMismatch(err.message);
        return;
      }
      board.innerHTML = `<div class="notice" role="alert">${String(err)}</div>`;
    }
  });

  el<HTMLButtonElement>('refresh').addEventListener('click', async () => {
    if (!page) return;
    await page.refresh();
    draw();
  });

  el<HTMLButtonElement>('engine').addEventListener('click', async () => {
    if (!page) return;
    await page.engineMove();
    draw();
  });

  el<HTMLButtonElement>('replay').addEventListener('click', async () => {
    const api = new ApiClient(field('server') || window.location.origin);
    const full = await api.fullTranscript(field('replay-id'));
    board.innerHTML = full.closed ? renderReplay(full) : renderOutcomeBanner(full);
  });
}

if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', mount);
}
