import { describe, expect, it } from 'vitest';

import {
  BoardContext,
  renderOutcomeBanner,
  renderReplay,
  renderSchemaMismatch,
  renderView,
} from '../src/board';
import { displayGraph } from '../src/controller';
import { FullTranscript, ViewModel, parseViewModel } from '../src/types';
import { fixture } from './helpers';

const base: ViewModel = {
  player: 2,
  round: 0,
  mover: 2,
  copies: [
    { copy: 1, state: 's_A' },
    { copy: 2, state: 's_init' },
  ],
  legal_directions: ['A', 'B'],
  prophecies: {},
  own_transcript: [],
  closed: false,
};

function ctx(): BoardContext {
  return { graph: displayGraph(fixture('fig1.ks'), []), players: 3, directions: ['A', 'B'] };
}

describe('board rendering', () => {
  it('draws one graph panel per visible copy and placeholders for the rest', () => {
    const html = renderView(base, ctx());
    expect(html.match(/<section class="panel" data-copy="1">/g)).toHaveLength(1);
    expect(html.match(/<section class="panel" data-copy="2">/g)).toHaveLength(1);
    expect(html).toContain('<section class="panel placeholder" data-copy="3">');
    expect(html).toContain('not observable');
    expect(html.match(/<svg /g)).toHaveLength(2);
    // panels appear in copy order
    const order = [...html.matchAll(/data-copy="(\d)"/g)].map((m) => m[1]);
    expect(order).toEqual(['1', '2', '3']);
  });

  it('marks exactly the current state in each panel', () => {
    const html = renderView(base, ctx());
    const marked = [...html.matchAll(/<g class="node current" data-state="([^"]+)"/g)].map((m) => m[1]);
    expect(marked).toEqual(['s_A', 's_init']);
  });

  it('renders stably for identical payloads', () => {
    expect(renderView(base, ctx())).toBe(renderView(base, ctx()));
  });

  it('enables exactly the legal moves on the mover turn', () => {
    const html = renderView({ ...base, legal_directions: ['B'] }, ctx());
    expect(html).toContain('<button class="move" data-direction="A" disabled>A</button>');
    expect(html).toContain('<button class="move" data-direction="B">B</button>');
  });

  it('disables all move buttons with a waiting note when it is not our turn', () => {
    const html = renderView({ ...base, mover: 1, legal_directions: [] }, ctx());
    expect(html).toContain('<button class="move" data-direction="A" disabled>');
    expect(html).toContain('<button class="move" data-direction="B" disabled>');
    expect(html).toContain('opponent&#x27;s turn');
    expect(html).toContain('player 1&#x27;s turn');
  });

  it('shows a badge on the copy whose announcement holds', () => {
    const graph = displayGraph(fixture('fig1.ks'), ['p']);
    const vm: ViewModel = {
      ...base,
      copies: [
        { copy: 1, state: 's_A__1' },
        { copy: 2, state: 's_init' },
      ],
      prophecies: { '1': ['p'] },
    };
    const html = renderView(vm, { graph, players: 2, directions: ['A__0', 'A__1', 'B__0', 'B__1'] });
    expect(html).toContain('<h3>copy 1: s_A__1<span class="badge" title="prophecy">p</span></h3>');
    expect(html).toContain('<h3>copy 2: s_init</h3>');
    expect(html).toContain('data-state="s_A__1"');
  });

  it('banners a closed session and keeps moves disabled', () => {
    const html = renderView({ ...base, legal_directions: [], closed: true }, ctx());
    expect(html).toContain('<div class="banner terminal">session closed</div>');
    expect(html).toContain('session closed</span>');
    expect(html).not.toContain('<button class="move" data-direction="A">');
  });

  it('surfaces the inline notice verbatim', () => {
    const html = renderView(base, { ...ctx(), notice: "it is player 4's turn, not player 2's" });
    expect(html).toContain('<div class="notice" role="alert">it is player 4&#x27;s turn, not player 2&#x27;s</div>');
  });

  it('lists own transcript rows in order', () => {
    const vm: ViewModel = {
      ...base,
      own_transcript: [
        { step: 1, obs: 'obs 2 s_A s_init', direction: 'A', by: 'human' },
        { step: 4, obs: 'obs 2 s_B s_A', direction: 'B', by: 'engine' },
      ],
    };
    const html = renderView(vm, ctx());
    expect(html).toContain('<tr><td>1</td><td>obs 2 s_A s_init</td><td>A</td><td>human</td></tr>');
    expect(html).toContain('<tr><td>4</td><td>obs 2 s_B s_A</td><td>B</td><td>engine</td></tr>');
  });
});

describe('schema mismatch', () => {
  it('rejects a payload with an extra field', () => {
    expect(() => parseViewModel({ ...base, automaton: 3 })).toThrow(/schema/);
  });

  it('rejects a payload with a missing field', () => {
    const { copies, ...rest } = base;
    expect(() => parseViewModel(rest)).toThrow(/schema/);
  });

  it('renders as a banner instead of a board', () => {
    const html = renderSchemaMismatch('view payload does not match the expected schema: boom');
    expect(html).toBe(
      '<div class="banner schema-mismatch">view payload does not match the expected schema: boom</div>'
    );
  });
});

describe('finished play rendering', () => {
  const finished: FullTranscript = {
    session: 'abc123',
    rows: [
      { step: 0, player: 1, obs: 'obs 1 s_init', direction: 'A__1', by: 'opponent' },
      { step: 1, player: 2, obs: 'obs 2 s_A__1 s_init', direction: 'B__0', by: 'engine' },
    ],
    closed: true,
    final_vertex: ['s_A__1', 's_B__0', 0, 1],
    dominant_color_so_far: 0,
    outcome: { cycle_found: true, dominant_color: 0, winner: 'coalition', loop_length: 4 },
  };

  it('declares the winner by parity of the dominant cycle color', () => {
    const banner = renderOutcomeBanner(finished);
    expect(banner).toContain('dominant color 0');
    expect(banner).toContain('cycle of length 4');
    expect(banner).toContain('coalition wins');
    expect(banner).toContain('class="banner terminal win"');
    const lost = renderOutcomeBanner({
      ...finished,
      outcome: { cycle_found: true, dominant_color: 1, winner: 'opponents', loop_length: 2 },
    });
    expect(lost).toContain('dominant color 1');
    expect(lost).toContain('opponents win');
    expect(lost).toContain('class="banner terminal loss"');
  });

  it('replays every move with the final copies', () => {
    const html = renderReplay(finished);
    expect(html).toContain('copy 1: s_A__1 · copy 2: s_B__0');
    expect(html).toContain('<td>0</td><td>1</td><td>obs 1 s_init</td><td>A__1</td><td>opponent</td>');
    expect(html).toContain('coalition wins');
  });
});
