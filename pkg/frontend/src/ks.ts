// Display-side model of the system dump: enough structure to draw the graph.
// The service stays the authority on validation and semantics.

export interface KsGraph {
  aps: string[];
  directions: string[];
  init: string;
  states: string[]; // proper states in dump order; init is not a member
  labels: Record<string, string[]>;
  trans: Record<string, Record<string, string>>;
}

export function allStates(g: KsGraph): string[] {
  return [g.init, ...g.states];
}

class Scanner {
  private pos = 0;
  private line = 1;

  constructor(private readonly text: string) {}

  private skip(): void {
    while (this.pos < this.text.length) {
      const c = this.text[this.pos];
      if (c === '#') {
        while (this.pos < this.text.length && this.text[this.pos] !== '\n') this.pos++;
      } else if (c === '\n') {
        this.line++;
        this.pos++;
      } else if (c === ' ' || c === '\t' || c === '\r') {
        this.pos++;
      } else {
        return;
      }
    }
  }

  fail(message: string): never {
    throw new Error(`system dump line ${this.line}: ${message}`);
  }

  done(): boolean {
    this.skip();
    return this.pos >= this.text.length;
  }

  peek(): string {
    this.skip();
    return this.pos < this.text.length ? this.text[this.pos] : '';
  }

  tryPunct(tok: string): boolean {
    this.skip();
    if (this.text.startsWith(tok, this.pos)) {
      this.pos += tok.length;
      return true;
    }
    return false;
  }

  punct(tok: string): void {
    if (!this.tryPunct(tok)) this.fail(`expected ${JSON.stringify(tok)}`);
  }

  tryIdent(): string | null {
    this.skip();
    const m = /^[A-Za-z_][A-Za-z0-9_]*/.exec(this.text.slice(this.pos));
    if (!m) return null;
    this.pos += m[0].length;
    return m[0];
  }

  ident(): string {
    const word = this.tryIdent();
    if (word === null) this.fail('expected a name');
    return word;
  }
}

function identList(sc: Scanner): string[] {
  const out: string[] = [];
  if (sc.peek() === ';' || sc.peek() === '}') return out;
  out.push(sc.ident());
  while (sc.tryPunct(',')) out.push(sc.ident());
  return out;
}

export function parseKs(text: string): KsGraph {
  const sc = new Scanner(text);
  let aps: string[] = [];
  let directions: string[] = [];
  let init = '';
  const states: string[] = [];
  const labels: Record<string, string[]> = {};
  const trans: Record<string, Record<string, string>> = {};
  while (!sc.done()) {
    const word = sc.ident();
    if (word === 'aps' || word === 'directions') {
      sc.punct(':');
      const names = identList(sc);
      sc.punct(';');
      if (word === 'aps') aps = names;
      else directions = names;
      continue;
    }
    if (word !== 'state') sc.fail(`unexpected ${JSON.stringify(word)}`);
    const name = sc.ident();
    const isInit = sc.tryIdent() === 'init';
    if (isInit) init = name;
    else states.push(name);
    sc.punct('{');
    sc.ident(); // labels keyword
    sc.punct('{');
    labels[name] = identList(sc).sort();
    sc.punct('}');
    sc.punct(';');
    const out: Record<string, string> = {};
    while (!sc.tryPunct('}')) {
      const dir = sc.ident();
      sc.punct('->');
      out[dir] = sc.ident();
      sc.punct(';');
    }
    trans[name] = out;
  }
  if (!init) sc.fail('no state is marked init');
  return { aps, directions, init, states, labels, trans };
}

function maskBits(mask: number, width: number): string {
  let out = '';
  for (let j = 0; j < width; j++) out += mask & (1 << j) ? '1' : '0';
  return out;
}

// Mirror of the announcement product the service applies for prophecy play:
// every proper state and direction is copied once per valuation of the
// announcement propositions, and the chosen direction stamps its bits onto
// the target state. Needed only to draw what the session payload names.
export function extendGraph(g: KsGraph, names: string[]): KsGraph {
  if (names.length === 0) return g;
  const masks = Array.from({ length: 1 << names.length }, (_, m) => m);
  const taken = new Set([...allStates(g), ...g.directions]);
  let sep = '__';
  const collides = (s: string) => masks.some((m) => taken.has(`${s}${sep}${maskBits(m, names.length)}`));
  while (g.states.some(collides) || g.directions.some(collides)) sep += '_';
  const sname = (s: string, m: number) => `${s}${sep}${maskBits(m, names.length)}`;
  const dname = (d: string, m: number) => `${d}${sep}${maskBits(m, names.length)}`;
  const onBits = (m: number) => names.filter((_, j) => m & (1 << j));

  const states = g.states.flatMap((s) => masks.map((m) => sname(s, m)));
  const directions = g.directions.flatMap((d) => masks.map((m) => dname(d, m)));
  const labels: Record<string, string[]> = { [g.init]: g.labels[g.init] };
  for (const s of g.states) {
    for (const m of masks) labels[sname(s, m)] = [...g.labels[s], ...onBits(m)].sort();
  }
  const trans: Record<string, Record<string, string>> = {};
  const edgeRow = (src: string, base: Record<string, string>) => {
    const out: Record<string, string> = {};
    for (const d of g.directions) {
      for (const m of masks) out[dname(d, m)] = sname(base[d], m);
    }
    trans[src] = out;
  };
  edgeRow(g.init, g.trans[g.init]);
  for (const s of g.states) {
    for (const m of masks) edgeRow(sname(s, m), g.trans[s]);
  }
  return { aps: [...g.aps, ...names], directions, init: g.init, states, labels, trans };
}
