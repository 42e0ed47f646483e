import { ApiClient, ApiError } from './api';
import { BoardContext, renderSchemaMismatch, renderView } from './board';
import { KsGraph, extendGraph, parseKs } from './ks';
import { SchemaMismatchError, SessionSummary, TranscriptRow, ViewModel } from './types';

// Display graph for a session: the dumped system, extended client-side when
// the session runs under announcement propositions.
export function displayGraph(ksText: string, prophecyNames: string[]): KsGraph {
  return extendGraph(parseKs(ksText), prophecyNames);
}

export function boardContext(ksText: string, summary: SessionSummary): BoardContext {
  return {
    graph: displayGraph(ksText, summary.prophecies),
    players: summary.players,
    directions: summary.directions,
  };
}

// One session role in one tab. The board state is only ever a server
// response: moves are never applied optimistically, and every request the
// page issues is scoped to its own player.
export class SessionPage {
  notice = '';
  private mismatch = '';
  private vm: ViewModel;
  private rows: TranscriptRow[];

  constructor(
    private readonly api: ApiClient,
    readonly sid: string,
    readonly player: number,
    private readonly ctx: BoardContext,
    vm: ViewModel
  ) {
    this.vm = vm;
    this.rows = vm.own_transcript;
  }

  static async open(api: ApiClient, sid: string, player: number, ctx: BoardContext): Promise<SessionPage> {
    const vm = await api.view(sid, player);
    return new SessionPage(api, sid, player, ctx, vm);
  }

  // Reload path: rebuild the board purely from the service, history first.
  static async reenter(api: ApiClient, sid: string, player: number, ctx: BoardContext): Promise<SessionPage> {
    const transcript = await api.transcript(sid, player);
    const page = await SessionPage.open(api, sid, player, ctx);
    page.rows = transcript.rows;
    return page;
  }

  get view(): ViewModel {
    return this.vm;
  }

  private accept(vm: ViewModel): void {
    this.vm = vm;
    this.rows = vm.own_transcript;
    this.notice = '';
  }

  private reject(err: unknown): void {
    if (err instanceof ApiError) {
      // rejected action: show the service error inline, board unchanged
      this.notice = err.message;
      return;
    }
    if (err instanceof SchemaMismatchError) {
      this.mismatch = err.message;
      return;
    }
    throw err;
  }

  async refresh(): Promise<void> {
    try {
      this.accept(await this.api.view(this.sid, this.player));
    } catch (err) {
      this.reject(err);
    }
  }

  async submitMove(direction: string): Promise<void> {
    try {
      this.accept(await this.api.move(this.sid, this.player, direction));
    } catch (err) {
      this.reject(err);
    }
  }

  async engineMove(): Promise<void> {
    try {
      this.accept(await this.api.autoMove(this.sid, this.player));
    } catch (err) {
      this.reject(err);
    }
  }

  render(): string {
    if (this.mismatch) return renderSchemaMismatch(this.mismatch);
    return renderView(this.vm, { ...this.ctx, notice: this.notice }, this.rows);
  }
}
