import { z } from 'zod';

// Exact mirrors of the service payloads. Schemas are strict: an extra or
// missing field is a schema mismatch, never silently rendered.

export interface CopyView {
  copy: number;
  state: string;
}

export interface TranscriptRow {
  step: number;
  obs: string;
  direction: string;
  by: string;
}

export interface ViewModel {
  player: number;
  round: number;
  mover: number;
  copies: CopyView[];
  legal_directions: string[];
  prophecies: Record<string, string[]>;
  own_transcript: TranscriptRow[];
  closed: boolean;
}

export interface SessionSummary {
  id: string;
  players: number;
  trace_vars: string[];
  coalition: number[];
  humans: number[];
  directions: string[];
  prophecies: string[];
  horizon: number;
  closed: boolean;
  views?: Record<string, ViewModel>;
}

export interface ScopedTranscript {
  session: string;
  player: number;
  rows: TranscriptRow[];
  closed: boolean;
}

export interface FullRow extends TranscriptRow {
  player: number;
}

export interface Outcome {
  cycle_found: boolean;
  dominant_color: number;
  winner: string | null;
  loop_length: number;
}

export interface FullTranscript {
  session: string;
  rows: FullRow[];
  closed: boolean;
  final_vertex: (string | number)[];
  dominant_color_so_far: number;
  outcome?: Outcome;
}

const rowSchema = z
  .object({
    step: z.number().int(),
    obs: z.string(),
    direction: z.string(),
    by: z.string(),
  })
  .strict();

export const viewModelSchema = z
  .object({
    player: z.number().int(),
    round: z.number().int(),
    mover: z.number().int(),
    copies: z.array(z.object({ copy: z.number().int(), state: z.string() }).strict()),
    legal_directions: z.array(z.string()),
    prophecies: z.record(z.array(z.string())),
    own_transcript: z.array(rowSchema),
    closed: z.boolean(),
  })
  .strict();

export const sessionSummarySchema = z
  .object({
    id: z.string(),
    players: z.number().int(),
    trace_vars: z.array(z.string()),
    coalition: z.array(z.number().int()),
    humans: z.array(z.number().int()),
    directions: z.array(z.string()),
    prophecies: z.array(z.string()),
    horizon: z.number().int(),
    closed: z.boolean(),
    views: z.record(viewModelSchema).optional(),
  })
  .strict();

export const scopedTranscriptSchema = z
  .object({
    session: z.string(),
    player: z.number().int(),
    rows: z.array(rowSchema),
    closed: z.boolean(),
  })
  .strict();

export const fullTranscriptSchema = z
  .object({
    session: z.string(),
    rows: z.array(rowSchema.extend({ player: z.number().int() }).strict()),
    closed: z.boolean(),
    final_vertex: z.array(z.union([z.string(), z.number()])),
    dominant_color_so_far: z.number().int(),
    outcome: z
      .object({
        cycle_found: z.boolean(),
        dominant_color: z.number().int(),
        winner: z.string().nullable(),
        loop_length: z.number().int(),
      })
      .strict()
      .optional(),
  })
  .strict();

export class SchemaMismatchError extends Error {
  constructor(what: string, detail: string) {
    super(`${what} payload does not match the expected schema: ${detail}`);
    this.name = 'SchemaMismatchError';
  }
}

export function parseViewModel(data: unknown): ViewModel {
  const res = viewModelSchema.safeParse(data);
  if (!res.success) throw new SchemaMismatchError('view', res.error.message);
  return res.data;
}

export function parseSessionSummary(data: unknown): SessionSummary {
  const res = sessionSummarySchema.safeParse(data);
  if (!res.success) throw new SchemaMismatchError('session', res.error.message);
  return res.data;
}

export function parseScopedTranscript(data: unknown): ScopedTranscript {
  const res = scopedTranscriptSchema.safeParse(data);
  if (!res.success) throw new SchemaMismatchError('transcript', res.error.message);
  return res.data;
}

export function parseFullTranscript(data: unknown): FullTranscript {
  const res = fullTranscriptSchema.safeParse(data);
  if (!res.success) throw new SchemaMismatchError('transcript', res.error.message);
  return res.data;
}
