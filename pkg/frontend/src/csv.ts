/**
 * Parsers for the three CSV formats produced by the bkw-lwe CLI:
 * experiment records, theory values and cosine-check tables.
 *
 * Medians are always recomputed here from the raw per-trial records
 * (successful trials only); no pre-aggregated numbers are trusted.
 */

import Papa from 'papaparse';

export class MissingColumnError extends Error {
  constructor(public readonly column: string, public readonly file: string) {
    super(`${file}: missing required column "${column}"`);
    this.name = 'MissingColumnError';
  }
}

export class EmptyCsvError extends Error {
  constructor(file: string) {
    super(`${file}: no data rows`);
    this.name = 'EmptyCsvError';
  }
}

export interface ExperimentRecord {
  experiment: string;
  point: number;
  q: number;
  n: number;
  alpha: number;
  t: number;
  b: number;
  k: number;
  strategy: string;
  amplified: boolean;
  distinguisher: string;
  d: number | null;
  trial: number;
  seed: number;
  min_samples: number;
  success: boolean;
  wall_time_ms: number;
}

export interface TheoryRecord {
  q: number;
  alpha: number;
  t: number;
  k: number;
  eps: number;
  d: number | null;
  distinguisher: string;
  samples: number;
}

export interface CosineRecord {
  e: number;
  g: number;
  model: number;
}

const EXPERIMENT_COLUMNS = [
  'experiment', 'point', 'q', 'n', 'alpha', 't', 'b', 'k', 'strategy',
  'amplified', 'distinguisher', 'd', 'trial', 'seed', 'min_samples',
  'success', 'wall_time_ms',
];

const THEORY_COLUMNS = ['q', 'alpha', 't', 'k', 'eps', 'd', 'distinguisher', 'samples'];
const COSINE_COLUMNS = ['e', 'g', 'model'];

function parseRows(content: string, file: string, required: string[]): Record<string, string>[] {
  const parsed = Papa.parse<Record<string, string>>(content.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!fields.includes(col)) throw new MissingColumnError(col, file);
  }
  if (parsed.data.length === 0) throw new EmptyCsvError(file);
  return parsed.data;
}

export function parseExperimentCsv(content: string, file = '<experiment>'): ExperimentRecord[] {
  return parseRows(content, file, EXPERIMENT_COLUMNS).map((r) => ({
    experiment: r.experiment,
    point: Number(r.point),
    q: Number(r.q),
    n: Number(r.n),
    alpha: Number(r.alpha),
    t: Number(r.t),
    b: Number(r.b),
    k: Number(r.k),
    strategy: r.strategy,
    amplified: r.amplified === 'true',
    distinguisher: r.distinguisher,
    d: r.d === '' ? null : Number(r.d),
    trial: Number(r.trial),
    seed: Number(r.seed),
    min_samples: Number(r.min_samples),
    success: r.success === 'true',
    wall_time_ms: Number(r.wall_time_ms),
  }));
}

export function parseTheoryCsv(content: string, file = '<theory>'): TheoryRecord[] {
  return parseRows(content, file, THEORY_COLUMNS).map((r) => ({
    q: Number(r.q),
    alpha: Number(r.alpha),
    t: Number(r.t),
    k: Number(r.k),
    eps: Number(r.eps),
    d: r.d === '' ? null : Number(r.d),
    distinguisher: r.distinguisher,
    samples: Number(r.samples),
  }));
}

export function parseCosineCsv(content: string, file = '<cosine>'): CosineRecord[] {
  return parseRows(content, file, COSINE_COLUMNS).map((r) => ({
    e: Number(r.e),
    g: Number(r.g),
    model: Number(r.model),
  }));
}

export function median(values: number[]): number | null {
  if (values.length === 0) return null;
  const sorted = [...values].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  return sorted.length % 2 === 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2;
}

/** Median min_samples over successful trials within one group; null = gap. */
export function medianMinSamples(records: ExperimentRecord[]): number | null {
  return median(records.filter((r) => r.success).map((r) => r.min_samples));
}

/** Group records by a key function, preserving first-seen key order. */
export function groupBy<T>(items: T[], key: (item: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const item of items) {
    const k = key(item);
    const bucket = out.get(k);
    if (bucket) bucket.push(item);
    else out.set(k, [item]);
  }
  return out;
}
