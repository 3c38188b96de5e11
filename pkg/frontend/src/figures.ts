/**
 * The five figure layouts.  Each consumes the CSV outputs of the bkw-lwe
 * CLI (experiment records, theory values, cosine-check tables) and returns
 * an SVG string; simulated medians are recomputed from raw successful
 * trials, missing points become gaps.
 */

import {
  ExperimentRecord,
  TheoryRecord,
  CosineRecord,
  groupBy,
  medianMinSamples,
} from './csv.js';
import { renderChart, Series, Point } from './svg.js';

export type FigureId = 'fig1-alpha' | 'fig1-q' | 'fig2-lf' | 'fig2-amp' | 'fig3-cosine';

export const FIGURE_IDS: FigureId[] = [
  'fig1-alpha', 'fig1-q', 'fig2-lf', 'fig2-amp', 'fig3-cosine',
];

export class UnknownFigureError extends Error {
  constructor(id: string) {
    super(`unknown figure id "${id}" (expected one of ${FIGURE_IDS.join(', ')})`);
    this.name = 'UnknownFigureError';
  }
}

export interface FigureInputs {
  experiments?: ExperimentRecord[];
  theory?: TheoryRecord[];
  /** one cosine table per label, e.g. {"t=12": [...], "t=13": [...]} */
  cosine?: Record<string, CosineRecord[]>;
}

export interface RenderResult {
  svg: string;
  /** labels of series that came out empty (figure is still produced) */
  emptySeries: string[];
}

const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b'];

function simulatedSeries(
  records: ExperimentRecord[],
  xOf: (r: ExperimentRecord) => number,
  seriesKey: (r: ExperimentRecord) => string,
  colorOffset = 0,
): { series: Series[]; empty: string[] } {
  const series: Series[] = [];
  const empty: string[] = [];
  let idx = colorOffset;
  for (const [label, recs] of groupBy(records, seriesKey)) {
    const points: Point[] = [];
    for (const [, pointRecs] of groupBy(recs, (r) => String(r.point))) {
      points.push({ x: xOf(pointRecs[0]), y: medianMinSamples(pointRecs) });
    }
    points.sort((a, b) => a.x - b.x);
    if (points.every((p) => p.y === null)) empty.push(label);
    series.push({
      label: `${label} (simulated)`,
      points,
      color: PALETTE[idx % PALETTE.length],
      marker: 'circle',
    });
    idx += 1;
  }
  return { series, empty };
}

function theorySeries(records: TheoryRecord[], xOf: (r: TheoryRecord) => number): Series[] {
  const series: Series[] = [];
  let idx = 0;
  for (const [label, recs] of groupBy(records, (r) => r.distinguisher)) {
    const points = recs
      .map((r) => ({ x: xOf(r), y: r.samples }))
      .sort((a, b) => a.x - b.x);
    series.push({
      label: `${label} (theory)`,
      points,
      color: PALETTE[idx % PALETTE.length],
      marker: 'none',
      dashed: true,
    });
    idx += 1;
  }
  return series;
}

function fig1(inputs: FigureInputs, xField: 'alpha' | 'q'): RenderResult {
  const exp = inputs.experiments ?? [];
  const theo = inputs.theory ?? [];
  const sim = simulatedSeries(exp, (r) => r[xField], (r) => r.distinguisher);
  const series = [...theorySeries(theo, (r) => r[xField]), ...sim.series];
  const svg = renderChart(series, {
    title: `Sample complexity vs ${xField === 'alpha' ? 'noise rate' : 'modulus'}`,
    xLabel: xField === 'alpha' ? 'alpha' : 'q',
    yLabel: 'samples',
    logY: true,
  });
  return { svg, emptySeries: sim.empty };
}

function fig2(inputs: FigureInputs, mode: 'lf' | 'amp'): RenderResult {
  const exp = inputs.experiments ?? [];
  const key =
    mode === 'lf'
      ? (r: ExperimentRecord) => r.strategy
      : (r: ExperimentRecord) => (r.amplified ? 'amplified' : 'unlimited');
  const sim = simulatedSeries(exp, (r) => r.alpha, key);
  const svg = renderChart(sim.series, {
    title: mode === 'lf' ? 'LF1 vs LF2' : 'Unlimited vs amplified samples',
    xLabel: 'alpha',
    yLabel: 'samples',
    logY: true,
  });
  return { svg, emptySeries: sim.empty };
}

function fig3(inputs: FigureInputs): RenderResult {
  const tables = inputs.cosine ?? {};
  const series: Series[] = [];
  const empty: string[] = [];
  let idx = 0;
  for (const [label, recs] of Object.entries(tables)) {
    if (recs.length === 0) empty.push(label);
    series.push({
      label: `g(e) ${label}`,
      points: recs.map((r) => ({ x: r.e, y: r.g })),
      color: PALETTE[idx % PALETTE.length],
      marker: 'none',
    });
    series.push({
      label: `cosine model ${label}`,
      points: recs.map((r) => ({ x: r.e, y: r.model })),
      color: PALETTE[(idx + 1) % PALETTE.length],
      marker: 'none',
      dashed: true,
    });
    idx += 2;
  }
  const svg = renderChart(series, {
    title: 'Log-likelihood terms vs cosine approximation',
    xLabel: 'e (signed residue)',
    yLabel: 'g(e) = log(q pmf(e))',
  });
  return { svg, emptySeries: empty };
}

export function render(id: FigureId | string, inputs: FigureInputs): RenderResult {
  switch (id) {
    case 'fig1-alpha':
      return fig1(inputs, 'alpha');
    case 'fig1-q':
      return fig1(inputs, 'q');
    case 'fig2-lf':
      return fig2(inputs, 'lf');
    case 'fig2-amp':
      return fig2(inputs, 'amp');
    case 'fig3-cosine':
      return fig3(inputs);
    default:
      throw new UnknownFigureError(id);
  }
}
