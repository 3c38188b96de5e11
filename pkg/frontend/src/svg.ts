/**
 * Minimal dependency-free SVG chart builder: scatter + line series on
 * linear or log axes.  Output is a plain SVG string so rendering stays a
 * pure function of the input data.
 */

export interface Point {
  x: number;
  /** null marks a gap: the series line breaks, nothing is interpolated. */
  y: number | null;
}

export interface Series {
  label: string;
  points: Point[];
  color: string;
  /** draw connecting lines between consecutive non-gap points */
  line?: boolean;
  /** marker shape */
  marker?: 'circle' | 'square' | 'none';
  dashed?: boolean;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logY?: boolean;
  logX?: boolean;
  width?: number;
  height?: number;
}

const MARGIN = { top: 40, right: 30, bottom: 50, left: 80 };

function fmt(v: number): string {
  if (v === 0) return '0';
  const abs = Math.abs(v);
  if (abs >= 1e5 || abs < 1e-3) return v.toExponential(1);
  return Number(v.toPrecision(4)).toString();
}

interface Scale {
  (v: number): number;
  ticks: number[];
}

function makeScale(
  values: number[], rangeLo: number, rangeHi: number, log: boolean,
): Scale {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (log) {
    lo = Math.log10(lo);
    hi = Math.log10(hi);
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const scale = ((v: number) => {
    const t = ((log ? Math.log10(v) : v) - lo) / (hi - lo);
    return rangeLo + t * (rangeHi - rangeLo);
  }) as Scale;
  const ticks: number[] = [];
  if (log) {
    for (let p = Math.ceil(lo); p <= Math.floor(hi); p++) ticks.push(10 ** p);
    if (ticks.length < 2) {
      // a narrow log range still gets a few readable ticks
      const n = 4;
      for (let i = 0; i <= n; i++) ticks.push(10 ** (lo + ((hi - lo) * i) / n));
      ticks.splice(0, ticks.length - n - 1);
    }
  } else {
    const n = 5;
    for (let i = 0; i <= n; i++) ticks.push(lo + ((hi - lo) * i) / n);
  }
  scale.ticks = ticks;
  return scale;
}

function esc(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;').replace(/"/g, '&quot;');
}

export function renderChart(series: Series[], opts: ChartOptions): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 480;
  const plotW: [number, number] = [MARGIN.left, width - MARGIN.right];
  const plotH: [number, number] = [height - MARGIN.bottom, MARGIN.top];

  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) =>
    s.points.filter((p) => p.y !== null).map((p) => p.y as number),
  );
  if (xs.length === 0 || ys.length === 0) {
    // empty chart: axes only, so an all-gap figure is still produced
    xs.push(0, 1);
    ys.push(opts.logY ? 1 : 0, opts.logY ? 10 : 1);
  }
  const sx = makeScale(xs, plotW[0], plotW[1], opts.logX ?? false);
  const sy = makeScale(ys, plotH[0], plotH[1], opts.logY ?? false);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<text x="${width / 2}" y="22" text-anchor="middle" font-size="16" font-family="sans-serif">${esc(opts.title)}</text>`,
  );

  // axes and ticks
  parts.push(
    `<line x1="${plotW[0]}" y1="${plotH[0]}" x2="${plotW[1]}" y2="${plotH[0]}" stroke="black"/>`,
    `<line x1="${plotW[0]}" y1="${plotH[0]}" x2="${plotW[0]}" y2="${plotH[1]}" stroke="black"/>`,
  );
  for (const t of sx.ticks) {
    const x = sx(t);
    parts.push(
      `<line x1="${x}" y1="${plotH[0]}" x2="${x}" y2="${plotH[0] + 5}" stroke="black"/>`,
      `<text x="${x}" y="${plotH[0] + 20}" text-anchor="middle" font-size="11" font-family="sans-serif">${fmt(t)}</text>`,
    );
  }
  for (const t of sy.ticks) {
    const y = sy(t);
    parts.push(
      `<line x1="${plotW[0] - 5}" y1="${y}" x2="${plotW[0]}" y2="${y}" stroke="black"/>`,
      `<text x="${plotW[0] - 8}" y="${y + 4}" text-anchor="end" font-size="11" font-family="sans-serif">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(plotW[0] + plotW[1]) / 2}" y="${height - 10}" text-anchor="middle" font-size="13" font-family="sans-serif">${esc(opts.xLabel)}</text>`,
    `<text x="18" y="${(plotH[0] + plotH[1]) / 2}" text-anchor="middle" font-size="13" font-family="sans-serif" transform="rotate(-90 18 ${(plotH[0] + plotH[1]) / 2})">${esc(opts.yLabel)}</text>`,
  );

  // series
  for (const s of series) {
    if (s.line !== false) {
      // split into segments at gaps; single points render as markers only
      let segment: string[] = [];
      const flush = () => {
        if (segment.length >= 2) {
          const dash = s.dashed ? ' stroke-dasharray="6 4"' : '';
          parts.push(
            `<polyline points="${segment.join(' ')}" fill="none" stroke="${s.color}" stroke-width="1.5"${dash}/>`,
          );
        }
        segment = [];
      };
      for (const p of s.points) {
        if (p.y === null) flush();
        else segment.push(`${sx(p.x)},${sy(p.y)}`);
      }
      flush();
    }
    if (s.marker !== 'none') {
      for (const p of s.points) {
        if (p.y === null) continue;
        const x = sx(p.x);
        const y = sy(p.y);
        if (s.marker === 'square') {
          parts.push(`<rect x="${x - 3.5}" y="${y - 3.5}" width="7" height="7" fill="${s.color}"/>`);
        } else {
          parts.push(`<circle cx="${x}" cy="${y}" r="4" fill="${s.color}"/>`);
        }
      }
    }
  }

  // legend
  let ly = MARGIN.top + 8;
  for (const s of series) {
    const lx = plotW[1] - 210;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 24}" y2="${ly - 4}" stroke="${s.color}" stroke-width="2"${s.dashed ? ' stroke-dasharray="6 4"' : ''}/>`,
      `<text x="${lx + 30}" y="${ly}" font-size="12" font-family="sans-serif">${esc(s.label)}</text>`,
    );
    ly += 18;
  }

  parts.push('</svg>');
  return parts.join('\n');
}
