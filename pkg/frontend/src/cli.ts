#!/usr/bin/env node
/**
 * Render one figure from bkw-lwe CSV outputs.
 *
 * Usage:
 *   bkw-lwe-plots --figure fig1-alpha --experiment run.csv --theory theory.csv --out fig1.svg
 *   bkw-lwe-plots --figure fig2-lf --experiment lf1.csv --experiment lf2.csv --out fig2.svg
 *   bkw-lwe-plots --figure fig3-cosine --cosine t=12:cos12.csv --cosine t=13:cos13.csv --out fig3.svg
 */

import { readFileSync, writeFileSync } from 'fs';
import {
  parseCosineCsv,
  parseExperimentCsv,
  parseTheoryCsv,
  CosineRecord,
  ExperimentRecord,
  TheoryRecord,
} from './csv.js';
import { render, FIGURE_IDS, FigureInputs } from './figures.js';

interface Args {
  figure: string;
  experiment: string[];
  theory: string[];
  cosine: string[];
  out: string;
}

export function parseArgs(argv: string[]): Args {
  const args: Args = { figure: '', experiment: [], theory: [], cosine: [], out: '' };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case '--figure':
        args.figure = value;
        i++;
        break;
      case '--experiment':
        args.experiment.push(value);
        i++;
        break;
      case '--theory':
        args.theory.push(value);
        i++;
        break;
      case '--cosine':
        args.cosine.push(value);
        i++;
        break;
      case '--out':
        args.out = value;
        i++;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!args.figure) throw new Error('--figure is required');
  if (!args.out) throw new Error('--out is required');
  if (!FIGURE_IDS.includes(args.figure as never)) {
    throw new Error(`--figure must be one of ${FIGURE_IDS.join(', ')}`);
  }
  return args;
}

export function loadInputs(args: Args): FigureInputs {
  const inputs: FigureInputs = {};
  if (args.experiment.length > 0) {
    const records: ExperimentRecord[] = [];
    for (const path of args.experiment) {
      records.push(...parseExperimentCsv(readFileSync(path, 'utf8'), path));
    }
    inputs.experiments = records;
  }
  if (args.theory.length > 0) {
    const records: TheoryRecord[] = [];
    for (const path of args.theory) {
      records.push(...parseTheoryCsv(readFileSync(path, 'utf8'), path));
    }
    inputs.theory = records;
  }
  if (args.cosine.length > 0) {
    const tables: Record<string, CosineRecord[]> = {};
    for (const spec of args.cosine) {
      // "label:path"; a bare path is labeled by its filename
      const sep = spec.indexOf(':');
      const label = sep > 0 ? spec.slice(0, sep) : spec;
      const path = sep > 0 ? spec.slice(sep + 1) : spec;
      tables[label] = parseCosineCsv(readFileSync(path, 'utf8'), path);
    }
    inputs.cosine = tables;
  }
  return inputs;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const result = render(args.figure, loadInputs(args));
    for (const label of result.emptySeries) {
      console.warn(`warning: series "${label}" has no successful data points`);
    }
    writeFileSync(args.out, result.svg);
    console.log(`wrote ${args.figure} to ${args.out}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith('cli.js')) {
  process.exit(main(process.argv.slice(2)));
}
