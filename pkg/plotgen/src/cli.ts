#!/usr/bin/env node
/** plotgen render: semilog BER figures from simulator CSV sweeps.
 *
 * Usage:
 *   plotgen render --csv sweep1.csv [--csv sweep2.csv ...] [--bound bound.csv]
 *                  --out figure.svg [--floor 1e-6] [--title text]
 *                  [--xlim lo:hi] [--ylim lo:hi]
 *
 * Exit codes: 0 ok, 2 usage/config error, 1 malformed input.
 */

import { readFileSync, writeFileSync } from 'node:fs';

import { CsvError, parseBerCsv, parseBoundCsv } from './csv.js';
import { boundSeries, groupSeries, renderSvg, CurveSpec } from './chart.js';

interface Options {
  csv: string[];
  bound?: string;
  out?: string;
  floor: number;
  title?: string;
  xlim?: [number, number];
  ylim?: [number, number];
}

class UsageError extends Error {}

function parseRange(text: string): [number, number] {
  const parts = text.split(':').map(Number);
  if (parts.length !== 2 || parts.some(Number.isNaN)) {
    throw new UsageError(`bad range ${JSON.stringify(text)}; expected lo:hi`);
  }
  return [parts[0], parts[1]];
}

export function parseArgs(argv: string[]): Options {
  if (argv[0] !== 'render') {
    throw new UsageError('expected subcommand: render');
  }
  const opts: Options = { csv: [], floor: 1e-6 };
  for (let i = 1; i < argv.length; i++) {
    const flag = argv[i];
    const need = (): string => {
      const v = argv[++i];
      if (v === undefined) throw new UsageError(`${flag} needs a value`);
      return v;
    };
    switch (flag) {
      case '--csv': opts.csv.push(need()); break;
      case '--bound': opts.bound = need(); break;
      case '--out': opts.out = need(); break;
      case '--floor': {
        const f = Number(need());
        if (!(f > 0)) throw new UsageError('--floor must be > 0');
        opts.floor = f;
        break;
      }
      case '--title': opts.title = need(); break;
      case '--xlim': opts.xlim = parseRange(need()); break;
      case '--ylim': opts.ylim = parseRange(need()); break;
      default:
        throw new UsageError(`unknown flag ${JSON.stringify(flag)}`);
    }
  }
  if (opts.csv.length === 0) throw new UsageError('need at least one --csv input');
  if (!opts.out) throw new UsageError('--out is required');
  if (!opts.out.endsWith('.svg')) throw new UsageError('output format: only .svg is supported');
  return opts;
}

export function buildSpec(opts: Options, readFile: (p: string) => string = (p) => readFileSync(p, 'utf8')): CurveSpec {
  const rows = opts.csv.flatMap((path) => parseBerCsv(readFile(path), path));
  const series = groupSeries(rows, opts.floor);
  if (opts.bound) {
    series.push(boundSeries(parseBoundCsv(readFile(opts.bound), opts.bound)));
  }
  return { series, floor: opts.floor, title: opts.title, xlim: opts.xlim, ylim: opts.ylim };
}

export function main(argv: string[]): number {
  let opts: Options;
  try {
    opts = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 2;
    }
    throw err;
  }
  try {
    const svg = renderSvg(buildSpec(opts));
    writeFileSync(opts.out!, svg);
  } catch (err) {
    if (err instanceof CsvError || err instanceof Error) {
      console.error(err.message);
      return 1;
    }
    throw err;
  }
  return 0;
}

const isDirect = process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isDirect) {
  process.exit(main(process.argv.slice(2)));
}
