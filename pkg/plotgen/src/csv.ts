/** Strict readers for the simulator's two CSV schemas. */

export interface BerRow {
  scheme: string;
  decoder: string;
  ebn0Db: number;
  trials: number;
  bitErrors: number;
  ber: number;
  stderr: number;
  seed: number;
}

export interface BoundRow {
  ebn0Db: number;
  boundValue: number;
  stderr: number;
  pairsEvaluated: number;
}

export class CsvError extends Error {
  constructor(public readonly file: string, public readonly row: number, detail: string) {
    super(`${file}:${row}: ${detail}`);
  }
}

const SIM_HEADER = 'scheme,decoder,ebn0_db,trials,bit_errors,ber,stderr,seed';
const BOUND_HEADER = 'ebn0_db,bound_value,stderr,pairs_evaluated';

function splitRows(text: string): string[] {
  return text.split(/\r?\n/).filter((line) => line.length > 0);
}

function num(file: string, row: number, field: string, raw: string): number {
  const value = Number(raw);
  if (raw.trim() === '' || Number.isNaN(value)) {
    throw new CsvError(file, row, `field ${field}: not a number: ${JSON.stringify(raw)}`);
  }
  return value;
}

export function parseBerCsv(text: string, file = '<input>'): BerRow[] {
  const lines = splitRows(text);
  if (lines.length === 0 || lines[0] !== SIM_HEADER) {
    throw new CsvError(file, 1, `expected header ${JSON.stringify(SIM_HEADER)}`);
  }
  return lines.slice(1).map((line, i) => {
    const row = i + 2;
    const f = line.split(',');
    if (f.length !== 8) {
      throw new CsvError(file, row, `expected 8 fields, got ${f.length}`);
    }
    return {
      scheme: f[0],
      decoder: f[1],
      ebn0Db: num(file, row, 'ebn0_db', f[2]),
      trials: num(file, row, 'trials', f[3]),
      bitErrors: num(file, row, 'bit_errors', f[4]),
      ber: num(file, row, 'ber', f[5]),
      stderr: num(file, row, 'stderr', f[6]),
      seed: num(file, row, 'seed', f[7]),
    };
  });
}

export function parseBoundCsv(text: string, file = '<input>'): BoundRow[] {
  const lines = splitRows(text);
  if (lines.length === 0 || lines[0] !== BOUND_HEADER) {
    throw new CsvError(file, 1, `expected header ${JSON.stringify(BOUND_HEADER)}`);
  }
  return lines.slice(1).map((line, i) => {
    const row = i + 2;
    const f = line.split(',');
    if (f.length !== 4) {
      throw new CsvError(file, row, `expected 4 fields, got ${f.length}`);
    }
    return {
      ebn0Db: num(file, row, 'ebn0_db', f[0]),
      boundValue: num(file, row, 'bound_value', f[1]),
      stderr: num(file, row, 'stderr', f[2]),
      pairsEvaluated: num(file, row, 'pairs_evaluated', f[3]),
    };
  });
}
