/** Renders the two reference figure layouts from golden simulator output:
 * a four-series joint-decoder comparison and a bound-vs-simulation overlay.
 */

import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import { main } from '../src/cli.js';

const golden = (name: string) => join(__dirname, '..', 'golden', name);

describe('figure rendering from golden CSVs', () => {
  it('renders a four-series comparison figure', () => {
    const out = join(mkdtempSync(join(tmpdir(), 'plotgen-')), 'comparison.svg');
    const rc = main([
      'render',
      '--csv', golden('ciama_joint.csv'),
      '--csv', golden('stbc_joint.csv'),
      '--csv', golden('bia_mmse.csv'),
      '--csv', golden('p2p.csv'),
      '--title', 'joint decoding comparison',
      '--out', out,
    ]);
    expect(rc).toBe(0);
    const svg = readFileSync(out, 'utf8');
    expect((svg.match(/<polyline/g) ?? []).length).toBe(4);
    expect(svg).toContain('ciama / joint-mpa');
    expect(svg).toContain('stbc-scma / joint-mpa');
    expect(svg).toContain('bia / mmse');
    expect(svg).toContain('p2p-alamouti / ml');
  });

  it('renders the bound-vs-simulation overlay with floor markers', () => {
    const dir = mkdtempSync(join(tmpdir(), 'plotgen-'));
    const out = join(dir, 'overlay.svg');
    const rc = main([
      'render',
      '--csv', golden('ciama_joint.csv'),
      '--csv', golden('stbc_joint.csv'),
      '--bound', golden('bound.csv'),
      '--floor', '1e-6',
      '--out', out,
    ]);
    expect(rc).toBe(0);
    const svg = readFileSync(out, 'utf8');
    expect(svg).toContain('analytical bound');
    expect(svg).toContain('stroke-dasharray="6,4"');
    // the golden space-time run hits zero errors at high SNR -> floor markers
    expect(svg).toContain('fill="white"');
  });

  it('is byte-identical across repeated renders', () => {
    const dir = mkdtempSync(join(tmpdir(), 'plotgen-'));
    const a = join(dir, 'a.svg');
    const b = join(dir, 'b.svg');
    for (const out of [a, b]) {
      expect(main(['render', '--csv', golden('ciama_joint.csv'), '--out', out])).toBe(0);
    }
    expect(readFileSync(a, 'utf8')).toBe(readFileSync(b, 'utf8'));
  });

  it('fails with the offending row number on malformed input', () => {
    const dir = mkdtempSync(join(tmpdir(), 'plotgen-'));
    const bad = join(dir, 'bad.csv');
    const good = readFileSync(golden('ciama_joint.csv'), 'utf8').split('\n');
    good[3] = good[3].replace(/^ciama/, 'ciama,oops');
    writeFileSync(bad, good.join('\n'));
    const rc = main(['render', '--csv', bad, '--out', join(dir, 'x.svg')]);
    expect(rc).toBe(1);
  });

  it('rejects missing inputs and non-svg outputs as usage errors', () => {
    expect(main(['render', '--out', 'x.svg'])).toBe(2);
    expect(main(['render', '--csv', golden('p2p.csv'), '--out', 'x.png'])).toBe(2);
  });
});
