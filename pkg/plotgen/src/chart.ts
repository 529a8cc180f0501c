/** Deterministic semilog SVG rendering: BER (log y) against Eb/N0 in dB.
 *
 * Series are grouped by (scheme, decoder); a bound overlay plots as a dashed
 * line. Zero-BER points cannot sit on a log axis, so they are drawn as
 * hollow "floor markers" pinned to a configurable floor value instead of
 * being dropped.
 */

import { BerRow, BoundRow } from './csv.js';

export interface Series {
  label: string;
  points: { x: number; y: number }[];       // y > 0 only
  floorPoints: number[];                    // x positions of zero-BER rows
  dashed: boolean;
}

export interface CurveSpec {
  series: Series[];
  floor: number;
  title?: string;
  xlim?: [number, number];
  ylim?: [number, number];
  width?: number;
  height?: number;
}

export function groupSeries(rows: BerRow[], floor: number): Series[] {
  const byKey = new Map<string, BerRow[]>();
  for (const row of rows) {
    const key = `${row.scheme} / ${row.decoder}`;
    const list = byKey.get(key) ?? [];
    list.push(row);
    byKey.set(key, list);
  }
  return [...byKey.entries()].map(([label, group]) => {
    const sorted = [...group].sort((a, b) => a.ebn0Db - b.ebn0Db);
    return {
      label,
      points: sorted.filter((r) => r.ber > 0).map((r) => ({ x: r.ebn0Db, y: r.ber })),
      floorPoints: sorted.filter((r) => r.ber <= 0).map((r) => r.ebn0Db),
      dashed: false,
    };
  });
}

export function boundSeries(rows: BoundRow[]): Series {
  const sorted = [...rows].sort((a, b) => a.ebn0Db - b.ebn0Db);
  return {
    label: 'analytical bound',
    points: sorted.filter((r) => r.boundValue > 0).map((r) => ({ x: r.ebn0Db, y: r.boundValue })),
    floorPoints: [],
    dashed: true,
  };
}

const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b', '#17becf'];
const MARKERS = ['circle', 'square', 'diamond', 'triangle'] as const;

function fmt(v: number): string {
  return Number(v.toFixed(3)).toString();
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); Math.pow(10, e) <= hi * (1 + 1e-9); e++) {
    ticks.push(e);
  }
  return ticks;
}

function marker(kind: (typeof MARKERS)[number], cx: number, cy: number, color: string, hollow = false): string {
  const fill = hollow ? 'white' : color;
  const r = 3.2;
  switch (kind) {
    case 'circle':
      return `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${r}" fill="${fill}" stroke="${color}"/>`;
    case 'square':
      return `<rect x="${fmt(cx - r)}" y="${fmt(cy - r)}" width="${2 * r}" height="${2 * r}" fill="${fill}" stroke="${color}"/>`;
    case 'diamond':
      return `<path d="M ${fmt(cx)} ${fmt(cy - r - 1)} L ${fmt(cx + r + 1)} ${fmt(cy)} L ${fmt(cx)} ${fmt(cy + r + 1)} L ${fmt(cx - r - 1)} ${fmt(cy)} Z" fill="${fill}" stroke="${color}"/>`;
    case 'triangle':
      return `<path d="M ${fmt(cx)} ${fmt(cy - r - 1)} L ${fmt(cx + r + 1)} ${fmt(cy + r)} L ${fmt(cx - r - 1)} ${fmt(cy + r)} Z" fill="${fill}" stroke="${color}"/>`;
  }
}

export function renderSvg(spec: CurveSpec): string {
  if (spec.series.length === 0) {
    throw new Error('need at least one series');
  }
  for (const s of spec.series) {
    if (s.points.length === 0 && s.floorPoints.length === 0) {
      throw new Error(`series ${JSON.stringify(s.label)} has no points`);
    }
  }
  const width = spec.width ?? 640;
  const height = spec.height ?? 460;
  const m = { left: 64, right: 16, top: spec.title ? 34 : 16, bottom: 46 };

  const xs = spec.series.flatMap((s) => [...s.points.map((p) => p.x), ...s.floorPoints]);
  const ys = spec.series.flatMap((s) => s.points.map((p) => p.y));
  const xlim = spec.xlim ?? [Math.min(...xs), Math.max(...xs)];
  const yloRaw = Math.min(spec.floor, ...(ys.length ? ys : [spec.floor]));
  const yhiRaw = Math.max(...(ys.length ? ys : [1]), spec.floor * 10);
  const ylim = spec.ylim ?? [Math.pow(10, Math.floor(Math.log10(yloRaw))),
                             Math.pow(10, Math.ceil(Math.log10(yhiRaw)))];

  const plotW = width - m.left - m.right;
  const plotH = height - m.top - m.bottom;
  const sx = (x: number) =>
    m.left + ((x - xlim[0]) / Math.max(xlim[1] - xlim[0], 1e-12)) * plotW;
  const sy = (y: number) =>
    m.top + plotH - ((Math.log10(y) - Math.log10(ylim[0])) /
      Math.max(Math.log10(ylim[1]) - Math.log10(ylim[0]), 1e-12)) * plotH;

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif" font-size="11">`);
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (spec.title) {
    parts.push(`<text x="${width / 2}" y="20" text-anchor="middle" font-size="14">${spec.title}</text>`);
  }

  // grid and axes
  for (const e of logTicks(ylim[0], ylim[1])) {
    const y = sy(Math.pow(10, e));
    parts.push(`<line x1="${m.left}" y1="${fmt(y)}" x2="${width - m.right}" y2="${fmt(y)}" stroke="#dddddd"/>`);
    parts.push(`<text x="${m.left - 6}" y="${fmt(y + 3.5)}" text-anchor="end">1e${e}</text>`);
  }
  const xStep = (xlim[1] - xlim[0]) > 12 ? 2 : 1;
  for (let x = Math.ceil(xlim[0]); x <= xlim[1] + 1e-9; x += xStep) {
    const px = sx(x);
    parts.push(`<line x1="${fmt(px)}" y1="${m.top}" x2="${fmt(px)}" y2="${height - m.bottom}" stroke="#eeeeee"/>`);
    parts.push(`<text x="${fmt(px)}" y="${height - m.bottom + 16}" text-anchor="middle">${x}</text>`);
  }
  parts.push(`<rect x="${m.left}" y="${m.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333333"/>`);
  parts.push(`<text x="${m.left + plotW / 2}" y="${height - 10}" text-anchor="middle">Eb/N0 (dB)</text>`);
  parts.push(`<text x="16" y="${m.top + plotH / 2}" text-anchor="middle" transform="rotate(-90 16 ${m.top + plotH / 2})">BER</text>`);

  // floor line when any series needs it
  if (spec.series.some((s) => s.floorPoints.length > 0)) {
    const fy = sy(spec.floor);
    parts.push(`<line x1="${m.left}" y1="${fmt(fy)}" x2="${width - m.right}" y2="${fmt(fy)}" stroke="#bbbbbb" stroke-dasharray="2,3"/>`);
  }

  spec.series.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const mk = MARKERS[idx % MARKERS.length];
    const pts = s.points.map((p) => `${fmt(sx(p.x))},${fmt(sy(p.y))}`).join(' ');
    const dash = s.dashed ? ' stroke-dasharray="6,4"' : '';
    if (s.points.length > 1) {
      parts.push(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.6"${dash}/>`);
    }
    for (const p of s.points) {
      parts.push(marker(mk, sx(p.x), sy(p.y), color));
    }
    for (const x of s.floorPoints) {
      parts.push(marker(mk, sx(x), sy(spec.floor), color, true));
    }
  });

  // legend
  const legendX = m.left + 10;
  let legendY = m.top + 14;
  spec.series.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const dash = s.dashed ? ' stroke-dasharray="6,4"' : '';
    parts.push(`<line x1="${legendX}" y1="${legendY - 3}" x2="${legendX + 22}" y2="${legendY - 3}" stroke="${color}" stroke-width="1.6"${dash}/>`);
    parts.push(marker(MARKERS[idx % MARKERS.length], legendX + 11, legendY - 3, color));
    parts.push(`<text x="${legendX + 28}" y="${legendY}">${s.label}</text>`);
    legendY += 15;
  });

  parts.push('</svg>');
  return parts.join('\n') + '\n';
}
