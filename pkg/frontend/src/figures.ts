/** The five figure kinds, each mapping simulator output files to an SVG. */

import { basename } from 'node:path';

import { parseCsv, parseMatrixCsv, requireColumns, SchemaMismatch, Table } from './csv.js';
import { parseSnapshot } from './snapshot.js';
import { heatmap, lineChart, Series } from './svg.js';

export interface FigureOptions {
  title?: string;
  /** slice row index; defaults to the mid row */
  row?: number;
  /** scaling-fit window used for the reference line anchor */
  tLo?: number;
}

function labelFor(path: string): string {
  return basename(path).replace(/\.(csv|json|bin)$/, '');
}

function recordTable(text: string, path: string): Table {
  const table = parseCsv(text);
  requireColumns(table, ['t', 'energy']);
  return table;
}

/** Energy history E(t), one curve per run record CSV. */
export function energyFigure(inputs: { path: string; text: string }[],
                             opts: FigureOptions = {}): string {
  const series: Series[] = inputs.map(({ path, text }) => {
    const table = recordTable(text, path);
    const [t, E] = requireColumns(table, ['t', 'energy']);
    return { x: t, y: E, label: labelFor(path) };
  });
  return lineChart(series, {
    title: opts.title ?? 'energy history',
    xLabel: 't',
    yLabel: 'E',
  });
}

/** Step-size history tau(t), one curve per run record CSV. */
export function stepsFigure(inputs: { path: string; text: string }[],
                            opts: FigureOptions = {}): string {
  const series: Series[] = inputs.map(({ path, text }) => {
    const table = parseCsv(text);
    const [t, tau] = requireColumns(table, ['t', 'tau']);
    return { x: t, y: tau, label: labelFor(path) };
  });
  return lineChart(series, {
    title: opts.title ?? 'adaptive step sizes',
    xLabel: 't',
    yLabel: 'tau',
    logY: true,
  });
}

/** Solution slices phi(x) at fixed y: slice CSVs, or a row cut from a
 * binary snapshot (opts.row, default the mid row). */
export function sliceFigure(inputs: { path: string; buffer: Buffer }[],
                            opts: FigureOptions = {}): string {
  const series: Series[] = inputs.map(({ path, buffer }) => {
    if (path.endsWith('.bin')) {
      const snap = parseSnapshot(buffer);
      const row = opts.row ?? Math.floor(snap.M / 2);
      if (row < 0 || row >= snap.M) {
        throw new SchemaMismatch(`row ${row} outside snapshot of size ${snap.M}`);
      }
      const h = snap.L / snap.M;
      const x: number[] = [];
      const y: number[] = [];
      for (let j = 0; j < snap.M; j++) {
        x.push(j * h);
        y.push(snap.data[row * snap.M + j]);
      }
      return { x, y, label: `${labelFor(path)} (row ${row})` };
    }
    const table = parseCsv(buffer.toString('utf8'));
    const [x, phi] = requireColumns(table, ['x', 'phi']);
    return { x, y: phi, label: labelFor(path) };
  });
  return lineChart(series, {
    title: opts.title ?? 'solution slice',
    xLabel: 'x',
    yLabel: 'phi',
  });
}

/** Field snapshot heatmap from a CHSN binary or a matrix CSV. */
export function snapshotFigure(input: { path: string; buffer: Buffer },
                               opts: FigureOptions = {}): string {
  let M: number;
  let data: ArrayLike<number>;
  let title = opts.title;
  if (input.path.endsWith('.csv')) {
    const rows = parseMatrixCsv(input.buffer.toString('utf8'));
    M = rows.length;
    if (rows[0].length !== M) {
      throw new SchemaMismatch(`snapshot CSV must be square, got ${M} x ${rows[0].length}`);
    }
    data = rows.flat();
  } else {
    const snap = parseSnapshot(input.buffer);
    M = snap.M;
    data = snap.data;
    title = title ?? `t = ${snap.t}`;
  }
  return heatmap(data, M, { title: title ?? labelFor(input.path) });
}

/** Log-log energy decay with a t^(-1/3) reference line. */
export function scalingFigure(inputs: { path: string; text: string }[],
                              opts: FigureOptions = {}): string {
  const series: Series[] = [];
  let anchorT = NaN;
  let anchorE = NaN;
  let tMax = -Infinity;
  for (const { path, text } of inputs) {
    const table = recordTable(text, path);
    const [t, E] = requireColumns(table, ['t', 'energy']);
    const x: number[] = [];
    const y: number[] = [];
    for (let i = 0; i < t.length; i++) {
      if (t[i] > 0 && E[i] > 0) {
        x.push(t[i]);
        y.push(E[i]);
      }
    }
    if (x.length === 0) throw new SchemaMismatch(`no positive (t, energy) rows in ${path}`);
    series.push({ x, y, label: labelFor(path) });
    const tLo = opts.tLo ?? x[Math.floor(x.length / 2)];
    for (let i = 0; i < x.length; i++) {
      if (x[i] >= tLo && !(anchorT <= x[i])) {
        anchorT = x[i];
        anchorE = y[i];
        break;
      }
    }
    tMax = Math.max(tMax, x[x.length - 1]);
  }
  // reference curve E ~ C t^(-1/3) anchored inside the fit window
  const c = anchorE * Math.pow(anchorT, 1 / 3);
  const refX: number[] = [];
  const refY: number[] = [];
  for (let i = 0; i <= 40; i++) {
    const t = anchorT * Math.pow(tMax / anchorT, i / 40);
    refX.push(t);
    refY.push(c * Math.pow(t, -1 / 3));
  }
  series.push({ x: refX, y: refY, label: 't^(-1/3)', color: '#444', dashed: true });
  return lineChart(series, {
    title: opts.title ?? 'energy scaling',
    xLabel: 't',
    yLabel: 'E',
    logX: true,
    logY: true,
  });
}

export const FIGURE_KINDS = ['energy', 'steps', 'slice', 'snapshot', 'scaling'] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];
