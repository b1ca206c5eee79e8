#!/usr/bin/env node
/** Render SVG figures from chstep output files.
 *
 * Usage:
 *   chstep-plots <kind> --out figure.svg [--title T] [--row I] [--t-lo X] <inputs...>
 *
 * kinds: energy | steps | slice | snapshot | scaling
 * Inputs are read-only; the only file written is --out.
 */

import { readFileSync, writeFileSync } from 'node:fs';

import {
  energyFigure,
  FIGURE_KINDS,
  FigureKind,
  FigureOptions,
  scalingFigure,
  sliceFigure,
  snapshotFigure,
  stepsFigure,
} from './figures.js';

interface Args {
  kind: FigureKind;
  out: string;
  inputs: string[];
  options: FigureOptions;
}

export function parseArgs(argv: string[]): Args {
  const [kind, ...rest] = argv;
  if (!FIGURE_KINDS.includes(kind as FigureKind)) {
    throw new Error(`figure kind must be one of ${FIGURE_KINDS.join(', ')}, got "${kind ?? ''}"`);
  }
  let out = '';
  const inputs: string[] = [];
  const options: FigureOptions = {};
  for (let i = 0; i < rest.length; i++) {
    const a = rest[i];
    const next = () => {
      if (i + 1 >= rest.length) throw new Error(`missing value after ${a}`);
      return rest[++i];
    };
    if (a === '--out') out = next();
    else if (a === '--title') options.title = next();
    else if (a === '--row') options.row = Number(next());
    else if (a === '--t-lo') options.tLo = Number(next());
    else if (a.startsWith('--')) throw new Error(`unknown option ${a}`);
    else inputs.push(a);
  }
  if (!out) throw new Error('--out <path.svg> is required');
  if (inputs.length === 0) throw new Error('at least one input file is required');
  return { kind: kind as FigureKind, out, inputs, options };
}

export function render(args: Args): string {
  const texts = () => args.inputs.map((p) => ({ path: p, text: readFileSync(p, 'utf8') }));
  switch (args.kind) {
    case 'energy':
      return energyFigure(texts(), args.options);
    case 'steps':
      return stepsFigure(texts(), args.options);
    case 'slice':
      return sliceFigure(
        args.inputs.map((p) => ({ path: p, buffer: readFileSync(p) })),
        args.options,
      );
    case 'snapshot':
      if (args.inputs.length !== 1) throw new Error('snapshot takes exactly one input');
      return snapshotFigure(
        { path: args.inputs[0], buffer: readFileSync(args.inputs[0]) },
        args.options,
      );
    case 'scaling':
      return scalingFigure(texts(), args.options);
  }
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  try {
    writeFileSync(args.out, render(args));
  } catch (err) {
    console.error(`${(err as Error).name}: ${(err as Error).message}`);
    return 1;
  }
  console.log(`wrote ${args.out}`);
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith('cli.js')) {
  process.exit(main(process.argv.slice(2)));
}
