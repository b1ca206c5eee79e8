/** Small self-contained SVG chart builder (no DOM, no dependencies). */

export interface Series {
  x: number[];
  y: number[];
  color?: string;
  label?: string;
  dashed?: boolean;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  logX?: boolean;
  logY?: boolean;
}

const MARGIN = { top: 34, right: 16, bottom: 44, left: 62 };
const PALETTE = ['#1f6fb4', '#d1493c', '#3f9b54', '#8a5cb8', '#c78a2d', '#424a54'];

function esc(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) ticks.push(v);
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); Math.pow(10, e) <= hi * (1 + 1e-12); e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function fmt(v: number): string {
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0);
  return String(parseFloat(v.toPrecision(4)));
}

/** Render line series into a complete standalone SVG document. */
export function lineChart(series: Series[], opts: ChartOptions = {}): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 420;
  const iw = width - MARGIN.left - MARGIN.right;
  const ih = height - MARGIN.top - MARGIN.bottom;

  const xs = series.flatMap((s) => s.x).filter((v) => Number.isFinite(v));
  const ys = series.flatMap((s) => s.y).filter((v) => Number.isFinite(v));
  if (xs.length === 0 || ys.length === 0) throw new Error('no finite data to plot');

  const tx = opts.logX ? Math.log10 : (v: number) => v;
  const ty = opts.logY ? Math.log10 : (v: number) => v;
  const txs = xs.map(tx);
  const tys = ys.map(ty);
  let xLo = Math.min(...txs), xHi = Math.max(...txs);
  let yLo = Math.min(...tys), yHi = Math.max(...tys);
  if (xHi === xLo) { xLo -= 0.5; xHi += 0.5; }
  if (yHi === yLo) { yLo -= 0.5; yHi += 0.5; }
  const padY = 0.05 * (yHi - yLo);
  yLo -= padY; yHi += padY;

  const px = (v: number) => MARGIN.left + ((tx(v) - xLo) / (xHi - xLo)) * iw;
  const py = (v: number) => MARGIN.top + ih - ((ty(v) - yLo) / (yHi - yLo)) * ih;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
  );

  const xTicks = opts.logX
    ? logTicks(Math.pow(10, xLo), Math.pow(10, xHi))
    : niceTicks(xLo, xHi);
  const yTicks = opts.logY
    ? logTicks(Math.pow(10, yLo), Math.pow(10, yHi))
    : niceTicks(yLo, yHi);

  for (const v of xTicks) {
    const x = px(v);
    if (x < MARGIN.left - 1 || x > width - MARGIN.right + 1) continue;
    parts.push(
      `<line x1="${x.toFixed(1)}" y1="${MARGIN.top}" x2="${x.toFixed(1)}" ` +
        `y2="${MARGIN.top + ih}" stroke="#e0e0e0"/>`,
      `<text x="${x.toFixed(1)}" y="${MARGIN.top + ih + 18}" text-anchor="middle">${fmt(v)}</text>`,
    );
  }
  for (const v of yTicks) {
    const y = py(v);
    if (y < MARGIN.top - 1 || y > height - MARGIN.bottom + 1) continue;
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y.toFixed(1)}" x2="${MARGIN.left + iw}" ` +
        `y2="${y.toFixed(1)}" stroke="#e0e0e0"/>`,
      `<text x="${MARGIN.left - 6}" y="${(y + 4).toFixed(1)}" text-anchor="end">${fmt(v)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${iw}" height="${ih}" ` +
      `fill="none" stroke="#666"/>`,
  );

  series.forEach((s, i) => {
    const color = s.color ?? PALETTE[i % PALETTE.length];
    const pts: string[] = [];
    for (let k = 0; k < s.x.length; k++) {
      const vx = s.x[k], vy = s.y[k];
      if (!Number.isFinite(vx) || !Number.isFinite(vy)) continue;
      if ((opts.logX && vx <= 0) || (opts.logY && vy <= 0)) continue;
      pts.push(`${px(vx).toFixed(2)},${py(vy).toFixed(2)}`);
    }
    const dash = s.dashed ? ' stroke-dasharray="6,4"' : '';
    parts.push(
      `<polyline points="${pts.join(' ')}" fill="none" stroke="${color}" stroke-width="1.5"${dash}/>`,
    );
    if (s.label) {
      const lx = MARGIN.left + iw - 8;
      const ly = MARGIN.top + 16 + 16 * i;
      parts.push(
        `<line x1="${lx - 46}" y1="${ly - 4}" x2="${lx - 26}" y2="${ly - 4}" ` +
          `stroke="${color}" stroke-width="1.5"${dash}/>`,
        `<text x="${lx - 22}" y="${ly}" text-anchor="start">${esc(s.label)}</text>`,
      );
    }
  });

  if (opts.title) {
    parts.push(
      `<text x="${width / 2}" y="20" text-anchor="middle" font-size="14">${esc(opts.title)}</text>`,
    );
  }
  if (opts.xLabel) {
    parts.push(
      `<text x="${MARGIN.left + iw / 2}" y="${height - 8}" text-anchor="middle">${esc(opts.xLabel)}</text>`,
    );
  }
  if (opts.yLabel) {
    const y = MARGIN.top + ih / 2;
    parts.push(
      `<text x="16" y="${y}" text-anchor="middle" transform="rotate(-90 16 ${y})">${esc(opts.yLabel)}</text>`,
    );
  }
  parts.push('</svg>');
  return parts.join('\n');
}

/** Diverging blue-white-red colormap on [-1, 1]. */
export function divergingColor(v: number): string {
  const t = Math.max(-1, Math.min(1, v));
  const lerp = (a: number, b: number, u: number) => Math.round(a + (b - a) * u);
  let r: number, g: number, b: number;
  if (t < 0) {
    const u = t + 1; // 0 at -1, 1 at 0
    r = lerp(33, 255, u); g = lerp(102, 255, u); b = lerp(172, 255, u);
  } else {
    r = lerp(255, 178, t); g = lerp(255, 24, t); b = lerp(255, 43, t);
  }
  return `rgb(${r},${g},${b})`;
}

/** Render an M x M field as a heatmap SVG with a title. */
export function heatmap(
  data: ArrayLike<number>,
  M: number,
  opts: { title?: string; size?: number } = {},
): string {
  const size = opts.size ?? 512;
  const cell = size / M;
  let lo = Infinity, hi = -Infinity;
  for (let i = 0; i < M * M; i++) {
    const v = data[i];
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const scale = Math.max(Math.abs(lo), Math.abs(hi)) || 1;
  const top = opts.title ? 26 : 0;
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${size}" height="${size + top}" ` +
      `viewBox="0 0 ${size} ${size + top}" font-family="sans-serif" font-size="13">`,
    `<rect width="${size}" height="${size + top}" fill="white"/>`,
  ];
  if (opts.title) {
    parts.push(`<text x="${size / 2}" y="17" text-anchor="middle">${esc(opts.title)}</text>`);
  }
  for (let i = 0; i < M; i++) {
    for (let j = 0; j < M; j++) {
      const color = divergingColor(data[i * M + j] / scale);
      parts.push(
        `<rect x="${(j * cell).toFixed(2)}" y="${(top + i * cell).toFixed(2)}" ` +
          `width="${(cell + 0.05).toFixed(2)}" height="${(cell + 0.05).toFixed(2)}" fill="${color}"/>`,
      );
    }
  }
  parts.push('</svg>');
  return parts.join('\n');
}
