/** Reader for the simulator's binary field snapshots.
 *
 * Layout: magic "CHSN", little-endian int32 M, float64 L, float64 t,
 * then M*M row-major float64 values.
 */

import { SchemaMismatch } from './csv.js';

export interface Snapshot {
  M: number;
  L: number;
  t: number;
  /** row-major M x M field values */
  data: Float64Array;
}

export function parseSnapshot(buf: Buffer): Snapshot {
  if (buf.length < 24 || buf.toString('ascii', 0, 4) !== 'CHSN') {
    throw new SchemaMismatch('not a CHSN snapshot (bad magic)');
  }
  const M = buf.readInt32LE(4);
  const L = buf.readDoubleLE(8);
  const t = buf.readDoubleLE(16);
  const expected = 24 + 8 * M * M;
  if (M <= 0 || buf.length !== expected) {
    throw new SchemaMismatch(
      `snapshot size mismatch: M=${M} implies ${expected} bytes, got ${buf.length}`,
    );
  }
  const data = new Float64Array(M * M);
  for (let i = 0; i < M * M; i++) data[i] = buf.readDoubleLE(24 + 8 * i);
  return { M, L, t, data };
}
