/** Minimal CSV reading for the simulator's numeric output tables. */

export class SchemaMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'SchemaMismatch';
  }
}

export interface Table {
  header: string[];
  /** column name -> numeric values, row order preserved */
  columns: Map<string, number[]>;
  length: number;
}

/** Parse simple comma-separated numeric data with a header row. */
export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) throw new SchemaMismatch('empty CSV input');
  const header = lines[0].split(',').map((h) => h.trim());
  const columns = new Map<string, number[]>(header.map((h) => [h, []]));
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',');
    if (cells.length !== header.length) {
      throw new SchemaMismatch(
        `row ${i} has ${cells.length} cells, header has ${header.length}`,
      );
    }
    for (let j = 0; j < header.length; j++) {
      columns.get(header[j])!.push(Number(cells[j]));
    }
  }
  return { header, columns, length: lines.length - 1 };
}

/** Fetch named columns, failing loudly with the offending column name. */
export function requireColumns(table: Table, names: string[]): number[][] {
  return names.map((name) => {
    const col = table.columns.get(name);
    if (col === undefined) {
      throw new SchemaMismatch(
        `missing column "${name}" (header: ${table.header.join(', ')})`,
      );
    }
    return col;
  });
}

/** Parse a headerless matrix CSV (snapshot alternative format). */
export function parseMatrixCsv(text: string): number[][] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) throw new SchemaMismatch('empty matrix CSV');
  const rows = lines.map((l) => l.split(',').map(Number));
  const width = rows[0].length;
  rows.forEach((r, i) => {
    if (r.length !== width) {
      throw new SchemaMismatch(`matrix row ${i} has ${r.length} cells, expected ${width}`);
    }
    if (r.some((v) => Number.isNaN(v))) {
      throw new SchemaMismatch(`matrix row ${i} contains a non-numeric cell`);
    }
  });
  return rows;
}
