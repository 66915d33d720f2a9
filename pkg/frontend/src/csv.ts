/**
 * CSV ingestion with schema checks.
 *
 * Every figure kind consumes one CSV written by the experiment harness;
 * here the file is parsed once and its columns are validated up front so
 * schema mismatches fail loudly before any drawing starts.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

/** Raised when an input file does not match the expected schema. */
export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export type Row = Record<string, string>;

export interface Table {
  /** Column names in file order. */
  columns: string[];
  /** Data rows as string records (no type coercion at this layer). */
  rows: Row[];
}

/**
 * Read a CSV file into a header/rows table.
 *
 * @param path - CSV file location
 * @param required - column names that must be present
 * @throws SchemaError when a required column is missing or no data rows exist
 */
export function readCsv(path: string, required: string[]): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new SchemaError(`cannot read ${path}: ${(err as Error).message}`);
  }
  const parsed = Papa.parse<Row>(text, { header: true, skipEmptyLines: true });
  // Single-column files trigger a harmless "UndetectableDelimiter" notice;
  // only treat structural parse errors as fatal.
  const fatal = parsed.errors.filter((e) => e.code !== "UndetectableDelimiter");
  if (fatal.length > 0) {
    const first = fatal[0]!;
    throw new SchemaError(`${path}: ${first.message} (row ${first.row})`);
  }
  const columns = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new SchemaError(`${path}: missing column "${col}" (found: ${columns.join(", ")})`);
    }
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`${path}: empty input`);
  }
  return { columns, rows: parsed.data };
}

/** Parse one column as finite numbers, rejecting anything unparseable. */
export function numericColumn(table: Table, name: string, path = "input"): number[] {
  return table.rows.map((row, i) => {
    const v = Number(row[name]);
    if (!Number.isFinite(v)) {
      throw new SchemaError(`${path}: column "${name}" row ${i} is not numeric (${row[name]})`);
    }
    return v;
  });
}
