/** Parsing of harness CSV files (metadata header lines + column header + rows). */

import { readFileSync } from "node:fs";
import { ParsedCsv, SchemaError } from "./types.js";

export function parseHarnessCsv(path: string, text: string): ParsedCsv {
  const metadata: Record<string, string> = {};
  const lines = text.split("\n");
  let i = 0;
  for (; i < lines.length; i++) {
    const line = lines[i];
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      const colon = body.indexOf(":");
      if (colon > 0) {
        metadata[body.slice(0, colon).trim()] = body.slice(colon + 1).trim();
      }
      continue;
    }
    if (line.trim() !== "") break; // first non-comment, non-blank line: header
  }
  if (i >= lines.length) {
    return { path, metadata, columns: [], cells: [], rows: [] };
  }
  const columns = lines[i].split(",").map((c) => c.trim());
  const cells: string[][] = [];
  const rows: number[][] = [];
  for (i += 1; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "" || line.startsWith("#")) continue;
    const parts = line.split(",").map((c) => c.trim());
    cells.push(parts);
    rows.push(parts.map((c) => (c === "" ? NaN : Number(c))));
  }
  return { path, metadata, columns, cells, rows };
}

export function readHarnessCsv(path: string): ParsedCsv {
  return parseHarnessCsv(path, readFileSync(path, "utf-8"));
}

/** Throw a SchemaError naming every absent column (not just the first). */
export function requireColumns(parsed: ParsedCsv, needed: string[]): void {
  const missing = needed.filter((c) => !parsed.columns.includes(c));
  if (missing.length > 0) throw new SchemaError(parsed.path, missing);
}

export function columnIndex(parsed: ParsedCsv, name: string): number {
  return parsed.columns.indexOf(name);
}

/** A 2D snapshot file: metadata lines, then bare numeric matrix rows
 * (no column header). */
export interface ParsedMatrix {
  path: string;
  metadata: Record<string, string>;
  matrix: number[][];
}

export function parseMatrixCsv(path: string, text: string): ParsedMatrix {
  const metadata: Record<string, string> = {};
  const matrix: number[][] = [];
  for (const line of text.split("\n")) {
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      const colon = body.indexOf(":");
      if (colon > 0) metadata[body.slice(0, colon).trim()] = body.slice(colon + 1).trim();
      continue;
    }
    if (line.trim() === "") continue;
    matrix.push(line.split(",").map(Number));
  }
  return { path, metadata, matrix };
}

export function readMatrixCsv(path: string): ParsedMatrix {
  return parseMatrixCsv(path, readFileSync(path, "utf-8"));
}

/** The `# shape: N,M` header of a 2D snapshot file. */
export function parseShape(parsed: { path: string; metadata: Record<string, string> }): [number, number] {
  const raw = parsed.metadata["shape"];
  if (!raw) throw new SchemaError(parsed.path, ["# shape header"]);
  const parts = raw.split(",").map((p) => Number(p.trim()));
  if (parts.length !== 2 || parts.some((p) => !Number.isInteger(p) || p <= 0)) {
    throw new Error(`${parsed.path}: malformed shape header: ${raw}`);
  }
  return [parts[0], parts[1]];
}
