/**
 * Minimal CSV reading for the primary component's exports.
 *
 * The exports are machine-written: comma-separated, first row is the
 * header, quotes only around fields containing commas or quotes. That is
 * all this parser handles.
 */

import { readFileSync } from "node:fs";

export interface Table {
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const parsed = lines.map(parseLine);
  return { columns: parsed[0], rows: parsed.slice(1) };
}

function parseLine(line: string): string[] {
  const fields: string[] = [];
  let i = 0;
  while (i <= line.length) {
    if (line[i] === '"') {
      let value = "";
      i++;
      while (i < line.length) {
        if (line[i] === '"' && line[i + 1] === '"') {
          value += '"';
          i += 2;
        } else if (line[i] === '"') {
          i++;
          break;
        } else {
          value += line[i++];
        }
      }
      fields.push(value);
      i++; // skip the comma
    } else {
      const end = line.indexOf(",", i);
      if (end === -1) {
        fields.push(line.slice(i));
        break;
      }
      fields.push(line.slice(i, end));
      i = end + 1;
    }
  }
  return fields;
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"));
}

export function column(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx === -1) {
    throw new Error(`CSV is missing column ${JSON.stringify(name)}`);
  }
  return table.rows.map((row) => row[idx]);
}

export function numericColumn(table: Table, name: string): number[] {
  return column(table, name).map((value) => {
    const parsed = Number(value);
    if (Number.isNaN(parsed)) {
      throw new Error(`non-numeric value ${JSON.stringify(value)} in column ${name}`);
    }
    return parsed;
  });
}

/** The model table written by the stats stage: outcome + named features. */
export interface ModelTable {
  featureNames: string[];
  X: number[][];
  y: number[];
}

const NON_FEATURE_COLUMNS = new Set(["repo_id", "corpus", "outcome"]);

export function loadModelTable(path: string, requiredFeatures?: string[]): ModelTable {
  const table = readCsv(path);
  if (!table.columns.includes("outcome")) {
    throw new Error(`model table ${path} is missing the 'outcome' column`);
  }
  const featureNames = table.columns.filter((c) => !NON_FEATURE_COLUMNS.has(c));
  if (requiredFeatures) {
    const missing = requiredFeatures.filter((f) => !featureNames.includes(f));
    if (missing.length > 0) {
      throw new Error(`model table is missing feature columns: ${missing.join(", ")}`);
    }
  }
  const y = numericColumn(table, "outcome");
  const featureCols = featureNames.map((f) => numericColumn(table, f));
  const X = table.rows.map((_, i) => featureCols.map((col) => col[i]));
  return { featureNames, X, y };
}
