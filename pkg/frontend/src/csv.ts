/**
 * Readers for the two CSV layouts the solver emits.
 *
 * A run writes series.csv with one shared time column:
 *
 *     t,curl_L1,curl_L2,curl_Linf,divpsi_L2,mass,...
 *
 * A comparison merges several runs into column pairs, one per
 * formulation tag, tail-padded with empty cells where a run recorded
 * fewer rows:
 *
 *     t_Original,curl_L2_Original,t_GLM,curl_L2_GLM,...
 *
 * Both become a list of labelled (t, y) curves.
 */

import { readFileSync } from "fs";
import { basename, dirname } from "path";
import Papa from "papaparse";

export interface Curve {
  label: string;
  t: number[];
  y: number[];
}

/** Input problem (bad header, bad cell, empty column); message names the file. */
export class CsvError extends Error {}

function parseRows(file: string): string[][] {
  const text = readFileSync(file, "utf8");
  const result = Papa.parse<string[]>(text.trimEnd(), { delimiter: "," });
  if (result.errors.length > 0) {
    const e = result.errors[0];
    throw new CsvError(`${file}: ${e.message} (row ${(e.row ?? 0) + 1})`);
  }
  const rows = result.data;
  if (rows.length < 2) {
    throw new CsvError(`${file}: no data rows`);
  }
  return rows;
}

function toNumber(cell: string, file: string, column: string, row: number): number {
  const v = Number(cell);
  if (cell.trim() === "" || !Number.isFinite(v)) {
    throw new CsvError(
      `${file}: non-numeric value ${JSON.stringify(cell)} in column ` +
      `'${column}' at row ${row}`);
  }
  return v;
}

/** "out/GLM/series.csv" -> "GLM"; anything else keeps its own stem. */
function defaultLabel(file: string): string {
  const stem = basename(file).replace(/\.[^.]*$/, "");
  if (stem === "series") {
    const parent = basename(dirname(file));
    if (parent !== "" && parent !== ".") return parent;
  }
  return stem;
}

function readSingleSeries(file: string, rows: string[][], column: string): Curve[] {
  const header = rows[0];
  const tcol = header.indexOf("t");
  const ycol = header.indexOf(column);
  if (ycol < 0) {
    throw new CsvError(
      `${file}: no column '${column}' (header: ${header.join(",")})`);
  }
  const t: number[] = [];
  const y: number[] = [];
  for (let r = 1; r < rows.length; r++) {
    const cells = rows[r];
    if (cells.length === 1 && cells[0].trim() === "") continue;
    if ((cells[ycol] ?? "").trim() === "") continue;   // e.g. blank divpsi_L2
    t.push(toNumber(cells[tcol] ?? "", file, "t", r + 1));
    y.push(toNumber(cells[ycol], file, column, r + 1));
  }
  if (t.length < 2) {
    throw new CsvError(`${file}: column '${column}' has fewer than two values`);
  }
  return [{ label: defaultLabel(file), t, y }];
}

function readComparePairs(file: string, rows: string[][], column: string): Curve[] {
  const header = rows[0];
  if (header.length % 2 !== 0) {
    throw new CsvError(`${file}: expected an even number of paired columns, ` +
      `got ${header.length}`);
  }
  const curves: Curve[] = [];
  for (let k = 0; k < header.length; k += 2) {
    const m = /^t_(.+)$/.exec(header[k]);
    if (m === null) {
      throw new CsvError(
        `${file}: column ${k + 1} is '${header[k]}', expected 't_<tag>'`);
    }
    const tag = m[1];
    const want = `${column}_${tag}`;
    if (header[k + 1] !== want) {
      throw new CsvError(
        `${file}: column ${k + 2} is '${header[k + 1]}', expected '${want}'`);
    }
    const t: number[] = [];
    const y: number[] = [];
    for (let r = 1; r < rows.length; r++) {
      const cells = rows[r];
      const tc = (cells[k] ?? "").trim();
      const yc = (cells[k + 1] ?? "").trim();
      if (tc === "" && yc === "") continue;            // tail padding
      t.push(toNumber(tc, file, header[k], r + 1));
      y.push(toNumber(yc, file, want, r + 1));
    }
    if (t.length < 2) {
      throw new CsvError(`${file}: column '${want}' has fewer than two values`);
    }
    curves.push({ label: tag, t, y });
  }
  return curves;
}

/**
 * Parse one CSV into curves of the requested quantity (default series
 * column "curl_L2"; in the paired layout the per-tag column
 * "<column>_<tag>").  Layout is detected from the header.
 */
export function readCurves(file: string, column = "curl_L2"): Curve[] {
  const rows = parseRows(file);
  const header = rows[0].map((h) => h.trim());
  rows[0] = header;
  if (header.includes("t")) {
    return readSingleSeries(file, rows, column);
  }
  if (header.length >= 2 && header[0].startsWith("t_")) {
    return readComparePairs(file, rows, column);
  }
  throw new CsvError(
    `${file}: header matches neither the series layout (a 't' column) ` +
    `nor the comparison layout (pairs 't_<tag>,<quantity>_<tag>')`);
}
