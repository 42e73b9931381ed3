#!/usr/bin/env node
/**
 * plot-curl: render solver CSV output as a log-scale PNG.
 *
 * Accepts any mix of per-run series files and merged comparison files;
 * every curve found lands in one figure.  Exit codes: 0 success, 1 bad
 * input (unreadable CSV, unknown column, label mismatch), 2 the output
 * file could not be written.
 */

import { readFileSync, writeFileSync } from "fs";
import { basename } from "path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { Curve, CsvError, readCurves } from "./csv.js";
import { encodePng, renderCurves } from "./render.js";

interface Args {
  files: string[];
  out: string;
  column: string;
  labels?: string;
  title?: string;
  width: number;
  height: number;
  floor: number;
}

function gatherCurves(args: Args): Curve[] {
  const curves: Curve[] = [];
  for (const file of args.files) {
    try {
      readFileSync(file);
    } catch (err) {
      throw new CsvError(`cannot read ${file}: ${(err as Error).message}`);
    }
    curves.push(...readCurves(file, args.column));
  }
  if (args.labels !== undefined) {
    const labels = args.labels.split(",").map((s) => s.trim());
    if (labels.length !== curves.length || labels.some((l) => l === "")) {
      throw new CsvError(
        `--labels needs ${curves.length} comma-separated names ` +
        `(one per curve), got ${JSON.stringify(args.labels)}`);
    }
    labels.forEach((label, i) => { curves[i].label = label; });
  }
  return curves;
}

export function main(argv: string[]): number {
  const args = yargs(argv)
    .usage("$0 <files..>", "Plot curl-error histories from solver CSV files",
      (y) => y.positional("files", {
        describe: "series.csv and/or compare.csv paths",
        type: "string",
        array: true,
        demandOption: true,
      }))
    .option("out", { alias: "o", type: "string", default: "curl.png",
                     describe: "output PNG path" })
    .option("column", { type: "string", default: "curl_L2",
                        describe: "quantity to plot against t" })
    .option("labels", { type: "string",
                        describe: "comma-separated curve names, in file order" })
    .option("title", { type: "string", describe: "figure title" })
    .option("width", { type: "number", default: 900 })
    .option("height", { type: "number", default: 600 })
    .option("floor", { type: "number", default: 1e-16,
                       describe: "log-scale clamp for zero/tiny values" })
    .strict()
    .parseSync() as unknown as Args;

  let buf: Buffer;
  try {
    const curves = gatherCurves(args);
    const title = args.title
      ?? (args.files.length === 1 ? basename(args.files[0]) : args.column);
    buf = encodePng(renderCurves(curves, {
      width: args.width,
      height: args.height,
      floor: args.floor,
      title,
      xLabel: "t",
      yLabel: args.column,
    }));
  } catch (err) {
    process.stderr.write(`plot-curl: ${(err as Error).message}\n`);
    return 1;
  }
  try {
    writeFileSync(args.out, buf);
  } catch (err) {
    process.stderr.write(`plot-curl: ${(err as Error).message}\n`);
    return 2;
  }
  return 0;
}

process.exit(main(hideBin(process.argv)));
