#!/usr/bin/env node
/**
 * analytics fit|importance|roc|figures --in <dir> --out <dir> --seed <n>
 *
 * Consumes the primary pipeline's exports:
 *   <in>/stats/model_table.csv        for fit / importance / roc
 *   <in>/exports/<corpus>_<metric>.csv and language_shares.csv for figures
 *   <out>/importance.json, <out>/roc.json   reused by `figures` if present
 *
 * Every command is deterministic given --seed; fit, importance, and roc
 * rebuild the same model from the same seed, so they compose without a
 * serialized model artifact.
 */

import { existsSync, mkdirSync, readFileSync, readdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { loadModelTable, readCsv } from "./csv.js";
import { fitForest, forestScores } from "./forest.js";
import { permutationImportance } from "./importance.js";
import { rocCurve } from "./roc.js";
import {
  LanguageShare,
  ccdfFigure,
  importanceFigure,
  languageDivergenceFigure,
  rocFigure,
} from "./figures.js";

interface Args {
  command: string;
  inDir: string;
  outDir: string;
  seed: number;
  trees?: number;
}

function parseArgs(argv: string[]): Args {
  const [command, ...rest] = argv;
  if (!command || !["fit", "importance", "roc", "figures"].includes(command)) {
    throw new Error("usage: analytics fit|importance|roc|figures --in <dir> --out <dir> --seed <n> [--trees <n>]");
  }
  const args: Args = { command, inDir: "", outDir: "", seed: 0 };
  for (let i = 0; i < rest.length; i += 2) {
    const key = rest[i];
    const value = rest[i + 1];
    if (value === undefined) throw new Error(`missing value for ${key}`);
    if (key === "--in") args.inDir = value;
    else if (key === "--out") args.outDir = value;
    else if (key === "--seed") args.seed = Number(value);
    else if (key === "--trees") args.trees = Number(value);
    else throw new Error(`unknown flag ${key}`);
  }
  if (!args.inDir || !args.outDir) {
    throw new Error("--in and --out are required");
  }
  return args;
}

function fitFromTable(args: Args) {
  const table = loadModelTable(join(args.inDir, "stats", "model_table.csv"));
  const params = args.trees ? { nEstimators: args.trees } : {};
  return { table, fit: fitForest(table.X, table.y, args.seed, params) };
}

function writeJson(path: string, obj: unknown): void {
  writeFileSync(path, JSON.stringify(obj, null, 2) + "\n");
}

function cmdFit(args: Args): void {
  const { fit } = fitFromTable(args);
  writeJson(join(args.outDir, "fit.json"), fit.manifest);
  console.log(`validation accuracy ${fit.validationAccuracy} over ${fit.manifest.n_validation} rows`);
}

function cmdImportance(args: Args): void {
  const { table, fit } = fitFromTable(args);
  const Xv = fit.validationIndices.map((i) => table.X[i]);
  const yv = fit.validationIndices.map((i) => table.y[i]);
  const report = permutationImportance(fit.forest, Xv, yv, table.featureNames, 100, args.seed);
  writeJson(join(args.outDir, "importance.json"), {
    baseline_accuracy: report.baselineAccuracy,
    repeats: report.repeats,
    split_seed: args.seed,
    model: fit.manifest,
    features: report.features.map((f) => ({
      name: f.name,
      mean_accuracy_drop: f.meanAccuracyDrop,
    })),
  });
  console.log(`ranked ${report.features.length} features over ${report.repeats} repeats`);
}

function cmdRoc(args: Args): void {
  const { table, fit } = fitFromTable(args);
  const Xv = fit.validationIndices.map((i) => table.X[i]);
  const yv = fit.validationIndices.map((i) => table.y[i]);
  const roc = rocCurve(forestScores(fit.forest, Xv), yv);
  writeJson(join(args.outDir, "roc.json"), {
    auc: roc.auc,
    split_seed: args.seed,
    points: roc.points,
  });
  console.log(`AUC ${roc.auc} over ${roc.points.length} curve points`);
}

function cmdFigures(args: Args): void {
  const exportsDir = join(args.inDir, "exports");
  let written = 0;

  const files = existsSync(exportsDir) ? readdirSync(exportsDir).sort() : [];
  const metrics = new Map<string, { forge?: string; comparison?: string }>();
  for (const file of files) {
    const match = /^(forge|comparison)_(.+)\.csv$/.exec(file);
    if (!match) continue;
    const entry = metrics.get(match[2]) ?? {};
    entry[match[1] as "forge" | "comparison"] = join(exportsDir, file);
    metrics.set(match[2], entry);
  }
  for (const [metric, entry] of [...metrics.entries()].sort()) {
    if (!entry.forge || !entry.comparison) {
      console.warn(`skipping ${metric}: export missing for one corpus`);
      continue;
    }
    const load = (path: string) =>
      readFileSync(path, "utf-8").split(/\r?\n/).slice(1).filter(Boolean).map(Number);
    const svg = ccdfFigure(metric, load(entry.forge), load(entry.comparison));
    writeFileSync(join(args.outDir, `ccdf_${metric}.svg`), svg);
    written++;
  }

  const sharesPath = join(exportsDir, "language_shares.csv");
  if (existsSync(sharesPath)) {
    const table = readCsv(sharesPath);
    for (const measure of ["loc", "files"]) {
      const shares: LanguageShare[] = table.rows
        .filter((row) => row[0] === measure)
        .map((row) => ({
          language: row[1],
          shareForge: Number(row[2]),
          shareComparison: Number(row[3]),
        }));
      writeFileSync(
        join(args.outDir, `language_divergence_${measure}.svg`),
        languageDivergenceFigure(measure, shares),
      );
      written++;
    }
  } else {
    console.warn("skipping language divergence: language_shares.csv absent");
  }

  const importancePath = join(args.outDir, "importance.json");
  if (existsSync(importancePath)) {
    const report = JSON.parse(readFileSync(importancePath, "utf-8"));
    const svg = importanceFigure(
      report.features.map((f: { name: string; mean_accuracy_drop: number }) => ({
        name: f.name,
        meanAccuracyDrop: f.mean_accuracy_drop,
      })),
      report.baseline_accuracy,
    );
    writeFileSync(join(args.outDir, "importance.svg"), svg);
    written++;
  } else {
    console.warn("skipping importance figure: importance.json absent (run `analytics importance`)");
  }

  const rocPath = join(args.outDir, "roc.json");
  if (existsSync(rocPath)) {
    const roc = JSON.parse(readFileSync(rocPath, "utf-8"));
    writeFileSync(join(args.outDir, "roc.svg"), rocFigure(roc.points, roc.auc));
    written++;
  } else {
    console.warn("skipping ROC figure: roc.json absent (run `analytics roc`)");
  }
  console.log(`wrote ${written} figures to ${args.outDir}`);
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  mkdirSync(args.outDir, { recursive: true });
  try {
    if (args.command === "fit") cmdFit(args);
    else if (args.command === "importance") cmdImportance(args);
    else if (args.command === "roc") cmdRoc(args);
    else cmdFigures(args);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
