/**
 * Random forest classifier: bagged CART trees, gini impurity,
 * sqrt(n_features) candidate features per node (the usual classifier
 * defaults), trees grown until pure. Scores are tree-averaged leaf class
 * fractions, so they land in [0, 1] and drive both accuracy and ROC.
 *
 * Defaults are pinned by IMPLEMENTATION/IMPLEMENTATION_VERSION below and
 * recorded in every fit manifest, since "library defaults" drift.
 */

import { Rng, mulberry32, permutation, randInt } from "./rng.js";

export const IMPLEMENTATION = "forgemine-analytics/cart-forest";
export const IMPLEMENTATION_VERSION = "0.1.0";

export interface ForestParams {
  nEstimators?: number; // default 1000
  minSamplesSplit?: number; // default 2
  maxFeatures?: number; // default ceil(sqrt(F))
  seed?: number; // default 0
}

type TreeNode =
  | { kind: "leaf"; p1: number }
  | { kind: "split"; feature: number; threshold: number; left: TreeNode; right: TreeNode };

export interface Forest {
  trees: TreeNode[];
  nFeatures: number;
  params: Required<ForestParams>;
}

function gini(n1: number, n: number): number {
  if (n === 0) return 0;
  const p = n1 / n;
  return 2 * p * (1 - p);
}

function buildTree(
  X: number[][],
  y: number[],
  indices: number[],
  rng: Rng,
  minSamplesSplit: number,
  maxFeatures: number,
): TreeNode {
  const n = indices.length;
  let positives = 0;
  for (const i of indices) positives += y[i];
  if (positives === 0 || positives === n || n < minSamplesSplit) {
    return { kind: "leaf", p1: positives / n };
  }

  const nFeatures = X[0].length;
  const candidates = sampleFeatures(rng, nFeatures, maxFeatures);
  let best: { feature: number; threshold: number; score: number } | null = null;
  const parentScore = gini(positives, n);

  for (const feature of candidates) {
    const order = [...indices].sort((a, b) => X[a][feature] - X[b][feature]);
    let leftN = 0;
    let leftPos = 0;
    for (let k = 0; k < n - 1; k++) {
      const i = order[k];
      leftN += 1;
      leftPos += y[i];
      const here = X[i][feature];
      const next = X[order[k + 1]][feature];
      if (here === next) continue; // can't split between equal values
      const rightN = n - leftN;
      const rightPos = positives - leftPos;
      const score =
        (leftN / n) * gini(leftPos, leftN) + (rightN / n) * gini(rightPos, rightN);
      if (score < parentScore - 1e-12 && (best === null || score < best.score)) {
        best = { feature, threshold: (here + next) / 2, score };
      }
    }
  }

  if (best === null) {
    return { kind: "leaf", p1: positives / n };
  }
  const leftIdx = indices.filter((i) => X[i][best!.feature] <= best!.threshold);
  const rightIdx = indices.filter((i) => X[i][best!.feature] > best!.threshold);
  return {
    kind: "split",
    feature: best.feature,
    threshold: best.threshold,
    left: buildTree(X, y, leftIdx, rng, minSamplesSplit, maxFeatures),
    right: buildTree(X, y, rightIdx, rng, minSamplesSplit, maxFeatures),
  };
}

function sampleFeatures(rng: Rng, nFeatures: number, maxFeatures: number): number[] {
  if (maxFeatures >= nFeatures) {
    return Array.from({ length: nFeatures }, (_, i) => i);
  }
  return permutation(rng, nFeatures).slice(0, maxFeatures);
}

export function trainForest(X: number[][], y: number[], params: ForestParams = {}): Forest {
  if (X.length === 0 || X.length !== y.length) {
    throw new Error("X and y must be non-empty and aligned");
  }
  const nFeatures = X[0].length;
  const resolved: Required<ForestParams> = {
    nEstimators: params.nEstimators ?? 1000,
    minSamplesSplit: params.minSamplesSplit ?? 2,
    maxFeatures: params.maxFeatures ?? Math.max(1, Math.ceil(Math.sqrt(nFeatures))),
    seed: params.seed ?? 0,
  };
  const rng = mulberry32(resolved.seed);
  const n = X.length;
  const trees: TreeNode[] = [];
  for (let t = 0; t < resolved.nEstimators; t++) {
    const bootstrap = Array.from({ length: n }, () => randInt(rng, n));
    trees.push(buildTree(X, y, bootstrap, rng, resolved.minSamplesSplit, resolved.maxFeatures));
  }
  return { trees, nFeatures, params: resolved };
}

function treeScore(node: TreeNode, x: number[]): number {
  let current = node;
  while (current.kind === "split") {
    current = x[current.feature] <= current.threshold ? current.left : current.right;
  }
  return current.p1;
}

/** Mean leaf class-1 fraction across trees, one score per row. */
export function forestScores(forest: Forest, X: number[][]): number[] {
  const scores = new Array<number>(X.length).fill(0);
  for (const tree of forest.trees) {
    for (let i = 0; i < X.length; i++) {
      scores[i] += treeScore(tree, X[i]);
    }
  }
  const k = forest.trees.length;
  return scores.map((s) => s / k);
}

export function forestPredict(forest: Forest, X: number[][]): number[] {
  return forestScores(forest, X).map((s) => (s >= 0.5 ? 1 : 0));
}

export function accuracy(predicted: number[], actual: number[]): number {
  let hits = 0;
  for (let i = 0; i < actual.length; i++) {
    if (predicted[i] === actual[i]) hits++;
  }
  return hits / actual.length;
}

export interface FitResult {
  forest: Forest;
  trainIndices: number[];
  validationIndices: number[];
  validationAccuracy: number;
  manifest: {
    implementation: string;
    implementation_version: string;
    n_estimators: number;
    max_features: number;
    min_samples_split: number;
    split_seed: number;
    n_train: number;
    n_validation: number;
    validation_accuracy: number;
  };
}

/**
 * 90/10 train/validation split by seed, then fit.
 *
 * The split permutation and the forest's own randomness both flow from
 * `splitSeed`, so a fixed seed reproduces the split, the model, and the
 * accuracy bit for bit.
 */
export function fitForest(
  X: number[][],
  y: number[],
  splitSeed: number,
  params: ForestParams = {},
): FitResult {
  const n = X.length;
  if (n < 10) {
    throw new Error("need at least 10 rows for a 90/10 split");
  }
  const order = permutation(mulberry32(splitSeed), n);
  const nValidation = Math.max(1, Math.round(n / 10));
  const validationIndices = order.slice(0, nValidation).sort((a, b) => a - b);
  const trainIndices = order.slice(nValidation).sort((a, b) => a - b);
  const forest = trainForest(
    trainIndices.map((i) => X[i]),
    trainIndices.map((i) => y[i]),
    { ...params, seed: params.seed ?? splitSeed + 1 },
  );
  const predictions = forestPredict(forest, validationIndices.map((i) => X[i]));
  const validationAccuracy = accuracy(predictions, validationIndices.map((i) => y[i]));
  return {
    forest,
    trainIndices,
    validationIndices,
    validationAccuracy,
    manifest: {
      implementation: IMPLEMENTATION,
      implementation_version: IMPLEMENTATION_VERSION,
      n_estimators: forest.params.nEstimators,
      max_features: forest.params.maxFeatures,
      min_samples_split: forest.params.minSamplesSplit,
      split_seed: splitSeed,
      n_train: trainIndices.length,
      n_validation: validationIndices.length,
      validation_accuracy: validationAccuracy,
    },
  };
}
