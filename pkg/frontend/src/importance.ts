/**
 * Permutation feature importance.
 *
 * For each feature: permute its validation values uniformly at random,
 * re-measure validation accuracy, record the drop, and average over the
 * repeats. Slow but unbiased toward high-cardinality features, which is the
 * point. Drops can be negative for marginally important features;
 * importances only rank features within one trained model.
 */

import { Forest, accuracy, forestPredict } from "./forest.js";
import { mulberry32, shuffle } from "./rng.js";

export interface FeatureImportance {
  name: string;
  meanAccuracyDrop: number;
}

export interface ImportanceReport {
  baselineAccuracy: number;
  repeats: number;
  seed: number;
  features: FeatureImportance[]; // ranked, largest mean drop first
}

export function permutationImportance(
  forest: Forest,
  X: number[][],
  y: number[],
  featureNames: string[],
  repeats = 100,
  seed = 0,
): ImportanceReport {
  if (X.length === 0) {
    throw new Error("validation set is empty");
  }
  const baseline = accuracy(forestPredict(forest, X), y);
  const rng = mulberry32(seed);
  const features: FeatureImportance[] = [];
  for (let f = 0; f < featureNames.length; f++) {
    let totalDrop = 0;
    for (let r = 0; r < repeats; r++) {
      const values = X.map((row) => row[f]);
      shuffle(rng, values);
      const permuted = X.map((row, i) => {
        const copy = row.slice();
        copy[f] = values[i];
        return copy;
      });
      totalDrop += baseline - accuracy(forestPredict(forest, permuted), y);
    }
    features.push({ name: featureNames[f], meanAccuracyDrop: totalDrop / repeats });
  }
  features.sort(
    (a, b) => b.meanAccuracyDrop - a.meanAccuracyDrop || a.name.localeCompare(b.name),
  );
  return { baselineAccuracy: baseline, repeats, seed, features };
}
