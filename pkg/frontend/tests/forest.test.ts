import { describe, expect, it } from "vitest";

import { accuracy, fitForest, forestPredict, forestScores, trainForest } from "../src/forest.js";
import { mulberry32 } from "../src/rng.js";

function separableTable(n: number, seed: number) {
  const rng = mulberry32(seed);
  const X: number[][] = [];
  const y: number[] = [];
  for (let i = 0; i < n; i++) {
    const label = i % 2;
    // Class 1 sits 4 units away on feature 0; features 1-2 are noise.
    X.push([label * 4 + rng() - 0.5, rng() * 2 - 1, rng() * 2 - 1]);
    y.push(label);
  }
  return { X, y };
}

function noiseTable(n: number, seed: number, features = 4) {
  const rng = mulberry32(seed);
  const X: number[][] = [];
  const y: number[] = [];
  for (let i = 0; i < n; i++) {
    X.push(Array.from({ length: features }, () => rng() * 2 - 1));
    y.push(rng() < 0.6 ? 1 : 0);
  }
  return { X, y };
}

describe("trainForest", () => {
  it("scores are probabilities in [0, 1]", () => {
    const { X, y } = separableTable(60, 1);
    const forest = trainForest(X, y, { nEstimators: 25, seed: 5 });
    for (const s of forestScores(forest, X)) {
      expect(s).toBeGreaterThanOrEqual(0);
      expect(s).toBeLessThanOrEqual(1);
    }
  });

  it("defaults to 1000 trees", () => {
    const { X, y } = separableTable(20, 2);
    const forest = trainForest(X, y);
    expect(forest.trees.length).toBe(1000);
    expect(forest.params.nEstimators).toBe(1000);
  });

  it("is deterministic under a fixed seed", () => {
    const { X, y } = separableTable(80, 3);
    const a = trainForest(X, y, { nEstimators: 30, seed: 9 });
    const b = trainForest(X, y, { nEstimators: 30, seed: 9 });
    expect(forestScores(a, X)).toEqual(forestScores(b, X));
  });
});

describe("fitForest", () => {
  it("splits 90/10 by seed and reports validation accuracy", () => {
    const { X, y } = separableTable(200, 4);
    const fit = fitForest(X, y, 7, { nEstimators: 100 });
    expect(fit.validationIndices.length).toBe(20);
    expect(fit.trainIndices.length).toBe(180);
    const overlap = fit.validationIndices.filter((i) => fit.trainIndices.includes(i));
    expect(overlap).toEqual([]);
    expect(fit.manifest.implementation).toContain("cart-forest");
  });

  it("reaches >0.95 validation accuracy on separable data (default trees)", () => {
    const { X, y } = separableTable(300, 5);
    const fit = fitForest(X, y, 11);
    expect(fit.validationAccuracy).toBeGreaterThan(0.95);
  });

  it("identical seeds give identical splits and accuracy", () => {
    const { X, y } = separableTable(150, 6);
    const a = fitForest(X, y, 3, { nEstimators: 50 });
    const b = fitForest(X, y, 3, { nEstimators: 50 });
    expect(a.validationIndices).toEqual(b.validationIndices);
    expect(a.validationAccuracy).toBe(b.validationAccuracy);
  });

  it("shuffled labels score near the majority rate", () => {
    const { X, y } = noiseTable(400, 12);
    const fit = fitForest(X, y, 21, { nEstimators: 150 });
    const yv = fit.validationIndices.map((i) => y[i]);
    const majority = Math.max(
      yv.reduce((a, b) => a + b, 0) / yv.length,
      1 - yv.reduce((a, b) => a + b, 0) / yv.length,
    );
    expect(Math.abs(fit.validationAccuracy - majority)).toBeLessThanOrEqual(0.05);
  });

  it("rejects tables too small to split", () => {
    const { X, y } = separableTable(8, 13);
    expect(() => fitForest(X, y, 1)).toThrow(/10 rows/);
  });
});

describe("accuracy", () => {
  it("counts matches", () => {
    expect(accuracy([1, 0, 1], [1, 1, 1])).toBeCloseTo(2 / 3, 12);
  });
});
