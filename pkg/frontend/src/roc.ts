/**
 * ROC curve over classifier scores: TPR/FPR at every score threshold,
 * endpoints exactly (0,0) and (1,1), AUC by the trapezoid rule.
 */

export interface RocPoint {
  fpr: number;
  tpr: number;
}

export interface RocResult {
  points: RocPoint[];
  auc: number;
}

export function rocCurve(scores: number[], labels: number[]): RocResult {
  if (scores.length !== labels.length || scores.length === 0) {
    throw new Error("scores and labels must be non-empty and aligned");
  }
  const positives = labels.reduce((a, b) => a + b, 0);
  const negatives = labels.length - positives;
  if (positives === 0 || negatives === 0) {
    throw new Error("ROC needs both classes in the validation set");
  }
  const order = scores
    .map((s, i) => i)
    .sort((a, b) => scores[b] - scores[a] || labels[b] - labels[a]);

  const points: RocPoint[] = [{ fpr: 0, tpr: 0 }];
  let tp = 0;
  let fp = 0;
  let i = 0;
  while (i < order.length) {
    // Consume all rows tied at this score before emitting a point.
    const threshold = scores[order[i]];
    while (i < order.length && scores[order[i]] === threshold) {
      if (labels[order[i]] === 1) tp++;
      else fp++;
      i++;
    }
    points.push({ fpr: fp / negatives, tpr: tp / positives });
  }
  const last = points[points.length - 1];
  if (last.fpr !== 1 || last.tpr !== 1) {
    points.push({ fpr: 1, tpr: 1 });
  }

  let auc = 0;
  for (let k = 1; k < points.length; k++) {
    const dx = points[k].fpr - points[k - 1].fpr;
    auc += (dx * (points[k].tpr + points[k - 1].tpr)) / 2;
  }
  return { points, auc };
}
