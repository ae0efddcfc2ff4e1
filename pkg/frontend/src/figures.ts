/**
 * Figure generation as deterministic SVG strings.
 *
 * Reads only the primary component's flat CSV exports. Per-metric CCDF
 * overlays use log-log axes (the metrics are heavy-tailed); language
 * divergence bars show share_A - share_B per language under both the LOC
 * and file-count measures, so a positive bar means the language tops more
 * forge repositories than comparison repositories.
 */

import { RocPoint } from "./roc.js";
import { FeatureImportance } from "./importance.js";

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 30, right: 20, bottom: 45, left: 70 };

const COLORS = { forge: "#b13a3a", comparison: "#2d5aa0" };

function fmt(x: number): string {
  return Number.isInteger(x) ? String(x) : x.toPrecision(6);
}

function svgOpen(title: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">\n` +
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>\n` +
    `<text x="${WIDTH / 2}" y="18" text-anchor="middle" font-size="14">${title}</text>\n`
  );
}

/** Complementary CDF as step points: P(X >= x) at each distinct value. */
export function ccdfPoints(values: number[]): Array<[number, number]> {
  const sorted = [...values].sort((a, b) => a - b);
  const n = sorted.length;
  const points: Array<[number, number]> = [];
  for (let i = 0; i < n; i++) {
    if (i === 0 || sorted[i] !== sorted[i - 1]) {
      points.push([sorted[i], (n - i) / n]);
    }
  }
  return points;
}

function logScale(domain: [number, number], range: [number, number]) {
  const [d0, d1] = domain.map(Math.log10);
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (x: number) => r0 + ((Math.log10(x) - d0) / span) * (r1 - r0);
}

export function ccdfFigure(
  metric: string,
  forgeValues: number[],
  comparisonValues: number[],
): string {
  const plotW: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
  const plotH: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];
  // Log axes: zero and negative values cannot be shown, note how many were dropped.
  const usableA = forgeValues.filter((v) => v > 0);
  const usableB = comparisonValues.filter((v) => v > 0);
  const dropped = forgeValues.length + comparisonValues.length - usableA.length - usableB.length;
  let svg = svgOpen(`CCDF of ${metric}`);
  if (usableA.length === 0 && usableB.length === 0) {
    return svg + `<text x="${WIDTH / 2}" y="${HEIGHT / 2}" text-anchor="middle">no positive values</text>\n</svg>\n`;
  }
  const all = usableA.concat(usableB);
  const xDomain: [number, number] = [Math.min(...all), Math.max(...all)];
  if (xDomain[0] === xDomain[1]) {
    xDomain[1] = xDomain[0] * 10;
  }
  const yMin = 1 / Math.max(usableA.length, usableB.length, 2);
  const sx = logScale(xDomain, plotW);
  const sy = logScale([yMin, 1], plotH);

  svg += `<line x1="${plotW[0]}" y1="${plotH[0]}" x2="${plotW[1]}" y2="${plotH[0]}" stroke="black"/>\n`;
  svg += `<line x1="${plotW[0]}" y1="${plotH[0]}" x2="${plotW[0]}" y2="${plotH[1]}" stroke="black"/>\n`;
  svg += `<text x="${(plotW[0] + plotW[1]) / 2}" y="${HEIGHT - 10}" text-anchor="middle">${metric} (log)</text>\n`;
  svg += `<text x="16" y="${(plotH[0] + plotH[1]) / 2}" text-anchor="middle" transform="rotate(-90 16 ${(plotH[0] + plotH[1]) / 2})">P(X &#8805; x) (log)</text>\n`;

  const series: Array<[string, number[], string]> = [
    ["forge", usableA, COLORS.forge],
    ["comparison", usableB, COLORS.comparison],
  ];
  for (const [name, values, color] of series) {
    if (values.length === 0) continue;
    const pts = ccdfPoints(values)
      .map(([x, p]) => `${fmt(sx(x))},${fmt(sy(Math.max(p, yMin)))}`)
      .join(" ");
    svg += `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.5"/>\n`;
  }
  svg += `<rect x="${plotW[1] - 130}" y="${MARGIN.top}" width="10" height="10" fill="${COLORS.forge}"/>\n`;
  svg += `<text x="${plotW[1] - 115}" y="${MARGIN.top + 9}">forge</text>\n`;
  svg += `<rect x="${plotW[1] - 130}" y="${MARGIN.top + 16}" width="10" height="10" fill="${COLORS.comparison}"/>\n`;
  svg += `<text x="${plotW[1] - 115}" y="${MARGIN.top + 25}">comparison</text>\n`;
  if (dropped > 0) {
    svg += `<text x="${plotW[0]}" y="${MARGIN.top}" font-size="10">(${dropped} non-positive values not shown)</text>\n`;
  }
  return svg + "</svg>\n";
}

export interface LanguageShare {
  language: string;
  shareForge: number;
  shareComparison: number;
}

/** share_forge - share_comparison per language; the figure's bar heights. */
export function languageDivergence(shares: LanguageShare[]): Array<[string, number]> {
  return shares
    .map((s): [string, number] => [s.language, s.shareForge - s.shareComparison])
    .sort((a, b) => b[1] - a[1] || a[0].localeCompare(b[0]));
}

export function languageDivergenceFigure(measure: string, shares: LanguageShare[]): string {
  const bars = languageDivergence(shares);
  let svg = svgOpen(`Top-language share difference by ${measure} (forge &#8722; comparison)`);
  if (bars.length === 0) {
    return svg + `<text x="${WIDTH / 2}" y="${HEIGHT / 2}" text-anchor="middle">no languages</text>\n</svg>\n`;
  }
  const plotW: [number, number] = [MARGIN.left + 80, WIDTH - MARGIN.right];
  const top = MARGIN.top + 14;
  const rowH = Math.min(26, (HEIGHT - top - MARGIN.bottom) / bars.length);
  const maxAbs = Math.max(...bars.map(([, d]) => Math.abs(d)), 1e-9);
  const zeroX = (plotW[0] + plotW[1]) / 2;
  const halfSpan = (plotW[1] - plotW[0]) / 2;
  svg += `<line x1="${zeroX}" y1="${top - 6}" x2="${zeroX}" y2="${top + rowH * bars.length}" stroke="black"/>\n`;
  bars.forEach(([language, diff], i) => {
    const y = top + i * rowH;
    const w = (Math.abs(diff) / maxAbs) * halfSpan;
    const x = diff >= 0 ? zeroX : zeroX - w;
    const color = diff >= 0 ? COLORS.forge : COLORS.comparison;
    svg += `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(rowH * 0.7)}" fill="${color}"/>\n`;
    svg += `<text x="${plotW[0] - 86}" y="${fmt(y + rowH * 0.55)}">${language}</text>\n`;
    svg += `<text x="${fmt(diff >= 0 ? zeroX + w + 4 : zeroX - w - 4)}" y="${fmt(y + rowH * 0.55)}"` +
      `${diff >= 0 ? "" : ' text-anchor="end"'} font-size="10">${fmt(diff)}</text>\n`;
  });
  return svg + "</svg>\n";
}

export function importanceFigure(features: FeatureImportance[], baseline: number): string {
  let svg = svgOpen(`Permutation importance (baseline accuracy ${fmt(baseline)})`);
  if (features.length === 0) {
    return svg + "</svg>\n";
  }
  const plotW: [number, number] = [MARGIN.left + 120, WIDTH - MARGIN.right];
  const top = MARGIN.top + 14;
  const rowH = Math.min(26, (HEIGHT - top - MARGIN.bottom) / features.length);
  const maxAbs = Math.max(...features.map((f) => Math.abs(f.meanAccuracyDrop)), 1e-9);
  features.forEach((f, i) => {
    const y = top + i * rowH;
    const w = (Math.abs(f.meanAccuracyDrop) / maxAbs) * (plotW[1] - plotW[0]);
    const color = f.meanAccuracyDrop >= 0 ? COLORS.forge : COLORS.comparison;
    svg += `<rect x="${plotW[0]}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(rowH * 0.7)}" fill="${color}"/>\n`;
    svg += `<text x="${plotW[0] - 6}" y="${fmt(y + rowH * 0.55)}" text-anchor="end">${f.name}</text>\n`;
    svg += `<text x="${fmt(plotW[0] + w + 4)}" y="${fmt(y + rowH * 0.55)}" font-size="10">${fmt(f.meanAccuracyDrop)}</text>\n`;
  });
  return svg + "</svg>\n";
}

export function rocFigure(points: RocPoint[], auc: number): string {
  const plotW: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
  const plotH: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];
  const sx = (v: number) => plotW[0] + v * (plotW[1] - plotW[0]);
  const sy = (v: number) => plotH[0] + v * (plotH[1] - plotH[0]);
  let svg = svgOpen(`ROC (AUC ${fmt(auc)})`);
  svg += `<line x1="${plotW[0]}" y1="${plotH[0]}" x2="${plotW[1]}" y2="${plotH[0]}" stroke="black"/>\n`;
  svg += `<line x1="${plotW[0]}" y1="${plotH[0]}" x2="${plotW[0]}" y2="${plotH[1]}" stroke="black"/>\n`;
  svg += `<line x1="${sx(0)}" y1="${sy(0)}" x2="${sx(1)}" y2="${sy(1)}" stroke="#999" stroke-dasharray="4 3"/>\n`;
  const path = points.map((p) => `${fmt(sx(p.fpr))},${fmt(sy(p.tpr))}`).join(" ");
  svg += `<polyline points="${path}" fill="none" stroke="${COLORS.forge}" stroke-width="1.5"/>\n`;
  svg += `<text x="${(plotW[0] + plotW[1]) / 2}" y="${HEIGHT - 10}" text-anchor="middle">false positive rate</text>\n`;
  svg += `<text x="16" y="${(plotH[0] + plotH[1]) / 2}" text-anchor="middle" transform="rotate(-90 16 ${(plotH[0] + plotH[1]) / 2})">true positive rate</text>\n`;
  return svg + "</svg>\n";
}
