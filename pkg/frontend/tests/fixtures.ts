/** Test fixtures: a 14-portfolio example run (values in fractions) and a
 * restricted-run variant with tightened payoff ranges. */
import type { ArchiveDoc, ArchiveRecord } from "../src/types.js";

const OBJECTIVES = ["return", "volatility", "solvency", "distance"];
const SENSES = { return: "max", volatility: "min", solvency: "max", distance: "min" } as const;

// PF rows 1..14: return, volatility, solvency, distance (percent)
const EXAMPLE_ROWS: Array<[number, number, number, number]> = [
  [1.83, 4.27, 191.64, 0.0],
  [8.5, 18.0, 95.3, 199.76],
  [0.0, 0.0, 224.37, 188.04],
  [0.12, 1.58, 226.6, 128.23],
  [4.29, 8.31, 161.57, 98.95],
  [5.79, 10.6, 142.04, 163.87],
  [2.37, 4.59, 197.54, 89.27],
  [3.99, 8.04, 151.43, 52.97],
  [2.57, 4.54, 148.7, 50.35],
  [3.49, 6.08, 182.91, 125.88],
  [5.93, 11.9, 122.15, 100.05],
  [5.54, 7.44, 109.24, 170.04],
  [4.88, 12.09, 151.85, 171.6],
  [7.07, 13.32, 116.01, 155.6],
];

export const EXAMPLE_RANGES = {
  low: [0.0, 0.0, 0.9531, 0.0],
  high: [0.085, 0.18, 2.266, 1.9976],
};

export const ASSET_NAMES = [
  "Real Estate Germany",
  "Real Estate Intl.",
  "Equity Intl. Large Cap",
  "Equity Germany Large Cap",
  "Equity Intl. Small Cap",
  "Emerging Markets Equities",
  "Private Equity",
  "Government Debt",
  "Corporate Debt",
  "Infrastructure Finance",
  "Fixed Income",
  "Asset Backed Securities",
  "Cash",
];

export const REFERENCE_WEIGHTS = [
  5.98, 1.2, 2.39, 15.55, 0.6, 0.6, 0.12, 29.9, 17.94, 0.6, 4.78, 14.35, 5.98,
].map((v) => v / 100);

export const RESTRICTED_PF4_WEIGHTS = [
  11.79, 0.0, 14.3, 0.0, 0.0, 0.0, 0.12, 29.9, 16.27, 0.0, 0.0, 14.35, 13.27,
].map((v) => v / 100);

function record(index: number, row: [number, number, number, number]): ArchiveRecord {
  const values = {
    return: row[0] / 100,
    volatility: row[1] / 100,
    solvency: row[2] / 100,
    distance: row[3] / 100,
  };
  return {
    index,
    kind: index <= 4 ? "payoff" : "intermediate",
    iteration: index <= 4 ? 0 : index - 4,
    weights: REFERENCE_WEIGHTS,
    values,
    display: Object.fromEntries(
      Object.entries(values).map(([k, v]) => [k, `${(v * 100).toFixed(2)}%`])
    ),
  };
}

export function exampleArchive(): ArchiveDoc {
  return {
    format: "allocfront-archive",
    version: 1,
    model_hash: "fixture",
    config: {},
    objectives: [...OBJECTIVES],
    senses: { ...SENSES },
    asset_names: [...ASSET_NAMES],
    initial_bounds: {
      natural_low: [...EXAMPLE_RANGES.low],
      natural_high: [...EXAMPLE_RANGES.high],
      display: {},
    },
    records: EXAMPLE_ROWS.map((row, i) => record(i + 1, row)),
  };
}

/** Restricted-run payoff ranges (the Example-2 shape). */
export const RESTRICTED_RANGES = {
  low: [0.0183, 0.0337, 1.9164, 0.0],
  high: [0.0233, 0.0427, 2.0157, 0.5],
};

export function restrictedArchive(recordCount: number): ArchiveDoc {
  const doc = exampleArchive();
  doc.initial_bounds = {
    natural_low: [...RESTRICTED_RANGES.low],
    natural_high: [...RESTRICTED_RANGES.high],
    display: {},
  };
  doc.records = doc.records.slice(0, recordCount);
  return doc;
}
