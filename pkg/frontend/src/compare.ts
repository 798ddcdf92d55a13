/** Portfolio drill-down: side-by-side per-asset weights and their signed
 * differences, the data behind the comparison bar charts. */
import type { ArchiveDoc, ArchiveRecord } from "./types.js";

export interface ComparisonRow {
  asset: string;
  left: number; // fractions
  right: number;
  difference: number; // right - left, signed
}

export function comparisonRows(
  doc: ArchiveDoc,
  left: ArchiveRecord,
  right: ArchiveRecord
): ComparisonRow[] {
  return doc.asset_names.map((asset, i) => {
    const a = left.weights[i];
    const b = right.weights[i];
    return { asset, left: a, right: b, difference: b - a };
  });
}

export function maxAbsWeight(rows: ComparisonRow[]): number {
  return rows.reduce((acc, r) => Math.max(acc, Math.abs(r.left), Math.abs(r.right)), 0);
}

export function maxAbsDifference(rows: ComparisonRow[]): number {
  return rows.reduce((acc, r) => Math.max(acc, Math.abs(r.difference)), 0);
}
