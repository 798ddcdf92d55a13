/** Radar-plot geometry.
 *
 * Axes are normalized to the run's payoff ranges so they are comparable;
 * minimized objectives are inverted, so a larger radius always means a
 * better value ("the more outer on the circle, the better").
 */
import type { ArchiveDoc, ArchiveRecord, Sense } from "./types.js";

export interface RadarAxis {
  objective: string;
  sense: Sense;
  low: number; // natural-sense fraction
  high: number;
  label: string; // e.g. "return [0.00, 8.50%]"
}

export interface PortfolioView {
  id: number; // record index (1-based, stable)
  kind: "payoff" | "intermediate";
  color: string;
  values: Record<string, number>;
  display: Record<string, string>;
  radii: number[]; // one normalized radius per axis, aligned with the axes
  filtered: boolean;
}

/** Deterministic color per record index so screenshots reproduce. */
const PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
  "#8c6d31", "#843c39",
];

export function colorFor(recordIndex: number): string {
  return PALETTE[(recordIndex - 1 + PALETTE.length * 1000) % PALETTE.length];
}

export function percent(v: number): string {
  return `${(v * 100).toFixed(2)}%`;
}

export function axesFromArchive(doc: ArchiveDoc): RadarAxis[] {
  return doc.objectives.map((objective, k) => {
    const low = doc.initial_bounds.natural_low[k];
    const high = doc.initial_bounds.natural_high[k];
    return {
      objective,
      sense: doc.senses[objective],
      low,
      high,
      label: `${objective} [${(low * 100).toFixed(2)}, ${(high * 100).toFixed(2)}%]`,
    };
  });
}

/**
 * Normalized radius in [0, 1] for a value on one axis: maximized objectives
 * grow outward with the raw value, minimized objectives are inverted.
 */
export function axisRadius(axis: RadarAxis, value: number): number {
  const span = axis.high - axis.low;
  if (span <= 0) return 0.5; // degenerate axis: everything ties
  const t = (value - axis.low) / span;
  const r = axis.sense === "max" ? t : 1 - t;
  return Math.min(1, Math.max(0, r));
}

export function viewsFromArchive(doc: ArchiveDoc): PortfolioView[] {
  const axes = axesFromArchive(doc);
  return doc.records.map((record: ArchiveRecord) => ({
    id: record.index,
    kind: record.kind,
    color: colorFor(record.index),
    values: record.values,
    display: record.display,
    radii: axes.map((axis) => axisRadius(axis, record.values[axis.objective])),
    filtered: false,
  }));
}

/** Vertex positions of one portfolio's polyline around (cx, cy). */
export function polylinePoints(
  radii: number[],
  cx: number,
  cy: number,
  radius: number
): Array<[number, number]> {
  const m = radii.length;
  return radii.map((r, k) => {
    const angle = -Math.PI / 2 + (2 * Math.PI * k) / m;
    return [cx + radius * r * Math.cos(angle), cy + radius * r * Math.sin(angle)];
  });
}

/** Axis endpoints (unit radius) for the chart skeleton. */
export function axisEndpoints(m: number, cx: number, cy: number, radius: number) {
  return Array.from({ length: m }, (_, k) => {
    const angle = -Math.PI / 2 + (2 * Math.PI * k) / m;
    return { x: cx + radius * Math.cos(angle), y: cy + radius * Math.sin(angle), angle };
  });
}

/** Fewer than three axes cannot span a polygon: degrade to a segment chart. */
export function isDegenerate(doc: ArchiveDoc): boolean {
  return doc.objectives.length < 3;
}
