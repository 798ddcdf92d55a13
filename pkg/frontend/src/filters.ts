/** Per-objective range sliders: filtering grays portfolios out, never
 * removes them, so un-graying restores identical geometry. */
import type { ArchiveDoc } from "./types.js";
import type { PortfolioView } from "./radar.js";
import { percent } from "./radar.js";

export interface SliderSpec {
  objective: string;
  low: number; // full range (payoff bounds), fractions
  high: number;
  title: string; // includes the reference portfolio's value when known
}

export type SliderRanges = Record<string, [number, number]>;

/**
 * Slider definitions for a run: full payoff ranges, titled with the
 * reference portfolio's value in that objective when one is supplied.
 */
export function sliderSpecs(
  doc: ArchiveDoc,
  referenceValues?: Record<string, number>
): SliderSpec[] {
  return doc.objectives.map((objective, k) => {
    const low = doc.initial_bounds.natural_low[k];
    const high = doc.initial_bounds.natural_high[k];
    const ref = referenceValues?.[objective];
    const suffix = ref === undefined ? "" : ` (reference: ${percent(ref)})`;
    return { objective, low, high, title: `${objective}${suffix}` };
  });
}

/**
 * Mark portfolios outside any active range as filtered (grayed). The list
 * and its geometry are untouched; only the flags change.
 */
export function applySliderFilter(
  views: PortfolioView[],
  ranges: SliderRanges
): PortfolioView[] {
  for (const view of views) {
    let filtered = false;
    for (const [objective, range] of Object.entries(ranges)) {
      const value = view.values[objective];
      if (value === undefined) continue;
      const [lo, hi] = range;
      if (value < lo - 1e-12 || value > hi + 1e-12) {
        filtered = true;
        break;
      }
    }
    view.filtered = filtered;
  }
  return views;
}

/** Clamp a requested range into the slider's full range, min <= max. */
export function clampRange(
  spec: SliderSpec,
  lo: number,
  hi: number
): [number, number] {
  const low = Math.max(spec.low, Math.min(lo, spec.high));
  const high = Math.min(spec.high, Math.max(hi, spec.low));
  return low <= high ? [low, high] : [high, high];
}
