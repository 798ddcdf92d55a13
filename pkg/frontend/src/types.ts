/** Wire types of the allocfront service (structured artifact + handles). */

export type Sense = "min" | "max";

export interface ArchiveRecord {
  index: number;
  kind: "payoff" | "intermediate";
  iteration: number;
  weights: number[];
  values: Record<string, number>; // natural-sense fractions
  display: Record<string, string>;
}

export interface ArchiveDoc {
  format: string;
  version: number;
  model_hash: string;
  config: Record<string, unknown>;
  objectives: string[];
  senses: Record<string, Sense>;
  asset_names: string[];
  initial_bounds: {
    natural_low: number[];
    natural_high: number[];
    display: Record<string, string>;
  };
  records: ArchiveRecord[];
  error?: string;
}

export interface RunHandle {
  id: string;
  state: "pending" | "running" | "done" | "failed";
  progress: { completed: number; maxit: number };
  created_at: string;
  error: string | null;
}

export interface BoundInput {
  min?: number;
  max?: number;
}

export interface RunRequestBody {
  maxit: number;
  seed?: number;
  multistart?: number;
  objectives?: string[];
  bounds?: Record<string, BoundInput>;
}
