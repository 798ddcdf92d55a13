/** Minimal client for the allocfront service. Polling de-duplicates
 * in-flight requests so a slow response never stacks up behind the timer. */
import type { ArchiveDoc, RunHandle, RunRequestBody } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

async function readError(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body === "object" && "detail" in body) {
      return JSON.stringify((body as { detail: unknown }).detail);
    }
    return JSON.stringify(body);
  } catch {
    return response.statusText;
  }
}

export class ServiceClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(
    readonly base: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args)
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, init);
    if (!response.ok) {
      throw new ServiceError(await readError(response), response.status);
    }
    return (await response.json()) as T;
  }

  /** GETs de-duplicated by path while a request is already in flight. */
  private dedupedGet<T>(path: string): Promise<T> {
    const existing = this.inflight.get(path);
    if (existing) return existing as Promise<T>;
    const promise = this.request<T>(path).finally(() => this.inflight.delete(path));
    this.inflight.set(path, promise);
    return promise;
  }

  uploadModel(payload: Record<string, string | null>): Promise<{ model_id: string }> {
    return this.request("/models", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  launchRun(modelId: string, body: RunRequestBody): Promise<RunHandle> {
    return this.request(`/models/${modelId}/runs`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getRun(runId: string): Promise<RunHandle> {
    return this.dedupedGet(`/runs/${runId}`);
  }

  getArchive(runId: string): Promise<ArchiveDoc> {
    return this.dedupedGet(`/runs/${runId}/archive`);
  }
}

export interface RunProgressCallbacks {
  /** Called whenever the partial archive grew; records only ever accumulate. */
  onArchive?: (doc: ArchiveDoc, handle: RunHandle) => void;
  onError?: (message: string) => void;
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/**
 * Launch a run and stream its records until it finishes. Resolves with the
 * final archive on success and returns null after reporting the error (an
 * infeasible run, say) so the caller can keep its previous view.
 */
export async function launchAndStream(
  client: ServiceClient,
  modelId: string,
  body: RunRequestBody,
  callbacks: RunProgressCallbacks = {},
  intervalMs = 500
): Promise<ArchiveDoc | null> {
  let handle: RunHandle;
  try {
    handle = await client.launchRun(modelId, body);
  } catch (error) {
    callbacks.onError?.(error instanceof Error ? error.message : String(error));
    return null;
  }
  let seen = 0;
  for (;;) {
    try {
      handle = await client.getRun(handle.id);
      const doc = await client.getArchive(handle.id);
      // only a grown, non-empty archive updates the view: a failed run with
      // no records leaves the previous view untouched
      if (doc.records && doc.records.length > seen) {
        seen = doc.records.length;
        callbacks.onArchive?.(doc, handle);
      }
      if (handle.state === "done") return doc;
      if (handle.state === "failed") {
        callbacks.onError?.(handle.error ?? doc.error ?? "run failed");
        return null;
      }
    } catch (error) {
      callbacks.onError?.(error instanceof Error ? error.message : String(error));
      return null;
    }
    await sleep(intervalMs);
  }
}
