/** Single-page decision-support client.
 *
 * Upload a model, run the box search, inspect the archive in a radar plot
 * with per-objective sliders, compare two portfolios asset by asset, and
 * launch restricted re-runs whose records stream in as they are computed.
 */
import { launchAndStream, ServiceClient } from "./api.js";
import {
  applySliderFilter,
  clampRange,
  SliderRanges,
  sliderSpecs,
  SliderSpec,
} from "./filters.js";
import { comparisonRows, maxAbsDifference, maxAbsWeight } from "./compare.js";
import {
  axesFromArchive,
  axisEndpoints,
  isDegenerate,
  percent,
  polylinePoints,
  PortfolioView,
  viewsFromArchive,
} from "./radar.js";
import type { ArchiveDoc, BoundInput } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

interface AppState {
  client: ServiceClient;
  modelId: string | null;
  archive: ArchiveDoc | null;
  views: PortfolioView[];
  ranges: SliderRanges;
  emphasized: number | null;
  running: boolean;
}

const state: AppState = {
  client: new ServiceClient(defaultBase()),
  modelId: null,
  archive: null,
  views: [],
  ranges: {},
  emphasized: null,
  running: false,
};

function defaultBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? "http://127.0.0.1:8080";
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function notice(message: string, kind: "info" | "error" = "info"): void {
  const box = byId<HTMLDivElement>("notice");
  box.textContent = message;
  box.className = `notice ${kind}`;
}

// ---------------------------------------------------------------------------
// radar rendering

function renderRadar(): void {
  const host = byId<HTMLDivElement>("radar");
  host.replaceChildren();
  const doc = state.archive;
  if (!doc || doc.records.length === 0) {
    host.append(el("p", { class: "empty" }, "No portfolios yet - upload a model and start a run."));
    return;
  }
  if (isDegenerate(doc)) {
    host.append(
      el(
        "p",
        { class: "empty" },
        "Fewer than three objectives: showing values on a segment instead of a radar."
      )
    );
    renderSegmentChart(host, doc);
    return;
  }

  const size = 460;
  const cx = size / 2;
  const cy = size / 2;
  const radius = size / 2 - 60;
  const svg = svgEl("svg", { viewBox: `0 0 ${size} ${size}`, class: "radar-svg" });

  const axes = axesFromArchive(doc);
  const ends = axisEndpoints(axes.length, cx, cy, radius);
  for (const ring of [0.25, 0.5, 0.75, 1.0]) {
    const pts = axisEndpoints(axes.length, cx, cy, radius * ring)
      .map((p) => `${p.x},${p.y}`)
      .join(" ");
    svg.append(svgEl("polygon", { points: pts, class: "grid-ring" }));
  }
  axes.forEach((axis, k) => {
    const end = ends[k];
    svg.append(svgEl("line", { x1: `${cx}`, y1: `${cy}`, x2: `${end.x}`, y2: `${end.y}`, class: "axis" }));
    const label = svgEl("text", {
      x: `${cx + (radius + 28) * Math.cos(end.angle)}`,
      y: `${cy + (radius + 28) * Math.sin(end.angle)}`,
      class: "axis-label",
      "text-anchor": "middle",
    });
    label.textContent = axis.label;
    svg.append(label);
  });

  const ordered = [...state.views].sort(
    (a, b) => Number(a.id === state.emphasized) - Number(b.id === state.emphasized)
  );
  for (const view of ordered) {
    const pts = polylinePoints(view.radii, cx, cy, radius)
      .map(([x, y]) => `${x},${y}`)
      .join(" ");
    const emphasized = view.id === state.emphasized;
    const poly = svgEl("polygon", {
      points: pts,
      class: `portfolio ${view.filtered ? "filtered" : ""} ${emphasized ? "emphasized" : ""}`,
      stroke: view.filtered ? "#b8b8b8" : view.color,
      fill: emphasized ? view.color : "none",
      "fill-opacity": emphasized ? "0.15" : "0",
      "data-id": `${view.id}`,
    });
    poly.addEventListener("click", () => {
      state.emphasized = state.emphasized === view.id ? null : view.id;
      renderRadar();
      renderLegend();
    });
    svg.append(poly);
  }
  host.append(svg);
}

function renderSegmentChart(host: HTMLElement, doc: ArchiveDoc): void {
  const axes = axesFromArchive(doc);
  const list = el("div", { class: "segments" });
  axes.forEach((axis, k) => {
    const row = el("div", { class: "segment-row" });
    row.append(el("span", { class: "segment-label" }, axis.label));
    const track = el("div", { class: "segment-track" });
    for (const view of state.views) {
      const dot = el("span", { class: `segment-dot ${view.filtered ? "filtered" : ""}` });
      dot.style.left = `${view.radii[k] * 100}%`;
      dot.style.background = view.filtered ? "#b8b8b8" : view.color;
      dot.title = `PF ${view.id}: ${view.display[axis.objective]}`;
      track.append(dot);
    }
    row.append(track);
    list.append(row);
  });
  host.append(list);
}

function renderLegend(): void {
  const host = byId<HTMLDivElement>("legend");
  host.replaceChildren();
  for (const view of state.views) {
    const chip = el("button", { class: `chip ${view.filtered ? "filtered" : ""}` });
    const swatch = el("span", { class: "swatch" });
    swatch.style.background = view.filtered ? "#b8b8b8" : view.color;
    chip.append(swatch, el("span", {}, `PF ${view.id}`));
    if (view.id === state.emphasized) chip.classList.add("emphasized");
    chip.addEventListener("click", () => {
      state.emphasized = state.emphasized === view.id ? null : view.id;
      renderRadar();
      renderLegend();
    });
    host.append(chip);
  }
}

// ---------------------------------------------------------------------------
// sliders

function referenceValues(doc: ArchiveDoc): Record<string, number> | undefined {
  // the min-distance payoff solution is the reference portfolio
  const ref = doc.records.find(
    (r) => r.kind === "payoff" && Math.abs(r.values["distance"] ?? 1) < 1e-9
  );
  return ref?.values;
}

function renderSliders(): void {
  const host = byId<HTMLDivElement>("sliders");
  host.replaceChildren();
  const doc = state.archive;
  if (!doc || doc.records.length === 0) return;
  const specs = sliderSpecs(doc, referenceValues(doc));
  for (const spec of specs) {
    const current = state.ranges[spec.objective] ?? [spec.low, spec.high];
    const row = el("div", { class: "slider-row" });
    row.append(el("label", {}, `${spec.title} range, % :`));
    const lo = el("input", {
      type: "number",
      step: "0.01",
      value: (current[0] * 100).toFixed(2),
    });
    const hi = el("input", {
      type: "number",
      step: "0.01",
      value: (current[1] * 100).toFixed(2),
    });
    // the widget prevents disjoint ranges: values are clamped on change
    const update = () => {
      const [a, b] = clampRange(spec, Number(lo.value) / 100, Number(hi.value) / 100);
      state.ranges[spec.objective] = [a, b];
      lo.value = (a * 100).toFixed(2);
      hi.value = (b * 100).toFixed(2);
      applySliderFilter(state.views, state.ranges);
      renderRadar();
      renderLegend();
    };
    lo.addEventListener("change", update);
    hi.addEventListener("change", update);
    row.append(lo, el("span", {}, "to"), hi);
    host.append(row);
  }
}

// ---------------------------------------------------------------------------
// comparison

function renderComparePickers(): void {
  const doc = state.archive;
  const left = byId<HTMLSelectElement>("compare-left");
  const right = byId<HTMLSelectElement>("compare-right");
  for (const select of [left, right]) select.replaceChildren();
  if (!doc) return;
  for (const record of doc.records) {
    for (const select of [left, right]) {
      select.append(el("option", { value: `${record.index}` }, `PF ${record.index}`));
    }
  }
  if (doc.records.length > 1) right.value = `${doc.records[doc.records.length - 1].index}`;
  renderComparison();
}

function barChart(
  title: string,
  rows: { asset: string; value: number }[],
  scale: number,
  signed: boolean
): HTMLElement {
  const box = el("div", { class: "bars" });
  box.append(el("h4", {}, title));
  for (const row of rows) {
    const line = el("div", { class: "bar-row" });
    line.append(el("span", { class: "bar-label" }, row.asset));
    const track = el("div", { class: "bar-track" });
    const bar = el("div", { class: `bar ${row.value < 0 ? "negative" : ""}` });
    const width = scale > 0 ? (Math.abs(row.value) / scale) * 100 : 0;
    bar.style.width = `${width}%`;
    if (signed) bar.style.marginLeft = row.value < 0 ? `${50 - width}%` : "50%";
    track.append(bar);
    line.append(track, el("span", { class: "bar-value" }, percent(row.value)));
    box.append(line);
  }
  return box;
}

function renderComparison(): void {
  const host = byId<HTMLDivElement>("comparison");
  host.replaceChildren();
  const doc = state.archive;
  if (!doc || doc.records.length === 0) return;
  const leftId = Number(byId<HTMLSelectElement>("compare-left").value);
  const rightId = Number(byId<HTMLSelectElement>("compare-right").value);
  const left = doc.records.find((r) => r.index === leftId);
  const right = doc.records.find((r) => r.index === rightId);
  if (!left || !right) return;
  const rows = comparisonRows(doc, left, right);
  const weightScale = maxAbsWeight(rows);
  host.append(
    barChart(`PF ${left.index}`, rows.map((r) => ({ asset: r.asset, value: r.left })), weightScale, false),
    barChart(`PF ${right.index}`, rows.map((r) => ({ asset: r.asset, value: r.right })), weightScale, false),
    barChart(
      `difference (PF ${right.index} - PF ${left.index})`,
      rows.map((r) => ({ asset: r.asset, value: r.difference })),
      maxAbsDifference(rows),
      true
    )
  );
}

// ---------------------------------------------------------------------------
// runs

function installArchive(doc: ArchiveDoc): void {
  state.archive = doc;
  state.views = viewsFromArchive(doc);
  state.ranges = {}; // slider ranges reset to the new payoff bounds
  applySliderFilter(state.views, state.ranges);
  renderRadar();
  renderLegend();
  renderSliders();
  renderComparePickers();
}

function boundsFromForm(): Record<string, BoundInput> {
  const bounds: Record<string, BoundInput> = {};
  for (const objective of ["return", "volatility", "solvency", "distance"]) {
    const min = byId<HTMLInputElement>(`bound-${objective}-min`).value;
    const max = byId<HTMLInputElement>(`bound-${objective}-max`).value;
    const entry: BoundInput = {};
    if (min !== "") entry.min = Number(min) / 100;
    if (max !== "") entry.max = Number(max) / 100;
    if (entry.min !== undefined || entry.max !== undefined) bounds[objective] = entry;
  }
  return bounds;
}

async function startRun(bounds: Record<string, BoundInput>): Promise<void> {
  if (!state.modelId) {
    notice("Upload a model first.", "error");
    return;
  }
  if (state.running) return;
  state.running = true;
  notice("Run launched; portfolios appear as they are computed.");
  const body = {
    maxit: Number(byId<HTMLInputElement>("run-maxit").value || "10"),
    seed: Number(byId<HTMLInputElement>("run-seed").value || "0"),
    bounds,
  };
  const final = await launchAndStream(state.client, state.modelId, body, {
    onArchive: (doc) => installArchive(doc),
    onError: (message) => notice(`Run failed: ${message}. Previous view retained.`, "error"),
  });
  state.running = false;
  if (final) notice(`Run finished with ${final.records.length} portfolios.`);
}

async function uploadModel(): Promise<void> {
  const read = async (id: string): Promise<string | null> => {
    const input = byId<HTMLInputElement>(id);
    const file = input.files?.[0];
    return file ? await file.text() : null;
  };
  const assets = await read("file-assets");
  if (!assets) {
    notice("An asset table is required.", "error");
    return;
  }
  try {
    const payload = {
      assets,
      calibration: await read("file-calibration"),
      correlation: await read("file-correlation"),
      constraints: await read("file-constraints"),
      reference: await read("file-reference"),
    };
    const { model_id } = await state.client.uploadModel(payload);
    state.modelId = model_id;
    notice(`Model ${model_id} uploaded.`);
  } catch (error) {
    notice(`Upload failed: ${error instanceof Error ? error.message : error}`, "error");
  }
}

export function wireUp(): void {
  state.client = new ServiceClient(defaultBase());
  byId<HTMLButtonElement>("upload").addEventListener("click", () => void uploadModel());
  byId<HTMLButtonElement>("start-run").addEventListener("click", () => void startRun({}));
  byId<HTMLFormElement>("bounds-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void startRun(boundsFromForm());
  });
  for (const id of ["compare-left", "compare-right"]) {
    byId<HTMLSelectElement>(id).addEventListener("change", renderComparison);
  }
  renderRadar();
}

if (typeof document !== "undefined" && document.getElementById("radar")) {
  wireUp();
}
