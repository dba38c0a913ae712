// What-if ranking explorer: integer weight sliders, a live ranking table,
// and a "best rank" button that fills the sliders with rank-optimal weights.

import { ApiClient, ApiError, DatasetPayload, OptimizePayload, RankRow } from "./api.js";

export interface AppOptions {
  debounceMs?: number;
}

const MAX_WEIGHT = 5;

export class RankingApp {
  readonly weights: number[];
  ranking: RankRow[] = [];
  lastSolution: OptimizePayload | null = null;

  private seqCounter = 0;
  private appliedSeq = 0;
  private inflight = 0;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private readonly debounceMs: number;

  private readonly sliders: HTMLInputElement[] = [];
  private readonly valueLabels: HTMLElement[] = [];
  private readonly tbody: HTMLTableSectionElement;
  private readonly validation: HTMLElement;
  private readonly banner: HTMLElement;
  private readonly errorBanner: HTMLElement;
  private readonly errorMessage: HTMLElement;
  private readonly entitySelect: HTMLSelectElement;

  private constructor(
    readonly root: HTMLElement,
    private readonly api: ApiClient,
    readonly dataset: DatasetPayload,
    options: AppOptions,
  ) {
    this.debounceMs = options.debounceMs ?? 150;
    this.weights = dataset.dimensions.map(() => 1);

    root.innerHTML = "";
    const controls = el("div", { class: "controls", "data-testid": "sliders" });
    dataset.dimensions.forEach((name, dim) => {
      const wrap = el("label", { class: "slider" });
      wrap.append(el("span", { class: "dim-name" }, name));
      const input = el("input", {
        type: "range",
        min: "0",
        max: String(MAX_WEIGHT),
        step: "1",
        value: String(this.weights[dim]),
        "data-dim": String(dim),
      }) as HTMLInputElement;
      input.addEventListener("input", () => {
        this.onWeightChange(dim, Number(input.value));
      });
      const value = el("span", { class: "dim-value", "data-testid": `weight-value-${dim}` },
        String(this.weights[dim]));
      wrap.append(input, value);
      controls.append(wrap);
      this.sliders.push(input);
      this.valueLabels.push(value);
    });

    const actions = el("div", { class: "actions" });
    this.entitySelect = el("select", { "data-testid": "entity-select" }) as HTMLSelectElement;
    for (const entity of dataset.entities) {
      this.entitySelect.append(el("option", { value: entity }, entity));
    }
    const optimizeButton = el("button", { "data-testid": "optimize" }, "best possible rank");
    optimizeButton.addEventListener("click", () => {
      void this.optimizeSelected();
    });
    actions.append(this.entitySelect, optimizeButton);

    this.validation = el("div", { class: "validation", "data-testid": "validation", hidden: "" },
      "At least one weight must be non-zero.");
    this.banner = el("div", { class: "banner", "data-testid": "banner", hidden: "" });
    this.errorMessage = el("span", { "data-testid": "error-message" });
    const dismiss = el("button", { "data-testid": "dismiss-error" }, "dismiss");
    dismiss.addEventListener("click", () => {
      this.errorBanner.hidden = true;
    });
    this.errorBanner = el("div", { class: "error-banner", "data-testid": "error-banner", hidden: "" });
    this.errorBanner.append(this.errorMessage, dismiss);

    const table = el("table", { "data-testid": "ranking" });
    const head = el("tr", {});
    for (const caption of ["rank", "entity", "CI", "eq.w. rank", "dimensions"]) {
      head.append(el("th", {}, caption));
    }
    const thead = el("thead");
    thead.append(head);
    table.append(thead);
    this.tbody = el("tbody", {}) as HTMLTableSectionElement;
    table.append(this.tbody);

    root.append(controls, actions, this.validation, this.banner, this.errorBanner, table);
  }

  static async create(root: HTMLElement, api: ApiClient, options: AppOptions = {}): Promise<RankingApp> {
    const dataset = await api.dataset();
    const app = new RankingApp(root, api, dataset, options);
    app.requestRanking();
    await app.settle();
    return app;
  }

  /** Slider handler; values are clamped to integers in 0..5. */
  onWeightChange(dim: number, value: number): void {
    const clamped = Math.max(0, Math.min(MAX_WEIGHT, Math.round(value)));
    this.weights[dim] = clamped;
    this.sliders[dim].value = String(clamped);
    this.valueLabels[dim].textContent = String(clamped);
    if (this.weights.every((w) => w === 0)) {
      // invalid for the integer model: block the request, tell the user
      if (this.debounceTimer !== null) {
        clearTimeout(this.debounceTimer);
        this.debounceTimer = null;
      }
      this.validation.hidden = false;
      return;
    }
    this.validation.hidden = true;
    this.scheduleRanking();
  }

  async optimizeSelected(): Promise<void> {
    const entity = this.entitySelect.value;
    try {
      const solution = await this.api.optimize(entity);
      this.lastSolution = solution;
      solution.weights.forEach((w, dim) => {
        this.weights[dim] = w;
        this.sliders[dim].value = String(w);
        this.valueLabels[dim].textContent = String(w);
      });
      this.validation.hidden = true;
      const lead = solution.distance === null ? "" : `, lead ${solution.distance.toFixed(3)}`;
      this.banner.textContent = `${solution.entity}: best possible rank ${solution.topRank}${lead}`;
      this.banner.hidden = false;
      this.requestRanking();
    } catch (err) {
      this.showError(err);
    }
  }

  /** Resolves once no debounce timer is armed and no request is in flight. */
  async settle(): Promise<void> {
    for (;;) {
      if (this.debounceTimer === null && this.inflight === 0) {
        return;
      }
      await new Promise((resolve) => setTimeout(resolve, 10));
    }
  }

  private scheduleRanking(): void {
    if (this.debounceTimer !== null) {
      clearTimeout(this.debounceTimer);
    }
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      this.requestRanking();
    }, this.debounceMs);
  }

  private requestRanking(): void {
    const seq = ++this.seqCounter;
    const weights = [...this.weights];
    this.inflight += 1;
    this.api
      .rank(weights)
      .then((rows) => {
        if (seq > this.appliedSeq) {
          // stale responses (seq <= appliedSeq) are dropped
          this.appliedSeq = seq;
          this.ranking = rows;
          this.renderTable(weights);
        }
      })
      .catch((err) => {
        this.showError(err);
      })
      .finally(() => {
        this.inflight -= 1;
      });
  }

  private renderTable(weights: number[]): void {
    this.tbody.innerHTML = "";
    const maxWeight = Math.max(...weights, 1);
    for (const row of this.ranking) {
      const tr = el("tr", { "data-entity": row.entity });
      tr.append(el("td", { class: "rank" }, String(row.rank)));
      tr.append(el("td", { class: "entity" }, row.entity));
      tr.append(el("td", { class: "ci" }, row.ci.toFixed(2)));
      tr.append(el("td", { class: "eqw" }, String(row.equalWeightsRank)));
      const bars = el("td", { class: "bars" });
      const entityIndex = this.dataset.entities.indexOf(row.entity);
      this.dataset.dimensions.forEach((name, dim) => {
        const value = this.dataset.values[entityIndex][dim];
        const bar = el("span", {
          class: "bar",
          title: `${name}: ${value}`,
          "data-dim": String(dim),
        });
        bar.style.height = `${Math.round(value * 40)}px`;
        // shading follows the weight put on the dimension, as in the
        // weight-colored bar charts of the source tool
        const emphasis = weights[dim] > 0 ? 0.25 + 0.75 * (weights[dim] / maxWeight) : 0.08;
        bar.style.opacity = emphasis.toFixed(3);
        bars.append(bar);
      });
      tr.append(bars);
      this.tbody.append(tr);
    }
  }

  private showError(err: unknown): void {
    const message = err instanceof ApiError ? `${err.message}` : String(err);
    this.errorMessage.textContent = message;
    this.errorBanner.hidden = false;
  }
}

function el(tag: string, attrs: Record<string, string> = {}, text?: string): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "hidden") {
      (node as HTMLElement & { hidden: boolean }).hidden = true;
    } else {
      node.setAttribute(key, value);
    }
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}
