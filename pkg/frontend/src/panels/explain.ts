// Per-feature attribution chart. Target and method are picked here; the
// instance comes from the what-if panel so both views always describe the
// same point.

import type { ApiClient, ExplanationDoc } from "../api.js";
import { clear, el, fmt, svgEl } from "../dom.js";

const BAR_H = 18;
const BAR_GAP = 6;
const LABEL_W = 110;
const VALUE_W = 60;
const CHART_W = 420;

export class ExplainPanel {
  readonly root: HTMLElement;
  private targetSelect: HTMLSelectElement;
  private methodSelect: HTMLSelectElement;
  private samplesInput: HTMLInputElement;
  private seedInput: HTMLInputElement;
  private chartBox: HTMLElement;
  private metaBox: HTMLElement;
  lastRequest: Promise<void> = Promise.resolve();

  constructor(
    container: HTMLElement,
    private api: ApiClient,
    private instanceSource: () => Record<string, number>,
  ) {
    this.root = container;
    this.root.classList.add("panel");
    this.targetSelect = el("select", { "data-role": "explain-target" });
    this.methodSelect = el("select", { "data-role": "explain-method" });
    for (const method of ["shap", "lime", "exact_shapley"]) {
      this.methodSelect.append(el("option", { value: method }, [method]));
    }
    this.samplesInput = el("input", { type: "number", value: "128", min: "4" });
    this.seedInput = el("input", { type: "number", value: "0" });
    this.chartBox = el("div", { "data-role": "explain-chart" });
    this.metaBox = el("div", { class: "note", "data-role": "explain-meta" });
  }

  render(modelIds: string[]): void {
    clear(this.root);
    clear(this.targetSelect);
    for (const id of [...modelIds, "pipeline"]) {
      this.targetSelect.append(el("option", { value: id }, [id]));
    }
    const run = el("button", { class: "primary", "data-role": "explain-run" }, ["Explain"]);
    run.addEventListener("click", () => {
      this.lastRequest = this.runExplain();
    });
    this.root.append(
      el("h2", {}, ["Why this decision"]),
      el("div", { class: "rule-row" }, [
        this.targetSelect, this.methodSelect,
        el("label", { class: "note" }, ["samples "]), this.samplesInput,
        el("label", { class: "note" }, ["seed "]), this.seedInput,
        run,
      ]),
      this.chartBox,
      this.metaBox,
    );
  }

  private async runExplain(): Promise<void> {
    const method = this.methodSelect.value;
    const options: { n_samples?: number; seed?: number } = {
      seed: Number(this.seedInput.value),
    };
    if (method !== "exact_shapley") options.n_samples = Number(this.samplesInput.value);
    try {
      const doc = await this.api.explain(
        this.targetSelect.value, method, this.instanceSource(), options);
      this.showChart(doc);
    } catch (err) {
      this.chartBox.replaceChildren(
        el("div", { class: "field-error" }, [(err as Error).message]));
      this.metaBox.textContent = "";
    }
  }

  private showChart(doc: ExplanationDoc): void {
    const entries = [...doc.phi].sort((a, b) => Math.abs(b.value) - Math.abs(a.value));
    const maxAbs = Math.max(...entries.map((e) => Math.abs(e.value)), 1e-12);
    const height = entries.length * (BAR_H + BAR_GAP) + BAR_GAP;
    const zero = LABEL_W + (CHART_W - LABEL_W - VALUE_W) / 2;
    const halfSpan = (CHART_W - LABEL_W - VALUE_W) / 2;

    const svg = svgEl("svg", {
      class: "bars",
      viewBox: `0 0 ${CHART_W} ${height}`,
      width: String(CHART_W),
      height: String(height),
    });
    svg.append(svgEl("line", {
      x1: String(zero), x2: String(zero), y1: "0", y2: String(height),
      stroke: "#d9dee5",
    }));

    entries.forEach((entry, i) => {
      const y = BAR_GAP + i * (BAR_H + BAR_GAP);
      const width = (Math.abs(entry.value) / maxAbs) * halfSpan;
      const x = entry.value >= 0 ? zero : zero - width;
      svg.append(
        svgEl("text", { x: "0", y: String(y + BAR_H - 5) }, [entry.feature]),
        svgEl("rect", {
          class: entry.value >= 0 ? "bar-pos" : "bar-neg",
          x: String(x), y: String(y),
          width: String(Math.max(width, 0.5)), height: String(BAR_H),
          "data-phi-feature": entry.feature,
          "data-phi-value": String(entry.value),
        }),
        svgEl("text", {
          x: String(CHART_W - VALUE_W + 4), y: String(y + BAR_H - 5),
        }, [fmt(entry.value, 4)]),
      );
    });

    this.chartBox.replaceChildren(svg);
    const fidelity = doc.fidelity
      ? ` fidelity r2 ${fmt(doc.fidelity.r_squared ?? NaN, 4)}`
      : "";
    this.metaBox.textContent =
      `${doc.method} for ${doc.target_class}, base ${fmt(doc.base_value, 4)}, `
      + `${doc.sample_count} samples, seed ${doc.seed}.${fidelity}`;
  }
}
