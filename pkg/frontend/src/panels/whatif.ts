// What-if exploration: one slider per feature, one dry-run request per
// committed slider change. The server is the only thing that computes
// outcomes; this panel just displays the response.

import type { ApiClient, WhatIfDoc } from "../api.js";
import { clear, el, fmt } from "../dom.js";

export interface FeatureRange {
  name: string;
  min: number;
  max: number;
  step: number;
}

export function rangesFromRows(rows: Record<string, number>[]): FeatureRange[] {
  if (rows.length === 0) return [];
  const names = Object.keys(rows[0]);
  return names.map((name) => {
    const values = rows.map((r) => r[name]);
    const lo = Math.min(...values);
    const hi = Math.max(...values);
    const span = hi - lo || 1;
    const integral = values.every((v) => Number.isInteger(v));
    return {
      name,
      min: Math.floor((lo - 0.1 * span) * 10) / 10,
      max: Math.ceil((hi + 0.25 * span) * 10) / 10,
      step: integral && span > 5 ? 1 : 0.1,
    };
  });
}

export class WhatIfPanel {
  readonly root: HTMLElement;
  private base: Record<string, number> = {};
  private overrides: Record<string, number> = {};
  private sliders = new Map<string, HTMLInputElement>();
  private outputs = new Map<string, HTMLOutputElement>();
  private decisionBox: HTMLElement;
  private scoresBox: HTMLElement;
  private requestCount = 0;
  /** resolves when the most recent dry-run round trip has rendered */
  lastRequest: Promise<void> = Promise.resolve();

  constructor(container: HTMLElement, private api: ApiClient) {
    this.root = container;
    this.root.classList.add("panel");
    this.decisionBox = el("div", { "data-role": "whatif-decision" });
    this.scoresBox = el("div", { "data-role": "whatif-scores", class: "note" });
  }

  get dryRunRequests(): number {
    return this.requestCount;
  }

  currentInstance(): Record<string, number> {
    return { ...this.base, ...this.overrides };
  }

  render(baseInstance: Record<string, number>, ranges: FeatureRange[], baseline: WhatIfDoc | null): void {
    this.base = { ...baseInstance };
    this.overrides = {};
    this.sliders.clear();
    this.outputs.clear();
    clear(this.root);

    this.root.append(el("h2", {}, ["What-if exploration"]));
    const grid = el("div", {});
    for (const range of ranges) {
      const value = this.base[range.name] ?? range.min;
      const slider = el("input", {
        type: "range",
        min: String(range.min),
        max: String(range.max),
        step: String(range.step),
        "data-feature": range.name,
      });
      slider.value = String(value);
      const output = el("output", {}, [fmt(value)]);
      slider.addEventListener("change", () => {
        this.overrides[range.name] = Number(slider.value);
        output.textContent = fmt(Number(slider.value));
        this.lastRequest = this.runWhatIf();
      });
      slider.addEventListener("input", () => {
        output.textContent = fmt(Number(slider.value));
      });
      this.sliders.set(range.name, slider);
      this.outputs.set(range.name, output);
      grid.append(el("div", { class: "slider-row" }, [
        el("label", {}, [range.name]),
        slider,
        output,
      ]));
    }
    this.root.append(grid);

    const reset = el("button", { "data-role": "whatif-reset" }, ["Reset to base"]);
    reset.addEventListener("click", () => {
      this.overrides = {};
      for (const [name, slider] of this.sliders) {
        slider.value = String(this.base[name]);
        this.outputs.get(name)!.textContent = fmt(this.base[name]);
      }
      this.lastRequest = this.runWhatIf();
    });
    this.root.append(el("div", {}, [reset]), this.decisionBox, this.scoresBox);

    if (baseline) this.showResult(baseline);
  }

  private async runWhatIf(): Promise<void> {
    this.requestCount += 1;
    try {
      const doc = await this.api.whatIf(this.base, { ...this.overrides });
      this.showResult(doc);
    } catch (err) {
      this.decisionBox.replaceChildren(
        el("span", { class: "field-error" }, [`what-if failed: ${(err as Error).message}`]));
    }
  }

  private showResult(doc: WhatIfDoc): void {
    const status = doc.status;
    if (status === "completed" && doc.decision) {
      this.decisionBox.replaceChildren(
        el("span", { class: "decision-chip", "data-decision-label": doc.decision.label }, [
          `${doc.decision.label} (${fmt(doc.decision.score)})`,
        ]),
        el("span", { class: "note" }, [` via ${doc.decision.source_block}, dry run`]),
      );
    } else {
      this.decisionBox.replaceChildren(
        el("span", { class: `decision-chip ${status}`, "data-decision-label": status }, [status]),
        el("span", { class: "note" }, [doc.reason ? ` ${doc.reason}` : ""]),
      );
    }
    const scores = doc.scores
      ? Object.entries(doc.scores).map(([k, v]) => `${k}: ${fmt(v)}`).join("  ")
      : "";
    this.scoresBox.textContent = scores;
  }
}
