// Training-data repair: page through a model's training rows, flip labels,
// and retrain. The table always reflects what the server returns; flips are
// staged client-side only until the retrain call applies them.

import type { ApiClient, TrainingRowDoc, TrainingSliceDoc } from "../api.js";
import { ApiError } from "../api.js";
import { clear, el, fmt } from "../dom.js";

export class RelabelPanel {
  readonly root: HTMLElement;
  private modelSelect!: HTMLSelectElement;
  private offsetInput!: HTMLInputElement;
  private tableBody!: HTMLTableSectionElement;
  private retrainBtn!: HTMLButtonElement;
  private confirmBox!: HTMLElement;
  private resultBox!: HTMLElement;
  private slice: TrainingSliceDoc | null = null;
  private flips = new Map<number, string>();
  private classSet: string[] = [];
  private armed = false;
  readonly pageSize: number;
  lastRequest: Promise<void> = Promise.resolve();

  constructor(container: HTMLElement, private api: ApiClient, pageSize = 8) {
    this.root = container;
    this.root.classList.add("panel");
    this.pageSize = pageSize;
  }

  render(modelIds: string[]): void {
    clear(this.root);
    this.flips.clear();
    this.root.append(el("h2", {}, ["Training data"]));

    this.modelSelect = el("select", { "data-role": "relabel-model" });
    for (const id of modelIds) {
      this.modelSelect.append(el("option", { value: id }, [id]));
    }
    this.offsetInput = el("input", { type: "number", value: "0", min: "0" });
    const load = el("button", { "data-role": "relabel-load" }, ["load rows"]);
    load.addEventListener("click", () => {
      this.lastRequest = this.loadSlice();
    });
    this.modelSelect.addEventListener("change", () => {
      this.offsetInput.value = "0";
      this.lastRequest = this.loadSlice();
    });
    this.root.append(el("div", { class: "rule-row" }, [
      this.modelSelect,
      el("label", {}, ["offset"]),
      this.offsetInput,
      load,
    ]));

    const table = el("table", { "data-role": "relabel-table" });
    table.append(el("thead", {}, [el("tr", {}, [
      el("th", {}, ["row"]),
      el("th", {}, ["features"]),
      el("th", {}, ["label"]),
      el("th", {}, ["model says"]),
    ])]));
    this.tableBody = el("tbody", {});
    table.append(this.tableBody);
    this.root.append(table);

    this.retrainBtn = el("button", {
      class: "primary",
      "data-role": "retrain",
      disabled: true,
    }, ["Retrain"]);
    this.retrainBtn.addEventListener("click", () => this.onRetrainClick());
    this.confirmBox = el("div", { class: "note", "data-role": "retrain-confirm" });
    this.resultBox = el("div", { class: "note", "data-role": "retrain-result" });
    this.root.append(el("div", { class: "rule-row" }, [this.retrainBtn]),
      this.confirmBox, this.resultBox);

    this.lastRequest = this.loadSlice();
  }

  get stagedFlips(): ReadonlyMap<number, string> {
    return this.flips;
  }

  private async loadSlice(): Promise<void> {
    const blockId = this.modelSelect.value;
    const offset = Math.max(0, Number(this.offsetInput.value) || 0);
    this.slice = await this.api.trainingRows(blockId, offset, this.pageSize);
    for (const row of this.slice.rows) {
      if (!this.classSet.includes(row.label)) this.classSet.push(row.label);
    }
    this.classSet.sort();
    this.flips.clear();
    this.disarm();
    this.renderRows();
  }

  private renderRows(): void {
    clear(this.tableBody);
    if (!this.slice) return;
    for (const row of this.slice.rows) {
      this.tableBody.append(this.rowFor(row));
    }
    this.updateRetrainState();
  }

  private rowFor(row: TrainingRowDoc): HTMLTableRowElement {
    const shownLabel = this.flips.get(row.row_index) ?? row.label;
    const featureText = Object.entries(row.features)
      .map(([k, v]) => `${k}=${fmt(v, 1)}`)
      .join(" ");

    const flip = el("button", { "data-role": `flip-${row.row_index}` }, [shownLabel]);
    flip.addEventListener("click", () => {
      const current = this.flips.get(row.row_index) ?? row.label;
      const next = this.nextClass(current);
      if (next === row.label) {
        this.flips.delete(row.row_index);
      } else {
        this.flips.set(row.row_index, next);
      }
      this.disarm();
      this.renderRows();
    });

    const predictCell = el("td", { "data-role": `prediction-${row.row_index}` });
    const predictBtn = el("button", {}, ["predict"]);
    predictBtn.addEventListener("click", () => {
      this.lastRequest = this.api.predict(this.modelSelect.value, row.features)
        .then((doc) => {
          predictCell.textContent =
            `${doc.argmax} (${fmt(doc.scores[doc.argmax] ?? 0)})`;
        });
    });
    predictCell.append(predictBtn);

    const tr = el("tr", { "data-row-index": String(row.row_index) }, [
      el("td", {}, [String(row.row_index)]),
      el("td", { class: "note" }, [featureText]),
      el("td", {}, [flip]),
      predictCell,
    ]);
    if (this.flips.has(row.row_index)) tr.classList.add("flipped");
    return tr;
  }

  private nextClass(current: string): string {
    if (this.classSet.length < 2) return current;
    const idx = this.classSet.indexOf(current);
    return this.classSet[(idx + 1) % this.classSet.length];
  }

  private updateRetrainState(): void {
    this.retrainBtn.disabled = this.flips.size === 0;
    this.retrainBtn.textContent = this.flips.size > 0
      ? `Retrain (${this.flips.size} relabels)`
      : "Retrain";
  }

  private disarm(): void {
    this.armed = false;
    this.retrainBtn.classList.remove("confirming");
    this.confirmBox.textContent = "";
  }

  private onRetrainClick(): void {
    if (this.flips.size === 0 || !this.slice) return;
    if (!this.armed) {
      this.armed = true;
      this.retrainBtn.classList.add("confirming");
      const lines = [...this.flips.entries()].map(([idx, label]) => {
        const original = this.slice!.rows.find((r) => r.row_index === idx);
        return `row ${idx}: ${original?.label ?? "?"} to ${label}`;
      });
      this.confirmBox.textContent =
        `Confirm retrain of ${this.modelSelect.value} with ${this.flips.size} relabels: ` +
        lines.join("; ");
      this.retrainBtn.textContent = "Confirm retrain";
      return;
    }
    this.lastRequest = this.runRetrain();
  }

  private async runRetrain(): Promise<void> {
    const blockId = this.modelSelect.value;
    const slice = this.slice!;
    const relabels = [...this.flips.entries()].map(([row_index, new_label]) => ({
      row_index,
      new_label,
    }));
    try {
      const before = await this.predictSlice(blockId, slice.rows);
      const result = await this.api.retrain(blockId, relabels);
      await this.loadSlice();
      const after = await this.predictSlice(blockId, this.slice!.rows);
      const labels = new Map(this.slice!.rows.map((r) => [r.row_index, r.label]));
      const oldLabels = new Map(slice.rows.map((r) => [r.row_index, r.label]));
      let beforeHits = 0;
      let afterHits = 0;
      const changed: number[] = [];
      for (const [idx, argmax] of after.entries()) {
        if (before.get(idx) === oldLabels.get(idx)) beforeHits += 1;
        if (argmax === labels.get(idx)) afterHits += 1;
        if (before.get(idx) !== argmax) changed.push(idx);
      }
      const n = after.size;
      this.resultBox.textContent =
        `Retrained ${result.block_id}, applied ${result.applied}. ` +
        `Slice accuracy before ${beforeHits}/${n}, after ${afterHits}/${n}. ` +
        (changed.length > 0
          ? `Predictions changed for rows ${changed.join(", ")}.`
          : "No predictions changed on this slice.");
    } catch (err) {
      this.disarm();
      this.resultBox.textContent = err instanceof ApiError
        ? `retrain failed, ${err.code}: ${err.message}`
        : `retrain failed: ${(err as Error).message}`;
    }
  }

  private async predictSlice(
    blockId: string,
    rows: TrainingRowDoc[],
  ): Promise<Map<number, string>> {
    const out = new Map<number, string>();
    for (const row of rows) {
      const doc = await this.api.predict(blockId, row.features);
      out.set(row.row_index, doc.argmax);
    }
    return out;
  }
}
