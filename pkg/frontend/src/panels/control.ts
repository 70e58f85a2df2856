// Runtime control: kill switch (two-step confirm), rule CRUD for filters
// and guards, bias offsets, and the fail-safe predicate editor. Every
// button maps to exactly one endpoint call; nothing is simulated locally.

import type { ApiClient, GraphDoc, RuleDoc, ShutdownDoc } from "../api.js";
import { ApiError } from "../api.js";
import { clear, el, fmt } from "../dom.js";

type ArmableButton = HTMLButtonElement & { armed?: boolean };

function twoStep(button: ArmableButton, label: string, fire: () => void): void {
  button.textContent = label;
  button.armed = false;
  button.addEventListener("click", () => {
    if (!button.armed) {
      button.armed = true;
      button.classList.add("confirming");
      button.textContent = `Confirm: ${label}?`;
      return;
    }
    button.armed = false;
    button.classList.remove("confirming");
    button.textContent = label;
    fire();
  });
}

export class ControlPanel {
  readonly root: HTMLElement;
  private indicator: HTMLElement;
  private rulesBoxes = new Map<string, HTMLElement>();
  lastRequest: Promise<void> = Promise.resolve();

  constructor(
    container: HTMLElement,
    private api: ApiClient,
    private onShutdownChanged: (state: ShutdownDoc) => void,
  ) {
    this.root = container;
    this.root.classList.add("panel");
    this.indicator = el("span", {
      class: "shutdown-indicator",
      "data-role": "shutdown-indicator",
    }, ["running"]);
  }

  showShutdown(state: ShutdownDoc): void {
    this.indicator.classList.toggle("active", state.active);
    this.indicator.textContent = state.active
      ? `SHUTDOWN: ${state.reason || "active"}`
      : "running";
  }

  render(graph: GraphDoc): void {
    clear(this.root);
    this.rulesBoxes.clear();
    this.root.append(el("h2", {}, ["Control"]));

    const kill: ArmableButton = el("button", {
      class: "danger",
      "data-role": "kill-switch",
    });
    twoStep(kill, "Kill switch", () => {
      this.lastRequest = this.api
        .triggerShutdown("operator emergency stop", "ui")
        .then((state) => {
          this.showShutdown(state);
          this.onShutdownChanged(state);
        });
    });
    const clearBtn: ArmableButton = el("button", { "data-role": "clear-shutdown" });
    twoStep(clearBtn, "Clear shutdown", () => {
      this.lastRequest = this.api.clearShutdown("ui").then((state) => {
        this.showShutdown(state);
        this.onShutdownChanged(state);
      });
    });
    this.root.append(el("div", { class: "rule-row" }, [this.indicator, kill, clearBtn]));

    for (const block of graph.blocks) {
      if (block.kind === "NonGoalFilter" || block.kind === "DivineRuleGuard") {
        this.root.append(this.rulesSection(block.id, block.kind === "NonGoalFilter"));
      } else if (block.kind === "BiasInjector") {
        this.root.append(this.offsetsSection(block.id));
      } else if (block.kind === "LogicBomb") {
        this.root.append(this.predicateSection(block.id));
      }
    }
  }

  async loadRules(blockId: string): Promise<void> {
    const box = this.rulesBoxes.get(blockId);
    if (!box) return;
    const rules = await this.api.listRules(blockId);
    clear(box);
    if (rules.length === 0) {
      box.append(el("div", { class: "note" }, ["no rules"]));
      return;
    }
    for (const rule of rules) {
      box.append(this.ruleRow(blockId, rule));
    }
  }

  private ruleRow(blockId: string, rule: RuleDoc): HTMLElement {
    const summary = rule.replacement
      ? `priority ${rule.priority}, replaces with ${rule.replacement.label} (${fmt(rule.replacement.score)})`
      : rule.reject_message ?? "";
    const remove = el("button", { "data-role": `delete-rule-${rule.id}` }, ["delete"]);
    remove.addEventListener("click", () => {
      this.lastRequest = this.api
        .deleteRule(blockId, rule.id)
        .then(() => this.loadRules(blockId));
    });
    return el("div", { class: "rule-row", "data-rule-id": rule.id }, [
      el("strong", {}, [rule.id]),
      el("span", { class: "note" }, [summary]),
      remove,
    ]);
  }

  private rulesSection(blockId: string, isFilter: boolean): HTMLElement {
    const box = el("div", { "data-role": `rules-${blockId}` });
    this.rulesBoxes.set(blockId, box);

    const idInput = el("input", { type: "text", placeholder: "rule id" });
    const fieldInput = el("input", { type: "text", placeholder: "feature" });
    const opSelect = el("select", {});
    for (const op of ["gt", "ge", "lt", "le", "eq", "in_range"]) {
      opSelect.append(el("option", { value: op }, [op]));
    }
    const valueInput = el("input", { type: "text", placeholder: "value or lo,hi" });
    const extraInput = el("input", {
      type: "text",
      placeholder: isFilter ? "reject message" : "priority,label,score",
    });
    const errorBox = el("div", { class: "field-error", "data-role": `rule-error-${blockId}` });
    const save = el("button", { class: "primary", "data-role": `add-rule-${blockId}` }, ["save rule"]);

    save.addEventListener("click", () => {
      errorBox.textContent = "";
      const rawValue = valueInput.value.includes(",")
        ? valueInput.value.split(",").map(Number)
        : Number(valueInput.value);
      const condition = { field: fieldInput.value, op: opSelect.value, value: rawValue };
      let doc: Record<string, unknown>;
      if (isFilter) {
        doc = { id: idInput.value, predicate: condition, reject_message: extraInput.value };
      } else {
        const [priority, label, score] = extraInput.value.split(",");
        doc = {
          id: idInput.value,
          priority: Number(priority),
          condition,
          replacement: { label: (label ?? "").trim(), score: Number(score) },
          rationale: "set from console",
        };
      }
      this.lastRequest = this.api
        .putRule(blockId, idInput.value, doc)
        .then(() => this.loadRules(blockId))
        .catch((err) => {
          errorBox.textContent = err instanceof ApiError
            ? `${err.code}: ${err.message}`
            : (err as Error).message;
        });
    });

    return el("div", {}, [
      el("h3", {}, [`${isFilter ? "Filter" : "Guard"} rules: ${blockId}`]),
      box,
      el("div", { class: "rule-form" }, [idInput, fieldInput, opSelect, valueInput, extraInput, save]),
      errorBox,
    ]);
  }

  private offsetsSection(blockId: string): HTMLElement {
    const body = el("div", { "data-role": `offsets-${blockId}` });
    const preview = el("div", { class: "note", "data-role": `offsets-preview-${blockId}` });

    this.api.getOffsets(blockId).then((doc) => {
      const inputs = new Map<string, HTMLInputElement>();
      for (const [label, value] of Object.entries(doc.offsets)) {
        const input = el("input", { type: "number", step: "0.1" });
        input.value = String(value);
        inputs.set(label, input);
        body.append(el("div", { class: "offset-row" }, [el("label", {}, [label]), input]));
      }
      const save = el("button", { class: "primary", "data-role": `save-offsets-${blockId}` }, ["apply offsets"]);
      save.addEventListener("click", () => {
        const offsets = Object.fromEntries(
          [...inputs.entries()].map(([k, input]) => [k, Number(input.value)]));
        this.lastRequest = this.api
          .setOffsets(blockId, { offsets, active: doc.active })
          .then(() => this.api.whatIf(this.instance(), {}))
          .then((result) => {
            preview.textContent = result.decision
              ? `pipeline argmax now: ${result.decision.label} (${fmt(result.decision.score)})`
              : `pipeline: ${result.status}`;
          });
      });
      body.append(save, preview);
    });

    return el("div", {}, [el("h3", {}, [`Bias offsets: ${blockId}`]), body]);
  }

  private predicateSection(blockId: string): HTMLElement {
    const textarea = el("textarea", {
      rows: "3", cols: "40", "data-role": `predicate-${blockId}`,
    });
    const errorBox = el("div", { class: "field-error" });
    this.api.getPredicate(blockId).then((doc) => {
      textarea.value = JSON.stringify(doc.expression);
    });
    const save = el("button", { class: "primary", "data-role": `save-predicate-${blockId}` }, ["save predicate"]);
    save.addEventListener("click", () => {
      errorBox.textContent = "";
      let expression: unknown;
      try {
        expression = JSON.parse(textarea.value);
      } catch {
        errorBox.textContent = "predicate must be valid JSON";
        return;
      }
      this.lastRequest = this.api
        .setPredicate(blockId, { expression, action: "reset_and_halt" })
        .then(() => undefined)
        .catch((err) => {
          errorBox.textContent = err instanceof ApiError
            ? `${err.code}: ${err.message}`
            : (err as Error).message;
        });
    });
    return el("div", {}, [
      el("h3", {}, [`Fail-safe predicate: ${blockId}`]),
      textarea, el("div", {}, [save]), errorBox,
    ]);
  }

  /** instance used for the offsets argmax preview; injected by the app */
  instance: () => Record<string, number> = () => ({});
}
