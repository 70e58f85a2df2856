// Application shell: loads everything from the server on startup, wires the
// panels together, and polls shutdown state and run history. All panel data
// is reconstructed from API responses; nothing survives a refresh locally.

import type { ApiClient, GraphDoc } from "./api.js";
import { FlowCanvas } from "./canvas.js";
import { clear, el } from "./dom.js";
import { ChatPanel } from "./panels/chat.js";
import { ControlPanel } from "./panels/control.js";
import { ExplainPanel } from "./panels/explain.js";
import { RelabelPanel } from "./panels/relabel.js";
import { TracePanel } from "./panels/trace.js";
import { rangesFromRows, WhatIfPanel } from "./panels/whatif.js";

export interface AppOptions {
  pollMs?: number;
  autostart?: boolean;
}

export class App {
  readonly canvas: FlowCanvas;
  readonly whatif: WhatIfPanel;
  readonly explain: ExplainPanel;
  readonly control: ControlPanel;
  readonly relabel: RelabelPanel;
  readonly trace: TracePanel;
  readonly chat: ChatPanel;
  private offlineBanner: HTMLElement;
  private pollMs: number;
  private timer: ReturnType<typeof setInterval> | null = null;
  ready: Promise<void> = Promise.resolve();

  constructor(root: HTMLElement, private api: ApiClient, options: AppOptions = {}) {
    this.pollMs = options.pollMs ?? 1000;
    clear(root);

    this.offlineBanner = el("div", {
      class: "offline-banner",
      "data-role": "offline-banner",
      hidden: true,
    }, ["server unreachable, retrying"]);
    root.append(
      el("header", { class: "topbar" }, [
        el("h1", {}, ["glassflow console"]),
        this.offlineBanner,
      ]),
    );

    const canvasPanel = el("section", { class: "panel" }, [el("h2", {}, ["Pipeline"])]);
    const canvasBox = el("div", {});
    canvasPanel.append(canvasBox);
    this.canvas = new FlowCanvas(canvasBox);

    const whatifBox = el("section", {});
    const explainBox = el("section", {});
    const controlBox = el("section", {});
    const relabelBox = el("section", {});
    const traceBox = el("section", {});
    const chatBox = el("section", {});

    root.append(el("main", { class: "layout" }, [
      el("div", { class: "column" }, [canvasPanel, whatifBox, explainBox, traceBox]),
      el("div", { class: "column" }, [controlBox, relabelBox, chatBox]),
    ]));

    this.whatif = new WhatIfPanel(whatifBox, api);
    this.explain = new ExplainPanel(explainBox, api, () => this.whatif.currentInstance());
    this.control = new ControlPanel(controlBox, api, () => {
      void this.trace.refresh();
    });
    this.control.instance = () => this.whatif.currentInstance();
    this.relabel = new RelabelPanel(relabelBox, api);
    this.trace = new TracePanel(traceBox, api);
    this.chat = new ChatPanel(chatBox, api);

    if (options.autostart !== false) {
      this.start();
    }
  }

  start(): void {
    this.ready = this.refresh();
    if (this.pollMs > 0 && this.timer === null) {
      this.timer = setInterval(() => {
        void this.poll();
      }, this.pollMs);
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async refresh(): Promise<void> {
    try {
      const graph = await this.api.getGraph();
      this.canvas.render(graph);

      this.control.render(graph);
      for (const block of graph.blocks) {
        if (block.kind === "NonGoalFilter" || block.kind === "DivineRuleGuard") {
          await this.control.loadRules(block.id);
        }
      }
      this.control.showShutdown(await this.api.getShutdown());

      const modelIds = this.modelIds(graph);
      if (modelIds.length > 0) {
        const slice = await this.api.trainingRows(modelIds[0], 0, 16);
        if (slice.rows.length > 0) {
          const base = { ...slice.rows[0].features };
          const ranges = rangesFromRows(slice.rows.map((r) => r.features));
          const baseline = await this.api.whatIf(base, {});
          this.whatif.render(base, ranges, baseline);
        }
        this.explain.render(modelIds);
        this.relabel.render(modelIds);
        await this.relabel.lastRequest;
      }

      await this.trace.refresh();
      this.setOffline(false);
    } catch {
      this.setOffline(true);
    }
  }

  private async poll(): Promise<void> {
    try {
      this.control.showShutdown(await this.api.getShutdown());
      await this.trace.refresh();
      this.setOffline(false);
    } catch {
      this.setOffline(true);
    }
  }

  private modelIds(graph: GraphDoc): string[] {
    return graph.blocks.filter((b) => b.kind === "Model").map((b) => b.id);
  }

  private setOffline(offline: boolean): void {
    if (offline) {
      this.offlineBanner.removeAttribute("hidden");
    } else {
      this.offlineBanner.setAttribute("hidden", "");
    }
  }
}
