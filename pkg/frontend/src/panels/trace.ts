// Run history straight from the trace endpoint: newest runs first, halted
// runs flagged, and a click expands the full event list for one run.

import type { ApiClient, RunSummaryDoc } from "../api.js";
import { clear, el } from "../dom.js";

export class TracePanel {
  readonly root: HTMLElement;
  private runsBody: HTMLTableSectionElement;
  private eventsBox: HTMLElement;
  private selectedRun: string | null = null;
  lastRequest: Promise<void> = Promise.resolve();

  constructor(container: HTMLElement, private api: ApiClient) {
    this.root = container;
    this.root.classList.add("panel");
    this.root.append(el("h2", {}, ["Runs"]));
    const table = el("table", { "data-role": "trace-runs" });
    table.append(el("thead", {}, [el("tr", {}, [
      el("th", {}, ["run"]),
      el("th", {}, ["events"]),
      el("th", {}, ["last event"]),
      el("th", {}, ["mode"]),
    ])]));
    this.runsBody = el("tbody", {});
    table.append(this.runsBody);
    this.eventsBox = el("div", { class: "trace-events", "data-role": "trace-events" });
    this.root.append(table, this.eventsBox);
  }

  async refresh(): Promise<void> {
    const doc = await this.api.traceSummary();
    const runs = [...doc.runs].sort((a, b) => (a.started < b.started ? 1 : -1));
    clear(this.runsBody);
    for (const run of runs) {
      this.runsBody.append(this.runRow(run));
    }
  }

  private runRow(run: RunSummaryDoc): HTMLTableRowElement {
    const tr = el("tr", { "data-run-id": run.run_id }, [
      el("td", {}, [run.run_id.slice(0, 12)]),
      el("td", {}, [String(run.events)]),
      el("td", {}, [run.last_event]),
      el("td", {}, [run.dry_run ? "dry run" : "live"]),
    ]);
    if (run.last_event === "Halted") tr.classList.add("run-halted");
    if (run.dry_run) tr.classList.add("run-dry");
    tr.addEventListener("click", () => {
      this.selectedRun = run.run_id;
      this.lastRequest = this.loadEvents(run.run_id);
    });
    return tr;
  }

  private async loadEvents(runId: string): Promise<void> {
    const doc = await this.api.traceRun(runId);
    if (this.selectedRun !== runId) return;
    clear(this.eventsBox);
    this.eventsBox.append(el("h3", {}, [`Events for ${runId.slice(0, 12)}`]));
    const table = el("table", {});
    table.append(el("thead", {}, [el("tr", {}, [
      el("th", {}, ["seq"]),
      el("th", {}, ["block"]),
      el("th", {}, ["event"]),
      el("th", {}, ["payload"]),
    ])]));
    const body = el("tbody", {});
    for (const ev of doc.events) {
      body.append(el("tr", { "data-seq": String(ev.seq) }, [
        el("td", {}, [String(ev.seq)]),
        el("td", {}, [ev.block_id ?? ""]),
        el("td", {}, [ev.event]),
        el("td", { class: "note" }, [JSON.stringify(ev.payload_snapshot)]),
      ]));
    }
    table.append(body);
    this.eventsBox.append(table);
  }
}
