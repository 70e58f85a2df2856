// The UI keeps no state of its own: a fresh boot against the same server
// must rebuild every panel from API responses, both when nothing changed
// and after server-side state was mutated through the UI.

import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import { MockServer } from "./mockServer.js";

function freshRoot(): HTMLElement {
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  return root;
}

async function bootApp(server: MockServer): Promise<App> {
  const app = new App(freshRoot(), new ApiClient("/api/v1", server.fetch), {
    autostart: false,
  });
  await app.refresh();
  return app;
}

function panelSnapshot(app: App): string[] {
  return [
    app.canvas.root.innerHTML,
    app.whatif.root.innerHTML,
    app.explain.root.innerHTML,
    app.control.root.innerHTML,
    app.relabel.root.innerHTML,
    app.chat.root.innerHTML,
  ];
}

describe("statelessness across hard refreshes", () => {
  it("a second boot against an unchanged server renders identical panels", async () => {
    const server = new MockServer();
    const first = await bootApp(server);
    const snapshotA = panelSnapshot(first);

    const second = await bootApp(server);
    const snapshotB = panelSnapshot(second);

    expect(snapshotB).toEqual(snapshotA);
  });

  it("a reboot reconstructs mutated server state from API responses alone", async () => {
    const server = new MockServer();
    const app = await bootApp(server);

    // mutate through the UI: trip the kill switch and relabel a training row
    const kill = app.control.root.querySelector<HTMLButtonElement>(
      '[data-role="kill-switch"]')!;
    kill.click();
    kill.click();
    await app.control.lastRequest;

    const flip = app.relabel.root.querySelector<HTMLButtonElement>(
      '[data-role="flip-0"]')!;
    flip.click();
    const retrain = app.relabel.root.querySelector<HTMLButtonElement>(
      '[data-role="retrain"]')!;
    retrain.click();
    retrain.click();
    await app.relabel.lastRequest;
    expect(server.trainingData.get("tree_1")![0].label).toBe("disease");

    const rebooted = await bootApp(server);
    const indicator = rebooted.control.root.querySelector(
      '[data-role="shutdown-indicator"]')!;
    expect(indicator.classList.contains("active")).toBe(true);
    expect(indicator.textContent).toContain("SHUTDOWN");

    const firstLabel = rebooted.relabel.root.querySelector(
      '[data-role="flip-0"]')!;
    expect(firstLabel.textContent).toBe("disease");
  });

  it("run history is rebuilt from the trace endpoint on every boot", async () => {
    const server = new MockServer();
    const app = await bootApp(server);
    const rowsFirst = app.trace.root.querySelectorAll("[data-run-id]").length;
    expect(rowsFirst).toBe(server.runs.length);

    const rebooted = await bootApp(server);
    const rowsSecond = rebooted.trace.root.querySelectorAll("[data-run-id]").length;
    expect(rowsSecond).toBe(server.runs.length);
    expect(rowsSecond).toBe(rowsFirst + 1);
  });
});
