// End-to-end panel behavior against the mock service: topology rendering,
// the one-request-per-slider-change contract, and the kill-switch round trip.

import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import { MockServer } from "./mockServer.js";

function freshRoot(): HTMLElement {
  const root = document.createElement("div");
  root.id = "root";
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

describe("flow canvas", () => {
  it("renders the demo topology with six nodes and six edges", async () => {
    const server = new MockServer();
    const app = await bootApp(server);

    const nodes = app.canvas.root.querySelectorAll("[data-node-id]");
    const edges = app.canvas.root.querySelectorAll("[data-edge]");
    expect(nodes.length).toBe(6);
    expect(edges.length).toBe(6);

    const ids = [...nodes].map((n) => n.getAttribute("data-node-id")).sort();
    expect(ids).toEqual(
      ["agg_1", "filter_1", "guard_1", "logreg_1", "splitter_1", "tree_1"]);

    const edgeKeys = [...edges].map((e) => e.getAttribute("data-edge")).sort();
    expect(edgeKeys).toEqual([
      "agg_1->guard_1",
      "filter_1->splitter_1",
      "logreg_1->agg_1",
      "splitter_1->logreg_1",
      "splitter_1->tree_1",
      "tree_1->agg_1",
    ]);
  });

  it("labels nodes with their display names and kinds", async () => {
    const server = new MockServer();
    const app = await bootApp(server);
    const tree = app.canvas.root.querySelector('[data-node-id="tree_1"]')!;
    expect(tree.getAttribute("data-kind")).toBe("Model");
    expect(tree.textContent).toContain("Decision tree");
    expect(tree.textContent).toContain("Model");
  });
});

describe("what-if sliders", () => {
  it("issues exactly one dry-run request per committed change and updates the decision", async () => {
    const server = new MockServer();
    const app = await bootApp(server);

    const slider = app.whatif.root.querySelector<HTMLInputElement>(
      'input[data-feature="cholesterol"]')!;
    expect(slider).not.toBeNull();

    const before = server.count("POST", "/pipeline/whatif");
    slider.value = "450";
    slider.dispatchEvent(new Event("change"));
    await app.whatif.lastRequest;

    expect(server.count("POST", "/pipeline/whatif")).toBe(before + 1);
    const chip = app.whatif.root.querySelector("[data-decision-label]")!;
    expect(chip.getAttribute("data-decision-label")).toBe("disease");
    expect(app.whatif.root.textContent).toContain("guard_1");
  });

  it("does not fire requests while the slider is merely dragged", async () => {
    const server = new MockServer();
    const app = await bootApp(server);

    const slider = app.whatif.root.querySelector<HTMLInputElement>(
      'input[data-feature="cholesterol"]')!;
    const before = server.count("POST", "/pipeline/whatif");
    for (const value of ["300", "350", "420"]) {
      slider.value = value;
      slider.dispatchEvent(new Event("input"));
    }
    await app.whatif.lastRequest;
    expect(server.count("POST", "/pipeline/whatif")).toBe(before);
  });

  it("moves the decision back when the slider returns below the guard threshold", async () => {
    const server = new MockServer();
    const app = await bootApp(server);
    const slider = app.whatif.root.querySelector<HTMLInputElement>(
      'input[data-feature="cholesterol"]')!;

    slider.value = "450";
    slider.dispatchEvent(new Event("change"));
    await app.whatif.lastRequest;
    expect(app.whatif.root.querySelector("[data-decision-label]")!
      .getAttribute("data-decision-label")).toBe("disease");

    slider.value = "200";
    slider.dispatchEvent(new Event("change"));
    await app.whatif.lastRequest;
    expect(app.whatif.root.querySelector("[data-decision-label]")!
      .getAttribute("data-decision-label")).toBe("no_disease");
  });

  it("reset restores the base instance with a single request", async () => {
    const server = new MockServer();
    const app = await bootApp(server);
    const slider = app.whatif.root.querySelector<HTMLInputElement>(
      'input[data-feature="cholesterol"]')!;
    const original = slider.value;

    slider.value = "450";
    slider.dispatchEvent(new Event("change"));
    await app.whatif.lastRequest;

    const before = server.count("POST", "/pipeline/whatif");
    app.whatif.root.querySelector<HTMLButtonElement>('[data-role="whatif-reset"]')!.click();
    await app.whatif.lastRequest;

    expect(server.count("POST", "/pipeline/whatif")).toBe(before + 1);
    expect(slider.value).toBe(original);
  });
});

describe("kill switch", () => {
  it("arms on the first click and flips server shutdown state on confirm, then back", async () => {
    const server = new MockServer();
    const app = await bootApp(server);

    const kill = app.control.root.querySelector<HTMLButtonElement>(
      '[data-role="kill-switch"]')!;
    const indicator = app.control.root.querySelector(
      '[data-role="shutdown-indicator"]')!;
    expect(indicator.textContent).toBe("running");

    kill.click();
    expect(server.shutdown.active).toBe(false);
    expect(server.count("POST", "/control/shutdown")).toBe(0);
    expect(kill.textContent).toContain("Confirm");

    kill.click();
    await app.control.lastRequest;
    expect(server.shutdown.active).toBe(true);
    expect(server.shutdown.reason).toBe("operator emergency stop");
    expect(indicator.classList.contains("active")).toBe(true);
    expect(indicator.textContent).toContain("SHUTDOWN");

    const clear = app.control.root.querySelector<HTMLButtonElement>(
      '[data-role="clear-shutdown"]')!;
    clear.click();
    expect(server.shutdown.active).toBe(true);
    clear.click();
    await app.control.lastRequest;
    expect(server.shutdown.active).toBe(false);
    expect(indicator.classList.contains("active")).toBe(false);
    expect(indicator.textContent).toBe("running");
  });
});
