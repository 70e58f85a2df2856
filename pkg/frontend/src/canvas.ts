// SVG flow canvas: one rect + two text lines per block, one edge path per
// pipeline edge. Everything is addressable via data attributes for tests.

import type { GraphDoc } from "./api.js";
import { layeredLayout, NODE_H, NODE_W } from "./layout.js";
import { clear, svgEl } from "./dom.js";

export class FlowCanvas {
  readonly root: HTMLElement;

  constructor(container: HTMLElement) {
    this.root = container;
    this.root.classList.add("flow-canvas");
  }

  render(graph: GraphDoc): void {
    const layout = layeredLayout(graph);
    const svg = svgEl("svg", {
      viewBox: `0 0 ${layout.width} ${layout.height}`,
      width: String(layout.width),
      height: String(layout.height),
      role: "img",
      "aria-label": "pipeline topology",
    });

    const marker = svgEl("marker", {
      id: "arrow",
      viewBox: "0 0 8 8",
      refX: "7",
      refY: "4",
      markerWidth: "7",
      markerHeight: "7",
      orient: "auto-start-reverse",
    }, [svgEl("path", { d: "M 0 0 L 8 4 L 0 8 z", fill: "#66707d" })]);
    svg.append(svgEl("defs", {}, [marker]));

    for (const [from, to] of graph.edges) {
      const a = layout.byId.get(from);
      const b = layout.byId.get(to);
      if (!a || !b) continue;
      const x1 = a.x + NODE_W;
      const y1 = a.y + NODE_H / 2;
      const x2 = b.x;
      const y2 = b.y + NODE_H / 2;
      const mid = (x1 + x2) / 2;
      const path = svgEl("path", {
        class: "flow-edge",
        d: `M ${x1} ${y1} C ${mid} ${y1}, ${mid} ${y2}, ${x2} ${y2}`,
        "data-edge": `${from}->${to}`,
      });
      svg.append(path);
    }

    for (const node of layout.nodes) {
      const group = svgEl("g", {
        class: `flow-node kind-${node.kind}`,
        transform: `translate(${node.x}, ${node.y})`,
        "data-node-id": node.id,
        "data-kind": node.kind,
      }, [
        svgEl("rect", { width: String(NODE_W), height: String(NODE_H), rx: "6" }),
        svgEl("text", { x: "8", y: "18" }, [node.label]),
        svgEl("text", { x: "8", y: "34", class: "kind-label" }, [node.kind]),
      ]);
      svg.append(group);
    }

    clear(this.root);
    this.root.append(svg);
  }
}
