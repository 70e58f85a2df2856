// Deterministic left-to-right layered layout: a block's column is its
// longest-path depth from the entry, rows are ordered alphabetically within
// a column. No physics, so the same graph always draws the same picture.

import type { GraphDoc } from "./api.js";

export interface NodePosition {
  id: string;
  kind: string;
  label: string;
  column: number;
  row: number;
  x: number;
  y: number;
}

export interface LayoutResult {
  nodes: NodePosition[];
  byId: Map<string, NodePosition>;
  columns: number;
  rows: number;
  width: number;
  height: number;
}

export const NODE_W = 128;
export const NODE_H = 44;
export const GAP_X = 56;
export const GAP_Y = 26;
const PAD = 16;

export function layeredLayout(graph: GraphDoc): LayoutResult {
  const depth = new Map<string, number>();
  for (const block of graph.blocks) depth.set(block.id, 0);

  // longest path from the entry; the graph is validated acyclic server-side,
  // so |blocks| passes are enough to settle
  for (let pass = 0; pass < graph.blocks.length; pass += 1) {
    let changed = false;
    for (const [from, to] of graph.edges) {
      const want = (depth.get(from) ?? 0) + 1;
      if ((depth.get(to) ?? 0) < want) {
        depth.set(to, want);
        changed = true;
      }
    }
    if (!changed) break;
  }

  const byColumn = new Map<number, string[]>();
  for (const block of graph.blocks) {
    const col = depth.get(block.id) ?? 0;
    const bucket = byColumn.get(col) ?? [];
    bucket.push(block.id);
    byColumn.set(col, bucket);
  }

  const kinds = new Map(graph.blocks.map((b) => [b.id, b]));
  const nodes: NodePosition[] = [];
  let maxRow = 0;
  for (const [col, ids] of byColumn) {
    ids.sort();
    ids.forEach((id, row) => {
      const block = kinds.get(id)!;
      nodes.push({
        id,
        kind: block.kind,
        label: block.display_name || id,
        column: col,
        row,
        x: PAD + col * (NODE_W + GAP_X),
        y: PAD + row * (NODE_H + GAP_Y),
      });
      maxRow = Math.max(maxRow, row);
    });
  }
  nodes.sort((a, b) => a.column - b.column || a.row - b.row);

  const columns = Math.max(...nodes.map((n) => n.column)) + 1;
  return {
    nodes,
    byId: new Map(nodes.map((n) => [n.id, n])),
    columns,
    rows: maxRow + 1,
    width: PAD * 2 + columns * NODE_W + (columns - 1) * GAP_X,
    height: PAD * 2 + (maxRow + 1) * NODE_H + maxRow * GAP_Y,
  };
}
