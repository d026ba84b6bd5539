/**
 * Tree layout for the topology map: engine position hints win; everything
 * else is placed level by level under the management-station root.
 */

import type { MapNodeDoc } from "./types.js";

export interface PlacedNode {
  node: MapNodeDoc;
  x: number;
  y: number;
}

export interface MapLayout {
  width: number;
  height: number;
  rootX: number;
  rootY: number;
  placed: PlacedNode[];
}

const LEVEL_HEIGHT = 110;
const SLOT_WIDTH = 130;
const MARGIN = 60;

export function layoutMap(rootId: string, nodes: MapNodeDoc[]): MapLayout {
  const byParent = new Map<string, MapNodeDoc[]>();
  for (const node of nodes) {
    const parent = node.parent || rootId;
    const bucket = byParent.get(parent) ?? [];
    bucket.push(node);
    byParent.set(parent, bucket);
  }
  for (const bucket of byParent.values()) {
    bucket.sort((a, b) => a.host_id.localeCompare(b.host_id));
  }

  // depth via BFS from the root
  const depth = new Map<string, number>();
  const order: MapNodeDoc[] = [];
  const queue = [...(byParent.get(rootId) ?? [])];
  for (const n of queue) depth.set(n.host_id, 1);
  while (queue.length) {
    const node = queue.shift()!;
    order.push(node);
    for (const child of byParent.get(node.host_id) ?? []) {
      depth.set(child.host_id, (depth.get(node.host_id) ?? 1) + 1);
      queue.push(child);
    }
  }
  // orphans (parent outside the map) go on level 1
  for (const node of nodes) {
    if (!depth.has(node.host_id)) {
      depth.set(node.host_id, 1);
      order.push(node);
    }
  }

  const perLevelIndex = new Map<number, number>();
  const levelCounts = new Map<number, number>();
  for (const node of order) {
    const d = depth.get(node.host_id)!;
    levelCounts.set(d, (levelCounts.get(d) ?? 0) + 1);
  }
  const maxPerLevel = Math.max(1, ...levelCounts.values());
  const width = Math.max(520, maxPerLevel * SLOT_WIDTH + MARGIN * 2);
  const maxDepth = Math.max(1, ...depth.values());
  const height = (maxDepth + 1) * LEVEL_HEIGHT + MARGIN;

  const placed: PlacedNode[] = [];
  for (const node of order) {
    if (node.position) {
      placed.push({ node, x: node.position[0], y: node.position[1] });
      continue;
    }
    const d = depth.get(node.host_id)!;
    const index = perLevelIndex.get(d) ?? 0;
    perLevelIndex.set(d, index + 1);
    const count = levelCounts.get(d)!;
    const x = (width / (count + 1)) * (index + 1);
    placed.push({ node, x, y: MARGIN + d * LEVEL_HEIGHT });
  }

  return { width, height, rootX: width / 2, rootY: MARGIN, placed };
}
