/**
 * Sunburst layout: month -> weekday/weekend -> time-bin -> zone, slice
 * angles proportional to anomaly counts. Pure geometry over the API's
 * hierarchy; counts are never recomputed client-side.
 */
import { Sunburst, SunburstNode } from "./types.js";

export interface Arc {
  path: string[]; // names from the root down to this node
  depth: number; // 1-based ring index
  value: number; // anomaly count under this node
  a0: number; // start angle, radians
  a1: number; // end angle, radians
}

export function nodeValue(node: SunburstNode): number {
  if (node.value !== undefined) return node.value;
  return (node.children ?? []).reduce((acc, c) => acc + nodeValue(c), 0);
}

export function leafSum(root: Sunburst): number {
  return root.children.reduce((acc, c) => acc + nodeValue(c), 0);
}

export function layout(root: Sunburst): Arc[] {
  const total = leafSum(root);
  const arcs: Arc[] = [];
  if (total === 0) return arcs;
  const full = 2 * Math.PI;

  const walk = (nodes: SunburstNode[], path: string[], depth: number, a0: number, a1: number) => {
    let cursor = a0;
    const span = a1 - a0;
    const here = nodes.reduce((acc, c) => acc + nodeValue(c), 0);
    if (here === 0) return;
    for (const node of nodes) {
      const v = nodeValue(node);
      if (v === 0) continue;
      const width = (v / here) * span;
      const arc: Arc = {
        path: [...path, node.name],
        depth,
        value: v,
        a0: cursor,
        a1: cursor + width,
      };
      arcs.push(arc);
      if (node.children?.length) {
        walk(node.children, arc.path, depth + 1, arc.a0, arc.a1);
      }
      cursor += width;
    }
  };
  walk(root.children, [], 1, 0, full);
  return arcs;
}

/** Slice angle must be proportional to its count: angle = 2*pi * value/total. */
export function angleOf(arc: Arc): number {
  return arc.a1 - arc.a0;
}
