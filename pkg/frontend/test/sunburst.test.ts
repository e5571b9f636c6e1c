import { describe, expect, it } from "vitest";

import { angleOf, layout, leafSum, nodeValue } from "../src/sunburst.js";
import { Anomaly, Sunburst } from "../src/types.js";
import { fixture } from "./helpers.js";

const burst = fixture<Sunburst>("sunburst.json");
const anomalies = fixture<Anomaly[]>("anomalies_zscore.json");

describe("sunburst layout against the recorded snapshot", () => {
  it("leaf counts sum to the API total and to the anomaly list length", () => {
    expect(leafSum(burst)).toBe(burst.total);
    expect(burst.total).toBe(anomalies.length);
  });

  it("slice angles are proportional to counts (1px tolerance at r=210)", () => {
    const arcs = layout(burst);
    const radius = 210; // outer ring radius used by the view
    for (const arc of arcs.filter((a) => a.depth === 1)) {
      const expected = (2 * Math.PI * arc.value) / burst.total;
      const arcLenError = Math.abs(angleOf(arc) - expected) * radius;
      expect(arcLenError).toBeLessThan(1.0);
    }
  });

  it("rings follow month -> daytype -> bin -> zone", () => {
    const arcs = layout(burst);
    const byDepth = (d: number) => arcs.filter((a) => a.depth === d);
    expect(byDepth(1).every((a) => /^\d{4}-\d{2}$/.test(a.path[0]))).toBe(true);
    expect(byDepth(2).every((a) => ["WEEKDAY", "WEEKEND"].includes(a.path[1]))).toBe(true);
    expect(byDepth(3).every((a) => a.path[2].startsWith("bin "))).toBe(true);
    expect(byDepth(4).every((a) => a.path[3].startsWith("Z"))).toBe(true);
  });

  it("children partition their parent's angular span exactly", () => {
    const arcs = layout(burst);
    for (const parent of arcs.filter((a) => a.depth < 4)) {
      const children = arcs.filter(
        (a) =>
          a.depth === parent.depth + 1 &&
          a.path.slice(0, parent.depth).join("/") === parent.path.join("/"),
      );
      if (children.length === 0) continue;
      const span = children.reduce((acc, c) => acc + angleOf(c), 0);
      expect(span).toBeCloseTo(angleOf(parent), 9);
    }
  });

  it("a leaf's tooltip data (zone, count) matches the anomaly list", () => {
    const arcs = layout(burst);
    const leaves = arcs.filter((a) => a.depth === 4);
    for (const leaf of leaves.slice(0, 25)) {
      const [month, daytype, binLabel, zone] = leaf.path;
      const bin = Number(binLabel.replace("bin ", ""));
      const matching = anomalies.filter(
        (an) =>
          an.location_id === zone &&
          an.bin_of_day === bin &&
          an.date.startsWith(month),
      );
      expect(matching.length).toBeGreaterThanOrEqual(leaf.value);
    }
  });

  it("single-anomaly tree yields one full-depth path", () => {
    const single: Sunburst = {
      name: "ZSCORE",
      total: 1,
      children: [
        {
          name: "2017-06",
          children: [
            {
              name: "WEEKDAY",
              children: [{ name: "bin 77", children: [{ name: "Z0202", value: 1 }] }],
            },
          ],
        },
      ],
    };
    const arcs = layout(single);
    expect(arcs).toHaveLength(4);
    for (const arc of arcs) {
      expect(angleOf(arc)).toBeCloseTo(2 * Math.PI, 12);
    }
    expect(nodeValue(single.children[0])).toBe(1);
  });
});
