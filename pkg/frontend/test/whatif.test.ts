import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { DEFAULT_STATE } from "../src/state.js";
import { RecallReadout, sliderRadii, sweepRecall } from "../src/whatif.js";
import { Fused, FusedCell, Recall } from "../src/types.js";
import { fixture, mockFetch } from "./helpers.js";

const sweep = fixture<{ R_m: number; recall: number }[]>("recall_sweep_majority.json");
const fusedNoCheckin = fixture<Fused>("fused_no_checkin.json");
const cliFused = fixture<
  { zone_id: string; date: string; bin_of_day: number; votes: number }[]
>("cli_fused_no_checkin.json");

function recallApi(): ApiClient {
  const byR = new Map(sweep.map((p) => [p.R_m, p.recall]));
  return new ApiClient(
    "",
    mockFetch({
      "/recall": (url) => {
        const r = Number(url.searchParams.get("R"));
        const body: Recall = {
          label: "majority",
          offset_hours: Number(url.searchParams.get("offset")),
          R_m: r,
          recall: byR.get(r) ?? 0,
          version: 1,
        };
        return body;
      },
    }),
  );
}

describe("what-if recall readout", () => {
  it("R slider sweep from 0 to 4000 m renders a non-decreasing readout", async () => {
    const state = { ...DEFAULT_STATE, method: "majority" as const, s: 0.6, k: 2 };
    const readout = await sweepRecall(recallApi(), state, sliderRadii());
    const curve = readout.curve();
    expect(curve).toHaveLength(17);
    for (let i = 1; i < curve.length; i++) {
      expect(curve[i].recall).toBeGreaterThanOrEqual(curve[i - 1].recall);
    }
    expect(curve[0].r).toBe(0);
    expect(curve.at(-1)!.r).toBe(4000);
  });

  it("every displayed number equals the API response for that radius", async () => {
    const state = { ...DEFAULT_STATE, method: "majority" as const, s: 0.6, k: 2 };
    const readout = await sweepRecall(recallApi(), state, sliderRadii());
    for (const { R_m, recall } of sweep) {
      expect(readout.at(R_m)).toBe(recall);
    }
  });

  it("stale snapshot versions are discarded", () => {
    const readout = new RecallReadout("sig");
    const mk = (version: number, r: number, recall: number): Recall => ({
      label: "majority",
      offset_hours: 0,
      R_m: r,
      recall,
      version,
    });
    readout.absorb(mk(2, 0, 0.1));
    readout.absorb(mk(1, 250, 0.9)); // stale: ignored
    readout.absorb(mk(2, 250, 0.2));
    expect(readout.curve()).toEqual([
      { r: 0, recall: 0.1 },
      { r: 250, recall: 0.2 },
    ]);
  });

  it("a newer snapshot version resets the partial sweep", () => {
    const readout = new RecallReadout("sig");
    const mk = (version: number, r: number, recall: number): Recall => ({
      label: "majority",
      offset_hours: 0,
      R_m: r,
      recall,
      version,
    });
    readout.absorb(mk(1, 0, 0.5));
    readout.absorb(mk(2, 250, 0.7));
    expect(readout.curve()).toEqual([{ r: 250, recall: 0.7 }]);
  });
});

describe("weighted panel identity", () => {
  it("weight (1,0,0) matches the single-source curve for that source", () => {
    const weighted = fixture<{ R_m: number; recall: number }[]>(
      "recall_sweep_weighted_cdr_only.json",
    );
    const single = fixture<{ R_m: number; recall: number }[]>(
      "recall_sweep_cdr_single.json",
    );
    expect(weighted).toEqual(single);
  });

  it("normalizes slider weights before querying", async () => {
    const { encodeWeights } = await import("../src/api.js");
    const encoded = encodeWeights({ CDR: 2, CHECKIN: 1, TAXI_DROPOFF: 1 });
    const parts = Object.fromEntries(
      encoded.split(",").map((p) => p.split(":") as [string, string]),
    );
    expect(Number(parts.CDR)).toBeCloseTo(0.5, 12);
    expect(Number(parts.CHECKIN)).toBeCloseTo(0.25, 12);
    const total = Object.values(parts).reduce((a, v) => a + Number(v), 0);
    expect(total).toBeCloseTo(1, 9);
  });
});

describe("data layer toggles (disable one source)", () => {
  it("re-rendered fused decisions match a fresh pipeline run on the same config", () => {
    // fused_no_checkin.json was recorded after PUT /config/sources dropped
    // CHECKIN; cli_fused_no_checkin.json is the pipeline's own fusion for the
    // same source set and thresholds
    const rendered = new Set(
      fusedNoCheckin.cells.map(
        (c: FusedCell) => `${c.zone_id}|${c.date}|${c.bin_of_day}|${c.votes}`,
      ),
    );
    const freshRun = new Set(
      cliFused.map((c) => `${c.zone_id}|${c.date}|${c.bin_of_day}|${c.votes}`),
    );
    expect(rendered).toEqual(freshRun);
    expect(fusedNoCheckin.sources).toEqual(["CDR", "TAXI_DROPOFF"]);
  });

  it("PUT /config/sources surfaces 409 as a retryable condition", async () => {
    const api = new ApiClient(
      "",
      mockFetch({
        "/config/sources": () => new Response("busy", { status: 409 }),
      }),
    );
    await expect(api.setSources(["CDR"])).rejects.toThrow(/re-fusion already in progress/);
  });
});
