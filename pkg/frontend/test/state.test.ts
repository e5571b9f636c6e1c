import { describe, expect, it } from "vitest";

import { DEFAULT_STATE, ViewState, stateFromQuery, stateToQuery } from "../src/state.js";

describe("view state <-> URL query string", () => {
  const cases: ViewState[] = [
    DEFAULT_STATE,
    {
      sources: ["BUS", "CDR"],
      detector: "shesd",
      method: "weighted",
      s: 0.85,
      k: 3,
      r: 2750,
      offset: -1,
      zone: "Z0202",
      date: "2017-06-30",
      bin: 78,
    },
    {
      sources: [],
      detector: "iqr",
      method: "mean",
      s: 0,
      k: 1,
      r: 0,
      offset: 0,
      zone: null,
      date: null,
      bin: null,
    },
  ];

  it("round-trips every view state identically", () => {
    for (const state of cases) {
      const round = stateFromQuery(stateToQuery(state));
      expect(round).toEqual(state);
    }
  });

  it("round-trip is idempotent on the query string too", () => {
    for (const state of cases) {
      const q1 = stateToQuery(state);
      const q2 = stateToQuery(stateFromQuery(q1));
      expect(q2).toBe(q1);
    }
  });

  it("unknown and missing params fall back to defaults", () => {
    const state = stateFromQuery("nonsense=42");
    expect(state).toEqual(DEFAULT_STATE);
  });

  it("out-of-range values are clamped into the slider ranges", () => {
    const state = stateFromQuery("r=99999&s=7&k=0");
    expect(state.r).toBe(4000);
    expect(state.s).toBe(1);
    expect(state.k).toBeGreaterThanOrEqual(1);
  });
});
